// Acceptance checks: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "assembly_oracle.hpp"
#include "fixtures.hpp"
#include "sdrkit/administration.hpp"
#include "sdrkit/constraints.hpp"
#include "sdrkit/desirability.hpp"
#include "sdrkit/irt_fit.hpp"
#include "sdrkit/persona.hpp"
#include "sdrkit/pipeline.hpp"
#include "sdrkit/prompts.hpp"
#include "sdrkit/report.hpp"
#include "sdrkit/sdr_metrics.hpp"
#include "sdrkit/simulator.hpp"
#include "sdrkit/stats.hpp"

using namespace sdrkit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Simulated honest sample shared by the recovery and ipsativity checks.
struct Sample {
  std::vector<TraitVector> z;
  std::vector<ResponseSet> sets;
  ModelData data;
};

Sample simulate_sample(Format f, int n, std::uint64_t seed) {
  const auto pool = fixtures::table3_pool();
  const auto inv = fixtures::table3_inventory();
  const auto params = default_sim_params(inv, pool, seed * 31 + 3);
  Sample s;
  s.z = sample_trait_vectors(static_cast<std::size_t>(n), default_covariance(), seed);
  for (int i = 0; i < n; ++i) {
    Persona p;
    p.id = persona_id(static_cast<std::size_t>(i));
    p.z = s.z[static_cast<std::size_t>(i)];
    s.sets.push_back(simulate_response_set("sim", p, inv, params, f, Condition::Honest, {0.0, seed * 17 + 11}));
  }
  s.data = build_model_data(model_for(f), s.sets, inv, pool);
  return s;
}

Outcome inventory_validation() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pool = fixtures::table3_pool();
  const auto inv = fixtures::table3_inventory();
  const auto rep = validate_inventory(inv, pool, AssemblyConfig::balanced(30));
  const double secs = seconds_since(t0);
  bool ok = rep.all_pass() && std::fabs(rep.max_gap - 0.18) <= 0.005 && std::fabs(rep.mean_gap - 0.03) <= 0.005;
  for (int c : rep.trait_counts) ok = ok && c == 12;
  for (int c : rep.trait_pair_counts) ok = ok && c == 3;
  ok = ok && secs < 1.0;
  return {ok, "max gap " + fmt("%.3f", rep.max_gap) + ", mean gap " + fmt("%.3f", rep.mean_gap) +
                  ", constraints " + (rep.all_pass() ? "all satisfied" : "violated") + ", " + fmt("%.3f", secs) + " s"};
}

Outcome optimizer_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  int feasible = 0, agree = 0;
  for (std::uint64_t seed = 1; feasible < 200 && seed < 20000; ++seed) {
    const auto cmp = oracle::compare(oracle::random_instance(seed));
    if (cmp.solver != oracle::Outcome::Solved && cmp.brute != oracle::Outcome::Solved) continue;
    ++feasible;
    if (cmp.agree()) ++agree;
  }
  const double secs = seconds_since(t0);
  return {feasible == 200 && agree == feasible && secs < 120.0,
          std::to_string(agree) + "/" + std::to_string(feasible) + " feasible instances match on (max gap, sse), " +
              fmt("%.1f", secs) + " s"};
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  long coords = 0;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd(0.0, 0.7);
  for (Format f : {Format::Likert, Format::Gfc}) {
    const auto s = simulate_sample(f, 6, 5);
    const int size = ParamLayout(s.data).size();
    for (int point = 0; point < 50; ++point) {
      Eigen::VectorXd x(size);
      for (int i = 0; i < size; ++i) x(i) = nd(rng);
      Eigen::VectorXd g;
      log_posterior(s.data, x, &g);
      const double h = 1e-5;
      for (int i = 0; i < size; ++i) {
        Eigen::VectorXd up = x, dn = x;
        up(i) += h;
        dn(i) -= h;
        const double fd = (log_posterior(s.data, up) - log_posterior(s.data, dn)) / (2 * h);
        const double rel = std::fabs(g(i) - fd) / std::max({1.0, std::fabs(g(i)), std::fabs(fd)});
        worst = std::max(worst, rel);
        ++coords;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-5 && secs < 30.0, "max relative error " + fmt("%.2e", worst) + " over " + std::to_string(coords) +
                                           " coordinates at 100 points, " + fmt("%.1f", secs) + " s"};
}

Outcome kernel_identities() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 2.0);
  std::uniform_real_distribution<double> gap(0.05, 1.5);
  double sum_err = 0.0, form_err = 0.0;
  bool antisym = true;
  const auto pool = fixtures::table3_pool();
  const auto inv = fixtures::table3_inventory();
  const auto params = default_sim_params(inv, pool, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    Thresholds k{};
    k[0] = nd(rng);
    for (int j = 1; j < 6; ++j) k[static_cast<std::size_t>(j)] = k[static_cast<std::size_t>(j - 1)] + gap(rng);
    const double eta = nd(rng);
    double sum = 0.0;
    for (double p : category_probs(eta, k)) sum += p;
    sum_err = std::max(sum_err, std::fabs(sum - 1.0));
    for (int c = 1; c <= 7; ++c)
      form_err = std::max(form_err, std::fabs(survivor(eta, k, c) - survivor_cutpoint_form(eta, k, c)));
    TraitVector theta{};
    for (auto& t : theta) t = nd(rng);
    const auto& b = inv.blocks()[static_cast<std::size_t>(trial) % inv.block_count()];
    const auto& l = params.item(b.left);
    const auto& r = params.item(b.right);
    antisym = antisym && gfc_eta(theta, l, r) == -gfc_eta(theta, r, l);
  }
  return {sum_err <= 1e-12 && form_err <= 1e-12 && antisym,
          "max |sum - 1| " + fmt("%.1e", sum_err) + ", max form difference " + fmt("%.1e", form_err) +
              ", antisymmetry " + (antisym ? "exact" : "broken")};
}

struct RecoveryRun {
  std::array<double, kTraitCount> likert{}, gfc{};
  double seconds = 0.0;
  std::vector<double> gfc_theta_sums;  // first seed
};

RecoveryRun recovery_runs() {
  RecoveryRun out;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (Format f : {Format::Likert, Format::Gfc}) {
      const auto s = simulate_sample(f, 400, seed);
      MapOptions o;
      o.items = f == Format::Gfc ? ItemEstimation::Marginal : ItemEstimation::Joint;
      const auto fit = fit_map(s.data, o);
      Eigen::MatrixXd z(400, 5);
      for (int i = 0; i < 400; ++i)
        for (int t = 0; t < 5; ++t) z(i, t) = s.z[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
      const auto rec = recovery(fit.params.theta, z);
      auto& acc = f == Format::Gfc ? out.gfc : out.likert;
      for (std::size_t t = 0; t < kTraitCount; ++t) acc[t] += rec.r[t].value.value_or(0.0) / 5.0;
      if (f == Format::Gfc && seed == 1)
        for (int i = 0; i < 400; ++i) out.gfc_theta_sums.push_back(fit.params.theta.row(i).sum());
    }
  }
  out.seconds = seconds_since(t0);
  return out;
}

Outcome parameter_recovery(const RecoveryRun& run) {
  bool ok = run.seconds < 600.0;
  std::string lik, gfc;
  for (std::size_t t = 0; t < kTraitCount; ++t) {
    ok = ok && run.likert[t] >= 0.8 && run.gfc[t] >= 0.6;
    lik += (t ? " " : "") + fmt("%.3f", run.likert[t]);
    gfc += (t ? " " : "") + fmt("%.3f", run.gfc[t]);
  }
  return {ok, "mean r over 5 seeds (A C E N O): Likert " + lik + "; GFC " + gfc + "; " + fmt("%.0f", run.seconds) + " s"};
}

json default_pipeline_json() { return json::parse(slurp(fixtures::data_dir() / "pipeline.json")); }

fs::path pipeline_work(const fs::path& root, int k) { return root / ("seed" + std::to_string(k)); }

Outcome end_to_end_sdr(const fs::path& root) {
  const auto t0 = std::chrono::steady_clock::now();
  int likert_positive = 0, gfc_smaller = 0, runs = 0;
  std::string shown;
  for (int k = 0; k < 10; ++k) {
    auto j = default_pipeline_json();
    j["seed"] = j.at("seed").get<std::uint64_t>() + static_cast<std::uint64_t>(k);
    j["paths"]["work_dir"] = pipeline_work(root, k).string();
    const auto cfg = parse_pipeline_config(j, fixtures::data_dir());
    if (cfg.personas != 50 || cfg.respondents.size() != 1 || cfg.respondents[0].fake_good_delta != 1.0 ||
        !cfg.respondents[0].matched_block_discrimination)
      return {false, "default pipeline config is not the 50-persona, delta 1, matched-discrimination design"};
    const auto res = run_pipeline(cfg);
    if (res.exit_code != kExitOk) return {false, "pipeline failed: " + res.message};
    ++runs;
    const auto rep = report_from_json(json::parse(slurp(pipeline_work(root, k) / "reports" / "report.json")));
    const FormatReport *lik = nullptr, *gfc = nullptr;
    for (const auto& e : rep.entries) (e.format == "likert" ? lik : gfc) = &e;
    if (!lik || !gfc) return {false, "report lacks a format"};
    bool all_pos = true;
    for (const auto& t : lik->effect.traits) all_pos = all_pos && t.d_tilde.value && *t.d_tilde.value > 0.0;
    if (all_pos) ++likert_positive;
    const auto& la = lik->effect.aggregate.value;
    const auto& ga = gfc->effect.aggregate.value;
    if (la && ga && std::fabs(*ga) < std::fabs(*la)) ++gfc_smaller;
    if (k == 0 && la && ga) shown = "seed 0 aggregate Likert " + fmt("%.3f", *la) + " vs GFC " + fmt("%.3f", *ga) + "; ";
  }
  return {likert_positive == 10 && gfc_smaller >= 9,
          shown + "Likert positive on all traits in " + std::to_string(likert_positive) + "/10 seeds; |GFC| < |Likert| in " +
              std::to_string(gfc_smaller) + "/10; " + fmt("%.0f", seconds_since(t0)) + " s"};
}

Outcome hmc_gate(const fs::path& root) {
  // The standard dataset: Likert responses of the default pipeline run.
  const auto work = pipeline_work(root, 0);
  const auto t0 = std::chrono::steady_clock::now();
  const auto pool = load_item_pool(work / "pool.tsv");
  const auto inv = load_inventory(work / "inventory.tsv");
  const auto data = build_model_data(ModelKind::Grm, load_response_sets(work / "runs" / "sim" / "responses.tsv"), inv, pool);
  const auto map = load_artifact(work / "fits" / "sim_likert.json");
  HmcOptions o;  // 4 chains x (200 warmup + 500 draws), target acceptance 0.95
  const auto post = fit_hmc(data, o);
  const auto diag = summarize_diagnostics(post);
  std::map<std::tuple<std::string, std::string, int>, int> row_of;
  for (std::size_t i = 0; i < map.rows.size(); ++i)
    row_of[{map.rows[i].respondent, map.rows[i].persona, static_cast<int>(map.rows[i].condition)}] = static_cast<int>(i);
  std::vector<double> a, b;
  for (int i = 0; i < data.n_rows(); ++i) {
    const auto& key = data.rows[static_cast<std::size_t>(i)];
    const int m = row_of.at({key.respondent, key.persona, static_cast<int>(key.condition)});
    for (int t = 0; t < 5; ++t) {
      a.push_back(post.theta_mean(i, t));
      b.push_back(map.theta(m, t));
    }
  }
  const double r = stats::pearson(a, b);
  const double secs = seconds_since(t0);
  return {diag.share_rhat_below >= 0.99 && r > 0.95 && secs < 1800.0,
          std::to_string(data.n_rows()) + " rows; R-hat < 1.01 for " + fmt("%.2f", 100.0 * diag.share_rhat_below) +
              "% of parameters (max " + fmt("%.4f", diag.max_rhat) + "), " + std::to_string(post.total_divergences()) +
              " divergences, corr(HMC, MAP) " + fmt("%.4f", r) + ", " + fmt("%.0f", secs) + " s"};
}

Outcome metric_truths() {
  bool ok = direction_correct(1.0, Trait::N) == -1.0 && direction_correct(1.0, Trait::A) == 1.0;
  ok = ok && classify_sdr(0.2) == SdrZone::Recommended && classify_sdr(0.2 + 1e-12) == SdrZone::Caution;
  ok = ok && classify_sdr(0.5) == SdrZone::Caution && classify_sdr(0.5 + 1e-12) == SdrZone::Avoid;
  ok = ok && classify_sdr(-0.3) == SdrZone::Caution;
  ok = ok && classify_recovery(0.70) == RecoveryZone::Strong && classify_recovery(0.70 - 1e-12) == RecoveryZone::Acceptable;
  ok = ok && classify_recovery(0.50) == RecoveryZone::Acceptable &&
       classify_recovery(0.50 - 1e-12) == RecoveryZone::Insufficient;
  bool raised = false;
  try {
    const std::vector<double> flat{0.4, 0.4, 0.4};
    cohens_dz(flat);
  } catch (const UndefinedStatistic&) {
    raised = true;
  }
  const std::vector<double> d{1.0, 2.0, 3.0};
  ok = ok && raised && std::fabs(cohens_dz(d) - 2.0) < 1e-12;
  return {ok, std::string("g_N flip, zone boundaries 0.2/0.5 and 0.50/0.70, zero-variance d_z ") +
                  (raised ? "raises" : "does not raise")};
}

Outcome agreement_statistics() {
  std::string values;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> u(0.0, 2.0), e(0.0, 1.0);
    Eigen::MatrixXd x(100, 30);
    for (int j = 0; j < 100; ++j) {
      const double uj = u(rng);
      for (int r = 0; r < 30; ++r) x(j, r) = uj + e(rng);
    }
    const double icc = icc_absolute_agreement(x).single;
    ok = ok && std::fabs(icc - 0.8) <= 0.05;
    values += (seed > 1 ? " " : "") + fmt("%.3f", icc);
  }
  Eigen::MatrixXd same(100, 30);
  for (int j = 0; j < 100; ++j) same.row(j).setConstant(j % 9 + 1.0);
  const double one = icc_absolute_agreement(same).single;
  ok = ok && std::fabs(one - 1.0) < 1e-12;
  return {ok, "ICC(A,1) at 4:1 over 5 datasets: " + values + "; identical replications " + fmt("%.6f", one)};
}

Outcome ipsativity(const RecoveryRun& run) {
  const auto pool = fixtures::table3_pool();
  const auto inv = fixtures::table3_inventory();
  const auto s = simulate_sample(Format::Gfc, 400, 1);
  bool constant = true;
  double first = -1.0;
  for (const auto& rs : s.sets) {
    double total = 0.0;
    for (double v : naive_gfc_scores(rs, inv, pool)) total += v;
    if (first < 0) first = total;
    constant = constant && total == first;
  }
  const double var = stats::sample_variance(run.gfc_theta_sums);
  return {constant && var > 0.01, "naive totals " + std::string(constant ? "all equal " : "vary, first ") +
                                      fmt("%.0f", first) + "; variance of theta-hat sums " + fmt("%.4f", var)};
}

class JunkProvider : public Provider {
 public:
  std::string id() const override { return "junk"; }
  ProviderReply complete(const ProviderRequest&) override {
    ++calls;
    return {"I would pick 5", 200, 0.0};
  }
  int calls = 0;
};

Outcome protocol_fidelity() {
  const fs::path golden = fs::path(SDRKIT_TEST_DIR) / "golden";
  auto with_persona = [](std::string text, const std::string& persona) {
    const std::string key = "<PERSONA_PREFIX>";
    text.replace(text.find(key), key.size(), persona);
    return text;
  };
  const auto persona = slurp(golden / "persona.txt");
  const auto likert = render_likert_prompt(persona, Condition::Honest, "Am interested in people.");
  const auto gfc = render_gfc_prompt(persona, Condition::FakeGood, "Get stressed out easily.", "Have a vivid imagination.");
  const auto rating =
      render_rating_prompt({"Am interested in people.", "Get stressed out easily.", "Have a vivid imagination."});
  bool ok = likert == with_persona(slurp(golden / "likert_honest.txt"), persona) &&
            gfc == with_persona(slurp(golden / "gfc_fake_good.txt"), persona) && rating == slurp(golden / "rating_3.txt");
  const bool bytes = ok;
  for (const auto* p : {&likert, &gfc})
    ok = ok && p->find("Return ONLY one integer (1-7).") != std::string::npos && p->find("++++") != std::string::npos;

  auto pool = std::make_shared<const ItemPool>(fixtures::table3_pool());
  auto inv = std::make_shared<const Inventory>(fixtures::table3_inventory());
  Persona who;
  who.id = "P0001";
  who.description = persona;
  auto plan = make_session_plan("junk", who, inv, pool, Format::Likert, Condition::Honest, 5);
  plan.presentation_order.resize(1);
  JunkProvider junk;
  RetryPolicy policy;
  policy.sleep = [](double) {};
  run_session(plan, junk, policy);
  ok = ok && junk.calls == 4;

  bool fixed = true;
  for (Format f : {Format::Likert, Format::Gfc}) {
    const auto h = make_session_plan("m", who, inv, pool, f, Condition::Honest, 5);
    const auto g = make_session_plan("m", who, inv, pool, f, Condition::FakeGood, 5);
    fixed = fixed && h.presentation_order == g.presentation_order && h.side_flipped == g.side_flipped;
  }
  ok = ok && fixed;
  return {ok, std::string("golden prompts ") + (bytes ? "match" : "differ") + "; " + std::to_string(junk.calls) +
                  " calls for an always-invalid reply; order and sides " + (fixed ? "fixed" : "vary") +
                  " across conditions"};
}

}  // namespace

int main() {
  fixtures::TempDir root("acceptance");
  int failures = 0;
  auto report = [&](int n, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name << "): " << o.detail << std::endl;
  };

  report(1, "inventory validation", inventory_validation);
  report(2, "optimizer matches exhaustive oracle", optimizer_oracle);
  report(3, "gradient correctness", gradient_correctness);
  report(4, "ordinal kernel identities", kernel_identities);
  RecoveryRun run;
  report(5, "parameter recovery", [&] {
    run = recovery_runs();
    return parameter_recovery(run);
  });
  report(6, "end-to-end SDR contrast", [&] { return end_to_end_sdr(root.path()); });
  report(7, "HMC diagnostics gate", [&] { return hmc_gate(root.path()); });
  report(8, "metric unit truths", metric_truths);
  report(9, "agreement statistics", agreement_statistics);
  report(10, "ipsativity", [&] {
    if (run.gfc_theta_sums.empty()) return Outcome{false, "no GFC fit available"};
    return ipsativity(run);
  });
  report(11, "protocol fidelity", protocol_fidelity);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
