#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdrkit/administration.hpp"
#include "sdrkit/assembly.hpp"
#include "sdrkit/desirability.hpp"
#include "sdrkit/error.hpp"
#include "sdrkit/http_provider.hpp"
#include "sdrkit/inventory_io.hpp"
#include "sdrkit/persona.hpp"
#include "sdrkit/pipeline.hpp"
#include "sdrkit/report.hpp"
#include "sdrkit/simulator.hpp"

using namespace sdrkit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ItemPool read_pool(const std::string& pool, const std::string& exclusions, const std::string& ratings) {
  ItemPool p = load_item_pool(fs::path(pool), exclusions.empty() ? std::vector<std::string>{} : load_exclusions(exclusions));
  if (ratings.empty()) return p;
  std::vector<std::string> ids;
  for (const auto& item : p.items()) ids.push_back(item.id);
  return p.with_desirability(aggregate_ratings(load_rating_dataset(fs::path(ratings)), ids).scores());
}

std::ofstream open_out(const std::string& path) {
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graded forced-choice inventories and socially desirable responding analysis"};
  app.require_subcommand(1);
  int exit_code = 0;

  // rate-plan
  auto* rate = app.add_subcommand("rate-plan", "Write desirability rating prompts as JSON lines");
  std::string rp_pool, rp_excl, rp_out;
  std::vector<std::string> rp_raters{"rater"};
  int rp_reps = 30, rp_block = 25;
  std::uint64_t rp_seed = 1;
  rate->add_option("--pool", rp_pool, "Item pool TSV")->required();
  rate->add_option("--exclusions", rp_excl, "Excluded item ids");
  rate->add_option("--raters", rp_raters, "Rater ids")->delimiter(',');
  rate->add_option("--replications", rp_reps, "Replications per rater");
  rate->add_option("--block-size", rp_block, "Statements per prompt");
  rate->add_option("--seed", rp_seed, "Shuffle seed");
  rate->add_option("--out", rp_out, "Output JSONL")->required();
  rate->callback([&] {
    const auto pool = read_pool(rp_pool, rp_excl, "");
    auto out = open_out(rp_out);
    for (const auto& p : build_rating_plan(pool, rp_raters, rp_reps, rp_block, rp_seed))
      out << json{{"rater", p.rater}, {"replication", p.replication}, {"block", p.block}, {"items", p.item_ids}, {"text", p.text}}.dump()
          << '\n';
  });

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "Aggregate desirability ratings and report agreement");
  std::string ag_ratings, ag_out, ag_stats;
  std::uint64_t ag_seed = 1;
  agg->add_option("--ratings", ag_ratings, "Ratings TSV (item, rater, replication, value)")->required();
  agg->add_option("--out", ag_out, "Desirability TSV")->required();
  agg->add_option("--agreement", ag_stats, "Agreement statistics JSON");
  agg->add_option("--seed", ag_seed, "Split-half seed");
  agg->callback([&] {
    const auto ds = load_rating_dataset(fs::path(ag_ratings));
    const auto table = aggregate_ratings(ds);
    auto out = open_out(ag_out);
    out << "item\tmean\tn\n";
    for (const auto& [id, d] : table.items) out << id << '\t' << format_real(d.mean) << '\t' << d.n << '\n';
    if (!ag_stats.empty()) {
      json j = json::object();
      for (const auto& rater : ds.raters()) {
        if (ds.replications(rater).size() < 2) continue;
        const auto st = agreement_stats(ds, rater, 200, ag_seed);
        j[rater] = {{"k", st.k},
                    {"items_used", st.items_used},
                    {"items_dropped", st.items_dropped},
                    {"icc_a1", st.icc_a1},
                    {"icc_ak", st.icc_ak},
                    {"mean_pairwise_r", st.mean_pairwise_r},
                    {"split_half_r", st.split_half_r},
                    {"split_half_interval", {st.split_half_interval.lower, st.split_half_interval.upper}}};
      }
      open_out(ag_stats) << j.dump(2) << '\n';
    }
  });

  // assemble
  auto* asmb = app.add_subcommand("assemble", "Select desirability-matched blocks, or validate an inventory");
  std::string as_pool, as_excl, as_ratings, as_out, as_validate;
  int as_pairs = 30;
  double as_time = 900.0;
  asmb->add_option("--pool", as_pool, "Item pool TSV")->required();
  asmb->add_option("--exclusions", as_excl, "Excluded item ids");
  asmb->add_option("--ratings", as_ratings, "Ratings TSV overriding the pool's desirability column");
  asmb->add_option("--pairs", as_pairs, "Number of blocks (multiple of 10)");
  asmb->add_option("--time-budget", as_time, "Solver time budget in seconds");
  asmb->add_option("--out", as_out, "Inventory TSV");
  asmb->add_option("--validate", as_validate, "Validate this inventory instead of assembling");
  asmb->callback([&] {
    const auto pool = read_pool(as_pool, as_excl, as_ratings);
    auto cfg = AssemblyConfig::balanced(as_pairs);
    cfg.time_budget_seconds = as_time;
    Inventory inv;
    if (!as_validate.empty()) {
      inv = load_inventory(fs::path(as_validate));
    } else {
      const auto sol = assemble(pool, cfg);
      inv = sol.inventory;
      std::cout << "m* " << format_real(sol.m_star) << "  sse " << format_real(sol.sse) << "  proof " << to_string(sol.proof) << '\n';
      if (!as_out.empty()) {
        auto out = open_out(as_out);
        save_inventory(inv, out);
      }
    }
    const auto rep = validate_inventory(inv, pool, cfg);
    for (const auto& c : rep.checks) std::cout << (c.pass ? "ok   " : "FAIL ") << c.family << "  " << c.detail << '\n';
    std::cout << "max gap " << format_number(rep.max_gap) << "  mean gap " << format_number(rep.mean_gap) << '\n';
    if (!rep.all_pass()) exit_code = 3;
  });

  // personas
  auto* pers = app.add_subcommand("personas", "Sample personas from the trait covariance");
  std::string pe_cov, pe_lex, pe_out;
  int pe_count = 50;
  std::uint64_t pe_seed = 1;
  pers->add_option("--count", pe_count, "Number of personas");
  pers->add_option("--seed", pe_seed, "Seed");
  pers->add_option("--covariance", pe_cov, "Covariance JSON");
  pers->add_option("--lexicon", pe_lex, "Lexicon JSON");
  pers->add_option("--out", pe_out, "Personas JSON")->required();
  pers->callback([&] {
    const auto cov = pe_cov.empty() ? default_covariance() : load_covariance(pe_cov);
    const auto lex = pe_lex.empty() ? default_lexicon() : load_lexicon(pe_lex);
    save_personas(sample_personas(static_cast<std::size_t>(pe_count), cov, pe_seed, lex), pe_out);
  });

  // administer
  auto* adm = app.add_subcommand("administer", "Administer questionnaires to one respondent");
  std::string ad_pool, ad_inv, ad_pers, ad_id = "sim", ad_out, ad_manifest, ad_base_url, ad_model, ad_token_env = "SDRKIT_API_TOKEN";
  std::vector<std::string> ad_formats{"likert", "gfc"}, ad_conditions{"honest", "fake_good"};
  std::uint64_t ad_seed = 1, ad_sim_seed = 1;
  double ad_delta = 1.0;
  bool ad_matched = false;
  int ad_parallel = 1;
  adm->add_option("--pool", ad_pool, "Rated item pool TSV")->required();
  adm->add_option("--inventory", ad_inv, "Inventory TSV")->required();
  adm->add_option("--personas", ad_pers, "Personas JSON")->required();
  adm->add_option("--respondent", ad_id, "Respondent id");
  adm->add_option("--formats", ad_formats, "Formats")->delimiter(',');
  adm->add_option("--conditions", ad_conditions, "Conditions")->delimiter(',');
  adm->add_option("--seed", ad_seed, "Order and side seed");
  adm->add_option("--sim-seed", ad_sim_seed, "Simulator seed");
  adm->add_option("--delta", ad_delta, "Simulator fake-good shift");
  adm->add_flag("--matched", ad_matched, "Simulator: both statements of a block share a_plus");
  adm->add_option("--base-url", ad_base_url, "HTTP endpoint; omit for the simulator");
  adm->add_option("--model", ad_model, "HTTP model name");
  adm->add_option("--token-env", ad_token_env, "Environment variable holding the token");
  adm->add_option("--parallel", ad_parallel, "Concurrent sessions");
  adm->add_option("--out", ad_out, "Responses TSV")->required();
  adm->add_option("--manifest", ad_manifest, "Run manifest JSON");
  adm->callback([&] {
    const auto pool = std::make_shared<const ItemPool>(load_item_pool(fs::path(ad_pool)));
    const auto inv = std::make_shared<const Inventory>(load_inventory(fs::path(ad_inv)));
    const auto personas = load_personas(ad_pers);
    std::unique_ptr<Provider> provider;
    if (ad_base_url.empty()) {
      std::map<std::string, TraitVector> zs;
      for (const auto& p : personas) zs[p.id] = p.z;
      SimDefaults d;
      d.matched_block_discrimination = ad_matched;
      provider = std::make_unique<SimProvider>(ad_id, zs, *inv, default_sim_params(*inv, *pool, ad_sim_seed, d),
                                               SimSpec{ad_delta, ad_sim_seed});
    } else {
      HttpProviderConfig h;
      h.base_url = ad_base_url;
      h.model = ad_model;
      h.token_env = ad_token_env;
      provider = std::make_unique<HttpProvider>(h);
    }
    std::vector<SessionPlan> plans;
    for (const auto& p : personas)
      for (const auto& f : ad_formats)
        for (const auto& c : ad_conditions)
          plans.push_back(make_session_plan(ad_id, p, inv, pool, parse_format(f), parse_condition(c), ad_seed));
    RunManifest m;
    m.run_id = ad_id;
    m.model = ad_base_url.empty() ? "sim" : ad_model;
    m.seeds = {{"administer", ad_seed}, {"simulator", ad_sim_seed}};
    m.started = utc_timestamp();
    const auto results = run_sessions(plans, *provider, {}, ad_parallel);
    m.finished = utc_timestamp();
    std::vector<ResponseSet> sets;
    int failed = 0;
    for (const auto& r : results) {
      m.add(r);
      sets.push_back(r.responses);
      failed += r.failure.empty() ? 0 : 1;
    }
    auto out = open_out(ad_out);
    save_response_sets(sets, out);
    if (!ad_manifest.empty()) open_out(ad_manifest) << to_json(m).dump(2) << '\n';
    std::cout << results.size() << " sessions, " << failed << " failed\n";
    if (failed > 0) exit_code = 3;
  });

  // fit
  auto* fit = app.add_subcommand("fit", "Fit the IRT model for one format");
  std::string fi_pool, fi_inv, fi_resp, fi_format = "likert", fi_backend = "map", fi_items, fi_out;
  std::uint64_t fi_seed = 1;
  fit->add_option("--pool", fi_pool, "Rated item pool TSV")->required();
  fit->add_option("--inventory", fi_inv, "Inventory TSV")->required();
  fit->add_option("--responses", fi_resp, "Responses TSV")->required();
  fit->add_option("--format", fi_format, "likert or gfc");
  fit->add_option("--backend", fi_backend, "map or hmc")->check(CLI::IsMember({"map", "hmc"}));
  fit->add_option("--items", fi_items, "Item estimation for map: joint or marginal")->check(CLI::IsMember({"joint", "marginal"}));
  fit->add_option("--seed", fi_seed, "Seed");
  fit->add_option("--out", fi_out, "Fit artifact JSON")->required();
  fit->callback([&] {
    const auto pool = load_item_pool(fs::path(fi_pool));
    const auto inv = load_inventory(fs::path(fi_inv));
    const auto f = parse_format(fi_format);
    const auto d = build_model_data(model_for(f), load_response_sets(fs::path(fi_resp)), inv, pool);
    FitArtifact art;
    if (fi_backend == "hmc") {
      HmcOptions o;
      o.seed = fi_seed;
      const auto post = fit_hmc(d, o);
      const auto s = summarize_diagnostics(post);
      art = make_artifact(d, post, s);
      std::cout << "max R-hat " << format_number(s.max_rhat) << "  share < 1.01 " << format_number(s.share_rhat_below)
                << "  divergent " << format_number(s.divergence_rate) << '\n';
      if (!s.passes_gate) exit_code = 4;
    } else {
      MapOptions o;
      o.seed = fi_seed;
      o.items = fi_items.empty() ? (f == Format::Gfc ? ItemEstimation::Marginal : ItemEstimation::Joint)
                                 : item_estimation_from_string(fi_items);
      const auto r = fit_map(d, o);
      art = make_artifact(d, r);
      std::cout << "log posterior " << format_number(r.log_posterior) << "  |grad| " << r.gradient_norm
                << (r.converged ? "  converged" : "  NOT converged") << '\n';
    }
    save_artifact(art, fi_out);
  });

  // report
  auto* rep = app.add_subcommand("report", "Effect sizes, recovery, zones and plots from fits");
  std::vector<std::string> re_fits;
  std::string re_pers, re_model = "sim", re_out;
  rep->add_option("--fit", re_fits, "Fit artifact JSON (repeatable)")->required();
  rep->add_option("--personas", re_pers, "Personas JSON")->required();
  rep->add_option("--model", re_model, "Model label");
  rep->add_option("--out", re_out, "Output directory")->required();
  rep->callback([&] {
    const auto personas = load_personas(re_pers);
    SdrReport r;
    r.metadata = report_metadata();
    for (const auto& f : re_fits) r.entries.push_back(build_format_report(re_model, load_artifact(f), personas, f));
    write_report_files(r, re_out);
  });

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run every stage from one config file");
  std::string pi_cfg, pi_stop, pi_work, pi_backend;
  bool pi_force = false;
  std::optional<std::uint64_t> pi_seed;
  std::optional<int> pi_personas;
  pipe->add_option("--config", pi_cfg, "Pipeline config JSON")->required();
  pipe->add_flag("--force", pi_force, "Rerun stages whose outputs exist");
  pipe->add_option("--stop-after", pi_stop, "Last stage to run");
  pipe->add_option("--work-dir", pi_work, "Override paths.work_dir");
  pipe->add_option("--seed", pi_seed, "Override the base seed");
  pipe->add_option("--personas", pi_personas, "Override personas.count");
  pipe->add_option("--backend", pi_backend, "Override fit.backend");
  pipe->callback([&] {
    json j;
    {
      std::ifstream in(pi_cfg);
      if (!in) throw Error("config", "cannot read " + pi_cfg);
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw Error("config", pi_cfg + ": " + e.what());
      }
    }
    if (!pi_work.empty()) j["paths"]["work_dir"] = fs::absolute(pi_work).string();
    if (pi_seed) j["seed"] = *pi_seed;
    if (pi_personas) j["personas"]["count"] = *pi_personas;
    if (!pi_backend.empty()) j["fit"]["backend"] = pi_backend;
    const auto cfg = parse_pipeline_config(j, fs::absolute(pi_cfg).parent_path());
    PipelineOptions o;
    o.force = pi_force;
    if (!pi_stop.empty()) o.stop_after = pi_stop;
    o.log = [](const std::string& m) { std::cerr << m << '\n'; };
    const auto r = run_pipeline(cfg, o);
    if (!r.message.empty()) std::cerr << r.message << '\n';
    exit_code = r.exit_code;
  });

  // lint
  auto* lint = app.add_subcommand("lint", "Check that reported numbers trace back to recorded fits");
  std::string li_work;
  lint->add_option("--work-dir", li_work, "Pipeline work directory")->required();
  lint->callback([&] {
    const auto problems = lint_run(li_work);
    for (const auto& p : problems) std::cout << p << '\n';
    if (problems.empty()) std::cout << "ok\n";
    else exit_code = 3;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << '\n';
    return e.kind() == "config" ? kExitConfig : kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
  return exit_code;
}
