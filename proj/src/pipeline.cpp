#include "sdrkit/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "sdrkit/assembly.hpp"
#include "sdrkit/desirability.hpp"
#include "sdrkit/error.hpp"
#include "sdrkit/inventory_io.hpp"
#include "sdrkit/persona.hpp"
#include "sdrkit/report.hpp"
#include "sdrkit/rng.hpp"

namespace sdrkit {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kManifestName = "pipeline_manifest.json";

std::string hex16(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("io", "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + p.string());
  out << text;
}

json read_json(const fs::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::exception& e) {
    throw Error("parse", p.string() + ": " + e.what());
  }
}

[[noreturn]] void config_error(const std::string& msg) { throw Error("config", msg); }

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::optional<fs::path> optional_input(const json& paths, const char* key, const fs::path& base) {
  if (!paths.contains(key) || paths.at(key).is_null()) return std::nullopt;
  const auto p = resolve(base, paths.at(key).get<std::string>());
  if (!fs::is_regular_file(p)) config_error(std::string("paths.") + key + ": file not found: " + p.string());
  return p;
}

std::string fit_name(const std::string& respondent, Format f) { return "fits/" + respondent + "_" + to_string(f) + ".json"; }

// Loaded on demand by stages.
struct Workspace {
  const PipelineConfig& cfg;
  fs::path dir;
  json manifest;

  fs::path at(const std::string& rel) const { return dir / rel; }

  void save_manifest() const { write_text(dir / kManifestName, manifest.dump(2) + "\n"); }

  bool stage_current(const std::string& stage) const {
    if (!manifest.contains("stages") || !manifest["stages"].contains(stage)) return false;
    const auto& s = manifest["stages"][stage];
    if (s.value("status", "") != "ok") return false;
    for (const auto& [rel, h] : s.at("outputs").items()) {
      if (!fs::exists(at(rel))) return false;
      if (file_hash(at(rel)) != h.get<std::string>()) return false;
    }
    return true;
  }

  void record(const std::string& stage, const std::vector<std::string>& outputs, const json& extra = json::object()) {
    json out = json::object();
    for (const auto& rel : outputs) out[rel] = file_hash(at(rel));
    json s = {{"status", "ok"}, {"outputs", out}, {"finished", utc_timestamp()}};
    for (const auto& [k, v] : extra.items()) s[k] = v;
    manifest["stages"][stage] = s;
    save_manifest();
  }

  // Downstream stages depend on every upstream output, so rerunning a stage
  // invalidates the ones after it.
  void invalidate_after(const std::string& stage) {
    bool after = false;
    for (const auto& s : kPipelineStages) {
      if (after && manifest["stages"].contains(s)) manifest["stages"].erase(s);
      if (s == stage) after = true;
    }
  }

  ItemPool rated_pool() const { return load_item_pool(at("pool.tsv")); }
  Inventory inventory() const { return load_inventory(at("inventory.tsv")); }
  PersonaSet personas() const { return load_personas(at("personas.json")); }
};

void stage_aggregate(Workspace& w) {
  const auto& cfg = w.cfg;
  const auto excluded = cfg.exclusions ? load_exclusions(*cfg.exclusions) : std::vector<std::string>{};
  ItemPool pool = load_item_pool(cfg.pool, excluded);
  std::vector<std::string> outputs = {"pool.tsv"};
  json extra = json::object();
  if (cfg.ratings) {
    const auto ds = load_rating_dataset(*cfg.ratings);
    std::vector<std::string> ids;
    for (const auto& item : pool.items()) ids.push_back(item.id);
    const auto table = aggregate_ratings(ds, ids);
    std::map<std::string, double> scores;
    for (const auto& id : ids) scores[id] = table.items.at(id).mean;
    pool = pool.with_desirability(scores);
    std::ostringstream ss;
    ss << "item\tmean\tn\n";
    for (const auto& id : ids) ss << id << '\t' << format_real(table.items.at(id).mean) << '\t' << table.items.at(id).n << '\n';
    write_text(w.at("desirability.tsv"), ss.str());
    outputs.push_back("desirability.tsv");
    json agreement = json::object();
    for (const auto& rater : ds.raters()) {
      if (ds.replications(rater).size() < 2) continue;
      const auto st = agreement_stats(ds, rater, 200, cfg.stage_seed("aggregate"));
      agreement[rater] = {{"k", st.k},           {"items_used", st.items_used}, {"items_dropped", st.items_dropped},
                          {"icc_a1", st.icc_a1}, {"icc_ak", st.icc_ak},         {"mean_pairwise_r", st.mean_pairwise_r},
                          {"split_half_r", st.split_half_r}};
    }
    extra["agreement"] = agreement;
  } else {
    for (const auto& item : pool.items())
      if (!item.desirability) throw Error("unrated_item", "item '" + item.id + "' has no desirability and no ratings file is configured");
  }
  std::ostringstream ss;
  save_item_pool(pool, ss);
  write_text(w.at("pool.tsv"), ss.str());
  w.record("aggregate", outputs, extra);
}

void stage_assemble(Workspace& w) {
  const auto& cfg = w.cfg;
  const ItemPool pool = w.rated_pool();
  AssemblyConfig ac = AssemblyConfig::balanced(cfg.pairs);
  ac.node_budget = cfg.node_budget;
  ac.time_budget_seconds = cfg.time_budget_seconds;
  json extra = json::object();
  Inventory inv;
  if (cfg.inventory) {
    inv = load_inventory(*cfg.inventory);
    // Gaps are recomputed from the rated pool.
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& b : inv.blocks()) pairs.emplace_back(b.left, b.right);
    inv = Inventory::from_pairs(pairs, pool);
    extra["source"] = "configured";
  } else {
    const auto sol = assemble(pool, ac);
    inv = sol.inventory;
    extra["source"] = "assembled";
    extra["m_star"] = sol.m_star;
    extra["sse"] = sol.sse;
    extra["proof"] = to_string(sol.proof);
    extra["nodes"] = sol.nodes;
  }
  const auto rep = validate_inventory(inv, pool, ac);
  json checks = json::array();
  for (const auto& c : rep.checks) checks.push_back({{"family", c.family}, {"pass", c.pass}, {"detail", c.detail}});
  extra["constraints"] = checks;
  extra["max_gap"] = rep.max_gap;
  extra["mean_gap"] = rep.mean_gap;
  if (!rep.all_pass()) throw Error("constraint_violation", "inventory fails assembly constraints");
  std::ostringstream ss;
  save_inventory(inv, ss);
  write_text(w.at("inventory.tsv"), ss.str());
  w.record("assemble", {"inventory.tsv"}, extra);
}

void stage_personas(Workspace& w) {
  const auto& cfg = w.cfg;
  const auto cov = cfg.covariance ? load_covariance(*cfg.covariance) : default_covariance();
  const auto lex = cfg.lexicon ? load_lexicon(*cfg.lexicon) : default_lexicon();
  const auto set = sample_personas(static_cast<std::size_t>(cfg.personas), cov, cfg.stage_seed("personas"), lex);
  fs::create_directories(w.dir);
  save_personas(set, w.at("personas.json"));
  w.record("personas", {"personas.json"});
}

SimParams sim_params_for(const Workspace& w, const RespondentConfig& r, const Inventory& inv, const ItemPool& pool) {
  if (r.sim_params) return load_sim_params(*r.sim_params);
  SimDefaults d;
  d.matched_block_discrimination = r.matched_block_discrimination;
  return default_sim_params(inv, pool, derive_seed(w.cfg.stage_seed("simulator"), r.id), d);
}

void stage_administer(Workspace& w) {
  const auto& cfg = w.cfg;
  const auto pool = std::make_shared<const ItemPool>(w.rated_pool());
  const auto inv = std::make_shared<const Inventory>(w.inventory());
  const auto personas = w.personas();
  std::vector<std::string> outputs;
  json summary = json::object();
  for (const auto& r : cfg.respondents) {
    const std::string base = "runs/" + r.id + "/";
    std::unique_ptr<Provider> provider;
    if (r.type == "sim") {
      const auto params = sim_params_for(w, r, *inv, *pool);
      fs::create_directories(w.at(base));
      save_sim_params(params, w.at(base + "sim_params.json"));
      outputs.push_back(base + "sim_params.json");
      std::map<std::string, TraitVector> zs;
      for (const auto& p : personas) zs[p.id] = p.z;
      provider = std::make_unique<SimProvider>(r.id, zs, *inv, params,
                                               SimSpec{r.fake_good_delta, derive_seed(cfg.stage_seed("simulator"), r.id)});
    } else {
      provider = std::make_unique<HttpProvider>(r.http);
    }
    std::vector<SessionPlan> plans;
    for (const auto& p : personas)
      for (auto f : cfg.formats)
        for (auto c : cfg.conditions) {
          auto plan = make_session_plan(r.id, p, inv, pool, f, c, cfg.stage_seed("administer"));
          plan.decode_options = r.decode_options;
          plans.push_back(std::move(plan));
        }
    RunManifest m;
    m.run_id = r.id;
    m.model = r.type == "sim" ? "sim" : r.http.model;
    m.seeds = {{"administer", cfg.stage_seed("administer")}, {"simulator", cfg.stage_seed("simulator")}};
    m.started = utc_timestamp();
    const auto results = run_sessions(plans, *provider, cfg.retry, cfg.max_parallel);
    m.finished = utc_timestamp();
    std::vector<ResponseSet> sets;
    int failed = 0;
    for (const auto& res : results) {
      m.add(res);
      sets.push_back(res.responses);
      if (!res.failure.empty()) ++failed;
    }
    m.check_order_fixed_across_conditions();
    if (failed == static_cast<int>(results.size())) throw Error("administration_failed", "every session of '" + r.id + "' failed");
    std::ostringstream ss;
    save_response_sets(sets, ss);
    write_text(w.at(base + "responses.tsv"), ss.str());
    write_text(w.at(base + "manifest.json"), to_json(m).dump(2) + "\n");
    outputs.push_back(base + "responses.tsv");
    outputs.push_back(base + "manifest.json");
    summary[r.id] = {{"sessions", results.size()}, {"failed", failed}};
  }
  w.record("administer", outputs, {{"sessions", summary}});
}

// Returns true when every HMC fit passes the diagnostics gate.
bool stage_fit(Workspace& w) {
  const auto& cfg = w.cfg;
  const auto pool = w.rated_pool();
  const auto inv = w.inventory();
  std::vector<std::string> outputs;
  json gates = json::object();
  bool all_pass = true;
  for (const auto& r : cfg.respondents) {
    const auto sets = load_response_sets(w.at("runs/" + r.id + "/responses.tsv"));
    for (auto f : cfg.formats) {
      const auto d = build_model_data(model_for(f), sets, inv, pool);
      if (d.n_rows() == 0) throw Error("empty_data", "no complete " + to_string(f) + " responses for '" + r.id + "'");
      FitArtifact art;
      if (cfg.backend == "hmc") {
        HmcOptions o = cfg.hmc;
        o.seed = derive_seed(cfg.stage_seed("fit"), r.id, to_string(f));
        const auto post = fit_hmc(d, o);
        const auto diag = summarize_diagnostics(post);
        art = make_artifact(d, post, diag);
        gates[fit_name(r.id, f)] = diag.passes_gate;
        all_pass = all_pass && diag.passes_gate;
      } else {
        MapOptions o = cfg.map;
        o.items = f == Format::Likert ? cfg.likert_items : cfg.gfc_items;
        o.seed = derive_seed(cfg.stage_seed("fit"), r.id, to_string(f));
        art = make_artifact(d, fit_map(d, o));
        art.diagnostics["item_estimation"] = to_string(o.items);
      }
      art.diagnostics["excluded_incomplete"] = d.excluded_incomplete;
      const auto rel = fit_name(r.id, f);
      fs::create_directories(w.at("fits"));
      save_artifact(art, w.at(rel));
      outputs.push_back(rel);
    }
  }
  w.record("fit", outputs, {{"backend", cfg.backend}, {"gates", gates}});
  return all_pass;
}

SdrReport compute_report(const fs::path& dir, const json& manifest) {
  const auto personas = load_personas(dir / "personas.json");
  SdrReport rep;
  rep.metadata = report_metadata();
  rep.metadata["config_hash"] = manifest.value("config_hash", "");
  for (const auto& [rel, h] : manifest.at("stages").at("fit").at("outputs").items()) {
    const auto art = load_artifact(dir / rel);
    const auto stem = fs::path(rel).stem().string();
    const auto cut = stem.rfind('_');
    const std::string respondent = cut == std::string::npos ? stem : stem.substr(0, cut);
    rep.entries.push_back(build_format_report(respondent, art, personas, rel));
  }
  return rep;
}

void stage_report(Workspace& w) {
  const auto rep = compute_report(w.dir, w.manifest);
  write_report_files(rep, w.at("reports"));
  w.record("report", {"reports/effects.csv", "reports/tradeoff.csv", "reports/report.json", "reports/heatmap.svg",
                      "reports/tradeoff.svg"});
}

}  // namespace

std::uint64_t PipelineConfig::stage_seed(const std::string& stage) const {
  auto it = seeds.find(stage);
  return it != seeds.end() ? it->second : derive_seed(seed, stage);
}

std::string config_hash(const json& j) { return hex16(fnv1a(j.dump())); }

std::string file_hash(const fs::path& path) { return hex16(fnv1a(read_text(path))); }

PipelineConfig parse_pipeline_config(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  c.source = j;
  try {
    const auto& paths = j.at("paths");
    c.pool = resolve(base_dir, paths.at("pool").get<std::string>());
    if (!fs::is_regular_file(c.pool)) config_error("paths.pool: file not found: " + c.pool.string());
    c.exclusions = optional_input(paths, "exclusions", base_dir);
    c.ratings = optional_input(paths, "ratings", base_dir);
    c.inventory = optional_input(paths, "inventory", base_dir);
    c.covariance = optional_input(paths, "covariance", base_dir);
    c.lexicon = optional_input(paths, "lexicon", base_dir);
    c.work_dir = resolve(base_dir, paths.at("work_dir").get<std::string>());

    c.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("seeds"))
      for (const auto& [k, v] : j.at("seeds").items()) c.seeds[k] = v.get<std::uint64_t>();

    if (j.contains("assembly")) {
      const auto& a = j.at("assembly");
      c.pairs = a.value("pairs", c.pairs);
      c.node_budget = a.value("node_budget", c.node_budget);
      c.time_budget_seconds = a.value("time_budget_seconds", c.time_budget_seconds);
    }
    if (c.pairs <= 0 || c.pairs % 10 != 0) config_error("assembly.pairs must be a positive multiple of 10");

    if (j.contains("personas")) c.personas = j.at("personas").value("count", c.personas);
    if (c.personas < 3) config_error("personas.count must be at least 3");

    std::set<std::string> ids;
    for (const auto& jr : j.at("respondents")) {
      RespondentConfig r;
      r.id = jr.at("id").get<std::string>();
      if (r.id.empty() || r.id.find_first_of("/\\_ ") != std::string::npos)
        config_error("respondent id '" + r.id + "' must be non-empty without '/', '\\', '_' or spaces");
      if (!ids.insert(r.id).second) config_error("duplicate respondent id '" + r.id + "'");
      if (jr.contains("token") || jr.contains("api_key"))
        config_error("respondent '" + r.id + "': tokens are read only from the environment (token_env)");
      r.type = jr.value("type", "sim");
      r.decode_options = jr.value("decode_options", json::object());
      if (r.type == "sim") {
        r.fake_good_delta = jr.value("fake_good_delta", r.fake_good_delta);
        r.matched_block_discrimination = jr.value("matched_block_discrimination", false);
        r.sim_params = optional_input(jr, "sim_params", base_dir);
      } else if (r.type == "http") {
        r.http.base_url = jr.at("base_url").get<std::string>();
        r.http.path = jr.value("path", r.http.path);
        r.http.model = jr.at("model").get<std::string>();
        r.http.token_env = jr.value("token_env", r.http.token_env);
        r.http.timeout_seconds = jr.value("timeout_seconds", r.http.timeout_seconds);
        r.http.min_interval_seconds = jr.value("min_interval_seconds", r.http.min_interval_seconds);
      } else {
        config_error("respondent '" + r.id + "': unknown type '" + r.type + "'");
      }
      c.respondents.push_back(std::move(r));
    }
    if (c.respondents.empty()) config_error("at least one respondent is required");

    if (j.contains("design")) {
      const auto& d = j.at("design");
      if (d.contains("formats")) {
        c.formats.clear();
        for (const auto& f : d.at("formats")) c.formats.push_back(parse_format(f.get<std::string>()));
      }
      if (d.contains("conditions")) {
        c.conditions.clear();
        for (const auto& x : d.at("conditions")) c.conditions.push_back(parse_condition(x.get<std::string>()));
      }
    }
    if (c.formats.empty()) config_error("design.formats is empty");
    const std::set<Condition> conds(c.conditions.begin(), c.conditions.end());
    if (conds.size() != 2 || conds.size() != c.conditions.size())
      config_error("design.conditions must list honest and fake_good exactly once each");
    if (std::set<Format>(c.formats.begin(), c.formats.end()).size() != c.formats.size())
      config_error("design.formats lists a format twice");

    if (j.contains("administration")) {
      const auto& a = j.at("administration");
      c.max_parallel = a.value("max_parallel", c.max_parallel);
      c.retry.max_format_retries = a.value("max_format_retries", c.retry.max_format_retries);
      c.retry.max_transport_retries = a.value("max_transport_retries", c.retry.max_transport_retries);
      c.retry.backoff_initial_seconds = a.value("backoff_initial_seconds", c.retry.backoff_initial_seconds);
    }
    if (c.max_parallel < 1) config_error("administration.max_parallel must be >= 1");

    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      c.backend = f.value("backend", c.backend);
      c.likert_items = item_estimation_from_string(f.value("likert_items", to_string(c.likert_items)));
      c.gfc_items = item_estimation_from_string(f.value("gfc_items", to_string(c.gfc_items)));
      if (f.contains("map")) {
        const auto& m = f.at("map");
        c.map.starts = m.value("starts", c.map.starts);
        c.map.max_iterations = m.value("max_iterations", c.map.max_iterations);
        c.map.gradient_tolerance = m.value("gradient_tolerance", c.map.gradient_tolerance);
        c.map.marginal_draws = m.value("marginal_draws", c.map.marginal_draws);
        c.map.em_iterations = m.value("em_iterations", c.map.em_iterations);
      }
      if (f.contains("hmc")) {
        const auto& h = f.at("hmc");
        c.hmc.chains = h.value("chains", c.hmc.chains);
        c.hmc.warmup = h.value("warmup", c.hmc.warmup);
        c.hmc.draws = h.value("draws", c.hmc.draws);
        c.hmc.max_treedepth = h.value("max_treedepth", c.hmc.max_treedepth);
        c.hmc.target_accept = h.value("target_accept", c.hmc.target_accept);
        c.hmc.threads = h.value("threads", c.hmc.threads);
      }
    }
    if (c.backend != "map" && c.backend != "hmc") config_error("fit.backend must be 'map' or 'hmc'");
  } catch (const json::exception& e) {
    config_error(std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == "config") throw;
    config_error(e.what());
  }
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    config_error(path.string() + ": " + e.what());
  } catch (const Error& e) {
    config_error(e.what());
  }
  return parse_pipeline_config(j, fs::absolute(path).parent_path());
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineOptions& opts) {
  PipelineResult res;
  auto log = [&](const std::string& m) {
    if (opts.log) opts.log(m);
  };
  if (opts.stop_after &&
      std::find(kPipelineStages.begin(), kPipelineStages.end(), *opts.stop_after) == kPipelineStages.end()) {
    res.exit_code = kExitConfig;
    res.message = "unknown stage '" + *opts.stop_after + "'";
    return res;
  }
  Workspace w{cfg, cfg.work_dir, json::object()};
  const std::string hash = config_hash(cfg.source);
  if (fs::exists(w.dir / kManifestName)) {
    try {
      w.manifest = read_json(w.dir / kManifestName);
    } catch (const Error&) {
      w.manifest = json::object();
    }
  }
  if (opts.force || w.manifest.value("config_hash", "") != hash) w.manifest = json::object();
  w.manifest["config_hash"] = hash;
  w.manifest["seeds"] = json::object();
  for (const auto& s : {"aggregate", "personas", "administer", "simulator", "fit"}) w.manifest["seeds"][s] = cfg.stage_seed(s);
  if (!w.manifest.contains("stages")) w.manifest["stages"] = json::object();

  bool gate_ok = true;
  bool upstream_rerun = false;
  for (const auto& stage : kPipelineStages) {
    if (!upstream_rerun && w.stage_current(stage)) {
      log("stage " + stage + ": up to date");
      res.skipped.push_back(stage);
      if (stage == "fit") {
        const auto gates = w.manifest["stages"]["fit"].value("gates", json::object());
        for (const auto& [k, v] : gates.items())
          gate_ok = gate_ok && v.get<bool>();
      }
    } else {
      log("stage " + stage + ": running");
      upstream_rerun = true;
      w.invalidate_after(stage);
      w.manifest["stages"].erase(stage);
      try {
        if (stage == "aggregate") stage_aggregate(w);
        else if (stage == "assemble") stage_assemble(w);
        else if (stage == "personas") stage_personas(w);
        else if (stage == "administer") stage_administer(w);
        else if (stage == "fit") gate_ok = stage_fit(w);
        else stage_report(w);
      } catch (const std::exception& e) {
        w.manifest["stages"][stage] = {{"status", "failed"}, {"error", e.what()}, {"outputs", json::object()}};
        w.save_manifest();
        res.exit_code = kExitStage;
        res.failed_stage = stage;
        res.message = "stage " + stage + " failed: " + e.what();
        return res;
      }
    }
    if (opts.stop_after && *opts.stop_after == stage) break;
  }
  if (!gate_ok) {
    res.exit_code = kExitDiagnostics;
    res.message = "R-hat diagnostics gate failed for at least one fit";
  }
  return res;
}

std::vector<std::string> lint_run(const fs::path& work_dir) {
  std::vector<std::string> problems;
  json manifest;
  try {
    manifest = read_json(work_dir / kManifestName);
  } catch (const Error& e) {
    return {std::string("manifest: ") + e.what()};
  }
  const auto stages = manifest.value("stages", json::object());
  if (!stages.contains("fit") || !stages.contains("report")) return {"manifest lacks fit or report stage"};
  const auto fits = stages["fit"].value("outputs", json::object());
  SdrReport shown;
  try {
    shown = report_from_json(read_json(work_dir / "reports" / "report.json"));
  } catch (const Error& e) {
    return {std::string("report: ") + e.what()};
  }
  const auto reported = stages["report"].value("outputs", json::object());
  for (const auto& [rel, h] : reported.items())
    if (!fs::exists(work_dir / rel) || file_hash(work_dir / rel) != h.get<std::string>())
      problems.push_back(rel + ": differs from the file recorded in the manifest");
  for (const auto& [rel, h] : fits.items())
    if (!fs::exists(work_dir / rel) || file_hash(work_dir / rel) != h.get<std::string>())
      problems.push_back(rel + ": fit artifact missing or changed since it was recorded");
  for (const auto& e : shown.entries)
    if (!fits.contains(e.fit_ref)) problems.push_back(e.model + "/" + e.format + ": fit '" + e.fit_ref + "' is not in the manifest");
  if (!problems.empty()) return problems;

  SdrReport again;
  try {
    again = compute_report(work_dir, manifest);
  } catch (const Error& e) {
    return {std::string("recompute: ") + e.what()};
  }
  std::ostringstream a, b, c, d;
  write_effects_csv(shown, a);
  write_effects_csv(again, b);
  write_tradeoff_csv(shown, c);
  write_tradeoff_csv(again, d);
  if (a.str() != b.str()) problems.push_back("effects do not match a recomputation from the recorded fits");
  if (c.str() != d.str()) problems.push_back("trade-off table does not match a recomputation from the recorded fits");
  if (read_text(work_dir / "reports" / "effects.csv") != b.str())
    problems.push_back("reports/effects.csv does not match a recomputation from the recorded fits");
  return problems;
}

}  // namespace sdrkit
