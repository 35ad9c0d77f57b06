#include "sdrkit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "sdrkit/error.hpp"
#include "sdrkit/rng.hpp"

namespace sdrkit {

using nlohmann::json;

const ItemParams& SimParams::item(const std::string& id) const {
  auto it = items.find(id);
  if (it == items.end()) throw Error("missing_params", "no simulation parameters for item " + id);
  return it->second;
}

const Thresholds& SimParams::block(const std::string& id) const {
  auto it = blocks.find(id);
  if (it == blocks.end()) throw Error("missing_params", "no simulation parameters for block " + id);
  return it->second;
}

namespace {

Thresholds draw_thresholds(Rng& rng, const SimDefaults& o) {
  std::normal_distribution<double> jitter(0.0, o.threshold_jitter);
  Thresholds k{};
  for (int i = 0; i < kThresholdCount; ++i)
    k[static_cast<std::size_t>(i)] = -o.threshold_span + 2.0 * o.threshold_span * i / (kThresholdCount - 1) + jitter(rng);
  std::sort(k.begin(), k.end());
  for (int i = 1; i < kThresholdCount; ++i)
    k[static_cast<std::size_t>(i)] = std::max(k[static_cast<std::size_t>(i)], k[static_cast<std::size_t>(i - 1)] + o.min_threshold_gap);
  return k;
}

}  // namespace

SimParams default_sim_params(const Inventory& inv, const ItemPool& pool, std::uint64_t seed,
                             const SimDefaults& opts) {
  SimParams p;
  std::normal_distribution<double> log_a(0.0, opts.log_a_sd);
  for (const auto& id : inv.statements()) {
    const auto& item = pool.at(id);
    Rng rng(derive_seed(seed, "item", id));
    ItemParams ip;
    ip.trait = item.domain;
    ip.keying = item.keying;
    ip.a_plus = std::exp(log_a(rng));
    ip.kappa = draw_thresholds(rng, opts);
    p.items[id] = ip;
  }
  for (std::size_t b = 0; b < inv.block_count(); ++b) {
    const auto bid = Inventory::block_id(b);
    Rng rng(derive_seed(seed, "block", bid));
    p.blocks[bid] = draw_thresholds(rng, opts);
    if (opts.matched_block_discrimination) {
      const auto& blk = inv.blocks()[b];
      p.items[blk.right].a_plus = p.items[blk.left].a_plus;
    }
  }
  return p;
}

void save_sim_params(const SimParams& params, const std::filesystem::path& path) {
  json items = json::object(), blocks = json::object();
  for (const auto& [id, ip] : params.items)
    items[id] = {{"a_plus", ip.a_plus},
                 {"keying", ip.keying},
                 {"trait", std::string(1, trait_letter(ip.trait))},
                 {"kappa", ip.kappa}};
  for (const auto& [id, k] : params.blocks) blocks[id] = {{"kappa", k}};
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << json{{"items", items}, {"blocks", blocks}}.dump(2) << '\n';
}

SimParams load_sim_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path.string());
  SimParams p;
  try {
    const auto doc = json::parse(in);
    for (const auto& [id, v] : doc.at("items").items()) {
      ItemParams ip;
      ip.a_plus = v.at("a_plus").get<double>();
      ip.keying = v.at("keying").get<int>();
      ip.trait = parse_trait(v.at("trait").get<std::string>());
      ip.kappa = v.at("kappa").get<Thresholds>();
      if (!(ip.a_plus > 0.0)) throw Error("params", "a_plus must be positive for " + id);
      check_thresholds(ip.kappa);
      p.items[id] = ip;
    }
    for (const auto& [id, v] : doc.at("blocks").items()) {
      p.blocks[id] = v.at("kappa").get<Thresholds>();
      check_thresholds(p.blocks[id]);
    }
  } catch (const json::exception& e) {
    throw Error("parse", path.string() + ": " + e.what());
  }
  return p;
}

double likert_eta(const TraitVector& theta, const ItemParams& item) {
  return item.keying * item.a_plus * theta[index_of(item.trait)];
}

double gfc_eta(const TraitVector& theta, const ItemParams& left, const ItemParams& right) {
  if (left.trait == right.trait) throw Error("same_trait", "GFC block pairs two statements of one trait");
  return (likert_eta(theta, right) - likert_eta(theta, left)) / std::sqrt(2.0);
}

TraitVector effective_theta(const TraitVector& z, Condition c, double delta) {
  if (!std::isfinite(delta)) throw Error("config", "fake-good shift must be finite");
  TraitVector out = z;
  if (c == Condition::FakeGood)
    for (auto t : kAllTraits) out[index_of(t)] += delta * desirability_direction(t);
  return out;
}

int simulate_answer(const TraitVector& theta, const Inventory& inv, const SimParams& params,
                    Format format, const std::string& unit, std::uint64_t seed,
                    const std::string& respondent, const std::string& persona) {
  Rng rng(derive_seed(seed, respondent, persona, to_string(format), unit));
  const double u = uniform01(rng);
  if (format == Format::Likert) {
    const auto& ip = params.item(unit);
    return draw_category(likert_eta(theta, ip), ip.kappa, u);
  }
  const auto& blocks = inv.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (Inventory::block_id(b) != unit) continue;
    const double eta = gfc_eta(theta, params.item(blocks[b].left), params.item(blocks[b].right));
    return draw_category(eta, params.block(unit), u);
  }
  throw Error("unknown_unit", "no block '" + unit + "'");
}

ResponseSet simulate_response_set(const std::string& respondent, const Persona& persona,
                                  const Inventory& inv, const SimParams& params, Format format,
                                  Condition condition, const SimSpec& spec) {
  ResponseSet rs;
  rs.respondent_id = respondent;
  rs.persona_id = persona.id;
  rs.format = format;
  rs.condition = condition;
  rs.presentation_order = administered_units(inv, format);
  const auto theta = effective_theta(persona.z, condition, spec.fake_good_delta);
  for (const auto& unit : rs.presentation_order) {
    rs.answers[unit] = simulate_answer(theta, inv, params, format, unit, spec.seed, respondent, persona.id);
    if (format == Format::Gfc) rs.side_flipped[unit] = false;
  }
  rs.complete = true;
  return rs;
}

SimProvider::SimProvider(std::string id, std::map<std::string, TraitVector> personas, Inventory inv,
                         SimParams params, SimSpec spec)
    : id_(std::move(id)),
      personas_(std::move(personas)),
      inv_(std::move(inv)),
      params_(std::move(params)),
      spec_(spec) {}

ProviderReply SimProvider::complete(const ProviderRequest& request) {
  auto tag = [&](const char* key) -> const std::string& {
    auto it = request.tags.find(key);
    if (it == request.tags.end())
      throw Error("sim_request", std::string("simulator request lacks tag '") + key + "'");
    return it->second;
  };
  const auto& persona = tag("persona");
  auto it = personas_.find(persona);
  if (it == personas_.end()) throw Error("sim_request", "simulator has no persona '" + persona + "'");
  const auto format = parse_format(tag("format"));
  const auto condition = parse_condition(tag("condition"));
  const auto theta = effective_theta(it->second, condition, spec_.fake_good_delta);
  const auto seed = derive_seed(spec_.seed, to_string(condition));
  int y = simulate_answer(theta, inv_, params_, format, tag("unit"), seed, tag("respondent"), persona);
  if (format == Format::Gfc && tag("flipped") == "1") y = kCategoryCount + 1 - y;
  return {std::to_string(y), 200, 0.0};
}

TraitVector naive_gfc_scores(const ResponseSet& rs, const Inventory& inv, const ItemPool& pool) {
  if (rs.format != Format::Gfc) throw Error("format", "naive count scoring needs a GFC response set");
  TraitVector s{};
  const auto& blocks = inv.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const int y = rs.canonical_answer(Inventory::block_id(b));
    s[index_of(pool.at(blocks[b].left).domain)] += kCategoryCount - y;
    s[index_of(pool.at(blocks[b].right).domain)] += y - 1;
  }
  return s;
}

}  // namespace sdrkit
