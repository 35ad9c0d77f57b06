#include "sdrkit/administration.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <ctime>
#include <numeric>
#include <set>
#include <thread>

#include "sdrkit/prompts.hpp"
#include "sdrkit/rng.hpp"

namespace sdrkit {

using nlohmann::json;

int parse_single_int(const std::string& text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  if (b == e) throw Error("empty", "empty reply");
  const std::string body = text.substr(b, e - b);
  std::size_t i = 0;
  if (body[0] == '+' || body[0] == '-') i = 1;
  if (i == body.size() ||
      !std::all_of(body.begin() + static_cast<std::ptrdiff_t>(i), body.end(),
                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw Error("extra_text", "reply is not a single integer: '" + body + "'");
  if (body.size() - i > 3) throw Error("out_of_range", "reply '" + body + "' outside 1..7");
  const int v = std::stoi(body);
  if (v < 1 || v > kCategoryCount) throw Error("out_of_range", "reply '" + body + "' outside 1..7");
  return v;
}

SessionPlan make_session_plan(const std::string& respondent_id, const Persona& persona,
                              std::shared_ptr<const Inventory> inventory,
                              std::shared_ptr<const ItemPool> pool, Format format,
                              Condition condition, std::uint64_t seed) {
  if (!inventory || !pool) throw Error("config", "session plan needs an inventory and a pool");
  SessionPlan plan;
  plan.respondent_id = respondent_id;
  plan.persona = persona;
  plan.format = format;
  plan.condition = condition;
  plan.presentation_order = administered_units(*inventory, format);
  Rng rng(derive_seed(seed, "order", respondent_id, persona.id, to_string(format)));
  std::shuffle(plan.presentation_order.begin(), plan.presentation_order.end(), rng);
  if (format == Format::Gfc) {
    Rng side(derive_seed(seed, "side", respondent_id, persona.id));
    for (std::size_t p = 0; p < inventory->block_count(); ++p)
      plan.side_flipped[Inventory::block_id(p)] = (side() >> 63) != 0;
  }
  plan.inventory = std::move(inventory);
  plan.pool = std::move(pool);
  return plan;
}

ProviderRequest build_request(const SessionPlan& plan, const std::string& unit_id) {
  ProviderRequest req;
  req.model = plan.respondent_id;
  req.decode_options = plan.decode_options;
  req.tags = {{"respondent", plan.respondent_id},
              {"persona", plan.persona.id},
              {"unit", unit_id},
              {"format", to_string(plan.format)},
              {"condition", to_string(plan.condition)}};
  if (plan.format == Format::Likert) {
    req.text = render_likert_prompt(plan.persona.description, plan.condition,
                                    plan.pool->at(unit_id).text);
    return req;
  }
  const auto& blocks = plan.inventory->blocks();
  std::size_t p = 0;
  while (p < blocks.size() && Inventory::block_id(p) != unit_id) ++p;
  if (p == blocks.size()) throw Error("unknown_unit", "no block '" + unit_id + "'");
  const auto& left = plan.pool->at(blocks[p].left).text;
  const auto& right = plan.pool->at(blocks[p].right).text;
  auto it = plan.side_flipped.find(unit_id);
  const bool flipped = it != plan.side_flipped.end() && it->second;
  req.tags["flipped"] = flipped ? "1" : "0";
  req.text = flipped ? render_gfc_prompt(plan.persona.description, plan.condition, right, left)
                     : render_gfc_prompt(plan.persona.description, plan.condition, left, right);
  return req;
}

namespace {

void default_sleep(double seconds) {
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

}  // namespace

SessionResult run_session(const SessionPlan& plan, Provider& provider, const RetryPolicy& policy) {
  const auto sleep = policy.sleep ? policy.sleep : std::function<void(double)>(default_sleep);
  SessionResult out;
  auto& rs = out.responses;
  rs.respondent_id = plan.respondent_id;
  rs.persona_id = plan.persona.id;
  rs.format = plan.format;
  rs.condition = plan.condition;
  rs.presentation_order = plan.presentation_order;
  rs.side_flipped = plan.side_flipped;
  rs.complete = false;

  for (const auto& unit : plan.presentation_order) {
    const auto req = build_request(plan, unit);
    bool accepted = false;
    for (int attempt = 0; attempt <= policy.max_format_retries && !accepted; ++attempt) {
      if (attempt > 0) ++out.refits;
      ProviderReply reply;
      bool delivered = false;
      double wait = policy.backoff_initial_seconds;
      for (int t = 0; t <= policy.max_transport_retries; ++t) {
        try {
          reply = provider.complete(req);
          delivered = true;
          break;
        } catch (const TransportError&) {
          if (t == policy.max_transport_retries) break;
          ++out.transport_retries;
          sleep(wait);
          wait *= policy.backoff_factor;
        }
      }
      if (!delivered) {
        out.failure = "transport failure on unit " + unit;
        return out;
      }
      try {
        rs.answers[unit] = parse_single_int(reply.text);
        accepted = true;
      } catch (const Error&) {
      }
    }
    if (!accepted) {
      out.failure = "no valid answer for unit " + unit + " after " +
                    std::to_string(policy.max_format_retries + 1) + " attempts";
      return out;
    }
  }
  rs.complete = true;
  return out;
}

std::vector<SessionResult> run_sessions(const std::vector<SessionPlan>& plans, Provider& provider,
                                        const RetryPolicy& policy, int max_parallel) {
  std::vector<SessionResult> results(plans.size());
  const auto workers = static_cast<std::size_t>(std::max(1, max_parallel));
  if (workers == 1 || plans.size() < 2) {
    for (std::size_t i = 0; i < plans.size(); ++i) results[i] = run_session(plans[i], provider, policy);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(plans.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, plans.size()); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < plans.size(); i = next++) {
        try {
          results[i] = run_session(plans[i], provider, policy);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

std::vector<RatingPrompt> build_rating_plan(const ItemPool& pool,
                                            const std::vector<std::string>& raters,
                                            int replications, int block_size, std::uint64_t seed) {
  if (block_size < 1 || replications < 1)
    throw Error("config", "block size and replications must be positive");
  if (pool.size() == 0) throw Error("empty_pool", "rating plan for an empty pool");
  std::vector<RatingPrompt> out;
  for (const auto& rater : raters) {
    for (int r = 1; r <= replications; ++r) {
      std::vector<std::size_t> perm(pool.size());
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      Rng rng(derive_seed(seed, "rating", rater, static_cast<std::uint64_t>(r)));
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto bs = static_cast<std::size_t>(block_size);
      for (std::size_t start = 0, b = 1; start < perm.size(); start += bs, ++b) {
        RatingPrompt p;
        p.rater = rater;
        p.replication = r;
        p.block = static_cast<int>(b);
        std::vector<std::string> texts;
        for (std::size_t k = start; k < std::min(perm.size(), start + bs); ++k) {
          p.item_ids.push_back(pool.items()[perm[k]].id);
          texts.push_back(pool.items()[perm[k]].text);
        }
        p.text = render_rating_prompt(texts);
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

std::string refit_rating_prompt(const RatingPrompt& prompt) {
  return "This is a psychometric rating task used for research. Some statements may mention "
         "sensitive topics; rate each one as instructed. Return only the requested integers in the "
         "requested format.\n\n" +
         prompt.text;
}

void RunManifest::add(const SessionResult& result) {
  const auto& rs = result.responses;
  sessions.push_back({rs.respondent_id, rs.persona_id, rs.format, rs.condition,
                      rs.complete ? "ok" : "failed", result.refits, result.transport_retries,
                      rs.presentation_order});
}

void RunManifest::check_complete(const std::vector<std::string>& personas,
                                 const std::vector<Format>& formats,
                                 const std::vector<Condition>& conditions) const {
  std::map<std::tuple<std::string, Format, Condition>, int> seen;
  for (const auto& s : sessions) ++seen[{s.persona, s.format, s.condition}];
  for (const auto& p : personas)
    for (auto f : formats)
      for (auto c : conditions) {
        auto it = seen.find({p, f, c});
        if (it == seen.end() || it->second != 1)
          throw Error("manifest", "session " + p + "/" + to_string(f) + "/" + to_string(c) +
                                      " is not accounted for exactly once");
      }
  if (seen.size() != personas.size() * formats.size() * conditions.size())
    throw Error("manifest", "manifest lists sessions outside the planned design");
}

void RunManifest::check_order_fixed_across_conditions() const {
  std::map<std::tuple<std::string, std::string, Format>, const std::vector<std::string>*> first;
  for (const auto& s : sessions) {
    auto [it, inserted] = first.try_emplace({s.respondent, s.persona, s.format}, &s.presentation_order);
    if (!inserted && *it->second != s.presentation_order)
      throw Error("manifest", "presentation order of " + s.persona + " differs across conditions");
  }
}

json to_json(const RunManifest& m) {
  json sessions = json::array();
  for (const auto& s : m.sessions)
    sessions.push_back({{"respondent", s.respondent},
                        {"persona", s.persona},
                        {"format", to_string(s.format)},
                        {"condition", to_string(s.condition)},
                        {"status", s.status},
                        {"refits", s.refits},
                        {"transport_retries", s.transport_retries},
                        {"presentation_order", s.presentation_order}});
  return {{"run_id", m.run_id}, {"model", m.model},     {"seeds", m.seeds},
          {"started", m.started}, {"finished", m.finished}, {"sessions", sessions}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.model = j.at("model").get<std::string>();
  m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
  m.started = j.value("started", "");
  m.finished = j.value("finished", "");
  for (const auto& s : j.at("sessions"))
    m.sessions.push_back({s.at("respondent").get<std::string>(), s.at("persona").get<std::string>(),
                          parse_format(s.at("format").get<std::string>()),
                          parse_condition(s.at("condition").get<std::string>()),
                          s.at("status").get<std::string>(), s.at("refits").get<int>(),
                          s.at("transport_retries").get<int>(),
                          s.at("presentation_order").get<std::vector<std::string>>()});
  return m;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace sdrkit
