#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "sdrkit/administration.hpp"
#include "sdrkit/inventory.hpp"
#include "sdrkit/ordinal.hpp"
#include "sdrkit/persona.hpp"

namespace sdrkit {

struct ItemParams {
  double a_plus = 1.0;
  int keying = +1;
  Trait trait = Trait::A;
  Thresholds kappa{};  ///< Likert thresholds
};

struct SimParams {
  std::map<std::string, ItemParams> items;
  std::map<std::string, Thresholds> blocks;  ///< GFC thresholds keyed by block id

  const ItemParams& item(const std::string& id) const;
  const Thresholds& block(const std::string& id) const;
};

struct SimDefaults {
  double log_a_sd = 0.25;
  double threshold_span = 2.0;   ///< base thresholds spread over [-span, span]
  double threshold_jitter = 0.25;
  double min_threshold_gap = 0.1;
  bool matched_block_discrimination = false;  ///< both statements of a block share a_plus
};

/// a_plus = exp(N(0, log_a_sd)); thresholds are evenly spaced over
/// [-span, span] plus Gaussian jitter, sorted, with a minimum gap.
SimParams default_sim_params(const Inventory& inv, const ItemPool& pool, std::uint64_t seed,
                             const SimDefaults& opts = {});

void save_sim_params(const SimParams& params, const std::filesystem::path& path);
SimParams load_sim_params(const std::filesystem::path& path);

/// g * a_plus * theta[trait].
double likert_eta(const TraitVector& theta, const ItemParams& item);
/// (mu_right - mu_left) / sqrt(2); throws Error("same_trait") for a same-trait pair.
double gfc_eta(const TraitVector& theta, const ItemParams& left, const ItemParams& right);

struct SimSpec {
  double fake_good_delta = 0.0;
  std::uint64_t seed = 0;
};

/// z under HONEST; z + delta * g_t under FAKE_GOOD.
TraitVector effective_theta(const TraitVector& z, Condition c, double delta);

/// Canonical-orientation answer for one unit; the stream is derived from
/// (seed, respondent, persona, format, unit) so units can be drawn in any order.
int simulate_answer(const TraitVector& theta, const Inventory& inv, const SimParams& params,
                    Format format, const std::string& unit, std::uint64_t seed,
                    const std::string& respondent, const std::string& persona);

/// Complete response set in canonical order with no side flips.
ResponseSet simulate_response_set(const std::string& respondent, const Persona& persona,
                                  const Inventory& inv, const SimParams& params, Format format,
                                  Condition condition, const SimSpec& spec);

/// In-process provider. Reads the request tags, answers from the generative
/// model, and mirrors GFC answers for flipped blocks. Each condition uses its
/// own stream seed derived from `spec.seed`.
class SimProvider : public Provider {
 public:
  SimProvider(std::string id, std::map<std::string, TraitVector> personas, Inventory inv,
              SimParams params, SimSpec spec);
  std::string id() const override { return id_; }
  ProviderReply complete(const ProviderRequest& request) override;

 private:
  std::string id_;
  std::map<std::string, TraitVector> personas_;
  Inventory inv_;
  SimParams params_;
  SimSpec spec_;
};

/// Naive GFC count scores: the canonical left trait gets 7 - y points and the
/// right trait y - 1, so every respondent's total is 6 P.
TraitVector naive_gfc_scores(const ResponseSet& rs, const Inventory& inv, const ItemPool& pool);

}  // namespace sdrkit
