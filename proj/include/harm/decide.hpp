#pragma once

#include <array>
#include <compare>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "harm/bounds.hpp"
#include "harm/identify.hpp"
#include "harm/law.hpp"
#include "harm/utility.hpp"

namespace harm {

enum class Criterion { kInterventionist, kCfPoint, kCfMinimaxRegret, kCfMaximin, kCfBayes };

const char* to_string(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view name);

/// Relevant features a decision conditions on: the level, and optionally the
/// intention-to-treat value.
struct FeatureKey {
  std::string level;
  std::optional<Action> astar;

  auto operator<=>(const FeatureKey&) const = default;
};

std::string to_string(const FeatureKey& key);

struct Policy {
  std::vector<std::pair<FeatureKey, Action>> assignments;
  Criterion criterion = Criterion::kInterventionist;
  std::string provenance;

  /// Exact key first, then the level-only key.
  std::optional<Action> find(std::string_view level, std::optional<Action> astar) const;
};

/// One feature tuple of a decision report.
struct DecisionRow {
  FeatureKey key;
  Action action = Action::kWithhold;
  bool tie = false;
  std::optional<std::array<double, 2>> expected_utility;  // interventionist, by action
  std::optional<Interval> gain;                           // E[U2^1] - E[U2^0] over the identified set
  std::optional<std::array<double, 2>> worst_regret;      // by action
  std::optional<double> prior_gain;                       // cf-bayes
};

struct DecisionReport {
  Criterion criterion = Criterion::kInterventionist;
  std::vector<DecisionRow> rows;
};

struct Decision {
  Policy policy;
  DecisionReport report;
};

/// argmax_a of expected interventionist utility per level, or per
/// (level, A*) when `use_astar` is set. Ties withhold.
Decision interventionist_policy(const IdentifiedMeans& means, const UtilitySpec& spec, bool use_astar);

/// Density over the free parameter P(S=1|l), up to normalization.
using PriorDensity = std::function<double(double)>;

/// Counterfactual choice over the identified set. The gain is affine in the
/// free parameter, so its range is attained at the ends of `bounds.harm`.
/// cf-bayes without a prior uses the uniform density on that range.
Decision counterfactual_policy(std::span<const StrataBounds> bounds, const UtilitySpec& spec, Criterion criterion,
                               const std::optional<PriorDensity>& prior = std::nullopt);

/// E[Y^pi] at the true law.
double policy_value(const FullLaw& law, const Policy& policy);

/// Identified set collapsed onto the true P(S | l).
std::vector<StrataBounds> true_bounds(const FullLaw& law);

/// E[Y] under the counterfactual policy chosen at the true strata minus
/// E[Y] under the level-only interventionist policy at the true means.
double excess_outcome(const FullLaw& law, const UtilitySpec& cf_spec, const UtilitySpec& int_spec,
                      Criterion criterion);

}  // namespace harm
