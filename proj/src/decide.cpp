#include "harm/decide.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "harm/error.hpp"

namespace harm {

namespace {

// Decisions within this distance of indifference are flagged as ties.
constexpr double kTieTolerance = 1e-12;
// Width below which an identified interval is treated as a point.
constexpr double kPointTolerance = 1e-9;
constexpr int kPriorPanels = 4096;

struct NamedCriterion {
  Criterion criterion;
  const char* name;
};

constexpr std::array<NamedCriterion, 5> kCriterionNames{{
    {Criterion::kInterventionist, "interventionist"},
    {Criterion::kCfPoint, "cf-point"},
    {Criterion::kCfMinimaxRegret, "cf-minimax-regret"},
    {Criterion::kCfMaximin, "cf-maximin"},
    {Criterion::kCfBayes, "cf-bayes"},
}};

/// Prior mean of the free parameter on [lo, hi], by the composite midpoint rule.
double prior_mean(const PriorDensity& prior, const Interval& range) {
  if (range.width() <= 0.0) return range.lo;
  const double h = range.width() / kPriorPanels;
  double mass = 0.0;
  double first_moment = 0.0;
  for (int i = 0; i < kPriorPanels; ++i) {
    const double p = range.lo + (i + 0.5) * h;
    const double w = prior(p);
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError(fmt::format("prior density is not a finite non-negative number at p = {:g}", p));
    }
    mass += w;
    first_moment += w * p;
  }
  if (!(mass > 0.0)) {
    throw ValidationError(fmt::format("prior has no mass on [{:g}, {:g}]", range.lo, range.hi));
  }
  return first_moment / mass;
}

}  // namespace

const char* to_string(Criterion c) {
  for (const auto& n : kCriterionNames) {
    if (n.criterion == c) return n.name;
  }
  return "unknown";
}

std::optional<Criterion> parse_criterion(std::string_view name) {
  for (const auto& n : kCriterionNames) {
    if (name == n.name) return n.criterion;
  }
  return std::nullopt;
}

std::string to_string(const FeatureKey& key) {
  if (!key.astar) return fmt::format("L={}", key.level);
  return fmt::format("L={},A*={}", key.level, index(*key.astar));
}

std::optional<Action> Policy::find(std::string_view level, std::optional<Action> astar) const {
  std::optional<Action> fallback;
  for (const auto& [key, action] : assignments) {
    if (key.level != level) continue;
    if (key.astar == astar) return action;
    if (!key.astar) fallback = action;
  }
  return fallback;
}

Decision interventionist_policy(const IdentifiedMeans& means, const UtilitySpec& spec, bool use_astar) {
  if (use_astar && !means.fused) {
    throw IdentificationError("conditioning on A* needs means identified from fused data");
  }
  Decision d;
  d.policy.criterion = Criterion::kInterventionist;
  d.policy.provenance = use_astar ? "interventionist; features (L, A*); fused trial + non-experimental means"
                                  : (means.fused ? "interventionist; features L; fused means"
                                                 : "interventionist; features L; trial means");
  d.report.criterion = Criterion::kInterventionist;

  auto decide_one = [&](FeatureKey key, double p_y1, double p_y0) {
    const std::array<double, 2> u{expected_int_utility(spec, Action::kWithhold, p_y0),
                                  expected_int_utility(spec, Action::kTreat, p_y1)};
    DecisionRow row;
    row.key = std::move(key);
    row.action = u[1] > u[0] ? Action::kTreat : Action::kWithhold;
    row.tie = std::abs(u[1] - u[0]) <= kTieTolerance;
    row.expected_utility = u;
    d.policy.assignments.emplace_back(row.key, row.action);
    d.report.rows.push_back(std::move(row));
  };

  for (const auto& m : means.levels) {
    if (!use_astar) {
      decide_one({m.label, std::nullopt}, m.mean[1], m.mean[0]);
      continue;
    }
    if (!m.given_intent) {
      throw IdentificationError(fmt::format("level {} has no A*-specific means", m.label));
    }
    for (Action astar : kActions) {
      const auto& g = *m.given_intent;
      decide_one({m.label, astar}, g[1][index(astar)], g[0][index(astar)]);
    }
  }
  return d;
}

Decision counterfactual_policy(std::span<const StrataBounds> bounds, const UtilitySpec& spec, Criterion criterion,
                               const std::optional<PriorDensity>& prior) {
  if (criterion == Criterion::kInterventionist) {
    throw ValidationError("counterfactual_policy needs a counterfactual criterion");
  }
  const auto& cf = spec.counterfactual();
  const Strata delta = cf.delta();
  const bool gain_equal = gain_equality_holds(spec, 1e-12 * (1.0 + delta.cwiseAbs().maxCoeff()));

  Decision d;
  d.policy.criterion = criterion;
  d.report.criterion = criterion;
  d.policy.provenance = fmt::format("{}; features L; strata bounds", to_string(criterion));

  for (const auto& b : bounds) {
    const double at_lo = delta.dot(b.at(b.harm.lo));
    const double at_hi = delta.dot(b.at(b.harm.hi));
    const Interval gain{std::min(at_lo, at_hi), std::max(at_lo, at_hi)};

    DecisionRow row;
    row.key = {b.label, std::nullopt};
    row.gain = gain;
    row.worst_regret = std::array<double, 2>{std::max(0.0, gain.hi), std::max(0.0, -gain.lo)};

    switch (criterion) {
      case Criterion::kCfPoint: {
        double value = 0.0;
        if (gain_equal) {
          value = gain_equality_diff(spec, b.p_y1, b.p_y0);
        } else if (b.point_identified(kPointTolerance)) {
          value = 0.5 * (gain.lo + gain.hi);
        } else {
          throw IdentificationError(fmt::format(
              "level {}: expected utility gain is not point-identified (ranges over [{:.6f}, {:.6f}])", b.label,
              gain.lo, gain.hi));
        }
        row.action = value > 0.0 ? Action::kTreat : Action::kWithhold;
        row.tie = std::abs(value) <= kTieTolerance;
        break;
      }
      case Criterion::kCfMinimaxRegret:
        row.action = gain.hi > -gain.lo ? Action::kTreat : Action::kWithhold;
        row.tie = std::abs(gain.hi + gain.lo) <= kTieTolerance;
        break;
      case Criterion::kCfMaximin:
        row.action = gain.lo > 0.0 ? Action::kTreat : Action::kWithhold;
        row.tie = std::abs(gain.lo) <= kTieTolerance;
        break;
      case Criterion::kCfBayes: {
        const PriorDensity uniform = [](double) { return 1.0; };
        const double mean_p = prior_mean(prior ? *prior : uniform, b.harm);
        const double value = delta.dot(b.at(mean_p));
        row.prior_gain = value;
        row.action = value > 0.0 ? Action::kTreat : Action::kWithhold;
        row.tie = std::abs(value) <= kTieTolerance;
        break;
      }
      case Criterion::kInterventionist:
        break;
    }
    d.policy.assignments.emplace_back(row.key, row.action);
    d.report.rows.push_back(std::move(row));
  }
  return d;
}

double policy_value(const FullLaw& law, const Policy& policy) {
  double value = 0.0;
  for (const auto& lv : law.levels) {
    for (Action astar : kActions) {
      const auto action = policy.find(lv.label, astar);
      if (!action) {
        throw ValidationError(fmt::format("policy assigns no action to L={}, A*={}", lv.label, index(astar)));
      }
      const Strata& s = lv.strata_given(astar);
      const double mean = *action == Action::kTreat ? s(index(Stratum::kHarmed)) + s(index(Stratum::kAlwaysOne))
                                                    : s(index(Stratum::kSaved)) + s(index(Stratum::kAlwaysOne));
      value += lv.p_level * lv.p_astar_is(astar) * mean;
    }
  }
  return value;
}

std::vector<StrataBounds> true_bounds(const FullLaw& law) {
  std::vector<StrataBounds> out;
  for (const auto& lv : law.levels) {
    const Strata s = lv.marginal_strata();
    const auto m = stratum_margins(s);
    const double p = s(index(Stratum::kHarmed));
    out.push_back({lv.label, m.p_y1, m.p_y0, {p, p}, BoundsSource::kTruth});
  }
  return out;
}

double excess_outcome(const FullLaw& law, const UtilitySpec& cf_spec, const UtilitySpec& int_spec,
                      Criterion criterion) {
  const auto truth = true_bounds(law);
  const auto cf = counterfactual_policy(truth, cf_spec, criterion);
  const auto in = interventionist_policy(means_from_full(law, false), int_spec, false);
  return policy_value(law, cf.policy) - policy_value(law, in.policy);
}

}  // namespace harm
