#include "harm/bounds.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "harm/error.hpp"
#include "harm/identify.hpp"

namespace harm {

const char* to_string(BoundsSource source) {
  switch (source) {
    case BoundsSource::kExperimental: return "experimental";
    case BoundsSource::kFused: return "fused";
    case BoundsSource::kTruth: return "true law";
  }
  return "unknown";
}

Interval StrataBounds::stratum(Stratum s) const {
  // Each stratum is affine in p; evaluate both ends and order them.
  const double a = at(harm.lo)(index(s));
  const double b = at(harm.hi)(index(s));
  return {std::min(a, b), std::max(a, b)};
}

LevelObservation<double> level_observation(const ObservedLevel& level, bool fused) {
  LevelObservation<double> obs{level.arm_mean(1, Action::kTreat), level.arm_mean(1, Action::kWithhold),
                               std::nullopt};
  if (fused) obs.non_experimental = level.joint[0];
  return obs;
}

Interval sharp_bounds_lp(const LinearConstraintSystem<double>& sys, const JointFunctional<double>& target,
                         double tol) {
  const auto range = vertex_range(sys, target, tol);
  if (!range) throw IncompatibleLawError("incompatible observed law: constraint system is infeasible");
  return {range->lo, range->hi};
}

StrataBounds exp_bounds(const ObservedLevel& level) {
  StrataBounds b;
  b.label = level.label;
  b.p_y1 = level.arm_mean(1, Action::kTreat);
  b.p_y0 = level.arm_mean(1, Action::kWithhold);
  b.harm = {std::max(0.0, b.p_y1 - b.p_y0), std::min(b.p_y1, 1.0 - b.p_y0)};
  b.source = BoundsSource::kExperimental;
  return b;
}

StrataBounds exp_bounds(const ObservedLaw& obs, std::string_view label) { return exp_bounds(obs.level(label)); }

std::array<double, 6> fused_lower_bound_terms(const ObservedLevel& level) {
  const double p_y1 = level.arm_mean(1, Action::kTreat);
  const double p_y0 = level.arm_mean(1, Action::kWithhold);
  const double trial = level.p_outcome(1);
  const double outside = level.p_outcome(0);
  return {0.0, p_y1 - p_y0, trial - p_y0, p_y1 - trial, outside - p_y0, p_y1 - outside};
}

double fused_lower_bound_s1(const ObservedLevel& level) {
  const auto t = fused_lower_bound_terms(level);
  return std::max({t[0], t[1], t[4], t[5]});
}

double fused_lower_bound_s1(const ObservedLaw& obs, std::string_view label) {
  return fused_lower_bound_s1(obs.level(label));
}

StrataBounds fused_bounds(const ObservedLevel& level) {
  const ObservedLevel compatible = reconcile(level);
  const auto obs = level_observation(compatible, true);
  const auto sys = make_constraint_system(obs);

  StrataBounds b;
  b.label = level.label;
  b.p_y1 = obs.p_y1;
  b.p_y0 = obs.p_y0;
  try {
    b.harm = sharp_bounds_lp(sys, stratum_functional<double>(Stratum::kHarmed));
  } catch (const IncompatibleLawError& e) {
    throw IncompatibleLawError(fmt::format("level {}: {}", level.label, e.what()));
  }
  b.source = BoundsSource::kFused;
  return b;
}

std::vector<StrataBounds> strata_bounds(const ObservedLaw& obs, bool fuse) {
  std::vector<StrataBounds> out;
  out.reserve(obs.levels.size());
  for (const auto& level : obs.levels) out.push_back(fuse ? fused_bounds(level) : exp_bounds(level));
  return out;
}

double regime_lower_bound(const FullLaw& law, const Regime& regime) {
  double treated = 0.0;
  double under_regime = 0.0;
  for (std::size_t l = 0; l < law.levels.size(); ++l) {
    const auto& lv = law.levels[l];
    for (Action astar : kActions) {
      for (Stratum s : kStrata) {
        const double mass = lv.p_level * lv.p_astar_is(astar) * lv.strata_given(astar)(index(s));
        if (mass == 0.0) continue;
        const double treat = regime(l, astar, s);
        treated += mass * potential_outcome(s, Action::kTreat);
        under_regime += mass * (treat * potential_outcome(s, Action::kTreat) +
                                (1.0 - treat) * potential_outcome(s, Action::kWithhold));
      }
    }
  }
  return treated - under_regime;
}

double regime_withhold_probability(const FullLaw& law, const Regime& regime) {
  double withheld = 0.0;
  for (std::size_t l = 0; l < law.levels.size(); ++l) {
    const auto& lv = law.levels[l];
    for (Action astar : kActions) {
      for (Stratum s : kStrata) {
        const double mass = lv.p_level * lv.p_astar_is(astar) * lv.strata_given(astar)(index(s));
        if (mass != 0.0) withheld += mass * (1.0 - regime(l, astar, s));
      }
    }
  }
  return withheld;
}

ImprovementResult improvement_test(const ObservedLevel& level) {
  const auto fx = att_atu(level, compatibility_tolerance(level));
  const bool opposite = (fx.att > 0.0 && fx.atu < 0.0) || (fx.att < 0.0 && fx.atu > 0.0);
  return {opposite, fx.att, fx.atu};
}

ImprovementResult improvement_test(const ObservedLaw& obs, std::string_view label) {
  return improvement_test(obs.level(label));
}

}  // namespace harm
