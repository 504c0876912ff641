#include "harm/identify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "harm/error.hpp"

namespace harm {

double compatibility_tolerance(const ObservedLevel& level) {
  if (!level.cell_counts) return kCompatibilityTolerance;
  const auto& counts = *level.cell_counts;
  std::int64_t smallest = std::numeric_limits<std::int64_t>::max();
  for (Action a : kActions) {
    smallest = std::min(smallest, counts[1][cell_index(0, a)] + counts[1][cell_index(1, a)]);
  }
  std::int64_t observational = 0;
  for (auto c : counts[0]) observational += c;
  smallest = std::max<std::int64_t>(1, std::min(smallest, observational));
  return std::max(kCompatibilityTolerance, 5.0 / std::sqrt(static_cast<double>(smallest)));
}

double exp_potential_mean(const ObservedLaw& obs, Action a, std::string_view label) {
  return obs.level(label).arm_mean(1, a);
}

double fused_potential_mean(const ObservedLevel& level, Action a, Action astar, double tol) {
  if (a == astar) return level.arm_mean(0, a);

  const double p_intent = level.p_action(0, astar);
  if (!(p_intent > 0.0)) {
    throw PositivityError(
        fmt::format("empty intention group: P(A={} | L={}, R=0) = 0", index(astar), level.label));
  }
  const double raw = (level.arm_mean(1, a) - level.p_cell(0, 1, a)) / p_intent;
  if (raw < -tol || raw > 1.0 + tol) {
    throw IncompatibleLawError(fmt::format(
        "incompatible laws at level {}: E[Y^{} | A*={}] identifies to {:.9g}, outside [0, 1]",
        level.label, index(a), index(astar), raw));
  }
  return std::clamp(raw, 0.0, 1.0);
}

double fused_potential_mean(const ObservedLaw& obs, Action a, Action astar, std::string_view label) {
  const auto& level = obs.level(label);
  return fused_potential_mean(level, a, astar, compatibility_tolerance(level));
}

TreatmentEffects att_atu(const ObservedLevel& level, double tol) {
  using enum Action;
  TreatmentEffects fx;
  fx.att = fused_potential_mean(level, kTreat, kTreat, tol) - fused_potential_mean(level, kWithhold, kTreat, tol);
  fx.atu = fused_potential_mean(level, kTreat, kWithhold, tol) -
           fused_potential_mean(level, kWithhold, kWithhold, tol);
  return fx;
}

TreatmentEffects att_atu(const ObservedLaw& obs, std::string_view label) {
  const auto& level = obs.level(label);
  return att_atu(level, compatibility_tolerance(level));
}

IdentifiedMeans identify_means(const ObservedLaw& obs, bool fuse) {
  IdentifiedMeans out;
  out.fused = fuse;
  for (const auto& level : obs.levels) {
    LevelMeans m;
    m.label = level.label;
    for (Action a : kActions) m.mean[index(a)] = level.arm_mean(1, a);
    if (fuse) {
      const double tol = compatibility_tolerance(level);
      std::array<std::array<double, 2>, 2> given{};
      for (Action a : kActions) {
        for (Action astar : kActions) given[index(a)][index(astar)] = fused_potential_mean(level, a, astar, tol);
      }
      m.given_intent = given;
      m.p_astar = level.p_action(0, Action::kTreat);
    }
    out.levels.push_back(std::move(m));
  }
  return out;
}

IdentifiedMeans means_from_full(const FullLaw& law, bool with_intent) {
  IdentifiedMeans out;
  out.fused = with_intent;
  for (const auto& lv : law.levels) {
    LevelMeans m;
    m.label = lv.label;
    const auto margins = stratum_margins(lv.marginal_strata());
    m.mean = {margins.p_y0, margins.p_y1};
    if (with_intent) {
      std::array<std::array<double, 2>, 2> given{};
      for (Action astar : kActions) {
        const auto within = stratum_margins(lv.strata_given(astar));
        given[0][index(astar)] = within.p_y0;
        given[1][index(astar)] = within.p_y1;
      }
      m.given_intent = given;
      m.p_astar = lv.p_astar;
    }
    out.levels.push_back(std::move(m));
  }
  return out;
}

ObservedLevel reconcile(const ObservedLevel& level) {
  ObservedLevel out = level;
  const double p1 = level.p_action(0, Action::kTreat);
  const double p0 = level.p_action(0, Action::kWithhold);
  if (!(p1 > 0.0) || !(p0 > 0.0)) return out;

  const double tol = compatibility_tolerance(level);
  for (Action a : kActions) {
    const double mixed = fused_potential_mean(level, a, Action::kTreat, tol) * p1 +
                         fused_potential_mean(level, a, Action::kWithhold, tol) * p0;
    const double arm = level.p_action(1, a);
    out.joint[1](cell_index(1, a)) = arm * mixed;
    out.joint[1](cell_index(0, a)) = arm * (1.0 - mixed);
  }
  return out;
}

ObservedLaw reconcile(const ObservedLaw& obs) {
  ObservedLaw out;
  out.levels.reserve(obs.levels.size());
  for (const auto& level : obs.levels) out.levels.push_back(reconcile(level));
  return out;
}

}  // namespace harm
