#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harm/law.hpp"
#include "harm/types.hpp"
#include "harm/vertex_lp.hpp"

namespace harm {

// ---------------------------------------------------------------------------
// One-parameter identified family
// ---------------------------------------------------------------------------

/// Stratum probabilities with margins (p_y1, p_y0) and P(S=1) = p:
/// (p, p - ate, p_y1 - p, 1 - p_y0 - p).
template <typename Scalar>
StrataVector<Scalar> strata_family(const Scalar& p_y1, const Scalar& p_y0, const Scalar& p) {
  StrataVector<Scalar> s;
  s << p, p - (p_y1 - p_y0), p_y1 - p, Scalar(1) - p_y0 - p;
  return s;
}

enum class BoundsSource { kExperimental, kFused, kTruth };

const char* to_string(BoundsSource source);

/// Identified set of P(S | l) for one level: the family above over
/// p in `harm`.
struct StrataBounds {
  std::string label;
  double p_y1 = 0.0;
  double p_y0 = 0.0;
  Interval harm;  // feasible range of p = P(S=1 | l)
  BoundsSource source = BoundsSource::kExperimental;

  Strata at(double p) const { return strata_family(p_y1, p_y0, p); }
  Interval stratum(Stratum s) const;
  bool point_identified(double tol = 1e-12) const { return harm.width() <= tol; }
};

// ---------------------------------------------------------------------------
// Linear constraint system over the joint (S, A*) cells of one level
// ---------------------------------------------------------------------------

inline constexpr int kJointCells = 8;

/// Slot of P(S=s, A*=a* | l) in the joint cell vector.
constexpr int joint_index(Stratum s, Action astar) { return 2 * index(s) + index(astar); }

template <typename Scalar>
using JointFunctional = Eigen::Matrix<Scalar, kJointCells, 1>;

template <typename Scalar>
using LinearConstraintSystem = EqualityPolytope<Scalar, kJointCells>;

/// The observed quantities a level contributes to the constraint system.
template <typename Scalar>
struct LevelObservation {
  Scalar p_y1;  // P(Y=1 | A=1, l, R=1)
  Scalar p_y0;  // P(Y=1 | A=0, l, R=1)
  std::optional<CellVector<Scalar>> non_experimental;  // P(Y=y, A=a | l, R=0)
};

/// Throws PositivityError for an empty trial arm.
LevelObservation<double> level_observation(const ObservedLevel& level, bool fused);

template <typename Scalar>
JointFunctional<Scalar> stratum_functional(Stratum s) {
  JointFunctional<Scalar> f = JointFunctional<Scalar>::Zero();
  f(joint_index(s, Action::kWithhold)) = Scalar(1);
  f(joint_index(s, Action::kTreat)) = Scalar(1);
  return f;
}

/// Constraints every joint (S, A*) law compatible with the observation
/// satisfies. The trial fixes both potential-outcome margins; the
/// non-experimental block fixes, within each intention group, the outcome
/// under the intended treatment.
template <typename Scalar>
LinearConstraintSystem<Scalar> make_constraint_system(const LevelObservation<Scalar>& obs) {
  using Row = Eigen::Matrix<Scalar, 1, kJointCells>;
  LinearConstraintSystem<Scalar> sys;

  Row total = Row::Ones();
  sys.add_row(total, Scalar(1));
  for (Action a : kActions) {
    Row margin = Row::Zero();
    for (Stratum s : kStrata) {
      if (potential_outcome(s, a) == 1) {
        margin(joint_index(s, Action::kWithhold)) = Scalar(1);
        margin(joint_index(s, Action::kTreat)) = Scalar(1);
      }
    }
    sys.add_row(margin, a == Action::kTreat ? obs.p_y1 : obs.p_y0);
  }

  if (obs.non_experimental) {
    for (Action a : kActions) {
      for (int y = 0; y < 2; ++y) {
        Row cell = Row::Zero();
        for (Stratum s : kStrata) {
          if (potential_outcome(s, a) == y) cell(joint_index(s, a)) = Scalar(1);
        }
        sys.add_row(cell, (*obs.non_experimental)(cell_index(y, a)));
      }
    }
  }
  return sys;
}

/// Sharp range of `target` over the system. Throws IncompatibleLawError
/// when the polytope is empty.
Interval sharp_bounds_lp(const LinearConstraintSystem<double>& sys, const JointFunctional<double>& target,
                         double tol = 1e-9);

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// Trial-only bounds: P(S=1|l) in [max(0, ate), min(p_y1, 1 - p_y0)].
StrataBounds exp_bounds(const ObservedLevel& level);
StrataBounds exp_bounds(const ObservedLaw& obs, std::string_view label);

/// All six lower-bound candidates for P(S=1|l) from trial plus
/// non-experimental data, in order: 0, ate, P(Y=1|R=1) - p_y0,
/// p_y1 - P(Y=1|R=1), P(Y=1|R=0) - p_y0, p_y1 - P(Y=1|R=0).
/// The third and fourth never exceed max(0, ate): the trial outcome rate is a
/// convex combination of the two arm means.
std::array<double, 6> fused_lower_bound_terms(const ObservedLevel& level);

/// max{0, ate, P(Y=1|R=0) - p_y0, p_y1 - P(Y=1|R=0)}.
double fused_lower_bound_s1(const ObservedLevel& level);
double fused_lower_bound_s1(const ObservedLaw& obs, std::string_view label);

/// Sharp bounds from the fused constraint system, after reconciling the
/// level. The lower end of `harm` agrees with fused_lower_bound_s1; the
/// upper end comes from the vertex enumeration only.
StrataBounds fused_bounds(const ObservedLevel& level);

std::vector<StrataBounds> strata_bounds(const ObservedLaw& obs, bool fuse);

// ---------------------------------------------------------------------------
// Regimes and lower bounds on harm
// ---------------------------------------------------------------------------

/// A possibly random regime: the probability of assigning treatment given
/// the level index, the intention A* and the stratum. Randomization by
/// exogenous noise is folded into the returned probability.
using Regime = std::function<double(std::size_t level, Action astar, Stratum s)>;

/// E[Y^1] - E[Y^g], by enumeration over (l, a*, s).
double regime_lower_bound(const FullLaw& law, const Regime& regime);

/// P(A^{g+} = 0): probability the regime withholds treatment.
double regime_withhold_probability(const FullLaw& law, const Regime& regime);

struct ImprovementResult {
  bool improves = false;
  double att = 0.0;
  double atu = 0.0;
};

/// Whether the non-experimental block sharpens the lower bound on harm:
/// true iff ATT and ATU have strictly opposite signs.
ImprovementResult improvement_test(const ObservedLevel& level);
ImprovementResult improvement_test(const ObservedLaw& obs, std::string_view label);

}  // namespace harm
