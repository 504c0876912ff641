#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harm/law.hpp"
#include "harm/types.hpp"

namespace harm {

/// Slack allowed on an exactly specified law before experimental and
/// non-experimental blocks are declared incompatible.
inline constexpr double kCompatibilityTolerance = 1e-9;

/// Incompatibility slack for one level: kCompatibilityTolerance for exact
/// laws, and ten worst-case binomial standard errors (5 / sqrt(n)) of the
/// smallest contributing cell group for laws estimated from a sample.
double compatibility_tolerance(const ObservedLevel& level);

/// E[Y^a | L=l] from the trial arm.
double exp_potential_mean(const ObservedLaw& obs, Action a, std::string_view label);

/// E[Y^a | A*=a*, L=l] from the fused trial and non-experimental blocks.
///
/// For a == a* the non-experimental arm mean is returned. Otherwise the
/// trial arm mean minus the non-experimental joint P(Y=1, A=a | R=0),
/// divided by P(A=a* | R=0). A raw ratio further than `tol` outside [0, 1]
/// raises IncompatibleLawError; anything closer is clamped.
double fused_potential_mean(const ObservedLevel& level, Action a, Action astar, double tol);
double fused_potential_mean(const ObservedLaw& obs, Action a, Action astar, std::string_view label);

struct TreatmentEffects {
  double att = 0.0;  // E[Y^1 - Y^0 | A*=1, l]
  double atu = 0.0;  // E[Y^1 - Y^0 | A*=0, l]
};

TreatmentEffects att_atu(const ObservedLevel& level, double tol);
TreatmentEffects att_atu(const ObservedLaw& obs, std::string_view label);

/// Identified potential-outcome means for one level.
struct LevelMeans {
  std::string label;
  std::array<double, 2> mean{};  // E[Y^a | l], by a
  /// E[Y^a | A*=a*, l] as given_intent[a][a*]; present for fused inputs.
  std::optional<std::array<std::array<double, 2>, 2>> given_intent;
  double p_astar = 0.0;  // P(A*=1 | l); meaningful only when fused

  double ate() const { return mean[1] - mean[0]; }
};

struct IdentifiedMeans {
  std::vector<LevelMeans> levels;
  bool fused = false;  // true when the non-experimental block was used
};

IdentifiedMeans identify_means(const ObservedLaw& obs, bool fuse);

/// The same means read directly off a full law.
IdentifiedMeans means_from_full(const FullLaw& law, bool with_intent);

/// Projects each level onto the set of observed laws a single fused full
/// law can produce: conditional means are clamped within tolerance and the
/// trial arms are rebuilt as their mixtures over A*. Exact push-forwards
/// are returned up to rounding.
ObservedLevel reconcile(const ObservedLevel& level);
ObservedLaw reconcile(const ObservedLaw& obs);

}  // namespace harm
