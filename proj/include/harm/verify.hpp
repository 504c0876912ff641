#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace harm {

/// Outcome of one randomized property sweep. A trial is one random law.
struct SweepResult {
  std::string name;
  std::size_t trials = 0;
  std::size_t passed = 0;
  std::vector<std::string> notes;

  bool ok() const { return passed == trials; }
};

inline constexpr std::array<std::string_view, 5> kPropertyNames{"s3", "s4", "s5", "sharpness", "fusion"};

/// E[Y^1] - E[Y^g] <= P(S=1) for ten random stratum-dependent regimes per law.
SweepResult verify_regime_bound(std::size_t trials, std::uint64_t seed);

/// For noise-only regimes: the product identity tau^g == tau^0 P(A^{g+}=0)
/// and the clipped dominance max(0, tau^0) >= max(0, tau^g). Laws where the
/// unclipped tau^0 >= tau^g fails are counted in the notes.
SweepResult verify_noise_regimes(std::size_t trials, std::uint64_t seed);

/// improvement_test fires iff the fused lower bound beats max(0, ate),
/// over confounded laws; near-ties are skipped and counted.
SweepResult verify_improvement_iff(std::size_t trials, std::uint64_t seed);

/// Vertex enumeration matches the closed forms, the redundant candidates
/// stay dominated, and every interval contains the truth.
SweepResult verify_sharpness(std::size_t trials, std::uint64_t seed);

/// Fused means reproduce the law's conditional means and mix back to the
/// trial means.
SweepResult verify_fusion_roundtrip(std::size_t trials, std::uint64_t seed);

/// Dispatches on a name from kPropertyNames; nullopt for unknown names.
std::optional<SweepResult> run_property(std::string_view name, std::size_t trials, std::uint64_t seed);

}  // namespace harm
