#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "harm/law.hpp"

namespace harm {

/// Seeded stream built on std::mt19937_64. Uniforms take the top 53 bits of
/// each draw, so the sequence is identical on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard exponential; strictly positive.
  double exponential();
  bool bernoulli(double p) { return uniform() < p; }
  /// Index drawn with the given (normalized) weights.
  int categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

/// Independent stream seed for the `stream`-th sub-task of `base`
/// (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct RandomLawConfig {
  std::size_t levels = 1;
  bool confounding = true;
};

/// Deterministic in `seed`. Stratum vectors are four independent
/// exponential weights normalized to one (uniform on the simplex); without
/// confounding both A* groups share one stratum vector.
FullLaw random_law(std::uint64_t seed, const RandomLawConfig& config = {});

struct DatasetRow {
  std::uint8_t r = 0;
  std::uint32_t level = 0;  // index into Dataset::labels
  std::uint8_t a = 0;
  std::uint8_t y = 0;
  std::uint8_t astar = 0;    // oracle only
  std::uint8_t stratum = 0;  // oracle only, code 1..4
};

struct Dataset {
  std::vector<std::string> labels;
  std::vector<DatasetRow> rows;
  bool oracle = false;
  std::uint64_t seed = 0;
};

/// Draws L, then R, then A* independently of R, then A (a coin with the
/// trial probability when R=1, A* when R=0), then S given (L, A*), and sets
/// Y to the potential outcome of the received treatment.
Dataset sample_dataset(const FullLaw& law, std::size_t n, std::uint64_t seed, bool oracle);

/// Plug-in law with add-`smoothing` counts inside each (l, r) block.
/// Levels appear in order of first occurrence.
ObservedLaw estimate_observed_law(const Dataset& data, double smoothing = 0.0);

/// CSV with header R,L,A,Y (plus ASTAR,S in oracle mode), preceded by a
/// `# seed=<seed>` comment line.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in, std::string_view source = "<data>");
Dataset read_dataset_file(const std::string& path);

}  // namespace harm
