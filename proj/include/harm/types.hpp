#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Core>

namespace harm {

/// Binary treatment. Ties in every decision rule resolve to kWithhold.
enum class Action : int { kWithhold = 0, kTreat = 1 };

constexpr int index(Action a) { return static_cast<int>(a); }
constexpr Action action_from_index(int i) { return i == 0 ? Action::kWithhold : Action::kTreat; }
constexpr std::array<Action, 2> kActions{Action::kWithhold, Action::kTreat};

/// Joint pair of potential outcomes (Y under treatment, Y under control).
enum class Stratum : int {
  kHarmed = 1,     // (1, 0)
  kSaved = 2,      // (0, 1)
  kAlwaysOne = 3,  // (1, 1)
  kNeverOne = 4,   // (0, 0)
};

constexpr std::array<Stratum, 4> kStrata{Stratum::kHarmed, Stratum::kSaved, Stratum::kAlwaysOne,
                                         Stratum::kNeverOne};

/// Zero-based slot of a stratum in a StrataVector.
constexpr int index(Stratum s) { return static_cast<int>(s) - 1; }
constexpr int code(Stratum s) { return static_cast<int>(s); }

/// Value of the potential outcome under `a` for members of stratum `s`.
constexpr int potential_outcome(Stratum s, Action a) {
  switch (s) {
    case Stratum::kHarmed: return a == Action::kTreat ? 1 : 0;
    case Stratum::kSaved: return a == Action::kTreat ? 0 : 1;
    case Stratum::kAlwaysOne: return 1;
    case Stratum::kNeverOne: return 0;
  }
  return 0;
}

/// Inverse of potential_outcome: the stratum with outcomes (y1, y0).
constexpr Stratum stratum_from_outcomes(int y1, int y0) {
  if (y1 == 1) return y0 == 0 ? Stratum::kHarmed : Stratum::kAlwaysOne;
  return y0 == 1 ? Stratum::kSaved : Stratum::kNeverOne;
}

/// Stratum probabilities, slot index(s).
template <typename Scalar>
using StrataVector = Eigen::Matrix<Scalar, 4, 1>;

/// Joint probabilities P(Y=y, A=a) in slot cell_index(y, a).
template <typename Scalar>
using CellVector = Eigen::Matrix<Scalar, 4, 1>;

constexpr int cell_index(int y, Action a) { return 2 * y + index(a); }

using Strata = StrataVector<double>;
using Cells = CellVector<double>;

/// Closed interval on the real line.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  double width() const { return hi - lo; }
};

}  // namespace harm
