#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace harm {

/// Polytope {x : A x = b, x >= 0} in a small number of variables.
template <typename Scalar, int Vars>
struct EqualityPolytope {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Vars> lhs;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs;

  int rows() const { return static_cast<int>(lhs.rows()); }

  void add_row(const Eigen::Matrix<Scalar, 1, Vars>& coeffs, const Scalar& value) {
    const int r = rows();
    lhs.conservativeResize(r + 1, Eigen::NoChange);
    rhs.conservativeResize(r + 1);
    lhs.row(r) = coeffs;
    rhs(r) = value;
  }
};

template <typename Scalar>
struct ValueRange {
  Scalar lo;
  Scalar hi;
};

namespace detail {

template <typename Scalar>
bool near_zero(const Scalar& x, const Scalar& tol) {
  using std::abs;
  return abs(x) <= tol;
}

/// Row-reduces [A | b] in place and returns its rank. Pivots on the largest
/// magnitude in the column; entries within `tol` of zero count as zero.
template <typename Scalar>
int row_reduce(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& aug, int vars, const Scalar& tol) {
  using std::abs;
  const int rows = static_cast<int>(aug.rows());
  int rank = 0;
  for (int col = 0; col < vars && rank < rows; ++col) {
    int pivot = -1;
    Scalar best = tol;
    for (int r = rank; r < rows; ++r) {
      const Scalar mag = abs(aug(r, col));
      if (mag > best) {
        best = mag;
        pivot = r;
      }
    }
    if (pivot < 0) continue;
    aug.row(rank).swap(aug.row(pivot));
    const Scalar lead = aug(rank, col);
    aug.row(rank) /= lead;
    for (int r = 0; r < rows; ++r) {
      if (r == rank || aug(r, col) == Scalar(0)) continue;
      const Scalar factor = aug(r, col);
      aug.row(r) -= factor * aug.row(rank);
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

/// Exact minimum and maximum of `target . x` over a bounded equality
/// polytope, by enumerating every basic feasible solution.
///
/// Redundant rows are dropped first; a dependent row whose right-hand side
/// is not zero within `tol` makes the system infeasible. Basic solutions
/// with a component below -tol are rejected and tiny negatives are clamped.
/// With an exact Scalar pass tol = 0. Returns nullopt when no vertex exists.
template <typename Scalar, int Vars>
std::optional<ValueRange<Scalar>> vertex_range(const EqualityPolytope<Scalar, Vars>& poly,
                                               const Eigen::Matrix<Scalar, Vars, 1>& target,
                                               const Scalar& tol) {
  static_assert(Vars > 0 && Vars <= 16, "vertex enumeration is meant for tiny systems");
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Dense aug(poly.rows(), Vars + 1);
  aug.leftCols(Vars) = poly.lhs;
  aug.col(Vars) = poly.rhs;
  const int rank = detail::row_reduce(aug, Vars, tol);
  for (int r = rank; r < aug.rows(); ++r) {
    if (!detail::near_zero(aug(r, Vars), tol)) return std::nullopt;
  }
  const Dense reduced = aug.topRows(rank);

  std::optional<ValueRange<Scalar>> range;
  std::vector<int> basis;
  for (std::uint32_t mask = 0; mask < (1u << Vars); ++mask) {
    if (std::popcount(mask) != rank) continue;
    basis.clear();
    for (int v = 0; v < Vars; ++v) {
      if (mask & (1u << v)) basis.push_back(v);
    }

    Dense sub(rank, rank + 1);
    for (int j = 0; j < rank; ++j) sub.col(j) = reduced.col(basis[j]);
    sub.col(rank) = reduced.col(Vars);
    if (detail::row_reduce(sub, rank, tol) != rank) continue;

    Eigen::Matrix<Scalar, Vars, 1> x = Eigen::Matrix<Scalar, Vars, 1>::Zero();
    bool feasible = true;
    for (int j = 0; j < rank && feasible; ++j) {
      Scalar value = sub(j, rank);
      if (value < -tol) feasible = false;
      if (value < Scalar(0)) value = Scalar(0);
      x(basis[j]) = value;
    }
    if (!feasible) continue;

    const Scalar objective = target.dot(x);
    if (!range) {
      range = ValueRange<Scalar>{objective, objective};
    } else {
      if (objective < range->lo) range->lo = objective;
      if (objective > range->hi) range->hi = objective;
    }
  }
  return range;
}

}  // namespace harm
