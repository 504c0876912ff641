#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "harm/types.hpp"

namespace harm {

/// Stratum-level utilities gamma(s, a), with the gain delta(s) derived from
/// them on demand. Only constructible with a full 4x2 table.
class CounterfactualUtility {
 public:
  using Table = Eigen::Matrix<double, 4, 2>;  // row index(s), column index(a)

  explicit CounterfactualUtility(const Table& gamma) : gamma_(gamma) {}

  const Table& gamma() const { return gamma_; }
  double gamma(Stratum s, Action a) const { return gamma_(index(s), index(a)); }

  /// delta(s) = gamma(s, 1) - gamma(s, 0).
  Strata delta() const { return gamma_.col(1) - gamma_.col(0); }

  /// Slope of the expected gain in P(S=1) along the identified family:
  /// delta(1) + delta(2) - delta(3) - delta(4).
  double gain_imbalance() const;

 private:
  Table gamma_;
};

/// mu(y, a) for the interventionist approach plus an optional gamma(s, a)
/// for the counterfactual approach.
struct UtilitySpec {
  Eigen::Matrix2d mu = Eigen::Matrix2d::Zero();  // row y, column a
  std::optional<CounterfactualUtility> gamma;

  double mu_at(int y, Action a) const { return mu(y, index(a)); }

  /// Throws ValidationError when the spec is purely interventionist.
  const CounterfactualUtility& counterfactual() const;

  /// mu(y, a) = 1 - y.
  static UtilitySpec survival();
  /// gamma(s, a) = mu(Y^a(s), a) for the given interventionist table.
  static CounterfactualUtility induced_by(const Eigen::Matrix2d& mu);
};

UtilitySpec make_utility(const Eigen::Matrix2d& mu, std::optional<CounterfactualUtility::Table> gamma = {});

/// Builds a delta-only spec: gamma(s, 1) = delta(s), gamma(s, 0) = 0.
UtilitySpec from_gains(const Strata& delta);

/// |(delta1 + delta2) - (delta3 + delta4)| <= tol.
bool gain_equality_holds(const UtilitySpec& spec, double tol = 1e-12);

/// -delta(1) > delta(2): withholding from a harmed patient gains more than
/// treating a saved patient.
bool harm_asymmetric(const UtilitySpec& spec);

/// sum_s delta(s) * P(S=s | l) = E[U2^1 | l] - E[U2^0 | l].
double expected_cf_utility_diff(const UtilitySpec& spec, const Strata& strata);

/// Same difference from the identified margins, valid only under gain
/// equality: (d1 - d4) p_y1 + (d3 - d1) p_y0 + d4.
double gain_equality_diff(const UtilitySpec& spec, double p_y1, double p_y0);

/// mu(1, a) p + mu(0, a) (1 - p), with p = P(Y^a = 1 | features).
double expected_int_utility(const UtilitySpec& spec, Action a, double p_ya);

/// Reads `MU <y> <a> <value>` and `GAMMA <s> <a> <value>` lines.
UtilitySpec parse_utility(std::istream& in, std::string_view source = "<utility>");
UtilitySpec read_utility_file(const std::string& path);

}  // namespace harm
