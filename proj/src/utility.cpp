#include "harm/utility.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "harm/error.hpp"
#include "harm/law.hpp"

namespace harm {

double CounterfactualUtility::gain_imbalance() const {
  const Strata d = delta();
  return (d(0) + d(1)) - (d(2) + d(3));
}

const CounterfactualUtility& UtilitySpec::counterfactual() const {
  if (!gamma) throw ValidationError("utility spec has no GAMMA table; counterfactual utility is undefined");
  return *gamma;
}

UtilitySpec UtilitySpec::survival() {
  UtilitySpec spec;
  spec.mu << 1.0, 1.0, 0.0, 0.0;
  return spec;
}

CounterfactualUtility UtilitySpec::induced_by(const Eigen::Matrix2d& mu) {
  CounterfactualUtility::Table g;
  for (Stratum s : kStrata) {
    for (Action a : kActions) g(index(s), index(a)) = mu(potential_outcome(s, a), index(a));
  }
  return CounterfactualUtility(g);
}

UtilitySpec make_utility(const Eigen::Matrix2d& mu, std::optional<CounterfactualUtility::Table> gamma) {
  UtilitySpec spec;
  spec.mu = mu;
  if (gamma) spec.gamma.emplace(*gamma);
  return spec;
}

UtilitySpec from_gains(const Strata& delta) {
  CounterfactualUtility::Table g = CounterfactualUtility::Table::Zero();
  g.col(1) = delta;
  return make_utility(Eigen::Matrix2d::Zero(), g);
}

bool gain_equality_holds(const UtilitySpec& spec, double tol) {
  return std::abs(spec.counterfactual().gain_imbalance()) <= tol;
}

bool harm_asymmetric(const UtilitySpec& spec) {
  const Strata d = spec.counterfactual().delta();
  return -d(index(Stratum::kHarmed)) > d(index(Stratum::kSaved));
}

double expected_cf_utility_diff(const UtilitySpec& spec, const Strata& strata) {
  const auto& cf = spec.counterfactual();
  if ((strata.array() < -kSumTolerance).any() || std::abs(strata.sum() - 1.0) > kSumTolerance) {
    throw ValidationError(fmt::format("stratum probabilities ({:g}, {:g}, {:g}, {:g}) are not a distribution",
                                      strata(0), strata(1), strata(2), strata(3)));
  }
  return cf.delta().dot(strata);
}

double gain_equality_diff(const UtilitySpec& spec, double p_y1, double p_y0) {
  const auto& cf = spec.counterfactual();
  if (!gain_equality_holds(spec, 1e-12 * (1.0 + cf.delta().cwiseAbs().maxCoeff()))) {
    throw IdentificationError(
        fmt::format("gain equality fails (delta1 + delta2 - delta3 - delta4 = {:g}); the margin-only "
                    "formula does not apply",
                    cf.gain_imbalance()));
  }
  const Strata d = cf.delta();
  return (d(0) - d(3)) * p_y1 + (d(2) - d(0)) * p_y0 + d(3);
}

double expected_int_utility(const UtilitySpec& spec, Action a, double p_ya) {
  return spec.mu_at(1, a) * p_ya + spec.mu_at(0, a) * (1.0 - p_ya);
}

namespace {

double parse_number(const std::string& token, std::string_view where) {
  double value = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ValidationError(fmt::format("{}: '{}' is not a number", where, token));
  }
  return value;
}

int parse_index(const std::string& token, int lo, int hi, std::string_view what, std::string_view where) {
  const double v = parse_number(token, where);
  if (v != std::floor(v) || v < lo || v > hi) {
    throw ValidationError(fmt::format("{}: {} must be an integer in [{}, {}], got '{}'", where, what, lo, hi, token));
  }
  return static_cast<int>(v);
}

}  // namespace

UtilitySpec parse_utility(std::istream& in, std::string_view source) {
  Eigen::Matrix2d mu = Eigen::Matrix2d::Zero();
  Eigen::Matrix<bool, 2, 2> have_mu = Eigen::Matrix<bool, 2, 2>::Constant(false);
  CounterfactualUtility::Table gamma = CounterfactualUtility::Table::Zero();
  Eigen::Matrix<bool, 4, 2> have_gamma = Eigen::Matrix<bool, 4, 2>::Constant(false);

  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    std::istringstream ss(line.substr(0, line.find('#')));
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    const auto where = fmt::format("{}:{}", source, lineno);
    if (tokens.size() != 4) {
      throw ValidationError(fmt::format("{}: expected '<KIND> <index> <a> <value>'", where));
    }
    const int a = parse_index(tokens[2], 0, 1, "a", where);
    const double value = parse_number(tokens[3], where);
    if (tokens[0] == "MU") {
      const int y = parse_index(tokens[1], 0, 1, "y", where);
      if (have_mu(y, a)) throw ValidationError(fmt::format("{}: duplicate MU {} {}", where, y, a));
      mu(y, a) = value;
      have_mu(y, a) = true;
    } else if (tokens[0] == "GAMMA") {
      const int s = parse_index(tokens[1], 1, 4, "s", where);
      if (have_gamma(s - 1, a)) throw ValidationError(fmt::format("{}: duplicate GAMMA {} {}", where, s, a));
      gamma(s - 1, a) = value;
      have_gamma(s - 1, a) = true;
    } else {
      throw ValidationError(fmt::format("{}: unknown record kind '{}'", where, tokens[0]));
    }
  }

  if (!have_mu.all()) throw ValidationError(fmt::format("{}: all four MU entries are required", source));
  if (have_gamma.any() && !have_gamma.all()) {
    throw ValidationError(fmt::format("{}: GAMMA needs all eight (s, a) entries once any is given", source));
  }
  return make_utility(mu, have_gamma.any() ? std::optional(gamma) : std::nullopt);
}

UtilitySpec read_utility_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("{}: cannot open utility file", path));
  return parse_utility(in, path);
}

}  // namespace harm
