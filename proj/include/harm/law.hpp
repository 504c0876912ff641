#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harm/types.hpp"

namespace harm {

/// Sum-to-one tolerance for probability blocks read from decimal text.
inline constexpr double kSumTolerance = 1e-9;

/// One covariate level of the full counterfactual law.
///
/// Strata are stored conditional on the intention-to-treat value A*, so
/// that confounding between A* and the potential outcomes is expressible.
/// Trial participation R is independent of (S, A*) given the level, the
/// trial randomizes A with probability `p_treat`, and outside the trial the
/// received treatment equals A*.
struct FullLevel {
  std::string label;
  double p_level = 0.0;  // P(L=l)
  double p_trial = 0.5;  // P(R=1 | l)
  double p_treat = 0.5;  // P(A=1 | l, R=1)
  double p_astar = 0.0;  // P(A*=1 | l)
  std::array<Strata, 2> strata{Strata::Zero(), Strata::Zero()};  // P(S | l, A*=a*), by a*

  double p_astar_is(Action astar) const { return astar == Action::kTreat ? p_astar : 1.0 - p_astar; }
  const Strata& strata_given(Action astar) const { return strata[index(astar)]; }

  /// P(S | l), mixing over A*.
  Strata marginal_strata() const { return (1.0 - p_astar) * strata[0] + p_astar * strata[1]; }
};

struct FullLaw {
  std::vector<FullLevel> levels;

  /// Throws ValidationError for an unknown label.
  std::size_t level_index(std::string_view label) const;
  const FullLevel& level(std::string_view label) const { return levels[level_index(label)]; }

  /// P(S=s) marginal over levels.
  Strata marginal_strata() const;
};

/// One covariate level of the observed-data law.
struct ObservedLevel {
  std::string label;
  double p_level = 0.0;
  double p_trial = 0.5;
  std::array<Cells, 2> joint{Cells::Zero(), Cells::Zero()};  // P(Y=y, A=a | l, R=r), by r

  /// Raw cell counts when the law was estimated from a sample, by r.
  std::optional<std::array<std::array<std::int64_t, 4>, 2>> cell_counts;

  /// P(A=a | l, R=r).
  double p_action(int r, Action a) const;
  /// P(Y=1 | l, R=r).
  double p_outcome(int r) const;
  /// P(Y=y, A=a | l, R=r).
  double p_cell(int r, int y, Action a) const { return joint[r](cell_index(y, a)); }
  /// P(Y=1 | A=a, l, R=r); throws PositivityError when the arm is empty.
  double arm_mean(int r, Action a) const;
};

struct ObservedLaw {
  std::vector<ObservedLevel> levels;

  std::size_t level_index(std::string_view label) const;
  const ObservedLevel& level(std::string_view label) const { return levels[level_index(label)]; }
};

/// Returns `raw` unchanged when every invariant holds, otherwise throws
/// ValidationError naming the first violation and its location.
FullLaw validate_full_law(FullLaw raw);

/// Pushes a validated full law forward to the observed-data law.
ObservedLaw observed_from_full(const FullLaw& law);

struct StratumMargins {
  double p_y1 = 0.0;  // P(Y^1 = 1 | l)
  double p_y0 = 0.0;  // P(Y^0 = 1 | l)
  double ate = 0.0;   // p_y1 - p_y0 == P(S=1|l) - P(S=2|l)
};

StratumMargins stratum_margins(const FullLaw& law, std::string_view label);
StratumMargins stratum_margins(const Strata& strata);

/// Reads the line-oriented law format. `source` names the input in errors.
/// The result is validated.
FullLaw parse_law(std::istream& in, std::string_view source = "<law>");
FullLaw read_law_file(const std::string& path);
void write_law(std::ostream& out, const FullLaw& law);

}  // namespace harm
