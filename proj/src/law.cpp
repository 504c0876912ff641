#include "harm/law.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "harm/error.hpp"

namespace harm {

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= -kSumTolerance && p <= 1.0 + kSumTolerance; }

void require_probability(double p, std::string_view what, std::string_view where) {
  if (!is_probability(p)) {
    throw ValidationError(fmt::format("{} = {:g} is not a probability ({})", what, p, where));
  }
}

template <typename Levels>
std::size_t find_level(const Levels& levels, std::string_view label) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].label == label) return i;
  }
  throw ValidationError(fmt::format("unknown level '{}'", label));
}

}  // namespace

std::size_t FullLaw::level_index(std::string_view label) const { return find_level(levels, label); }

Strata FullLaw::marginal_strata() const {
  Strata total = Strata::Zero();
  for (const auto& lv : levels) total += lv.p_level * lv.marginal_strata();
  return total;
}

std::size_t ObservedLaw::level_index(std::string_view label) const { return find_level(levels, label); }

double ObservedLevel::p_action(int r, Action a) const {
  return joint[r](cell_index(0, a)) + joint[r](cell_index(1, a));
}

double ObservedLevel::p_outcome(int r) const {
  return joint[r](cell_index(1, Action::kWithhold)) + joint[r](cell_index(1, Action::kTreat));
}

double ObservedLevel::arm_mean(int r, Action a) const {
  const double mass = p_action(r, a);
  if (!(mass > 0.0)) {
    throw PositivityError(
        fmt::format("empty arm: P(A={} | L={}, R={}) = 0", index(a), label, r));
  }
  return p_cell(r, 1, a) / mass;
}

FullLaw validate_full_law(FullLaw raw) {
  if (raw.levels.empty()) throw ValidationError("law has no covariate levels");

  std::set<std::string> seen;
  double total = 0.0;
  for (const auto& lv : raw.levels) {
    if (!seen.insert(lv.label).second) {
      throw ValidationError(fmt::format("duplicate level '{}'", lv.label));
    }
    const auto where = fmt::format("level {}", lv.label);
    require_probability(lv.p_level, "P(L=l)", where);
    require_probability(lv.p_trial, "P(R=1|l)", where);
    require_probability(lv.p_treat, "P(A=1|l,R=1)", where);
    require_probability(lv.p_astar, "P(A*=1|l)", where);
    for (Action astar : kActions) {
      const Strata& block = lv.strata_given(astar);
      for (Stratum s : kStrata) {
        require_probability(block(index(s)), fmt::format("P(S={}|l,a*)", code(s)),
                            fmt::format("level {}, a*={}, stratum {}", lv.label, index(astar), code(s)));
      }
      const double sum = block.sum();
      if (std::abs(sum - 1.0) > kSumTolerance) {
        throw ValidationError(fmt::format("stratum block sums to {:g} (level {}, a*={})", sum,
                                          lv.label, index(astar)));
      }
    }
    total += lv.p_level;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw ValidationError(fmt::format("level probabilities sum to {:g}", total));
  }
  return raw;
}

ObservedLaw observed_from_full(const FullLaw& law) {
  ObservedLaw obs;
  obs.levels.reserve(law.levels.size());
  for (const auto& lv : law.levels) {
    ObservedLevel out;
    out.label = lv.label;
    out.p_level = lv.p_level;
    out.p_trial = lv.p_trial;

    const Strata marginal = lv.marginal_strata();
    for (Action a : kActions) {
      const double p_assigned = a == Action::kTreat ? lv.p_treat : 1.0 - lv.p_treat;
      const Strata& given_intent = lv.strata_given(a);
      for (Stratum s : kStrata) {
        const int y = potential_outcome(s, a);
        // Trial: A is a coin independent of S. Outside: A equals A*.
        out.joint[1](cell_index(y, a)) += p_assigned * marginal(index(s));
        out.joint[0](cell_index(y, a)) += lv.p_astar_is(a) * given_intent(index(s));
      }
    }
    obs.levels.push_back(std::move(out));
  }
  return obs;
}

StratumMargins stratum_margins(const Strata& strata) {
  StratumMargins m;
  m.p_y1 = strata(index(Stratum::kHarmed)) + strata(index(Stratum::kAlwaysOne));
  m.p_y0 = strata(index(Stratum::kSaved)) + strata(index(Stratum::kAlwaysOne));
  m.ate = m.p_y1 - m.p_y0;
  return m;
}

StratumMargins stratum_margins(const FullLaw& law, std::string_view label) {
  return stratum_margins(law.level(label).marginal_strata());
}

namespace {

struct PendingLevel {
  FullLevel level;
  bool has_trial = false;
  bool has_astar = false;
  std::array<bool, 2> has_strata{false, false};
};

double parse_number(std::string_view token, std::string_view where) {
  double value = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(fmt::format("{}: '{}' is not a number", where, token));
  }
  return value;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream ss(line.substr(0, line.find('#')));
  std::vector<std::string> tokens;
  for (std::string t; ss >> t;) tokens.push_back(t);
  return tokens;
}

}  // namespace

FullLaw parse_law(std::istream& in, std::string_view source) {
  std::vector<PendingLevel> pending;
  std::map<std::string, std::size_t, std::less<>> by_label;

  auto lookup = [&](const std::string& label, std::string_view where) -> PendingLevel& {
    auto it = by_label.find(label);
    if (it == by_label.end()) {
      throw ValidationError(fmt::format("{}: level '{}' used before its L record", where, label));
    }
    return pending[it->second];
  };

  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    const auto where = fmt::format("{}:{}", source, lineno);
    const std::string& kind = tokens[0];

    auto expect_fields = [&](std::size_t n) {
      if (tokens.size() != n) {
        throw ValidationError(
            fmt::format("{}: {} record takes {} fields, got {}", where, kind, n - 1, tokens.size() - 1));
      }
    };

    if (kind == "L") {
      expect_fields(3);
      if (by_label.count(tokens[1])) {
        throw ValidationError(fmt::format("{}: duplicate level '{}'", where, tokens[1]));
      }
      PendingLevel p;
      p.level.label = tokens[1];
      p.level.p_level = parse_number(tokens[2], where);
      by_label.emplace(tokens[1], pending.size());
      pending.push_back(std::move(p));
    } else if (kind == "TRIAL") {
      expect_fields(4);
      auto& p = lookup(tokens[1], where);
      p.level.p_trial = parse_number(tokens[2], where);
      p.level.p_treat = parse_number(tokens[3], where);
      p.has_trial = true;
    } else if (kind == "ASTAR") {
      expect_fields(3);
      auto& p = lookup(tokens[1], where);
      p.level.p_astar = parse_number(tokens[2], where);
      p.has_astar = true;
    } else if (kind == "S") {
      expect_fields(7);
      auto& p = lookup(tokens[1], where);
      const double astar = parse_number(tokens[2], where);
      if (astar != 0.0 && astar != 1.0) {
        throw ValidationError(fmt::format("{}: a* must be 0 or 1, got '{}'", where, tokens[2]));
      }
      const int a = static_cast<int>(astar);
      for (int s = 0; s < 4; ++s) p.level.strata[a](s) = parse_number(tokens[3 + s], where);
      p.has_strata[a] = true;
    } else {
      throw ValidationError(fmt::format("{}: unknown record kind '{}'", where, kind));
    }
  }

  FullLaw law;
  for (auto& p : pending) {
    const auto& label = p.level.label;
    if (!p.has_trial) throw ValidationError(fmt::format("{}: level {} has no TRIAL record", source, label));
    if (!p.has_astar) throw ValidationError(fmt::format("{}: level {} has no ASTAR record", source, label));
    for (int a = 0; a < 2; ++a) {
      if (!p.has_strata[a]) {
        throw ValidationError(fmt::format("{}: level {} has no S record for a*={}", source, label, a));
      }
    }
    law.levels.push_back(std::move(p.level));
  }
  try {
    return validate_full_law(std::move(law));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", source, e.what()));
  }
}

FullLaw read_law_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("{}: cannot open law file", path));
  return parse_law(in, path);
}

void write_law(std::ostream& out, const FullLaw& law) {
  for (const auto& lv : law.levels) {
    fmt::print(out, "L {} {:.17g}\n", lv.label, lv.p_level);
    fmt::print(out, "TRIAL {} {:.17g} {:.17g}\n", lv.label, lv.p_trial, lv.p_treat);
    fmt::print(out, "ASTAR {} {:.17g}\n", lv.label, lv.p_astar);
    for (int a = 0; a < 2; ++a) {
      const auto& s = lv.strata[a];
      fmt::print(out, "S {} {} {:.17g} {:.17g} {:.17g} {:.17g}\n", lv.label, a, s(0), s(1), s(2), s(3));
    }
  }
}

}  // namespace harm
