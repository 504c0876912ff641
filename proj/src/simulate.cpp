#include "harm/simulate.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "harm/error.hpp"

namespace harm {

double Rng::exponential() {
  // Zero draws are rejected so stratum weights stay strictly positive.
  double e = 0.0;
  while (e <= 0.0) e = -std::log(1.0 - uniform());
  return e;
}

int Rng::categorical(std::span<const double> weights) {
  const double u = uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding can leave acc a hair below one; fall back to the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

Strata random_strata(Rng& rng) {
  Strata w;
  for (int s = 0; s < 4; ++s) w(s) = rng.exponential();
  return w / w.sum();
}

}  // namespace

FullLaw random_law(std::uint64_t seed, const RandomLawConfig& config) {
  if (config.levels == 0) throw ValidationError("random_law needs at least one level");
  Rng rng(seed);
  FullLaw law;
  double total = 0.0;
  for (std::size_t l = 0; l < config.levels; ++l) {
    FullLevel lv;
    lv.label = fmt::format("l{}", l);
    lv.p_level = rng.exponential();
    lv.p_trial = rng.uniform(0.2, 0.8);
    lv.p_treat = 0.5;
    lv.p_astar = rng.uniform(0.05, 0.95);
    lv.strata[1] = random_strata(rng);
    lv.strata[0] = config.confounding ? random_strata(rng) : lv.strata[1];
    total += lv.p_level;
    law.levels.push_back(std::move(lv));
  }
  for (auto& lv : law.levels) lv.p_level /= total;
  return validate_full_law(std::move(law));
}

Dataset sample_dataset(const FullLaw& law, std::size_t n, std::uint64_t seed, bool oracle) {
  if (n == 0) throw ValidationError("sample size must be at least 1");
  Rng rng(seed);
  Dataset data;
  data.oracle = oracle;
  data.seed = seed;
  std::vector<double> level_weights;
  for (const auto& lv : law.levels) {
    data.labels.push_back(lv.label);
    level_weights.push_back(lv.p_level);
  }
  data.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    DatasetRow row;
    row.level = static_cast<std::uint32_t>(rng.categorical(level_weights));
    const auto& lv = law.levels[row.level];
    row.r = rng.bernoulli(lv.p_trial);
    row.astar = rng.bernoulli(lv.p_astar);
    const Strata& given = lv.strata[row.astar];
    const auto s = kStrata[rng.categorical(std::span<const double>(given.data(), 4))];
    // The coin is drawn for every row so the stream does not depend on R.
    const bool coin = rng.bernoulli(lv.p_treat);
    row.a = row.r == 1 ? coin : row.astar;
    row.y = static_cast<std::uint8_t>(potential_outcome(s, action_from_index(row.a)));
    row.stratum = static_cast<std::uint8_t>(code(s));
    data.rows.push_back(row);
  }
  return data;
}

ObservedLaw estimate_observed_law(const Dataset& data, double smoothing) {
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    throw ValidationError(fmt::format("smoothing must be a finite non-negative number, got {:g}", smoothing));
  }
  if (data.rows.empty()) throw ValidationError("dataset has no rows");

  std::vector<std::array<std::array<std::int64_t, 4>, 2>> counts(data.labels.size());
  std::vector<std::int64_t> first_seen(data.labels.size(), -1);
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const auto& row = data.rows[i];
    counts[row.level][row.r][cell_index(row.y, action_from_index(row.a))] += 1;
    if (first_seen[row.level] < 0) first_seen[row.level] = static_cast<std::int64_t>(i);
  }

  std::vector<std::size_t> order;
  for (std::size_t l = 0; l < data.labels.size(); ++l) {
    if (first_seen[l] >= 0) order.push_back(l);
  }
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return first_seen[x] < first_seen[y]; });

  const double n_total = static_cast<double>(data.rows.size());
  ObservedLaw obs;
  for (auto l : order) {
    const auto& label = data.labels[l];
    const auto& c = counts[l];
    std::array<std::int64_t, 2> block{};
    for (int r = 0; r < 2; ++r) {
      for (auto v : c[r]) block[r] += v;
      if (block[r] == 0 && smoothing == 0.0) {
        throw ValidationError(fmt::format("empty block ({}, R={})", label, r));
      }
    }
    if (smoothing == 0.0) {
      for (Action a : kActions) {
        if (c[1][cell_index(0, a)] + c[1][cell_index(1, a)] == 0) {
          throw ValidationError(fmt::format("empty arm ({}, R=1, A={})", label, index(a)));
        }
      }
    }

    ObservedLevel lv;
    lv.label = label;
    lv.p_level = static_cast<double>(block[0] + block[1]) / n_total;
    lv.p_trial = static_cast<double>(block[1]) / static_cast<double>(block[0] + block[1]);
    for (int r = 0; r < 2; ++r) {
      const double denom = static_cast<double>(block[r]) + 4.0 * smoothing;
      for (int k = 0; k < 4; ++k) lv.joint[r](k) = (static_cast<double>(c[r][k]) + smoothing) / denom;
    }
    lv.cell_counts = c;
    obs.levels.push_back(std::move(lv));
  }
  return obs;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  fmt::print(out, "# seed={}\n", data.seed);
  out << (data.oracle ? "R,L,A,Y,ASTAR,S\n" : "R,L,A,Y\n");
  fmt::memory_buffer buf;
  for (const auto& row : data.rows) {
    buf.clear();
    if (data.oracle) {
      fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{}\n", row.r, data.labels[row.level], row.a, row.y,
                     row.astar, row.stratum);
    } else {
      fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", row.r, data.labels[row.level], row.a, row.y);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::uint8_t parse_code(std::string_view token, int lo, int hi, std::string_view column, std::string_view where) {
  int value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || value < lo || value > hi) {
    throw ValidationError(fmt::format("{}: column {} must be an integer in [{}, {}], got '{}'", where, column, lo,
                                      hi, token));
  }
  return static_cast<std::uint8_t>(value);
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, std::string_view source) {
  Dataset data;
  std::map<std::string, std::uint32_t, std::less<>> level_ids;
  bool have_header = false;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = fmt::format("{}:{}", source, lineno);
    if (line.front() == '#') {
      if (line.rfind("# seed=", 0) == 0) {
        const auto digits = std::string_view(line).substr(7);
        std::from_chars(digits.data(), digits.data() + digits.size(), data.seed);
      }
      continue;
    }
    if (!have_header) {
      if (line == "R,L,A,Y") {
        data.oracle = false;
      } else if (line == "R,L,A,Y,ASTAR,S") {
        data.oracle = true;
      } else {
        throw ValidationError(fmt::format("{}: expected header 'R,L,A,Y' or 'R,L,A,Y,ASTAR,S'", where));
      }
      have_header = true;
      continue;
    }
    const auto fields = split_commas(line);
    const std::size_t width = data.oracle ? 6 : 4;
    if (fields.size() != width) {
      throw ValidationError(fmt::format("{}: expected {} fields, got {}", where, width, fields.size()));
    }
    DatasetRow row;
    row.r = parse_code(fields[0], 0, 1, "R", where);
    if (fields[1].empty()) throw ValidationError(fmt::format("{}: empty level label", where));
    auto it = level_ids.find(fields[1]);
    if (it == level_ids.end()) {
      it = level_ids.emplace(std::string(fields[1]), static_cast<std::uint32_t>(data.labels.size())).first;
      data.labels.emplace_back(fields[1]);
    }
    row.level = it->second;
    row.a = parse_code(fields[2], 0, 1, "A", where);
    row.y = parse_code(fields[3], 0, 1, "Y", where);
    if (data.oracle) {
      row.astar = parse_code(fields[4], 0, 1, "ASTAR", where);
      row.stratum = parse_code(fields[5], 1, 4, "S", where);
      if (row.r == 0 && row.a != row.astar) {
        throw ValidationError(fmt::format("{}: A differs from ASTAR outside the trial", where));
      }
      const auto s = kStrata[row.stratum - 1];
      if (potential_outcome(s, action_from_index(row.a)) != row.y) {
        throw ValidationError(fmt::format("{}: Y is not the potential outcome of stratum {} under A={}", where,
                                          row.stratum, row.a));
      }
    }
    data.rows.push_back(row);
  }
  if (!have_header) throw ValidationError(fmt::format("{}: missing CSV header", source));
  return data;
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("{}: cannot open dataset", path));
  return read_dataset_csv(in, path);
}

}  // namespace harm
