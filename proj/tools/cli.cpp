#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "harm/bounds.hpp"
#include "harm/decide.hpp"
#include "harm/error.hpp"
#include "harm/identify.hpp"
#include "harm/law.hpp"
#include "harm/simulate.hpp"
#include "harm/utility.hpp"
#include "harm/verify.hpp"

namespace harm::cli {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string law_path;
  std::string data_path;
  std::string utility_path;
  std::string out_path;
  std::string criterion = "interventionist";
  std::string props = "s3,s4,s5,sharpness,fusion";
  std::uint64_t seed = 1;
  std::size_t n = 1000;
  std::size_t trials = 100;
  double smoothing = 0.0;
  bool fuse = false;
  bool use_astar = false;
  bool oracle = false;
  bool machine = false;
};

std::string num(double x) { return fmt::format("{:.6f}", x); }

/// One output record: a plain-text line, or `kind\tkey:value...` with --machine.
class Record {
 public:
  explicit Record(std::string kind) : kind_(std::move(kind)) {}

  Record& add(std::string key, std::string value) {
    fields_.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  Record& add(std::string key, double value) { return add(std::move(key), num(value)); }

  void emit(std::ostream& out, bool machine, const std::string& text) const {
    if (!machine) {
      out << text << '\n';
      return;
    }
    out << kind_;
    for (const auto& [k, v] : fields_) out << '\t' << k << ':' << v;
    out << '\n';
  }

 private:
  std::string kind_;
  std::vector<std::pair<std::string, std::string>> fields_;
};

struct Inputs {
  ObservedLaw observed;
  std::optional<FullLaw> law;
  std::string source;
};

Inputs load_inputs(const RunConfig& cfg) {
  if (cfg.law_path.empty() == cfg.data_path.empty()) {
    throw UsageError("give exactly one of --law or --data");
  }
  Inputs in;
  if (!cfg.law_path.empty()) {
    in.law = read_law_file(cfg.law_path);
    in.observed = observed_from_full(*in.law);
    in.source = fmt::format("law {}", cfg.law_path);
  } else {
    const Dataset data = read_dataset_file(cfg.data_path);
    in.observed = estimate_observed_law(data, cfg.smoothing);
    in.source = fmt::format("data {} (n={}, smoothing={})", cfg.data_path, data.rows.size(), cfg.smoothing);
  }
  return in;
}

void print_source(std::ostream& out, const RunConfig& cfg, const std::string& source) {
  Record("source").add("input", source).emit(out, cfg.machine, fmt::format("# input: {}", source));
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.law_path.empty()) throw UsageError("simulate needs --law");
  if (cfg.n == 0) throw UsageError("--n must be at least 1");
  const FullLaw law = read_law_file(cfg.law_path);
  const Dataset data = sample_dataset(law, cfg.n, cfg.seed, cfg.oracle);
  if (cfg.out_path.empty()) {
    write_dataset_csv(out, data);
    return kOk;
  }
  std::ofstream file(cfg.out_path);
  if (!file) throw ValidationError(fmt::format("{}: cannot open for writing", cfg.out_path));
  write_dataset_csv(file, data);
  Record("simulate")
      .add("rows", std::to_string(data.rows.size()))
      .add("seed", std::to_string(data.seed))
      .add("out", cfg.out_path)
      .emit(out, cfg.machine, fmt::format("wrote {} rows (seed {}) to {}", data.rows.size(), data.seed, cfg.out_path));
  return kOk;
}

int cmd_identify(const RunConfig& cfg, std::ostream& out) {
  const Inputs in = load_inputs(cfg);
  print_source(out, cfg, in.source);
  const IdentifiedMeans means = identify_means(in.observed, cfg.fuse);
  for (const auto& m : means.levels) {
    Record("means")
        .add("level", m.label)
        .add("y1", m.mean[1])
        .add("y0", m.mean[0])
        .add("ate", m.ate())
        .emit(out, cfg.machine,
              fmt::format("E[Y^1|L={0}] = {1}\nE[Y^0|L={0}] = {2}\nATE(L={0}) = {3}", m.label, num(m.mean[1]),
                          num(m.mean[0]), num(m.ate())));
    if (!m.given_intent) continue;
    const auto& g = *m.given_intent;
    for (Action astar : kActions) {
      for (Action a : kActions) {
        const double v = g[index(a)][index(astar)];
        Record("fused_mean")
            .add("level", m.label)
            .add("a", std::to_string(index(a)))
            .add("astar", std::to_string(index(astar)))
            .add("value", v)
            .emit(out, cfg.machine,
                  fmt::format("E[Y^{}|A*={},L={}] = {}", index(a), index(astar), m.label, num(v)));
      }
    }
    const auto fx = att_atu(in.observed, m.label);
    Record("effects")
        .add("level", m.label)
        .add("att", fx.att)
        .add("atu", fx.atu)
        .emit(out, cfg.machine, fmt::format("ATT(L={0}) = {1}\nATU(L={0}) = {2}", m.label, num(fx.att), num(fx.atu)));
  }
  return kOk;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out) {
  const Inputs in = load_inputs(cfg);
  print_source(out, cfg, in.source);
  const auto all = strata_bounds(in.observed, cfg.fuse);
  for (const auto& b : all) {
    for (Stratum s : kStrata) {
      const auto iv = b.stratum(s);
      Record("bounds")
          .add("level", b.label)
          .add("stratum", std::to_string(code(s)))
          .add("lo", iv.lo)
          .add("hi", iv.hi)
          .add("source", to_string(b.source))
          .emit(out, cfg.machine,
                fmt::format("P(S={}|{}) ∈ [{}, {}] ({})", code(s), b.label, num(iv.lo), num(iv.hi),
                            to_string(b.source)));
    }
    if (cfg.fuse) {
      const auto& level = in.observed.level(b.label);
      const double closed = fused_lower_bound_s1(reconcile(level));
      const auto test = improvement_test(level);
      Record("improvement")
          .add("level", b.label)
          .add("fused_lower", closed)
          .add("improves", test.improves ? "1" : "0")
          .add("att", test.att)
          .add("atu", test.atu)
          .emit(out, cfg.machine,
                fmt::format("{}: closed-form fused lower bound {}; non-experimental data {} the lower bound "
                            "(ATT {}, ATU {})",
                            b.label, num(closed), test.improves ? "sharpens" : "does not sharpen", num(test.att),
                            num(test.atu)));
    }
  }
  return kOk;
}

void print_decision(std::ostream& out, const RunConfig& cfg, const Decision& d) {
  Record("policy")
      .add("criterion", to_string(d.policy.criterion))
      .add("provenance", d.policy.provenance)
      .emit(out, cfg.machine, fmt::format("# criterion: {} ({})", to_string(d.policy.criterion), d.policy.provenance));
  for (const auto& row : d.report.rows) {
    Record rec("decision");
    rec.add("feature", to_string(row.key)).add("action", std::to_string(index(row.action)));
    std::string text = fmt::format("{}  action={}", to_string(row.key), index(row.action));
    if (row.expected_utility) {
      const auto& u = *row.expected_utility;
      rec.add("u0", u[0]).add("u1", u[1]);
      text += fmt::format("  E[U|a=0]={}  E[U|a=1]={}", num(u[0]), num(u[1]));
    }
    if (row.gain) {
      rec.add("gain_lo", row.gain->lo).add("gain_hi", row.gain->hi);
      text += fmt::format("  gain∈[{}, {}]", num(row.gain->lo), num(row.gain->hi));
    }
    if (row.worst_regret) {
      const auto& r = *row.worst_regret;
      rec.add("regret0", r[0]).add("regret1", r[1]);
      text += fmt::format("  regret(a=0)={}  regret(a=1)={}", num(r[0]), num(r[1]));
    }
    if (row.prior_gain) {
      rec.add("prior_gain", *row.prior_gain);
      text += fmt::format("  prior-mean gain={}", num(*row.prior_gain));
    }
    rec.add("tie", row.tie ? "1" : "0");
    if (row.tie) text += "  (tie: withhold)";
    rec.emit(out, cfg.machine, text);
  }
}

Criterion criterion_of(const RunConfig& cfg) {
  auto c = parse_criterion(cfg.criterion);
  if (!c) throw UsageError(fmt::format("unknown criterion '{}'", cfg.criterion));
  return *c;
}

int cmd_decide(const RunConfig& cfg, std::ostream& out) {
  if (cfg.utility_path.empty()) throw UsageError("decide needs --utility");
  const Criterion criterion = criterion_of(cfg);
  const UtilitySpec spec = read_utility_file(cfg.utility_path);
  const Inputs in = load_inputs(cfg);

  Decision d;
  if (criterion == Criterion::kInterventionist) {
    d = interventionist_policy(identify_means(in.observed, cfg.fuse || cfg.use_astar), spec, cfg.use_astar);
  } else {
    if (cfg.use_astar) throw UsageError("--use-astar applies to the interventionist criterion only");
    spec.counterfactual();
    const auto bounds = strata_bounds(in.observed, cfg.fuse);
    d = counterfactual_policy(bounds, spec, criterion);
  }
  print_source(out, cfg, in.source);
  print_decision(out, cfg, d);
  return kOk;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  if (cfg.law_path.empty()) throw UsageError("compare needs --law (the true full law)");
  if (cfg.utility_path.empty()) throw UsageError("compare needs --utility with a GAMMA table");
  const FullLaw law = read_law_file(cfg.law_path);
  const UtilitySpec spec = read_utility_file(cfg.utility_path);
  spec.counterfactual();
  Criterion criterion = criterion_of(cfg);
  if (criterion == Criterion::kInterventionist) criterion = Criterion::kCfPoint;

  const auto l_only = interventionist_policy(means_from_full(law, false), spec, false);
  const auto with_intent = interventionist_policy(means_from_full(law, true), spec, true);
  const auto cf = counterfactual_policy(true_bounds(law), spec, criterion);

  const double v_l = policy_value(law, l_only.policy);
  const double v_intent = policy_value(law, with_intent.policy);
  const double v_cf = policy_value(law, cf.policy);
  const double excess = excess_outcome(law, spec, spec, criterion);

  print_source(out, cfg, fmt::format("law {}", cfg.law_path));
  Record("value").add("policy", "interventionist-L").add("ey", v_l).emit(
      out, cfg.machine, fmt::format("E[Y] under interventionist policy on L       = {}", num(v_l)));
  Record("value").add("policy", "interventionist-L-Astar").add("ey", v_intent).emit(
      out, cfg.machine, fmt::format("E[Y] under interventionist policy on (L, A*) = {}", num(v_intent)));
  Record("value").add("policy", to_string(criterion)).add("ey", v_cf).emit(
      out, cfg.machine, fmt::format("E[Y] under {} policy at true strata = {}", to_string(criterion), num(v_cf)));
  Record("excess").add("value", excess).emit(
      out, cfg.machine, fmt::format("excess outcome (counterfactual - interventionist) = {}", num(excess)));
  return kOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  if (cfg.trials == 0) throw UsageError("--trials must be at least 1");
  std::vector<std::string> names;
  std::stringstream ss(cfg.props);
  for (std::string name; std::getline(ss, name, ',');) {
    if (name.empty()) continue;
    if (std::find(kPropertyNames.begin(), kPropertyNames.end(), name) == kPropertyNames.end()) {
      throw UsageError(fmt::format("unknown property '{}'", name));
    }
    names.push_back(name);
  }
  if (names.empty()) throw UsageError("--props names no properties");

  bool all_ok = true;
  for (const auto& name : names) {
    const auto r = *run_property(name, cfg.trials, cfg.seed);
    all_ok = all_ok && r.ok();
    Record rec("verify");
    rec.add("prop", r.name)
        .add("passed", std::to_string(r.passed))
        .add("trials", std::to_string(r.trials))
        .add("seed", std::to_string(cfg.seed));
    std::string text = fmt::format("{}: {}/{} {}", r.name, r.passed, r.trials, r.ok() ? "pass" : "FAIL");
    for (std::size_t i = 0; i < r.notes.size(); ++i) {
      rec.add(fmt::format("note{}", i), r.notes[i]);
      text += fmt::format("\n  {}", r.notes[i]);
    }
    rec.emit(out, cfg.machine, text);
  }
  return all_ok ? kOk : kVerificationFailed;
}

void add_shared_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--law", cfg.law_path, "Full-law specification file");
  sub->add_option("--data", cfg.data_path, "Dataset CSV (R,L,A,Y)");
  sub->add_option("--utility", cfg.utility_path, "Utility specification file");
  sub->add_option("--seed", cfg.seed, "Random seed");
  sub->add_option("--n", cfg.n, "Sample size");
  sub->add_option("--smoothing", cfg.smoothing, "Add-lambda smoothing within (L, R) blocks")
      ->check(CLI::NonNegativeNumber);
  sub->add_flag("--fuse", cfg.fuse, "Use the non-experimental block as well as the trial");
  sub->add_flag("--use-astar", cfg.use_astar, "Condition interventionist decisions on A*");
  sub->add_option("--criterion", cfg.criterion, "interventionist|cf-point|cf-minimax-regret|cf-maximin|cf-bayes");
  sub->add_option("--trials", cfg.trials, "Random laws per property sweep");
  sub->add_flag("--oracle", cfg.oracle, "Emit hidden ASTAR,S columns");
  sub->add_flag("--machine", cfg.machine, "Tab-separated key:value records");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interventionist and counterfactual treatment decisions from trial and fused data", "harm"};
  app.require_subcommand(1, 1);
  RunConfig cfg;

  auto* simulate = app.add_subcommand("simulate", "Sample a dataset from a full law");
  auto* identify = app.add_subcommand("identify", "Identified potential-outcome means");
  auto* bounds = app.add_subcommand("bounds", "Bounds on principal-stratum probabilities");
  auto* decide = app.add_subcommand("decide", "Choose treatments under a decision criterion");
  auto* compare = app.add_subcommand("compare", "Policy values and excess outcome at the true law");
  auto* verify = app.add_subcommand("verify", "Randomized property sweeps");
  for (auto* sub : {simulate, identify, bounds, decide, compare, verify}) add_shared_flags(sub, cfg);
  simulate->add_option("--out", cfg.out_path, "Write the CSV here instead of standard output");
  verify->add_option("--props", cfg.props, "Comma-separated subset of s3,s4,s5,sharpness,fusion");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(cfg, out);
    if (identify->parsed()) return cmd_identify(cfg, out);
    if (bounds->parsed()) return cmd_bounds(cfg, out);
    if (decide->parsed()) return cmd_decide(cfg, out);
    if (compare->parsed()) return cmd_compare(cfg, out);
    if (verify->parsed()) return cmd_verify(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const IncompatibleLawError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const PositivityError& e) {
    err << "not identified: " << e.what() << '\n';
    return kNotIdentified;
  } catch (const IdentificationError& e) {
    err << "not identified: " << e.what() << '\n';
    return kNotIdentified;
  }
  return kUsage;
}

}  // namespace harm::cli
