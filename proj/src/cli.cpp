#include "stochord/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "stochord/distributions.hpp"
#include "stochord/harness.hpp"
#include "stochord/io.hpp"
#include "stochord/rc_order.hpp"

namespace stochord::cli {
namespace {

using io::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int exit_for(Status s) {
  return s == Status::holds ? kExitHolds : s == Status::refuted ? kExitRefuted : kExitUnknown;
}

double env_tail_cap() {
  const char* v = std::getenv("STOCHORD_TAIL_CAP");
  if (v == nullptr || *v == '\0') return dist::kDefaultTailCap;
  char* end = nullptr;
  const double cap = std::strtod(v, &end);
  if (end == v || *end != '\0' || !(cap > 0.0 && cap < 1.0)) {
    throw UsageError("STOCHORD_TAIL_CAP must be a number in (0, 1)");
  }
  return cap;
}

// Input files: parse and validate, reporting any defect as malformed input.
io::PairFile load_pair(const std::string& path) {
  try {
    io::PairFile f = io::pair_file_from_json(io::read_json_file(path));
    f.config1.validate();
    f.config2.validate();
    if (f.config1.family != f.config2.family) throw io::MalformedInput("families differ");
    if (f.config1.size() != f.config2.size()) throw io::MalformedInput("sizes differ");
    return f;
  } catch (const PreconditionError& e) {
    throw io::MalformedInput(path + ": " + e.what());
  }
}

dist::ConvolutionSpec load_spec(const std::string& path, int which) {
  try {
    const json j = io::read_json_file(path);
    dist::ConvolutionSpec s;
    if (j.is_object() && j.contains("config1")) {
      const io::PairFile f = io::pair_file_from_json(j);
      s = which == 2 ? f.config2 : f.config1;
    } else {
      s = io::spec_from_json(j);
    }
    s.validate();
    return s;
  } catch (const PreconditionError& e) {
    throw io::MalformedInput(path + ": " + e.what());
  }
}

arrangement::PairClass order_pair(const dist::ConvolutionSpec& s, bool log_scales) {
  arrangement::PairClass p{s.shapes, s.scales};
  if (log_scales) {
    for (double& v : p.y) v = std::log(v);
  }
  return p;
}

void emit(std::ostream& out, const std::optional<std::string>& path, const std::string& text,
          bool append) {
  if (!path) {
    out << text;
    return;
  }
  std::ofstream f(*path, append ? std::ios::app : std::ios::trunc);
  if (!f) throw UsageError("cannot write " + *path);
  f << text;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = std::stoull(s);
      return {v, v};
    }
    const auto a = std::stoull(s.substr(0, dots));
    const auto b = std::stoull(s.substr(dots + 2));
    if (b < a) throw UsageError("--seeds range is empty");
    return {a, b};
  } catch (const std::logic_error&) {
    throw UsageError("--seeds expects A..B");
  }
}

struct Common {
  std::optional<double> tail_cap;
  bool no_timing = false;
  double tail() const { return tail_cap ? *tail_cap : env_tail_cap(); }
};

struct CheckOrder {
  std::string input;
  std::string mode = "weak";
  bool log_scales = false;
  std::size_t budget = rc::kDefaultSearchBudget;
  std::optional<std::string> emit_witness;
  std::optional<std::string> verify_witness;

  int operator()(std::ostream& out) const {
    const io::PairFile f = load_pair(input);
    rc::ChainMode m;
    try {
      m = rc::chain_mode_from_string(mode);
    } catch (const PreconditionError& e) {
      throw UsageError(e.what());
    }
    const auto p1 = order_pair(f.config1, log_scales);
    const auto p2 = order_pair(f.config2, log_scales);
    if (verify_witness) {
      rc::RcChain chain;
      try {
        chain = io::chain_from_json(io::read_json_file(*verify_witness), m);
      } catch (const PreconditionError& e) {
        throw io::MalformedInput(*verify_witness + ": " + e.what());
      }
      const bool ok = rc::verify_witness(p1, p2, chain);
      out << json{{"witness", *verify_witness}, {"accepted", ok}}.dump() << '\n';
      return ok ? kExitHolds : kExitRefuted;
    }
    const rc::RcVerdict v = rc::decide_wrc(p1, p2, m, budget, f.waypoints);
    json j{{"status", std::string(to_string(v.status))},
           {"mode", rc::to_string(m)},
           {"route", v.route},
           {"moves", v.witness ? json(v.witness->moves.size()) : json(nullptr)},
           {"violation", v.violation ? json(v.violation->describe()) : json(nullptr)},
           {"witness", v.witness ? io::chain_to_json(*v.witness) : json(nullptr)}};
    out << j.dump() << '\n';
    if (emit_witness && v.witness) emit(out, emit_witness, io::chain_to_json(*v.witness).dump(2) + "\n", false);
    return exit_for(v.status);
  }
};

struct Verify {
  std::string input;
  std::string order;
  std::optional<std::string> output;

  int operator()(std::ostream& out, const Common& c) const {
    const io::PairFile f = load_pair(input);
    harness::Order o;
    try {
      o = harness::order_from_string(order);
    } catch (const PreconditionError& e) {
      throw UsageError(e.what());
    }
    harness::Tolerances tol;
    tol.tail_cap = c.tail();
    const harness::Report r =
        harness::verify_theorem_instance(f.config1, f.config2, o, tol, f.waypoints);
    emit(out, output, harness::report_to_json(r, !c.no_timing).dump() + "\n", true);
    return exit_for(r.status);
  }
};

struct Identity {
  std::string prop;
  double alpha = 1.0;
  double p1 = 0.5;
  double p2 = 0.4;
  double c0 = 0.5;
  double lambda_mix = 0.1;
  double lambda_target = 0.3;
  double beta = 1.0;
  double tol = 1e-9;

  int operator()(std::ostream& out, const Common& c) const {
    const double cap = c.tail();
    json j{{"prop", prop}};
    double residual = 0.0;
    double bound = 0.0;
    auto pair_p = [&] {
      if (!(lambda_mix <= lambda_target)) {
        throw UsageError("--lambda-mix must not exceed --lambda-target (latent success would exceed 1)");
      }
      return (c0 * c0 - lambda_target * lambda_target) / (c0 * c0 - lambda_mix * lambda_mix);
    };
    try {
      if (prop == "nb-mixture") {
        const auto latent = dist::shifted_nb_pmf({alpha, p1}, cap);
        const auto lhs = dist::shape_mixture_pmf(latent, p2, cap);
        const auto rhs = dist::shifted_nb_pmf({alpha, p1 * p2}, cap);
        residual = dist::linf_distance(lhs, rhs);
        bound = lhs.tail_bound + rhs.tail_bound;
        j["params"] = {{"alpha", alpha}, {"p1", p1}, {"p2", p2}};
      } else if (prop == "nb-pair") {
        const double p = pair_p();
        const auto lhs = dist::coupled_pair_mixture_pmf(alpha, c0, lambda_mix, p, cap);
        const auto rhs = dist::convolve(dist::shifted_nb_pmf({alpha, c0 + lambda_target}, cap / 2),
                                        dist::shifted_nb_pmf({alpha, c0 - lambda_target}, cap / 2));
        residual = dist::linf_distance(lhs, rhs);
        bound = lhs.tail_bound + rhs.tail_bound;
        j["params"] = {{"alpha", alpha}, {"c0", c0}, {"lambda_mix", lambda_mix},
                       {"lambda_target", lambda_target}, {"latent_p", p}};
      } else if (prop == "gamma-single" || prop == "gamma-pair") {
        std::optional<dist::GammaMixture> lhs, rhs;
        std::function<double(double)> exact;
        if (prop == "gamma-single") {
          lhs.emplace(dist::shifted_nb_pmf({alpha, p1}, cap), beta);
          exact = [&](double t) { return dist::reg_lower_incomplete_gamma(alpha, p1 * beta * t); };
          j["params"] = {{"alpha", alpha}, {"p", p1}, {"beta", beta}};
        } else {
          const double p = pair_p();
          const double common = 2.0 * (c0 + lambda_target);
          lhs.emplace(dist::coupled_pair_mixture_pmf(alpha, c0 / common, lambda_mix / common, p, cap),
                      common);
          rhs.emplace(dist::ConvolutionSpec{dist::Family::gamma, {alpha, alpha},
                                            {c0 + lambda_target, c0 - lambda_target}},
                      cap, common);
          exact = [&](double t) { return rhs->cdf(t); };
          j["params"] = {{"alpha", alpha}, {"c0", c0}, {"lambda_mix", lambda_mix},
                         {"lambda_target", lambda_target}, {"latent_p", p}};
        }
        const double top = lhs->quantile(0.999);
        for (int k = 0; k < 64; ++k) {
          const double t = top * k / 63.0;
          residual = std::max(residual, std::abs(lhs->cdf(t) - exact(t)));
        }
        bound = lhs->error_bound() + (rhs ? rhs->error_bound() : 1e-14);
      } else {
        throw UsageError("unknown --prop '" + prop + "'");
      }
    } catch (const PreconditionError& e) {
      throw UsageError(e.what());
    }
    j["residual"] = residual;
    j["error_bound"] = bound;
    j["tolerance"] = tol;
    j["holds"] = residual <= tol;
    out << j.dump() << '\n';
    return residual <= tol ? kExitHolds : kExitRefuted;
  }
};

struct Harness {
  std::string scenario;
  std::string seeds = "0..9";
  std::string family = "negbin";
  std::size_t n = 0;
  bool reversed = false;
  std::optional<std::string> output;

  int operator()(std::ostream& out, const Common& c) const {
    harness::Scenario s;
    try {
      s.kind = harness::scenario_from_string(scenario);
      s.family = dist::family_from_string(family);
    } catch (const PreconditionError& e) {
      throw UsageError(e.what());
    }
    s.n = n;
    s.reversed = reversed;
    const auto [a, b] = parse_seed_range(seeds);
    harness::Tolerances tol;
    tol.tail_cap = c.tail();
    std::ostringstream lines;
    bool all_hold = true;
    bool discrepancy = false;
    for (std::uint64_t seed = a; seed <= b; ++seed) {
      s.seed = seed;
      harness::Report r;
      try {
        r = harness::run_scenario(s, tol);
      } catch (const PreconditionError& e) {
        throw UsageError(e.what());
      }
      lines << harness::report_to_json(r, !c.no_timing).dump() << '\n';
      all_hold = all_hold && r.status == Status::holds;
      discrepancy = discrepancy || r.agreement == "discrepancy";
    }
    emit(out, output, lines.str(), true);
    return discrepancy ? kExitRefuted : all_hold ? kExitHolds : kExitUnknown;
  }
};

struct Explore {
  std::size_t budget = 100;
  std::uint64_t seed = 0;
  std::optional<std::string> output;

  int operator()(std::ostream& out, const Common& c) const {
    if (budget == 0) throw UsageError("--budget must be >= 1");
    harness::Tolerances tol;
    tol.tail_cap = c.tail();
    const auto found = harness::explore_counterexamples(budget, seed, tol);
    json list = json::array();
    for (const auto& cand : found) list.push_back(harness::candidate_to_json(cand));
    const json j{{"budget", budget}, {"seed", seed}, {"candidates", list},
                 {"conclusion", found.empty() ? "inconclusive" : "evidence"}};
    emit(out, output, j.dump(2) + "\n", false);
    return kExitHolds;
  }
};

struct ExportSurvival {
  std::string input;
  int which = 1;
  std::size_t grid = 256;
  std::optional<std::string> output;

  int operator()(std::ostream& out, const Common& c) const {
    const dist::ConvolutionSpec s = load_spec(input, which);
    RealVector at, value, error;
    if (s.family == dist::Family::negbin) {
      const auto f = dist::nb_convolution(s, c.tail());
      long double below = 0.0L;
      for (std::size_t k = 0; k < f.size(); ++k) {
        at.push_back(static_cast<double>(k));
        value.push_back(static_cast<double>(1.0L - below));
        error.push_back(f.tail_bound + f.rel_error);
        below += f.probs[k];
      }
    } else {
      if (grid < 2) throw UsageError("--grid-size must be >= 2");
      const dist::GammaMixture m(s, c.tail());
      const double top = m.quantile(0.999);
      for (std::size_t k = 0; k < grid; ++k) {
        const double t = top * static_cast<double>(k) / static_cast<double>(grid - 1);
        at.push_back(t);
        value.push_back(1.0 - m.cdf(t));
        error.push_back(m.error_bound());
      }
    }
    std::ostringstream csv;
    io::write_csv(csv, at, value, error);
    emit(out, output, csv.str(), false);
    return kExitHolds;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic order checks for gamma and negative binomial convolutions",
               "stochord"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--tail-cap", common.tail_cap, "Tail mass cap (default: STOCHORD_TAIL_CAP or 1e-12)")
      ->check(CLI::Range(1e-300, 0.5));
  app.add_flag("--no-timing", common.no_timing, "Omit runtime fields from reports");

  CheckOrder check;
  auto* c1 = app.add_subcommand("check-order", "Decide the parameter order for a pair file");
  c1->add_option("input", check.input, "Pair file")->required();
  c1->add_option("--mode", check.mode, "strict or weak")->capture_default_str();
  c1->add_flag("--log-scales", check.log_scales, "Compare log scales");
  c1->add_option("--budget", check.budget, "Search node budget")->capture_default_str();
  c1->add_option("--emit-witness", check.emit_witness, "Write the witness chain here");
  c1->add_option("--verify-witness", check.verify_witness, "Check a witness file instead");

  Verify verify;
  auto* c2 = app.add_subcommand("verify", "Parameter order plus numeric certificate");
  c2->add_option("input", verify.input, "Pair file")->required();
  c2->add_option("--order", verify.order, "conv or st")->required();
  c2->add_option("--out", verify.output, "Append the report to this JSON-lines file");

  Identity identity;
  auto* c3 = app.add_subcommand("identity", "Residual of a mixture identity");
  c3->add_option("--prop", identity.prop, "nb-mixture, nb-pair, gamma-single or gamma-pair")
      ->required();
  c3->add_option("--alpha", identity.alpha)->capture_default_str();
  c3->add_option("--p1", identity.p1)->capture_default_str();
  c3->add_option("--p2", identity.p2)->capture_default_str();
  c3->add_option("--c0", identity.c0)->capture_default_str();
  c3->add_option("--lambda-mix", identity.lambda_mix, "Spread on the mixture side")
      ->capture_default_str();
  c3->add_option("--lambda-target", identity.lambda_target, "Spread on the plain side")
      ->capture_default_str();
  c3->add_option("--beta", identity.beta)->capture_default_str();
  c3->add_option("--tol", identity.tol)->capture_default_str()->check(CLI::PositiveNumber);

  Harness harness_cmd;
  auto* c4 = app.add_subcommand("harness", "Run a scenario over a seed range");
  c4->add_option("--scenario", harness_cmd.scenario)->required();
  c4->add_option("--seeds", harness_cmd.seeds, "A..B inclusive")->capture_default_str();
  c4->add_option("--family", harness_cmd.family)->capture_default_str();
  c4->add_option("--n", harness_cmd.n, "Size; 0 for the scenario default")->capture_default_str();
  c4->add_flag("--reversed", harness_cmd.reversed, "Verify spec2 against spec1");
  c4->add_option("--out", harness_cmd.output, "Append reports to this JSON-lines file");

  Explore explore;
  auto* c5 = app.add_subcommand("explore", "Search for weak log-rc gamma pairs failing the reduction");
  c5->add_option("--budget", explore.budget)->capture_default_str();
  c5->add_option("--seed", explore.seed)->capture_default_str();
  c5->add_option("--out", explore.output);

  ExportSurvival survival;
  auto* c6 = app.add_subcommand("export-survival", "Survival curve as CSV");
  c6->add_option("input", survival.input, "Spec or pair file")->required();
  c6->add_option("--config", survival.which, "1 or 2 for pair files")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  c6->add_option("--grid-size", survival.grid)->capture_default_str();
  c6->add_option("--out", survival.output);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "stochord: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*c1) return check(out);
    if (*c2) return verify(out, common);
    if (*c3) return identity(out, common);
    if (*c4) return harness_cmd(out, common);
    if (*c5) return explore(out, common);
    return survival(out, common);
  } catch (const UsageError& e) {
    err << "stochord: " << e.what() << '\n';
    return kExitUsage;
  } catch (const io::MalformedInput& e) {
    err << "stochord: malformed input: " << e.what() << '\n';
    return kExitDataErr;
  } catch (const NumericFailure& e) {
    err << "stochord: numeric failure: " << e.what() << '\n';
    return kExitSoftware;
  } catch (const PreconditionError& e) {
    err << "stochord: " << e.what() << '\n';
    return kExitUsage;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace stochord::cli
