#include "stochord/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

namespace stochord::harness {

using arrangement::PairClass;
using dist::ConvolutionSpec;
using dist::Family;

namespace {

constexpr double kShapeLo = 0.2;
constexpr double kShapeHi = 3.0;
constexpr double kProbLo = 0.05;
constexpr double kProbHi = 0.95;
constexpr double kRateLo = 0.5;
constexpr double kRateHi = 5.0;
constexpr std::array<double, 3> kExploreRateFactors{2.0, 4.0, 8.0};

constexpr std::array<std::pair<ScenarioKind, const char*>, 14> kNames{{
    {ScenarioKind::raise_alpha, "RaiseAlpha"},
    {ScenarioKind::lower_beta, "LowerBeta"},
    {ScenarioKind::majorize_beta, "MajorizeBeta"},
    {ScenarioKind::diff_alpha_majorize_beta, "DiffAlphaMajorizeBeta"},
    {ScenarioKind::majorize_alpha, "MajorizeAlpha"},
    {ScenarioKind::conv_ai, "ConvAI"},
    {ScenarioKind::rc_general, "RcGeneral"},
    {ScenarioKind::gamma_conv, "GammaConv"},
    {ScenarioKind::opposite_ordered_weak, "OppositeOrderedWeak"},
    {ScenarioKind::log_majorize_beta_st, "LogMajorizeBetaSt"},
    {ScenarioKind::st_general, "StGeneral"},
    {ScenarioKind::ai_tail, "AITail"},
    {ScenarioKind::coupled_gamma_pair, "CoupledGammaPair"},
    {ScenarioKind::mixture_lemma_st, "MixtureLemmaSt"},
}};

using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c),
                    static_cast<std::uint32_t>(d)};
  return Rng(seq);
}

double unif(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// n values in [lo, hi] pairwise at least `gap` apart.
RealVector distinct_values(Rng& rng, std::size_t n, double lo, double hi, double gap) {
  for (;;) {
    RealVector v(n);
    for (double& x : v) x = unif(rng, lo, hi);
    RealVector s = v;
    std::sort(s.begin(), s.end());
    bool ok = true;
    for (std::size_t k = 1; k < n; ++k) ok = ok && s[k] - s[k - 1] >= gap;
    if (ok) return v;
  }
}

struct Box {
  double lo;
  double hi;
};

Box scale_box(Family f, bool log_scale) {
  const Box raw = f == Family::negbin ? Box{kProbLo, kProbHi} : Box{kRateLo, kRateHi};
  return log_scale ? Box{std::log(raw.lo), std::log(raw.hi)} : raw;
}

ConvolutionSpec spec_from_pair(Family f, const PairClass& p, bool log_scale) {
  ConvolutionSpec s{f, p.x, p.y};
  if (log_scale) {
    for (double& v : s.scales) v = std::exp(v);
  }
  return s;
}

/// Spreads (v_i, v_j) inside the box, oriented against the fixed vector w.
bool spread_step(Rng& rng, RealVector& v, const RealVector& w, Box box) {
  const std::size_t n = v.size();
  std::size_t i = pick(rng, n);
  std::size_t j = pick(rng, n - 1);
  if (j >= i) ++j;
  if (i > j) std::swap(i, j);
  const double s = v[i] + v[j];
  const double d = std::abs(v[i] - v[j]);
  const double dmax = 0.999 * std::min(s - 2.0 * box.lo, 2.0 * box.hi - s);
  if (dmax - d < 0.02 * (box.hi - box.lo)) return false;
  const double nd = unif(rng, d + 0.3 * (dmax - d), dmax);
  const double big = 0.5 * (s + nd);
  const double small = s - big;
  bool j_small = w[j] > w[i];
  if (w[j] == w[i]) j_small = rng() & 1;
  v[i] = j_small ? big : small;
  v[j] = j_small ? small : big;
  return true;
}

/// Random sequence of valid weak-mode moves from a random start. Returns the
/// visited pairs, start first.
std::vector<PairClass> random_walk(Rng& rng, std::size_t n, Box ybox) {
  const Box xbox{kShapeLo, kShapeHi};
  PairClass cur;
  for (std::size_t k = 0; k < n; ++k) {
    cur.x.push_back(unif(rng, xbox.lo, xbox.hi));
    cur.y.push_back(unif(rng, ybox.lo, ybox.hi));
  }
  std::vector<PairClass> path{cur};
  const std::size_t steps = 1 + pick(rng, 3);
  for (std::size_t s = 0; s < steps; ++s) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      PairClass next = cur;
      rc::ElementaryMove m;
      const std::size_t kinds = n >= 2 ? 4 : 2;
      const std::size_t kind = pick(rng, kinds);
      bool built = false;
      if (kind == 0 || kind == 1) {
        const std::size_t i = pick(rng, n);
        if (kind == 0 && xbox.hi - cur.x[i] > 0.05) {
          next.x[i] += unif(rng, 0.2, 1.0) * (xbox.hi - cur.x[i]);
          m = {rc::MoveKind::raise_x, 0, 0};
          built = true;
        } else if (kind == 1 && cur.y[i] - ybox.lo > 0.05 * (ybox.hi - ybox.lo)) {
          next.y[i] -= unif(rng, 0.2, 1.0) * (cur.y[i] - ybox.lo);
          m = {rc::MoveKind::lower_y, 0, 0};
          built = true;
        }
      } else if (kind == 2) {
        built = spread_step(rng, next.x, next.y, xbox);
        m = {rc::MoveKind::majorize_x, 0, 0};
      } else {
        built = spread_step(rng, next.y, next.x, ybox);
        m = {rc::MoveKind::majorize_y, 0, 0};
      }
      if (!built) continue;
      if (m.kind == rc::MoveKind::majorize_x || m.kind == rc::MoveKind::majorize_y) {
        const RealVector& a = m.kind == rc::MoveKind::majorize_x ? cur.x : cur.y;
        const RealVector& b = m.kind == rc::MoveKind::majorize_x ? next.x : next.y;
        std::vector<std::size_t> changed;
        for (std::size_t k = 0; k < n; ++k) {
          if (a[k] != b[k]) changed.push_back(k);
        }
        if (changed.size() != 2) continue;
        m.i = changed[0];
        m.j = changed[1];
      }
      if (!rc::verify_rc_move(cur, next, m, rc::ChainMode::weak)) continue;
      cur = std::move(next);
      path.push_back(cur);
      break;
    }
  }
  return path;
}

Instance from_walk(Family f, const std::vector<PairClass>& path, bool log_scale) {
  Instance inst;
  inst.spec1 = spec_from_pair(f, path.front(), log_scale);
  inst.spec2 = spec_from_pair(f, path.back(), log_scale);
  inst.waypoints.assign(path.begin() + 1, path.end() - (path.size() > 1 ? 1 : 0));
  return inst;
}

Instance worked_example() {
  Instance inst;
  inst.spec1 = {Family::gamma, {0.4, 0.6, 0.5}, {2.0, 3.0, 4.0}};
  inst.spec2 = {Family::gamma, {0.7, 0.3, 0.5}, {1.0, 3.0, 5.0}};
  inst.waypoints = {{{0.4, 0.6, 0.5}, {2.0, 2.0, 5.0}}, {{0.7, 0.3, 0.5}, {2.0, 2.0, 5.0}}};
  return inst;
}

/// Pair of symmetric spreads c0 +- l1 and c0 +- l2 with l1 <= l2 inside the box.
std::pair<RealVector, RealVector> nested_spreads(Rng& rng, Box box) {
  const double margin = 0.05 * (box.hi - box.lo);
  const double c0 = unif(rng, box.lo + margin, box.hi - margin);
  const double lmax = 0.999 * std::min(c0 - box.lo, box.hi - c0);
  const double l2 = unif(rng, 0.1, 1.0) * lmax;
  const double l1 = unif(rng, 0.0, 0.9) * l2;
  return {{c0 + l1, c0 - l1}, {c0 + l2, c0 - l2}};
}

Instance opposite_weak(Rng& rng, Family f, std::size_t n) {
  const Box xbox{kShapeLo, kShapeHi};
  const Box ybox = scale_box(f, false);
  RealVector x2(n), y2(n);
  for (double& v : x2) v = unif(rng, xbox.lo, xbox.hi);
  for (double& v : y2) v = unif(rng, ybox.lo, ybox.hi);
  std::sort(x2.begin(), x2.end());
  std::sort(y2.begin(), y2.end(), std::greater<>());
  auto average = [&](RealVector& v) {
    if (n < 2) return;
    const std::size_t rounds = 1 + pick(rng, 3);
    for (std::size_t r = 0; r < rounds; ++r) {
      const std::size_t i = pick(rng, n);
      std::size_t j = pick(rng, n - 1);
      if (j >= i) ++j;
      const double t = 0.5 * unif(rng, 0.1, 1.0) * (v[j] - v[i]);
      v[i] += t;
      v[j] -= t;
    }
  };
  RealVector x1 = x2, y1 = y2;
  average(x1);
  average(y1);
  for (double& v : x1) {
    if (rng() & 1) v -= unif(rng, 0.0, 0.5) * (v - xbox.lo);
  }
  for (double& v : y1) {
    if (rng() & 1) v += unif(rng, 0.0, 0.5) * (ybox.hi - v);
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Instance inst;
  inst.spec1.family = inst.spec2.family = f;
  for (std::size_t k : perm) {
    inst.spec1.shapes.push_back(x1[k]);
    inst.spec1.scales.push_back(y1[k]);
  }
  inst.spec2.shapes = x2;
  inst.spec2.scales = y2;
  return inst;
}

std::size_t default_size(ScenarioKind k, std::uint64_t seed) {
  switch (k) {
    case ScenarioKind::raise_alpha:
    case ScenarioKind::lower_beta:
    case ScenarioKind::mixture_lemma_st: return 1;
    case ScenarioKind::majorize_beta:
    case ScenarioKind::diff_alpha_majorize_beta:
    case ScenarioKind::majorize_alpha:
    case ScenarioKind::log_majorize_beta_st:
    case ScenarioKind::coupled_gamma_pair: return 2;
    case ScenarioKind::opposite_ordered_weak: return 2 + seed % 4;
    default: return 2 + seed % 3;
  }
}

std::optional<std::size_t> fixed_size(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::raise_alpha:
    case ScenarioKind::lower_beta:
    case ScenarioKind::mixture_lemma_st: return 1;
    case ScenarioKind::majorize_beta:
    case ScenarioKind::diff_alpha_majorize_beta:
    case ScenarioKind::majorize_alpha:
    case ScenarioKind::log_majorize_beta_st:
    case ScenarioKind::coupled_gamma_pair: return 2;
    default: return std::nullopt;
  }
}

/// Family forced by the scenario, if any.
std::optional<Family> fixed_family(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::rc_general:
    case ScenarioKind::st_general:
    case ScenarioKind::opposite_ordered_weak: return std::nullopt;
    case ScenarioKind::gamma_conv:
    case ScenarioKind::ai_tail:
    case ScenarioKind::coupled_gamma_pair: return Family::gamma;
    default: return Family::negbin;
  }
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

RealVector order_scales(const ConvolutionSpec& s, Order o) {
  RealVector y = s.scales;
  if (o == Order::st) {
    for (double& v : y) v = std::log(v);
  }
  return y;
}

DeconvSummary summarize(const dist::Deconvolution& d, double rate) {
  DeconvSummary s;
  s.status = d.status;
  s.min_coefficient = d.min_coefficient;
  s.worst_index = d.worst_index;
  s.error_at_worst = d.error.empty() ? 0.0 : d.error[d.worst_index];
  s.mass = d.mass;
  s.mass_floor = d.mass_floor;
  s.certified = d.certified;
  s.length = d.z.size();
  s.rate = rate;
  return s;
}

std::pair<dist::TruncatedPMF, dist::TruncatedPMF> matched_pmfs(const ConvolutionSpec& a,
                                                              const ConvolutionSpec& b,
                                                              double cap) {
  dist::TruncatedPMF fa = dist::nb_convolution(a, cap);
  dist::TruncatedPMF fb = dist::nb_convolution(b, cap);
  const std::size_t len = std::max(fa.size(), fb.size());
  if (fa.size() < len) fa = dist::nb_convolution(a, cap, len);
  if (fb.size() < len) fb = dist::nb_convolution(b, cap, len);
  return {std::move(fa), std::move(fb)};
}

/// Deconvolution of the latent NB convolutions at the common rate
/// factor * max rate over both specs.
DeconvSummary gamma_reduction(const ConvolutionSpec& s1, const ConvolutionSpec& s2,
                              const Tolerances& tol, double factor = 2.0) {
  double top = 0.0;
  for (double b : s1.scales) top = std::max(top, b);
  for (double b : s2.scales) top = std::max(top, b);
  const double beta = factor * top;
  ConvolutionSpec n1{Family::negbin, s1.shapes, s1.scales};
  ConvolutionSpec n2{Family::negbin, s2.shapes, s2.scales};
  for (double& v : n1.scales) v /= beta;
  for (double& v : n2.scales) v /= beta;
  return summarize(dist::nb_deconvolve(n2, n1, tol.deconv_tol, tol.tail_cap), beta);
}

dist::SurvivalVerdict survival(const ConvolutionSpec& s1, const ConvolutionSpec& s2,
                               const Tolerances& tol, RealVector extra_points = {}) {
  if (s1.family == Family::negbin) {
    auto [f1, f2] = matched_pmfs(s1, s2, tol.tail_cap);
    return dist::survival_dominance_check(f1, f2, tol.survival_tol);
  }
  RealVector grid = dist::default_survival_grid(s1, s2, tol.grid_points, tol.tail_cap);
  grid.insert(grid.end(), extra_points.begin(), extra_points.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return dist::survival_dominance_check(dist::gamma_convolution_cdf(s1, grid, tol.tail_cap),
                                        dist::gamma_convolution_cdf(s2, grid, tol.tail_cap),
                                        tol.survival_tol);
}

void finish(Report& r) {
  r.status = r.param_status == Status::holds && r.numeric_status == Status::holds
                 ? Status::holds
             : r.numeric_status == Status::refuted ? Status::refuted
                                                   : Status::unknown;
  if (r.param_status == Status::holds && r.numeric_status == Status::refuted) {
    r.agreement = "discrepancy";
  } else if (r.param_status == r.numeric_status && r.param_status != Status::unknown) {
    r.agreement = "consistent";
  } else {
    r.agreement = "inconclusive";
  }
}

io::json survival_json(const dist::SurvivalVerdict& v) {
  return {{"status", std::string(to_string(v.status))},
          {"min_margin", v.min_margin},
          {"worst_t", v.worst_t},
          {"error_at_worst", v.error_at_worst},
          {"points", v.points}};
}

io::json deconv_json(const DeconvSummary& d) {
  return {{"status", std::string(to_string(d.status))},
          {"min_coefficient", d.min_coefficient},
          {"worst_index", d.worst_index},
          {"error_at_worst", d.error_at_worst},
          {"mass", d.mass},
          {"mass_floor", d.mass_floor},
          {"certified", d.certified},
          {"length", d.length},
          {"common_rate", d.rate}};
}

Report verify_ai_tail(const Instance& inst, bool reversed, const Tolerances& tol) {
  const ConvolutionSpec& a = reversed ? inst.spec2 : inst.spec1;
  const ConvolutionSpec& b = reversed ? inst.spec1 : inst.spec2;
  Report r;
  r.order = "st";
  r.spec1 = a;
  r.spec2 = b;
  r.tolerances = tol;
  auto t0 = std::chrono::steady_clock::now();
  RealVector l1 = a.scales, l2 = b.scales;
  for (double& v : l1) v = 1.0 / v;
  for (double& v : l2) v = 1.0 / v;
  const auto av = arrangement::check_arrangement_leq({a.shapes, l1}, {b.shapes, l2});
  r.param_status = av.status;
  r.param_route = "arrangement";
  r.param_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  const TailCheck tc = check_ai_tail(a.shapes, l1, b.shapes, l2, inst.threshold, tol.tail_cap);
  r.survival = survival(a, b, tol, {inst.threshold});
  r.numeric_status = r.survival->status == Status::holds && !tc.holds ? Status::unknown
                                                                      : r.survival->status;
  r.numeric_ms = ms_since(t0);
  finish(r);
  return r;
}

Report verify_mixture(const Instance& inst, bool reversed, const Tolerances& tol) {
  const ConvolutionSpec& a = reversed ? inst.spec2 : inst.spec1;
  const ConvolutionSpec& b = reversed ? inst.spec1 : inst.spec2;
  Report r;
  r.order = "st";
  r.spec1 = a;
  r.spec2 = b;
  r.tolerances = tol;
  auto t0 = std::chrono::steady_clock::now();
  const auto x1 = dist::shifted_nb_pmf(a.negbin(0), tol.tail_cap);
  const auto x2 = dist::shifted_nb_pmf(b.negbin(0), tol.tail_cap);
  r.param_status = dist::survival_dominance_check(x1, x2, tol.survival_tol).status;
  r.param_route = "latent-st";
  r.param_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  auto y1 = dist::shape_mixture_pmf(x1, inst.mix_p, tol.tail_cap);
  auto y2 = dist::shape_mixture_pmf(x2, inst.mix_p, tol.tail_cap);
  r.survival = dist::survival_dominance_check(y1, y2, tol.survival_tol);
  r.numeric_status = r.survival->status;
  r.numeric_ms = ms_since(t0);
  finish(r);
  return r;
}

Report verify_coupled(const Instance& inst, const Tolerances& tol) {
  Report r;
  r.order = "identity";
  r.spec1 = inst.spec1;
  r.spec2 = inst.spec2;
  r.tolerances = tol;
  const double p = (inst.c0 * inst.c0 - inst.lambda_target * inst.lambda_target) /
                   (inst.c0 * inst.c0 - inst.lambda_mix * inst.lambda_mix);
  r.param_status = p > 0.0 && p <= 1.0 && inst.lambda_mix <= inst.lambda_target
                       ? Status::holds
                       : Status::refuted;
  r.param_route = "hypothesis";
  const auto t0 = std::chrono::steady_clock::now();
  const double beta = 2.0 * (inst.c0 + inst.lambda_target);
  const double alpha = inst.spec1.shapes[0];
  const dist::GammaMixture lhs(
      dist::coupled_pair_mixture_pmf(alpha, inst.c0 / beta, inst.lambda_mix / beta, p,
                                     tol.tail_cap),
      beta);
  const dist::GammaMixture rhs(inst.spec1, tol.tail_cap, beta);
  const double top = rhs.quantile(0.999);
  double worst = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double t = top * k / 63.0;
    worst = std::max(worst, std::abs(lhs.cdf(t) - rhs.cdf(t)));
  }
  r.residual = worst;
  r.numeric_status = worst <= tol.identity_tol ? Status::holds : Status::refuted;
  r.numeric_ms = ms_since(t0);
  finish(r);
  return r;
}

}  // namespace

std::string to_string(ScenarioKind k) {
  for (const auto& [kind, name] : kNames) {
    if (kind == k) return name;
  }
  return "RcGeneral";
}

ScenarioKind scenario_from_string(const std::string& s) {
  for (const auto& [kind, name] : kNames) {
    if (s == name) return kind;
  }
  throw PreconditionError("unknown scenario '" + s + "'");
}

std::vector<ScenarioKind> all_scenarios() {
  std::vector<ScenarioKind> out;
  for (const auto& entry : kNames) out.push_back(entry.first);
  return out;
}

std::string to_string(Order o) { return o == Order::conv ? "conv" : "st"; }

Order order_from_string(const std::string& s) {
  if (s == "conv") return Order::conv;
  if (s == "st") return Order::st;
  throw PreconditionError("unknown order '" + s + "'");
}

std::optional<Order> scenario_order(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::log_majorize_beta_st:
    case ScenarioKind::st_general:
    case ScenarioKind::ai_tail:
    case ScenarioKind::mixture_lemma_st: return Order::st;
    case ScenarioKind::coupled_gamma_pair: return std::nullopt;
    default: return Order::conv;
  }
}

Instance generate_instance(const Scenario& s) {
  const std::size_t n = s.n == 0 ? default_size(s.kind, s.seed) : s.n;
  if (n > kMaxScenarioSize) throw PreconditionError("scenario size exceeds 6");
  if (auto fixed = fixed_size(s.kind); fixed && n != *fixed) {
    throw PreconditionError(to_string(s.kind) + " requires n = " + std::to_string(*fixed));
  }
  if (s.kind == ScenarioKind::conv_ai && n < 2) {
    throw PreconditionError("ConvAI needs n >= 2 to swap two coordinates");
  }
  if ((s.kind == ScenarioKind::ai_tail) && n < 2) {
    throw PreconditionError("AITail needs n >= 2 to swap two coordinates");
  }
  const Family f = fixed_family(s.kind).value_or(s.family);
  Rng rng = make_rng(s.seed, static_cast<std::uint64_t>(s.kind), static_cast<std::uint64_t>(f), n);

  switch (s.kind) {
    case ScenarioKind::raise_alpha: {
      const double a1 = unif(rng, kShapeLo, kShapeHi - 0.1);
      const double a2 = unif(rng, a1 + 0.05, kShapeHi);
      const double p = unif(rng, kProbLo, kProbHi);
      return {{f, {a1}, {p}}, {f, {a2}, {p}}, {}};
    }
    case ScenarioKind::lower_beta: {
      const double a = unif(rng, kShapeLo, kShapeHi);
      const double p1 = unif(rng, 0.1, kProbHi);
      const double p2 = unif(rng, kProbLo, p1 - 0.025);
      return {{f, {a}, {p1}}, {f, {a}, {p2}}, {}};
    }
    case ScenarioKind::majorize_beta: {
      const double a = unif(rng, kShapeLo, kShapeHi);
      auto [y1, y2] = nested_spreads(rng, {kProbLo, kProbHi});
      if (rng() & 1) std::swap(y1[0], y1[1]);
      if (rng() & 1) std::swap(y2[0], y2[1]);
      return {{f, {a, a}, y1}, {f, {a, a}, y2}, {}};
    }
    case ScenarioKind::diff_alpha_majorize_beta: {
      RealVector a{unif(rng, kShapeLo, kShapeHi), unif(rng, kShapeLo, kShapeHi)};
      std::sort(a.begin(), a.end());
      auto [y1, y2] = nested_spreads(rng, {kProbLo, kProbHi});
      return {{f, a, y1}, {f, a, y2}, {}};
    }
    case ScenarioKind::majorize_alpha: {
      auto [x1, x2] = nested_spreads(rng, {kShapeLo, kShapeHi});
      std::swap(x1[0], x1[1]);
      std::swap(x2[0], x2[1]);
      RealVector p{unif(rng, kProbLo, kProbHi), unif(rng, kProbLo, kProbHi)};
      std::sort(p.begin(), p.end(), std::greater<>());
      return {{f, x1, p}, {f, x2, p}, {}};
    }
    case ScenarioKind::conv_ai: {
      const RealVector a = distinct_values(rng, n, kShapeLo, kShapeHi, 0.05);
      RealVector p = distinct_values(rng, n, kProbLo, kProbHi, 0.02);
      std::size_t i = pick(rng, n);
      std::size_t j = pick(rng, n - 1);
      if (j >= i) ++j;
      if ((a[i] < a[j]) != (p[i] < p[j])) std::swap(p[i], p[j]);
      RealVector q = p;
      std::swap(q[i], q[j]);
      return {{f, a, p}, {f, a, q}, {}};
    }
    case ScenarioKind::gamma_conv:
      if (s.seed == 0 && (s.n == 0 || s.n == 3)) return worked_example();
      [[fallthrough]];
    case ScenarioKind::rc_general:
      return from_walk(f, random_walk(rng, n, scale_box(f, false)), false);
    case ScenarioKind::st_general:
      return from_walk(f, random_walk(rng, n, scale_box(f, true)), true);
    case ScenarioKind::opposite_ordered_weak:
      return opposite_weak(rng, f, n);
    case ScenarioKind::log_majorize_beta_st: {
      const double a = unif(rng, kShapeLo, kShapeHi);
      auto [y1, y2] = nested_spreads(rng, scale_box(f, true));
      if (rng() & 1) std::swap(y1[0], y1[1]);
      if (rng() & 1) std::swap(y2[0], y2[1]);
      Instance inst = from_walk(f, {{{a, a}, y1}, {{a, a}, y2}}, true);
      return inst;
    }
    case ScenarioKind::ai_tail: {
      RealVector a = distinct_values(rng, n, kShapeLo, kShapeHi, 0.05);
      std::sort(a.begin(), a.end());
      RealVector lam = distinct_values(rng, n, 1.0 / kRateHi, 1.0 / kRateLo, 0.02);
      std::vector<std::pair<std::size_t, std::size_t>> inversions;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (lam[i] > lam[j]) inversions.emplace_back(i, j);
        }
      }
      if (inversions.empty()) {
        std::reverse(lam.begin(), lam.end());
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = i + 1; j < n; ++j) inversions.emplace_back(i, j);
        }
      }
      const auto [i, j] = inversions[pick(rng, inversions.size())];
      RealVector lam2 = lam;
      std::swap(lam2[i], lam2[j]);
      Instance inst;
      inst.spec1 = {f, a, {}};
      inst.spec2 = {f, a, {}};
      double m1 = 0.0, m2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        inst.spec1.scales.push_back(1.0 / lam[k]);
        inst.spec2.scales.push_back(1.0 / lam2[k]);
        m1 += a[k] * lam[k];
        m2 += a[k] * lam2[k];
      }
      inst.threshold = 0.5 * (m1 + m2);
      return inst;
    }
    case ScenarioKind::coupled_gamma_pair: {
      Instance inst;
      const double a = unif(rng, kShapeLo, kShapeHi);
      inst.c0 = unif(rng, kRateLo, kRateHi);
      inst.lambda_target = unif(rng, 0.1, 0.9) * inst.c0;
      inst.lambda_mix = unif(rng, 0.0, 0.9) * inst.lambda_target;
      inst.spec1 = {f, {a, a}, {inst.c0 + inst.lambda_target, inst.c0 - inst.lambda_target}};
      inst.spec2 = inst.spec1;
      return inst;
    }
    case ScenarioKind::mixture_lemma_st: {
      Instance inst;
      const double a = unif(rng, kShapeLo, kShapeHi);
      const double p1 = unif(rng, 0.1, kProbHi);
      const double p2 = unif(rng, kProbLo, p1 - 0.025);
      inst.spec1 = {f, {a}, {p1}};
      inst.spec2 = {f, {a}, {p2}};
      inst.mix_p = unif(rng, kProbLo, kProbHi);
      return inst;
    }
  }
  throw PreconditionError("unhandled scenario");
}

Report verify_theorem_instance(const ConvolutionSpec& spec1, const ConvolutionSpec& spec2,
                               Order order, const Tolerances& tol,
                               const std::vector<PairClass>& waypoints) {
  spec1.validate();
  spec2.validate();
  if (spec1.family != spec2.family) throw PreconditionError("verify: family mismatch");
  if (spec1.size() != spec2.size()) throw PreconditionError("verify: size mismatch");
  Report r;
  r.order = to_string(order);
  r.spec1 = spec1;
  r.spec2 = spec2;
  r.tolerances = tol;

  auto t0 = std::chrono::steady_clock::now();
  const PairClass p1{spec1.shapes, order_scales(spec1, order)};
  const PairClass p2{spec2.shapes, order_scales(spec2, order)};
  rc::RcVerdict v = rc::decide_wrc(p1, p2, rc::ChainMode::weak, tol.search_budget, waypoints);
  r.param_status = v.status;
  r.param_route = v.route;
  r.witness = std::move(v.witness);
  r.violation = v.violation;
  r.param_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  r.survival = survival(spec1, spec2, tol);
  if (order == Order::st) {
    r.numeric_status = r.survival->status;
  } else if (spec1.family == Family::negbin) {
    r.deconvolution =
        summarize(dist::nb_deconvolve(spec2, spec1, tol.deconv_tol, tol.tail_cap), 0.0);
    r.numeric_status = r.deconvolution->status;
  } else {
    r.shape_gap = spec1.total_shape() - spec2.total_shape();
    r.deconvolution = gamma_reduction(spec1, spec2, tol);
    const bool shapes_ok =
        *r.shape_gap <= kParamTol * std::max(1.0, spec2.total_shape());
    // The reduction is sufficient only, so a failure never refutes.
    r.numeric_status = shapes_ok && r.deconvolution->status == Status::holds ? Status::holds
                                                                            : Status::unknown;
  }
  r.numeric_ms = ms_since(t0);
  finish(r);
  return r;
}

Report run_scenario(const Scenario& s, const Tolerances& tol) {
  const Instance inst = generate_instance(s);
  Report r;
  switch (s.kind) {
    case ScenarioKind::ai_tail: r = verify_ai_tail(inst, s.reversed, tol); break;
    case ScenarioKind::mixture_lemma_st: r = verify_mixture(inst, s.reversed, tol); break;
    case ScenarioKind::coupled_gamma_pair: r = verify_coupled(inst, tol); break;
    default: {
      const Order o = *scenario_order(s.kind);
      r = s.reversed ? verify_theorem_instance(inst.spec2, inst.spec1, o, tol)
                     : verify_theorem_instance(inst.spec1, inst.spec2, o, tol, inst.waypoints);
    }
  }
  r.scenario = to_string(s.kind) + (s.reversed ? ":reversed" : "");
  r.seed = s.seed;
  return r;
}

io::json report_to_json(const Report& r, bool include_timing) {
  io::json param{{"status", std::string(to_string(r.param_status))},
                 {"route", r.param_route},
                 {"witness", r.witness ? io::chain_to_json(*r.witness) : io::json(nullptr)},
                 {"violation", r.violation ? io::json(r.violation->describe()) : io::json(nullptr)}};
  io::json numeric{{"status", std::string(to_string(r.numeric_status))},
                   {"deconvolution", r.deconvolution ? deconv_json(*r.deconvolution)
                                                     : io::json(nullptr)},
                   {"survival", r.survival ? survival_json(*r.survival) : io::json(nullptr)},
                   {"residual", r.residual ? io::json(*r.residual) : io::json(nullptr)},
                   {"shape_gap", r.shape_gap ? io::json(*r.shape_gap) : io::json(nullptr)}};
  io::json j{{"v", 1},
             {"scenario", r.scenario},
             {"seed", r.seed},
             {"order", r.order},
             {"spec1", io::spec_to_json(r.spec1)},
             {"spec2", io::spec_to_json(r.spec2)},
             {"parameter", std::move(param)},
             {"numeric", std::move(numeric)},
             {"status", std::string(to_string(r.status))},
             {"agreement", r.agreement},
             {"tolerances",
              {{"tail_cap", r.tolerances.tail_cap},
               {"deconvolution", r.tolerances.deconv_tol},
               {"survival", r.tolerances.survival_tol},
               {"identity", r.tolerances.identity_tol},
               {"grid_points", r.tolerances.grid_points},
               {"search_budget", r.tolerances.search_budget}}}};
  if (include_timing) {
    j["runtime_ms"] = {{"parameter", r.param_ms}, {"numeric", r.numeric_ms}};
  }
  return j;
}

TailCheck check_ai_tail(const RealVector& shapes1, const RealVector& lambda1,
                        const RealVector& shapes2, const RealVector& lambda2, double c,
                        double tail_cap) {
  if (!std::isfinite(c) || c <= 0.0) throw PreconditionError("check_ai_tail: c must be > 0");
  require_same_length(shapes1, lambda1, "check_ai_tail");
  require_same_length(shapes2, lambda2, "check_ai_tail");
  auto to_spec = [](const RealVector& a, const RealVector& l) {
    ConvolutionSpec s{Family::gamma, a, {}};
    for (double v : l) {
      if (!std::isfinite(v) || v <= 0.0) throw PreconditionError("check_ai_tail: weights must be > 0");
      s.scales.push_back(1.0 / v);
    }
    s.validate();
    return s;
  };
  const dist::GammaMixture m1(to_spec(shapes1, lambda1), tail_cap);
  const dist::GammaMixture m2(to_spec(shapes2, lambda2), tail_cap);
  TailCheck out;
  out.tail1 = 1.0 - m1.cdf(c);
  out.tail2 = 1.0 - m2.cdf(c);
  out.error = m1.error_bound() + m2.error_bound();
  out.holds = out.tail1 <= out.tail2 + out.error;
  return out;
}

std::vector<Candidate> explore_counterexamples(std::size_t budget, std::uint64_t seed,
                                               const Tolerances& tol) {
  if (budget == 0) throw PreconditionError("explore: budget must be >= 1");
  std::vector<Candidate> out;
  const Box ybox = scale_box(Family::gamma, true);
  for (std::uint64_t it = 0; it < budget; ++it) {
    Rng rng = make_rng(seed, it, 0x5eed, 0);
    const std::size_t n = 2 + pick(rng, 2);
    const auto path = random_walk(rng, n, ybox);
    if (path.size() < 2) continue;
    const Instance inst = from_walk(Family::gamma, path, true);
    const rc::RcVerdict v = rc::decide_wrc(path.front(), path.back(), rc::ChainMode::weak,
                                           tol.search_budget, inst.waypoints);
    if (v.status != Status::holds) continue;
    // Keep only pairs that stay refuted as the common rate grows.
    DeconvSummary d;
    bool refuted = true;
    for (double factor : kExploreRateFactors) {
      d = gamma_reduction(inst.spec1, inst.spec2, tol, factor);
      refuted = refuted && d.status == Status::refuted;
      if (!refuted) break;
    }
    if (!refuted) continue;
    out.push_back({it, inst.spec1, inst.spec2, *v.witness, d, "evidence"});
  }
  return out;
}

io::json candidate_to_json(const Candidate& c) {
  return {{"iteration", c.iteration},
          {"label", c.label},
          {"spec1", io::spec_to_json(c.spec1)},
          {"spec2", io::spec_to_json(c.spec2)},
          {"witness", io::chain_to_json(c.witness)},
          {"deconvolution", deconv_json(c.deconvolution)}};
}

bool recheck_candidate(const Candidate& c, const Tolerances& tol) {
  const PairClass p1{c.spec1.shapes, order_scales(c.spec1, Order::st)};
  const PairClass p2{c.spec2.shapes, order_scales(c.spec2, Order::st)};
  if (c.witness.mode != rc::ChainMode::weak || !rc::verify_witness(p1, p2, c.witness)) {
    return false;
  }
  for (double factor : kExploreRateFactors) {
    const DeconvSummary d = gamma_reduction(c.spec1, c.spec2, tol, factor);
    if (d.status != Status::refuted || !(d.min_coefficient < -d.error_at_worst)) return false;
  }
  return true;
}

}  // namespace stochord::harness
