#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>

#include "stochord/distributions.hpp"

namespace stochord::dist {

namespace {

constexpr long double kUld = LDBL_EPSILON / 2;
constexpr double kU = DBL_EPSILON / 2;

bool is_probability(double p) { return std::isfinite(p) && p > 0.0 && p < 1.0; }

void check_support(std::size_t len, const char* what) {
  if (len > kMaxSupport) {
    throw NumericFailure(std::string(what) + ": support exceeds the configured maximum");
  }
}

// First `len` coefficients of the product of two series, accumulated in
// extended precision.
RealVector convolve_prefix(const RealVector& a, const RealVector& b, std::size_t len) {
  RealVector out(len, 0.0);
  for (std::size_t k = 0; k < len; ++k) {
    long double s = 0.0L;
    const std::size_t lo = k >= b.size() ? k - b.size() + 1 : 0;
    const std::size_t hi = std::min(k, a.size() - 1);
    for (std::size_t j = lo; j <= hi && j < a.size(); ++j) {
      s += static_cast<long double>(a[j]) * b[k - j];
    }
    out[k] = static_cast<double>(s);
  }
  return out;
}

// Convolution with the law of 1 + Geometric(p), i.e. the shifted NB of unit
// shape, truncated to the input length.
void apply_shifted_geometric(std::vector<long double>& s, long double p) {
  const long double q = 1.0L - p;
  long double y = 0.0L;
  long double prev_in = 0.0L;
  for (std::size_t m = 0; m < s.size(); ++m) {
    const long double in = s[m];
    y = m == 0 ? 0.0L : q * y + p * prev_in;
    prev_in = in;
    s[m] = y;
  }
}

long double sum_of(const RealVector& v) {
  long double s = 0.0L;
  for (double d : v) s += d;
  return s;
}

}  // namespace

void NegBinParams::validate() const {
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw PreconditionError("negative binomial shape must be positive and finite");
  }
  if (!is_probability(p)) {
    throw PreconditionError("negative binomial success probability must lie in (0, 1)");
  }
}

void GammaParams::validate() const {
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw PreconditionError("gamma shape must be positive and finite");
  }
  if (!std::isfinite(beta) || beta <= 0.0) {
    throw PreconditionError("gamma rate must be positive and finite");
  }
}

std::string to_string(Family f) { return f == Family::negbin ? "negbin" : "gamma"; }

Family family_from_string(const std::string& s) {
  if (s == "negbin") return Family::negbin;
  if (s == "gamma") return Family::gamma;
  throw PreconditionError("unknown family '" + s + "'");
}

double ConvolutionSpec::total_shape() const {
  return std::accumulate(shapes.begin(), shapes.end(), 0.0);
}

void ConvolutionSpec::validate() const {
  if (shapes.empty()) throw PreconditionError("convolution spec has no components");
  require_same_length(shapes, scales, "convolution spec");
  for (std::size_t i = 0; i < size(); ++i) {
    if (family == Family::negbin) {
      negbin(i).validate();
    } else {
      gamma(i).validate();
    }
  }
}

double TruncatedPMF::mass() const { return static_cast<double>(sum_of(probs)); }

double TruncatedPMF::mean() const {
  long double s = 0.0L;
  long double m = 0.0L;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    s += probs[k];
    m += probs[k] * static_cast<long double>(k);
  }
  return static_cast<double>(offset + m / s);
}

TruncatedPMF point_mass(double offset) {
  TruncatedPMF out;
  out.offset = offset;
  out.probs = {1.0};
  out.exact_len = 1;
  return out;
}

TruncatedPMF nb_pmf(const NegBinParams& params, double tail_cap, std::size_t min_len) {
  params.validate();
  if (!(tail_cap > 0.0 && tail_cap < 1.0)) {
    throw PreconditionError("nb_pmf: tail cap must lie in (0, 1)");
  }
  const long double a = params.alpha;
  const long double p = params.p;
  const long double q = 1.0L - p;
  long double cur = std::pow(p, a);
  if (!(cur > 0.0L)) throw NumericFailure("nb_pmf: p^alpha underflows");

  TruncatedPMF out;
  for (std::size_t k = 0;; ++k) {
    out.probs.push_back(static_cast<double>(cur));
    const long double kk = static_cast<long double>(k);
    const long double rho = q * std::max(1.0L, (kk + a) / (kk + 1.0L));
    if (out.probs.size() >= min_len && rho < 1.0L && kk + 1.0L >= a * q / p) {
      const long double bound = cur * rho / (1.0L - rho);
      if (bound <= tail_cap) {
        out.tail_bound = static_cast<double>(bound) * (1.0 + 1e-12);
        break;
      }
    }
    check_support(out.probs.size() + 1, "nb_pmf");
    cur *= q * (kk + a) / (kk + 1.0L);
  }
  const std::size_t K = out.probs.size();
  // Entries below the double range are flushed to zero; charge them to the tail.
  std::size_t flushed = 0;
  for (double v : out.probs) flushed += v < std::numeric_limits<double>::min();
  out.tail_bound += static_cast<double>(flushed) * std::numeric_limits<double>::min();
  out.rel_error = kU + static_cast<double>((4.0L * K + 8.0L) * kUld);
  out.exact_len = K;
  return out;
}

TruncatedPMF shifted_nb_pmf(const NegBinParams& params, double tail_cap, std::size_t min_len) {
  TruncatedPMF out = nb_pmf(params, tail_cap, min_len);
  out.offset = params.alpha;
  return out;
}

TruncatedPMF convolve(const TruncatedPMF& a, const TruncatedPMF& b) {
  if (a.probs.empty() || b.probs.empty()) throw PreconditionError("convolve: empty pmf");
  const std::size_t len = a.size() + b.size() - 1;
  check_support(len, "convolve");
  TruncatedPMF out;
  out.offset = a.offset + b.offset;
  out.probs = convolve_prefix(a.probs, b.probs, len);
  out.tail_bound = a.tail_bound + b.tail_bound;
  out.rel_error = a.rel_error + b.rel_error + kU +
                  static_cast<double>((std::min(a.size(), b.size()) + 2) * kUld);
  out.exact_len = std::min(a.exact_len, b.exact_len);
  return out;
}

TruncatedPMF nb_convolution(const ConvolutionSpec& spec, double tail_cap, std::size_t min_len,
                            bool shifted) {
  spec.validate();
  if (spec.family != Family::negbin) {
    throw PreconditionError("nb_convolution: spec family must be negbin");
  }
  const std::size_t n = spec.size();
  const double cap = tail_cap / static_cast<double>(n);
  std::size_t last = min_len > 0 ? min_len - 1 : 0;
  std::size_t span = 0;
  for (std::size_t i = 0; i < n; ++i) span += nb_pmf(spec.negbin(i), cap).size() - 1;
  last = std::max(last, span);
  check_support(last + 1, "nb_convolution");

  TruncatedPMF acc;
  for (std::size_t i = 0; i < n; ++i) {
    TruncatedPMF c = nb_pmf(spec.negbin(i), cap, last + 1);
    if (i == 0) {
      acc = std::move(c);
      acc.probs.resize(last + 1);
      continue;
    }
    acc.probs = convolve_prefix(acc.probs, c.probs, last + 1);
    acc.tail_bound += c.tail_bound;
    acc.rel_error += c.rel_error + kU + static_cast<double>((last + 2) * kUld);
  }
  acc.exact_len = last + 1;
  acc.offset = shifted ? spec.total_shape() : 0.0;
  return acc;
}

double linf_distance(const TruncatedPMF& a, const TruncatedPMF& b) {
  if (std::abs(a.offset - b.offset) > 1e-12 * std::max(1.0, std::abs(a.offset))) {
    throw PreconditionError("linf_distance: lattice offsets differ");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k) {
    worst = std::max(worst, std::abs(a.at(k) - b.at(k)));
  }
  return worst;
}

namespace {

void judge_coefficients(Deconvolution& out, const std::vector<long double>& z,
                        const std::vector<long double>& err, long double floor, double tol) {
  const std::size_t L = z.size();
  out.z.resize(L);
  out.error.resize(L);
  long double mass = 0.0L;
  double min_lower = 0.0;
  bool refuted = false;
  bool all_above = true;
  for (std::size_t k = 0; k < L; ++k) {
    out.z[k] = static_cast<double>(z[k]);
    out.error[k] = static_cast<double>(err[k]);
    mass += z[k];
    if (k == 0 || out.z[k] < out.min_coefficient) {
      out.min_coefficient = out.z[k];
      out.worst_index = k;
    }
    if (out.z[k] < -tol) all_above = false;
    if (out.z[k] < -std::max(tol, out.error[k])) refuted = true;
    min_lower = std::min(min_lower, out.z[k] - out.error[k]);
  }
  out.mass = static_cast<double>(mass);
  out.mass_floor = static_cast<double>(floor);
  const bool mass_ok = out.mass >= out.mass_floor - tol && out.mass <= 1.0 + tol;
  out.certified = all_above && mass_ok && min_lower >= -tol;
  if (refuted) {
    out.status = Status::refuted;
  } else if (all_above && mass_ok) {
    out.status = Status::holds;
  } else {
    out.status = Status::unknown;
  }
}

}  // namespace

Deconvolution deconvolve(const TruncatedPMF& f2, const TruncatedPMF& f1, double tol) {
  if (f1.probs.empty() || f2.probs.empty()) throw PreconditionError("deconvolve: empty pmf");
  if (!(f1.probs[0] > 0.0)) throw PreconditionError("deconvolve: f1 has no mass at its origin");
  const double shift = f2.offset - f1.offset;
  if (shift < -1e-12 * std::max(1.0, std::abs(f2.offset))) {
    throw PreconditionError("deconvolve: f2 starts below f1");
  }
  const std::size_t L = std::min({f1.exact_len, f2.exact_len, f1.size(), f2.size()});

  std::vector<long double> z(L), h(L), absconv(L);
  const long double f0 = f1.probs[0];
  for (std::size_t k = 0; k < L; ++k) {
    long double sz = f2.probs[k];
    long double sh = k == 0 ? 1.0L : 0.0L;
    for (std::size_t j = 1; j <= k; ++j) {
      sz -= f1.probs[j] * z[k - j];
      sh -= f1.probs[j] * h[k - j];
    }
    z[k] = sz / f0;
    h[k] = sh / f0;
  }
  for (std::size_t m = 0; m < L; ++m) {
    long double s = 0.0L;
    for (std::size_t j = 0; j <= m; ++j) s += f1.probs[j] * std::abs(z[m - j]);
    absconv[m] = s;
  }
  // Residual of the exact solution against perturbed data, pushed through
  // the inverse series of f1.
  std::vector<long double> g(L);
  for (std::size_t m = 0; m < L; ++m) {
    const long double arith = static_cast<long double>(m + 4) * kUld;
    g[m] = (f2.rel_error + arith) * f2.probs[m] + (f1.rel_error + arith) * absconv[m];
  }

  std::vector<long double> err(L);
  long double floor = 0.0L;
  for (std::size_t k = 0; k < L; ++k) {
    long double e = 0.0L;
    for (std::size_t m = 0; m <= k; ++m) e += std::abs(h[k - m]) * g[m];
    err[k] = e * (1.0L + 1e-6L) + kUld * std::abs(z[k]);
    floor += f2.probs[k];
  }
  Deconvolution out;
  out.offset = std::max(0.0, shift);
  judge_coefficients(out, z, err, floor, tol);
  return out;
}

Deconvolution nb_deconvolve(const ConvolutionSpec& s2, const ConvolutionSpec& s1, double tol,
                            double tail_cap, std::size_t min_len) {
  s1.validate();
  s2.validate();
  if (s1.family != Family::negbin || s2.family != Family::negbin) {
    throw PreconditionError("nb_deconvolve: both specs must be negbin");
  }
  const TruncatedPMF f2 = nb_convolution(s2, tail_cap, min_len);
  const std::size_t L = std::max(f2.size(), nb_convolution(s1, tail_cap).size());
  const TruncatedPMF g2 = L > f2.size() ? nb_convolution(s2, tail_cap, L) : f2;

  // log of the quotient pgf is c0 + sum_k (a_k / k) s^k.
  long double c0 = 0.0L, c0_err = 0.0L;
  auto add_log = [&](const ConvolutionSpec& s, long double sign) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const long double t = s.shapes[i] * std::log(static_cast<long double>(s.scales[i]));
      c0 += sign * t;
      c0_err += 3.0L * kUld * std::abs(t);
    }
  };
  add_log(s2, 1.0L);
  add_log(s1, -1.0L);
  std::vector<long double> a(L, 0.0L), amag(L, 0.0L);
  for (std::size_t k = 1; k < L; ++k) {
    const long double kk = static_cast<long double>(k);
    for (const auto& [s, sign] : {std::pair{&s2, 1.0L}, std::pair{&s1, -1.0L}}) {
      for (std::size_t i = 0; i < s->size(); ++i) {
        const long double t = s->shapes[i] * std::pow(1.0L - s->scales[i], kk);
        a[k] += sign * t;
        amag[k] += t;
      }
    }
  }
  const long double n_terms = static_cast<long double>(s1.size() + s2.size());
  std::vector<long double> z(L), err(L);
  z[0] = std::exp(c0);
  err[0] = z[0] * (c0_err + 4.0L * kUld) * (1.0L + 1e-6L);
  for (std::size_t n = 1; n < L; ++n) {
    long double acc = 0.0L, prop = 0.0L, mag = 0.0L;
    for (std::size_t k = 1; k <= n; ++k) {
      acc += a[k] * z[n - k];
      prop += amag[k] * err[n - k];
      mag += amag[k] * std::abs(z[n - k]);
    }
    const long double nn = static_cast<long double>(n);
    z[n] = acc / nn;
    // Coefficient rounding (pow plus the signed sum) and the length-n dot product.
    const long double rounding = (4.0L * n_terms + nn + 4.0L) * kUld;
    err[n] = (prop + rounding * mag) / nn * (1.0L + 1e-6L) + kUld * std::abs(z[n]);
  }
  long double floor = 0.0L;
  for (std::size_t k = 0; k < L; ++k) floor += g2.probs[k];
  floor -= static_cast<long double>(g2.rel_error);
  Deconvolution out;
  judge_coefficients(out, z, err, floor, tol);
  return out;
}

double pgf_eval(const NegBinParams& params, double t) {
  params.validate();
  if (!(t > 0.0) || !(t * params.q() < 1.0)) {
    throw PreconditionError("pgf_eval: t outside (0, 1/q)");
  }
  return std::pow(params.p / (1.0 / t - params.q()), params.alpha);
}

double pgf_series(const TruncatedPMF& pmf, double t) {
  long double s = 0.0L;
  long double tk = 1.0L;
  for (double v : pmf.probs) {
    s += tk * v;
    tk *= t;
  }
  return static_cast<double>(std::pow(static_cast<long double>(t), pmf.offset) * s);
}

namespace {

// Support length that comfortably covers NB(a, p): mean plus 12 sd.
std::size_t nb_span(double a, double p) {
  const double q = 1.0 - p;
  return static_cast<std::size_t>(std::ceil(a * q / p + 12.0 * std::sqrt(a * q) / p)) + 16;
}

struct MixtureKernel {
  // Applies the per-unit-shape step once.
  std::function<void(std::vector<long double>&)> step;
  // Law at the base shape, with at least `len` entries.
  std::function<TruncatedPMF(std::size_t len)> base;
  double step_rounding_units = 2.0;
};

TruncatedPMF mix(const TruncatedPMF& latent, const MixtureKernel& kernel, std::size_t initial_len,
                 double tail_cap, double offset) {
  std::size_t len = std::max<std::size_t>(initial_len, 64);
  for (;;) {
    check_support(len, "shape mixture");
    const std::size_t H = std::min(latent.size(), len);
    std::vector<long double> s(len, 0.0L);
    for (std::size_t h = H; h-- > 0;) {
      if (h + 1 < H) kernel.step(s);
      s[0] += latent.probs[h];
    }
    RealVector weights(len);
    for (std::size_t k = 0; k < len; ++k) weights[k] = static_cast<double>(s[k]);
    const TruncatedPMF base = kernel.base(len);
    TruncatedPMF out;
    out.offset = offset;
    out.probs = convolve_prefix(base.probs, weights, len);
    const long double total = sum_of(out.probs);
    out.rel_error = latent.rel_error + base.rel_error + 2 * kU +
                    static_cast<double>((kernel.step_rounding_units * H + len + 4) * kUld);
    const double deficit = std::max(0.0, static_cast<double>(1.0L - total));
    out.tail_bound = deficit + out.rel_error + static_cast<double>(len * kUld);
    out.exact_len = std::min(latent.exact_len, len);
    if (deficit <= latent.tail_bound + tail_cap / 2 || 2 * len > kMaxSupport) return out;
    len *= 2;
  }
}

}  // namespace

TruncatedPMF shape_mixture_pmf(const TruncatedPMF& latent, double p, double tail_cap) {
  if (latent.probs.empty() || !(latent.offset > 0.0) || !std::isfinite(latent.offset)) {
    throw PreconditionError("shape_mixture_pmf: latent shapes must be positive");
  }
  if (!is_probability(p)) {
    throw PreconditionError("shape_mixture_pmf: success probability must lie in (0, 1)");
  }
  const double a0 = latent.offset;
  MixtureKernel kernel;
  kernel.step = [p](std::vector<long double>& s) { apply_shifted_geometric(s, p); };
  kernel.base = [a0, p, tail_cap](std::size_t len) { return nb_pmf({a0, p}, tail_cap, len); };
  const std::size_t guess =
      latent.size() + nb_span(a0 + static_cast<double>(latent.size()), p);
  return mix(latent, kernel, guess, tail_cap, a0);
}

TruncatedPMF coupled_pair_mixture_pmf(double alpha, double c0, double lambda, double p,
                                      double tail_cap) {
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw PreconditionError("coupled_pair_mixture_pmf: shape must be positive");
  }
  if (!std::isfinite(lambda) || lambda < 0.0 || !is_probability(c0 - lambda) ||
      !is_probability(c0 + lambda)) {
    throw PreconditionError("coupled_pair_mixture_pmf: c0 +- lambda must lie in (0, 1)");
  }
  if (!std::isfinite(p) || p <= 0.0 || p > 1.0) {
    throw PreconditionError("coupled_pair_mixture_pmf: latent success must lie in (0, 1]");
  }
  const TruncatedPMF latent =
      p == 1.0 ? point_mass(alpha) : shifted_nb_pmf({alpha, p}, tail_cap / 2);
  const double hi = c0 + lambda;
  const double lo = c0 - lambda;
  MixtureKernel kernel;
  kernel.step = [hi, lo](std::vector<long double>& s) {
    apply_shifted_geometric(s, hi);
    apply_shifted_geometric(s, lo);
  };
  kernel.step_rounding_units = 4.0;
  kernel.base = [alpha, hi, lo, tail_cap](std::size_t len) {
    TruncatedPMF a = nb_pmf({alpha, hi}, tail_cap / 4, len);
    TruncatedPMF b = nb_pmf({alpha, lo}, tail_cap / 4, len);
    TruncatedPMF c;
    c.probs = convolve_prefix(a.probs, b.probs, len);
    c.rel_error = a.rel_error + b.rel_error + kU + static_cast<double>((len + 2) * kUld);
    c.exact_len = len;
    return c;
  };
  const double top = alpha + static_cast<double>(latent.size());
  const std::size_t guess = 2 * latent.size() + nb_span(top, lo) + nb_span(top, hi);
  return mix(latent, kernel, guess, tail_cap, 2.0 * alpha);
}

}  // namespace stochord::dist
