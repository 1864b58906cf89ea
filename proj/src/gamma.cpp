#include <algorithm>
#include <cfloat>
#include <cmath>
#include <random>

#include "stochord/distributions.hpp"

namespace stochord::dist {

namespace {

constexpr long double kUld = LDBL_EPSILON / 2;

// x^a e^-x / Gamma(a), the common prefactor of both expansions.
long double log_prefactor(long double a, long double x) {
  return a * std::log(x) - x - std::lgamma(a);
}

}  // namespace

double reg_lower_incomplete_gamma(double a, double x) {
  if (!std::isfinite(a) || a <= 0.0) throw PreconditionError("incomplete gamma: a must be > 0");
  if (std::isnan(x) || x < 0.0) throw PreconditionError("incomplete gamma: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const long double la = a;
  const long double lx = x;
  if (lx < la + 1.0L) {
    long double term = 1.0L / la;
    long double sum = term;
    for (int n = 1; n < 100000; ++n) {
      term *= lx / (la + n);
      sum += term;
      if (term < sum * kUld) break;
    }
    const long double r = sum * std::exp(log_prefactor(la, lx));
    return static_cast<double>(std::min(1.0L, r));
  }
  // Modified Lentz evaluation of the continued fraction for Q(a, x).
  constexpr long double tiny = 1e-4000L;
  long double b = lx + 1.0L - la;
  long double c = 1.0L / tiny;
  long double d = 1.0L / b;
  long double h = d;
  for (int i = 1; i < 100000; ++i) {
    const long double an = -static_cast<long double>(i) * (i - la);
    b += 2.0L;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0L / d;
    const long double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0L) < kUld) break;
  }
  const long double qv = std::exp(log_prefactor(la, lx)) * h;
  return static_cast<double>(std::clamp(1.0L - qv, 0.0L, 1.0L));
}

GammaMixture::GammaMixture(const ConvolutionSpec& spec, double tail_cap, double common_beta) {
  spec.validate();
  if (spec.family != Family::gamma) throw PreconditionError("GammaMixture: family must be gamma");
  const double max_rate = *std::max_element(spec.scales.begin(), spec.scales.end());
  beta_ = common_beta > 0.0 ? common_beta : 2.0 * max_rate;
  if (!(beta_ > max_rate)) {
    throw PreconditionError("GammaMixture: common rate must exceed every component rate");
  }
  ConvolutionSpec nb{Family::negbin, spec.shapes, spec.scales};
  for (double& s : nb.scales) s /= beta_;
  latent_ = nb_convolution(nb, tail_cap);
  base_shape_ = spec.total_shape();
  for (std::size_t i = 0; i < spec.size(); ++i) mean_ += spec.shapes[i] / spec.scales[i];
}

GammaMixture::GammaMixture(const TruncatedPMF& shape_law, double beta)
    : beta_(beta), base_shape_(shape_law.offset), latent_(shape_law) {
  if (!std::isfinite(beta) || beta <= 0.0) throw PreconditionError("GammaMixture: rate must be > 0");
  if (!(base_shape_ > 0.0) || latent_.probs.empty()) {
    throw PreconditionError("GammaMixture: shapes must be positive");
  }
  latent_.offset = 0.0;
  mean_ = shape_law.mean() / beta;
}

double GammaMixture::cdf(double t) const {
  if (!(t > 0.0)) return 0.0;
  const long double x = static_cast<long double>(beta_) * t;
  long double shape = base_shape_;
  long double P = reg_lower_incomplete_gamma(base_shape_, static_cast<double>(x));
  // e^-x x^shape / Gamma(shape + 1): the decrement from P(shape) to P(shape + 1).
  long double term = std::exp(shape * std::log(x) - x - std::lgamma(shape + 1.0L));
  long double acc = 0.0L;
  for (double w : latent_.probs) {
    if (P <= 0.0L) break;
    acc += w * P;
    P -= term;
    term *= x / (shape + 1.0L);
    shape += 1.0L;
  }
  return static_cast<double>(std::clamp(acc, 0.0L, 1.0L));
}

double GammaMixture::error_bound() const {
  return latent_.tail_bound + latent_.rel_error + 1e-12 +
         static_cast<double>((latent_.size() + 16) * 8 * kUld);
}

double GammaMixture::quantile(double prob) const {
  if (!(prob > 0.0 && prob < 1.0)) throw PreconditionError("quantile: prob must lie in (0, 1)");
  double hi = std::max(mean_, 1e-300);
  while (cdf(hi) < prob) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericFailure("quantile: bracket search diverged");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < prob ? lo : hi) = mid;
  }
  return hi;
}

CdfGrid gamma_convolution_cdf(const ConvolutionSpec& spec, const RealVector& grid,
                              double tail_cap, double common_beta) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k]) || grid[k] < 0.0 || (k > 0 && grid[k] < grid[k - 1])) {
      throw PreconditionError("gamma_convolution_cdf: grid must be finite, nonnegative, sorted");
    }
  }
  const GammaMixture mix(spec, tail_cap, common_beta);
  CdfGrid out;
  out.points = grid;
  const double err = mix.error_bound();
  double running = 0.0;
  for (double t : grid) {
    running = std::max(running, mix.cdf(t));
    out.cdf.push_back(running);
    out.error.push_back(err);
  }
  return out;
}

RealVector default_survival_grid(const ConvolutionSpec& s1, const ConvolutionSpec& s2,
                                 std::size_t points, double tail_cap) {
  if (points < 2) throw PreconditionError("default_survival_grid: need at least two points");
  const GammaMixture m1(s1, tail_cap);
  const GammaMixture m2(s2, tail_cap);
  const GammaMixture& larger = m1.mean() >= m2.mean() ? m1 : m2;
  const double top = larger.quantile(0.999);
  RealVector grid;
  for (std::size_t k = 0; k < points; ++k) {
    grid.push_back(top * static_cast<double>(k) / static_cast<double>(points - 1));
  }
  grid.push_back(m1.mean());
  grid.push_back(m2.mean());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

namespace {

SurvivalVerdict judge(const RealVector& t, const RealVector& s1, const RealVector& s2,
                      const RealVector& err, double tol) {
  SurvivalVerdict v;
  v.points = t.size();
  bool refuted = false;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double m = s2[k] - s1[k];
    if (k == 0 || m < v.min_margin) {
      v.min_margin = m;
      v.worst_t = t[k];
      v.error_at_worst = err[k];
    }
    if (m < -(tol + err[k])) refuted = true;
  }
  if (refuted) {
    v.status = Status::refuted;
  } else if (v.min_margin >= -tol) {
    v.status = Status::holds;
  } else {
    v.status = Status::unknown;
  }
  return v;
}

}  // namespace

SurvivalVerdict survival_dominance_check(const TruncatedPMF& d1, const TruncatedPMF& d2,
                                         double tol) {
  if (d1.probs.empty() || d2.probs.empty()) throw PreconditionError("survival check: empty pmf");
  const double gap = d2.offset - d1.offset;
  if (std::abs(gap - std::round(gap)) > 1e-9 * std::max(1.0, std::abs(gap))) {
    throw PreconditionError("survival check: lattices are not aligned");
  }
  const double base = std::min(d1.offset, d2.offset);
  const long long shift1 = std::llround(d1.offset - base);
  const long long shift2 = std::llround(d2.offset - base);
  const std::size_t len = static_cast<std::size_t>(
      std::max<long long>(shift1 + static_cast<long long>(d1.size()),
                          shift2 + static_cast<long long>(d2.size())));
  const double err = d1.tail_bound + d2.tail_bound + d1.rel_error + d2.rel_error +
                     static_cast<double>(2 * len * kUld);
  RealVector t(len), s1(len), s2(len), e(len, err);
  long double c1 = 0.0L;
  long double c2 = 0.0L;
  for (std::size_t k = 0; k < len; ++k) {
    t[k] = base + static_cast<double>(k);
    s1[k] = static_cast<double>(1.0L - c1);
    s2[k] = static_cast<double>(1.0L - c2);
    const long long i1 = static_cast<long long>(k) - shift1;
    const long long i2 = static_cast<long long>(k) - shift2;
    if (i1 >= 0) c1 += d1.at(static_cast<std::size_t>(i1));
    if (i2 >= 0) c2 += d2.at(static_cast<std::size_t>(i2));
  }
  return judge(t, s1, s2, e, tol);
}

SurvivalVerdict survival_dominance_check(const CdfGrid& d1, const CdfGrid& d2, double tol) {
  if (d1.points.size() != d2.points.size()) throw PreconditionError("survival check: grid mismatch");
  RealVector s1, s2, e;
  for (std::size_t k = 0; k < d1.points.size(); ++k) {
    if (std::abs(d1.points[k] - d2.points[k]) > 1e-12 * std::max(1.0, std::abs(d1.points[k]))) {
      throw PreconditionError("survival check: grid mismatch");
    }
    s1.push_back(1.0 - d1.cdf[k]);
    s2.push_back(1.0 - d2.cdf[k]);
    e.push_back(d1.error[k] + d2.error[k]);
  }
  return judge(d1.points, s1, s2, e, tol);
}

bool lr_monotone_check(const TruncatedPMF& d1, const TruncatedPMF& d2, double rel_tol) {
  if (std::abs(d1.offset - d2.offset) > 1e-12 * std::max(1.0, std::abs(d1.offset))) {
    throw PreconditionError("lr_monotone_check: lattice offsets differ");
  }
  const std::size_t len = std::min(d1.exact_len, d2.exact_len);
  bool have = false;
  double prev = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    if (!(d1.probs[k] > 1e-280) || !(d2.probs[k] > 1e-280)) {
      have = false;
      continue;
    }
    const double r = d2.probs[k] / d1.probs[k];
    if (have && r < prev * (1.0 - rel_tol)) return false;
    prev = r;
    have = true;
  }
  return true;
}

EmpiricalCdf::EmpiricalCdf(RealVector samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw PreconditionError("EmpiricalCdf: no samples");
  std::sort(samples_.begin(), samples_.end());
}

double EmpiricalCdf::operator()(double t) const {
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), t);
  return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

double EmpiricalCdf::mean() const {
  long double s = 0.0L;
  for (double v : samples_) s += v;
  return static_cast<double>(s / samples_.size());
}

double EmpiricalCdf::kolmogorov_bound(const std::function<double(double)>& cdf,
                                      std::size_t stride) const {
  const std::size_t n = samples_.size();
  const double dn = static_cast<double>(n);
  stride = std::max<std::size_t>(stride, 1);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
  if (idx.back() != n - 1) idx.push_back(n - 1);

  std::vector<double> F(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) F[k] = cdf(samples_[idx[k]]);
  double bound = F.front();
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const double lo_emp = static_cast<double>(idx[k] + 1) / dn;
    const double hi_emp = static_cast<double>(idx[k + 1]) / dn;
    bound = std::max({bound, hi_emp - F[k], F[k + 1] - lo_emp});
  }
  return std::max(bound, 1.0 - F.back());
}

EmpiricalCdf mc_sampler(const ConvolutionSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw PreconditionError("mc_sampler: need at least one sample");
  std::mt19937_64 rng(seed);
  std::vector<std::gamma_distribution<double>> comps;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double scale = spec.family == Family::gamma ? 1.0 / spec.scales[i]
                                                      : (1.0 - spec.scales[i]) / spec.scales[i];
    comps.emplace_back(spec.shapes[i], scale);
  }
  RealVector samples(n);
  for (std::size_t s = 0; s < n; ++s) {
    double total = 0.0;
    for (auto& g : comps) {
      const double v = g(rng);
      if (spec.family == Family::gamma) {
        total += v;
      } else if (v > 0.0) {
        total += static_cast<double>(std::poisson_distribution<long long>(v)(rng));
      }
    }
    samples[s] = total;
  }
  return EmpiricalCdf(std::move(samples));
}

}  // namespace stochord::dist
