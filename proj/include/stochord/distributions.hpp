#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stochord/common.hpp"

// Exact lattice distributions for negative binomial convolutions, shape
// mixtures, the gamma convolution CDF, and numeric oracles for the
// convolution and usual stochastic orders.
//
// N_{a,p} counts failures before the a-th success: P(N = k) =
// C(k+a-1, k) p^a q^k. The shifted variable a + N_{a,p} lives on a + Z>=0,
// which is why TruncatedPMF carries a real offset. Gamma variables use the
// rate parameterization, density b^a t^(a-1) e^(-bt) / Gamma(a).
namespace stochord::dist {

struct NegBinParams {
  double alpha = 1.0;
  double p = 0.5;
  double q() const { return 1.0 - p; }
  void validate() const;
};

struct GammaParams {
  double alpha = 1.0;
  double beta = 1.0;
  void validate() const;
};

enum class Family { negbin, gamma };
std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// Independent components; scales are success probabilities for negbin and
/// rates for gamma.
struct ConvolutionSpec {
  Family family = Family::negbin;
  RealVector shapes;
  RealVector scales;

  std::size_t size() const { return shapes.size(); }
  double total_shape() const;
  void validate() const;
  NegBinParams negbin(std::size_t i) const { return {shapes[i], scales[i]}; }
  GammaParams gamma(std::size_t i) const { return {shapes[i], scales[i]}; }
};

inline constexpr double kDefaultTailCap = 1e-12;
inline constexpr std::size_t kMaxSupport = std::size_t{1} << 22;

/// probs[k] is the mass at offset + k. Every stored entry is at most the true
/// mass up to relative rounding `rel_error`, entries below `exact_len` are
/// exact up to that rounding, and `tail_bound` bounds the total mass missing
/// from probs (omitted tail plus undercounted entries).
struct TruncatedPMF {
  double offset = 0.0;
  RealVector probs;
  double tail_bound = 0.0;
  double rel_error = 0.0;
  std::size_t exact_len = 0;

  std::size_t size() const { return probs.size(); }
  double at(std::size_t k) const { return k < probs.size() ? probs[k] : 0.0; }
  double mass() const;
  double mean() const;
};

TruncatedPMF point_mass(double offset = 0.0);

/// Unshifted NB pmf (offset 0), extended until the certified tail is at most
/// tail_cap and the length is at least min_len.
TruncatedPMF nb_pmf(const NegBinParams& params, double tail_cap = kDefaultTailCap,
                    std::size_t min_len = 0);

/// Same probabilities on the lattice alpha + Z>=0.
TruncatedPMF shifted_nb_pmf(const NegBinParams& params, double tail_cap = kDefaultTailCap,
                            std::size_t min_len = 0);

/// Law of the independent sum. Throws NumericFailure beyond kMaxSupport.
TruncatedPMF convolve(const TruncatedPMF& a, const TruncatedPMF& b);

/// Independent sum of the configured components with total tail at most
/// tail_cap; entries are exact over the whole returned range. `shifted` puts
/// the result on the lattice total_shape + Z>=0.
TruncatedPMF nb_convolution(const ConvolutionSpec& spec, double tail_cap = kDefaultTailCap,
                            std::size_t min_len = 0, bool shifted = false);

/// Max absolute difference over the union of both supports. Offsets must
/// agree.
double linf_distance(const TruncatedPMF& a, const TruncatedPMF& b);

struct Deconvolution {
  double offset = 0.0;      // lattice origin of z
  RealVector z;             // coefficients over the exactly known prefix
  RealVector error;         // certified bound on |computed - exact| per coefficient
  Status status = Status::unknown;
  double min_coefficient = 0.0;
  std::size_t worst_index = 0;  // argmin of z
  double mass = 0.0;            // sum of z
  double mass_floor = 0.0;      // prefix mass of f2 the sum must reach
  bool certified = false;       // every z_k - error_k >= -tol as well
};

/// Solves f2 = f1 * z by forward substitution in extended precision.
/// Holds iff every z_k >= -tol and the mass lies in [mass_floor - tol, 1 + tol];
/// Refuted iff some z_k < -max(tol, error_k); Unknown otherwise.
Deconvolution deconvolve(const TruncatedPMF& f2, const TruncatedPMF& f1, double tol = 1e-12);

/// Same verdict rule for two NB convolutions, computing z from the explicit
/// logarithm of the quotient generating function instead of dividing by
/// f1[0]; much tighter error bounds when f1[0] is small. The coefficients
/// cover the support needed by either spec at tail_cap, at least min_len.
Deconvolution nb_deconvolve(const ConvolutionSpec& s2, const ConvolutionSpec& s1,
                            double tol = 1e-12, double tail_cap = kDefaultTailCap,
                            std::size_t min_len = 0);

/// E t^(alpha + N) for the shifted variable; t in (0, 1/q).
double pgf_eval(const NegBinParams& params, double t);
/// sum_k t^(offset + k) probs[k].
double pgf_series(const TruncatedPMF& pmf, double t);

/// Shifted NB with random shape: the latent gives the shape values
/// offset + h; the result lives on latent.offset + Z>=0.
TruncatedPMF shape_mixture_pmf(const TruncatedPMF& latent, double p,
                               double tail_cap = kDefaultTailCap);

/// Sum of two shifted NBs with success c0 +- lambda sharing one shape drawn
/// from the shifted NB(alpha, p) latent. Lives on 2 alpha + Z>=0.
TruncatedPMF coupled_pair_mixture_pmf(double alpha, double c0, double lambda, double p,
                                      double tail_cap = kDefaultTailCap);

/// Regularized lower incomplete gamma P(a, x).
double reg_lower_incomplete_gamma(double a, double x);

struct CdfGrid {
  RealVector points;
  RealVector cdf;
  RealVector error;
};

/// A gamma convolution written as G_{R + L, beta}, L the latent NB
/// convolution with success probabilities beta_i / beta.
class GammaMixture {
 public:
  GammaMixture(const ConvolutionSpec& spec, double tail_cap = kDefaultTailCap,
               double common_beta = 0.0);
  /// G_{S, beta} for a random shape S whose law lives on shape_law.offset + Z>=0.
  GammaMixture(const TruncatedPMF& shape_law, double beta);
  double beta() const { return beta_; }
  double base_shape() const { return base_shape_; }
  const TruncatedPMF& latent() const { return latent_; }
  double cdf(double t) const;
  /// Absolute error bound valid for every t.
  double error_bound() const;
  double mean() const { return mean_; }
  double quantile(double prob) const;

 private:
  double beta_ = 0.0;
  double base_shape_ = 0.0;
  double mean_ = 0.0;
  TruncatedPMF latent_;
};

/// common_beta 0 selects twice the largest rate.
CdfGrid gamma_convolution_cdf(const ConvolutionSpec& spec, const RealVector& grid,
                              double tail_cap = kDefaultTailCap, double common_beta = 0.0);

/// `points` equally spaced points on [0, q99.9 of the larger-mean law] plus
/// both means, sorted.
RealVector default_survival_grid(const ConvolutionSpec& s1, const ConvolutionSpec& s2,
                                 std::size_t points = 256, double tail_cap = kDefaultTailCap);

struct SurvivalVerdict {
  Status status = Status::unknown;
  double min_margin = 0.0;  // min over t of S2(t) - S1(t)
  double worst_t = 0.0;
  double error_at_worst = 0.0;
  std::size_t points = 0;
};

/// Compares P(X1 >= t) with P(X2 >= t). Holds iff every margin is >= -tol;
/// Refuted iff some margin is < -(tol + error); Unknown otherwise.
SurvivalVerdict survival_dominance_check(const TruncatedPMF& d1, const TruncatedPMF& d2,
                                         double tol = 1e-10);
SurvivalVerdict survival_dominance_check(const CdfGrid& d1, const CdfGrid& d2,
                                         double tol = 1e-10);

/// f2/f1 nondecreasing over the points where both are positive and exact.
bool lr_monotone_check(const TruncatedPMF& d1, const TruncatedPMF& d2, double rel_tol = 1e-9);

class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(RealVector samples);
  double operator()(double t) const;
  std::size_t size() const { return samples_.size(); }
  const RealVector& samples() const { return samples_; }
  double mean() const;
  /// Upper bound on sup |F_n - F| using F at every `stride`-th order
  /// statistic and monotonicity in between.
  double kolmogorov_bound(const std::function<double(double)>& cdf,
                          std::size_t stride = 16) const;

 private:
  RealVector samples_;  // sorted
};

/// Gamma components by shape-scale sampling, NB components as gamma-Poisson
/// mixtures; reproducible for a given seed.
EmpiricalCdf mc_sampler(const ConvolutionSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace stochord::dist
