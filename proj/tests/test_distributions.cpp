#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "stochord/distributions.hpp"

using namespace stochord;
using namespace stochord::dist;

namespace {

ConvolutionSpec nb(RealVector a, RealVector p) { return {Family::negbin, std::move(a), std::move(p)}; }
ConvolutionSpec gm(RealVector a, RealVector b) { return {Family::gamma, std::move(a), std::move(b)}; }

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((NegBinParams{1.0, 1.5}.validate()), PreconditionError);
  CHECK_THROWS_AS((NegBinParams{-1.0, 0.5}.validate()), PreconditionError);
  CHECK_THROWS_AS((GammaParams{1.0, 0.0}.validate()), PreconditionError);
  CHECK_THROWS_AS(nb({1, 2}, {0.5}).validate(), PreconditionError);
  CHECK(family_from_string(to_string(Family::gamma)) == Family::gamma);
  CHECK_THROWS_AS(family_from_string("poisson"), PreconditionError);
}

TEST_CASE("negative binomial pmf against the reference") {
  for (auto [a, p] : {std::pair{0.3, 0.2}, std::pair{1.0, 0.5}, std::pair{4.5, 0.9},
                      std::pair{12.0, 0.05}}) {
    const TruncatedPMF f = nb_pmf({a, p}, 1e-13);
    CHECK(f.offset == 0.0);
    CHECK(f.tail_bound <= 1e-13);
    CHECK(f.mass() + f.tail_bound >= 1.0 - 1e-12);
    double worst = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double ref = oracle::nb_pdf(a, p, static_cast<double>(k));
      worst = std::max(worst, std::abs(f.probs[k] - ref) / std::max(ref, 1e-300));
    }
    CHECK(worst < 1e-11);
    CHECK(f.mean() == doctest::Approx(a * (1 - p) / p).epsilon(1e-9));
  }
  const TruncatedPMF s = shifted_nb_pmf({2.5, 0.4});
  CHECK(s.offset == 2.5);
  CHECK(nb_pmf({2.5, 0.4}, kDefaultTailCap, 300).size() >= 300);
}

TEST_CASE("convolution of two pmfs matches direct summation") {
  const TruncatedPMF a = nb_pmf({0.7, 0.3});
  const TruncatedPMF b = nb_pmf({1.9, 0.6});
  const TruncatedPMF c = convolve(a, b);
  for (std::size_t k = 0; k < 40; ++k) {
    double ref = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      ref += oracle::nb_pdf(0.7, 0.3, j) * oracle::nb_pdf(1.9, 0.6, k - j);
    }
    CHECK(c.at(k) == doctest::Approx(ref).epsilon(1e-10));
  }
  // Equal success probabilities add shapes.
  const TruncatedPMF same = nb_convolution(nb({0.7, 1.9}, {0.4, 0.4}));
  const TruncatedPMF merged = nb_pmf({2.6, 0.4});
  CHECK(linf_distance(same, merged) < 1e-12);
  const TruncatedPMF shifted = nb_convolution(nb({0.7, 1.9}, {0.4, 0.4}), kDefaultTailCap, 0, true);
  CHECK(shifted.offset == doctest::Approx(2.6));
  CHECK(point_mass(3.0).at(0) == 1.0);
}

TEST_CASE("deconvolution closed forms") {
  // NB(1,1/2) / NB(2,1/2) has generating function 2 - s.
  const TruncatedPMF f2 = nb_pmf({1.0, 0.5}, 1e-14);
  const TruncatedPMF f1 = nb_pmf({2.0, 0.5}, 1e-14);
  const Deconvolution bad = deconvolve(f2, f1);
  REQUIRE(bad.z.size() >= 3);
  CHECK(bad.z[0] == doctest::Approx(2.0));
  CHECK(bad.z[1] == doctest::Approx(-1.0));
  CHECK(std::abs(bad.z[2]) < 1e-12);
  CHECK(bad.status == Status::refuted);
  CHECK(bad.worst_index == 1);

  const Deconvolution good = deconvolve(f1, f2);
  CHECK(good.status == Status::holds);
  CHECK(good.certified);
  for (std::size_t k = 0; k < 30; ++k) {
    CHECK(good.z[k] == doctest::Approx(oracle::nb_pdf(1.0, 0.5, k)).epsilon(1e-10));
  }

  const Deconvolution nbad = nb_deconvolve(nb({1.0}, {0.5}), nb({2.0}, {0.5}));
  CHECK(nbad.status == Status::refuted);
  CHECK(nbad.z[1] == doctest::Approx(-1.0));
}

TEST_CASE("cumulant deconvolution agrees with forward substitution") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> shape(0.2, 3.0);
  std::uniform_real_distribution<double> prob(0.15, 0.9);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + trial % 3;
    ConvolutionSpec s1 = nb({}, {});
    ConvolutionSpec s2 = nb({}, {});
    for (std::size_t k = 0; k < n; ++k) {
      s1.shapes.push_back(shape(rng));
      s1.scales.push_back(prob(rng));
      s2.shapes.push_back(shape(rng));
      s2.scales.push_back(prob(rng));
    }
    const Deconvolution a = nb_deconvolve(s2, s1);
    const TruncatedPMF f1 = nb_convolution(s1, kDefaultTailCap, a.z.size());
    const TruncatedPMF f2 = nb_convolution(s2, kDefaultTailCap, a.z.size());
    const Deconvolution b = deconvolve(f2, f1);
    const std::size_t m = std::min({a.z.size(), b.z.size(), std::size_t{200}});
    for (std::size_t k = 0; k < m; ++k) {
      const double gap = std::abs(a.z[k] - b.z[k]);
      CHECK(gap <= a.error[k] + b.error[k] + 1e-12);
    }
    if (a.status != Status::unknown && b.status != Status::unknown) {
      CHECK(a.status == b.status);
      ++compared;
    }
  }
  CHECK(compared > 30);
}

TEST_CASE("probability generating functions") {
  const NegBinParams p{2.5, 0.4};
  const double t = 0.8;
  const double closed = std::pow(t, 2.5) * std::pow(0.4 / (1 - 0.6 * t), 2.5);
  CHECK(pgf_eval(p, t) == doctest::Approx(closed).epsilon(1e-12));
  CHECK(pgf_series(shifted_nb_pmf(p, 1e-15), t) == doctest::Approx(closed).epsilon(1e-10));
  CHECK_THROWS_AS(pgf_eval(p, 2.0), PreconditionError);
}

TEST_CASE("shape mixture against a brute-force mixture") {
  const TruncatedPMF latent = shifted_nb_pmf({1.5, 0.6}, 1e-14);
  const double p = 0.35;
  const TruncatedPMF mix = shape_mixture_pmf(latent, p, 1e-12);
  CHECK(mix.offset == latent.offset);
  for (std::size_t k = 0; k < 60; ++k) {
    double ref = 0.0;
    for (std::size_t h = 0; h <= k && h < latent.size(); ++h) {
      ref += latent.probs[h] * oracle::nb_pdf(latent.offset + h, p, static_cast<double>(k - h));
    }
    CHECK(mix.at(k) == doctest::Approx(ref).epsilon(1e-9));
  }
  CHECK(mix.mass() + mix.tail_bound >= 1.0 - 1e-10);
}

TEST_CASE("coupled pair mixture is a proper law on 2 alpha + Z") {
  const TruncatedPMF f = coupled_pair_mixture_pmf(1.2, 0.5, 0.2, 0.4);
  CHECK(f.offset == doctest::Approx(2.4));
  CHECK(f.mass() + f.tail_bound == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(coupled_pair_mixture_pmf(1.2, 0.5, 0.6, 0.4), PreconditionError);
}

TEST_CASE("regularized incomplete gamma") {
  for (double a : {0.05, 0.5, 1.0, 3.7, 40.0, 300.0}) {
    for (double x : {1e-6, 0.01, 0.5, 1.0, 5.0, 50.0, 400.0}) {
      CHECK(reg_lower_incomplete_gamma(a, x) ==
            doctest::Approx(boost::math::gamma_p(a, x)).epsilon(1e-12).scale(1e-300));
    }
  }
  CHECK(reg_lower_incomplete_gamma(2.0, 0.0) == 0.0);
}

TEST_CASE("gamma convolution cdf against quadrature") {
  const ConvolutionSpec s = gm({0.7, 1.8}, {1.5, 4.0});
  const GammaMixture g(s);
  CHECK(g.error_bound() <= 1e-10);
  CHECK(g.mean() == doctest::Approx(0.7 / 1.5 + 1.8 / 4.0));
  for (double t : {0.05, 0.3, 0.9, 1.7, 4.0}) {
    CHECK(std::abs(g.cdf(t) - oracle::gamma2_cdf(0.7, 1.5, 1.8, 4.0, t)) < 1e-9);
  }
  const double q = g.quantile(0.9);
  CHECK(g.cdf(q) == doctest::Approx(0.9).epsilon(1e-8));

  const GammaMixture single(gm({2.2}, {3.0}));
  for (double t : {0.1, 0.7, 2.0}) {
    CHECK(single.cdf(t) == doctest::Approx(oracle::gamma_cdf(2.2, 3.0, t)).epsilon(1e-10));
  }

  const RealVector grid{0.2, 0.8, 1.6};
  const CdfGrid cg = gamma_convolution_cdf(s, grid);
  REQUIRE(cg.cdf.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::abs(cg.cdf[k] - g.cdf(grid[k])) <= cg.error[k] + g.error_bound() + 1e-14);
  }
}

TEST_CASE("gamma mixture over a random shape") {
  // Shape 1 + N with N ~ NB(1, 1/2) at rate 1.
  const TruncatedPMF law = shifted_nb_pmf({1.0, 0.5}, 1e-14);
  const GammaMixture g(law, 1.0);
  CHECK(g.mean() == doctest::Approx(2.0));
  double ref = 0.0;
  for (std::size_t h = 0; h < law.size(); ++h) ref += law.probs[h] * oracle::gamma_cdf(1.0 + h, 1.0, 1.3);
  CHECK(g.cdf(1.3) == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("survival dominance and likelihood ratio") {
  const TruncatedPMF small = nb_pmf({1.0, 0.5});
  const TruncatedPMF large = nb_pmf({2.0, 0.5});
  const SurvivalVerdict up = survival_dominance_check(small, large);
  CHECK(up.status == Status::holds);
  CHECK(up.min_margin >= 0.0);
  const SurvivalVerdict down = survival_dominance_check(large, small);
  CHECK(down.status == Status::refuted);
  CHECK(down.min_margin < -0.1);
  CHECK(survival_dominance_check(small, small).min_margin == doctest::Approx(0.0).scale(1e-15));

  CHECK(lr_monotone_check(small, large));
  CHECK_FALSE(lr_monotone_check(large, small));

  const ConvolutionSpec g1 = gm({1.0}, {2.0});
  const ConvolutionSpec g2 = gm({2.0}, {2.0});
  const RealVector grid = default_survival_grid(g1, g2, 64);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(std::find(grid.begin(), grid.end(), 1.0) != grid.end());
  const CdfGrid c1 = gamma_convolution_cdf(g1, grid);
  const CdfGrid c2 = gamma_convolution_cdf(g2, grid);
  CHECK(survival_dominance_check(c1, c2).status == Status::holds);
  CHECK(survival_dominance_check(c2, c1).status == Status::refuted);
}

TEST_CASE("monte carlo sampler is reproducible and close to the exact law") {
  const ConvolutionSpec s = gm({0.7, 1.8}, {1.5, 4.0});
  const EmpiricalCdf a = mc_sampler(s, 20000, 17);
  const EmpiricalCdf b = mc_sampler(s, 20000, 17);
  const EmpiricalCdf c = mc_sampler(s, 20000, 18);
  CHECK(a.samples() == b.samples());
  CHECK(a.samples() != c.samples());
  const GammaMixture g(s);
  const double ks = a.kolmogorov_bound([&](double t) { return g.cdf(t); });
  CHECK(ks < 0.03);
  CHECK(a.mean() == doctest::Approx(g.mean()).epsilon(0.03));

  const ConvolutionSpec n = nb({2.0}, {0.4});
  const EmpiricalCdf d = mc_sampler(n, 20000, 5);
  for (double v : d.samples()) REQUIRE(v == std::floor(v));
  CHECK(d.mean() == doctest::Approx(3.0).epsilon(0.05));
}
