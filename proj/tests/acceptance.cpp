// Acceptance suite: one PASS/FAIL line per criterion; nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stochord/arrangement.hpp"
#include "stochord/distributions.hpp"
#include "stochord/harness.hpp"
#include "stochord/majorization.hpp"
#include "stochord/rc_order.hpp"

using namespace stochord;
namespace h = stochord::harness;

namespace {

using Rng = std::mt19937_64;

double unif(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Mixture identities, 50 draws each.
void identities() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  const double cap = 1e-12;
  double worst[4] = {0, 0, 0, 0};
  for (int d = 0; d < 50; ++d) {
    // Shifted NB with NB shape equals shifted NB with the product probability.
    {
      const double a = unif(rng, 0.2, 3.0), p1 = unif(rng, 0.1, 0.95), p2 = unif(rng, 0.1, 0.95);
      const auto lhs = dist::shape_mixture_pmf(dist::shifted_nb_pmf({a, p2}, cap), p1, cap);
      double gap = 0.0;
      for (std::size_t k = 0; k < lhs.size() + 50; ++k) {
        gap = std::max(gap, std::abs(lhs.at(k) - oracle::nb_pdf(a, p1 * p2, k)));
      }
      worst[0] = std::max(worst[0], gap);
    }
    // Sum of shifted NBs as one mixture at a common probability.
    {
      const std::size_t n = 2 + d % 2;
      dist::ConvolutionSpec spec{dist::Family::negbin, {}, {}};
      for (std::size_t i = 0; i < n; ++i) {
        spec.shapes.push_back(unif(rng, 0.2, 3.0));
        spec.scales.push_back(unif(rng, 0.1, 0.9));
      }
      const double top = *std::max_element(spec.scales.begin(), spec.scales.end());
      const double p = unif(rng, top + 0.01, std::min(0.99, top + 0.3));
      dist::ConvolutionSpec latent = spec;
      for (double& v : latent.scales) v /= p;
      const auto lhs = dist::nb_convolution(spec, cap, 0, true);
      const auto rhs = dist::shape_mixture_pmf(dist::nb_convolution(latent, cap, 0, true), p, cap);
      worst[1] = std::max(worst[1], dist::linf_distance(lhs, rhs));
    }
    // Coupled pair: the smaller spread sits on the mixture side.
    {
      const double a = unif(rng, 0.2, 3.0), c0 = unif(rng, 0.2, 0.8);
      const double big = unif(rng, 0.05, 0.95) * std::min(c0, 1.0 - c0);
      const double small = unif(rng, 0.0, 1.0) * big;
      const double p = (c0 * c0 - big * big) / (c0 * c0 - small * small);
      const auto lhs = dist::coupled_pair_mixture_pmf(a, c0, small, p, cap);
      std::vector<double> r1, r2;
      for (int k = 0; k < 6000; ++k) {
        r1.push_back(oracle::nb_pdf(a, c0 + big, k));
        r2.push_back(oracle::nb_pdf(a, c0 - big, k));
      }
      double gap = 0.0;
      for (std::size_t m = 0; m < lhs.size(); ++m) {
        double s = 0.0;
        for (std::size_t k = 0; k <= m && k < r1.size(); ++k) {
          if (m - k < r2.size()) s += r1[k] * r2[m - k];
        }
        gap = std::max(gap, std::abs(lhs.probs[m] - s));
      }
      worst[2] = std::max(worst[2], gap);
    }
    // Gamma with NB shape, and a two-term gamma sum as a mixture, on 64 points.
    {
      const double a = unif(rng, 0.2, 3.0), p = unif(rng, 0.05, 0.95), b = unif(rng, 0.5, 5.0);
      const dist::GammaMixture single(dist::shifted_nb_pmf({a, p}, cap), b);
      const double a1 = unif(rng, 0.2, 3.0), a2 = unif(rng, 0.2, 3.0);
      const double b1 = unif(rng, 0.5, 5.0), b2 = unif(rng, 0.5, 5.0);
      const dist::ConvolutionSpec two{dist::Family::gamma, {a1, a2}, {b1, b2}};
      const dist::GammaMixture sum(two, cap);
      const double top1 = single.quantile(0.999), top2 = sum.quantile(0.999);
      for (int k = 0; k < 64; ++k) {
        const double t1 = top1 * k / 63.0, t2 = top2 * k / 63.0;
        worst[3] = std::max(worst[3], std::abs(single.cdf(t1) - oracle::gamma_cdf(a, p * b, t1)));
        worst[3] = std::max(worst[3], std::abs(sum.cdf(t2) - oracle::gamma2_cdf(a1, b1, a2, b2, t2)));
      }
    }
  }
  const double secs = since(t0);
  const bool pass = *std::max_element(worst, worst + 4) <= 1e-9 && secs < 60.0;
  verdict(1, pass,
          fmt("max L-inf residuals nb-mixture %.2e, nb-mix-more %.2e, nb-pair %.2e, gamma %.2e",
              worst[0], worst[1], worst[2], worst[3]) +
              fmt(" (%.1f s)", secs));
}

// 2. Additivity in the shape and recovery by deconvolution.
void infinite_divisibility() {
  Rng rng(202);
  double conv_gap = 0.0, deconv_gap = 0.0;
  for (int d = 0; d < 50; ++d) {
    const double a1 = unif(rng, 0.2, 3.0), a2 = unif(rng, 0.2, 3.0), p = unif(rng, 0.1, 0.9);
    const auto sum = dist::nb_convolution({dist::Family::negbin, {a1, a2}, {p, p}});
    for (std::size_t k = 0; k < sum.size(); ++k) {
      conv_gap = std::max(conv_gap, std::abs(sum.probs[k] - oracle::nb_pdf(a1 + a2, p, k)));
    }
    const auto f2 = dist::nb_pmf({a1 + a2, p}, 1e-12, sum.size());
    const auto f1l = dist::nb_pmf({a1, p}, 1e-12, f2.size());
    const auto z = dist::deconvolve(f2, f1l);
    for (std::size_t k = 0; k < z.z.size(); ++k) {
      deconv_gap = std::max(deconv_gap, std::abs(z.z[k] - oracle::nb_pdf(a2, p, k)));
    }
  }
  verdict(2, conv_gap <= 1e-12 && deconv_gap <= 1e-10,
          fmt("shape additivity L-inf %.2e; deconvolution recovery L-inf %.2e", conv_gap,
              deconv_gap));
}

// 3. Proposition scenarios, 200 seeds each.
void propositions() {
  using K = h::ScenarioKind;
  bool pass = true;
  std::string detail;
  for (K k : {K::raise_alpha, K::lower_beta, K::majorize_beta, K::diff_alpha_majorize_beta,
              K::majorize_alpha, K::conv_ai}) {
    int holds = 0, refuted = 0, unknown = 0, traced = 0, param = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      const h::Report r = h::run_scenario({k, dist::Family::negbin, 0, s});
      param += r.param_status == Status::holds;
      const auto& d = *r.deconvolution;
      if (d.status == Status::holds) ++holds;
      if (d.status == Status::refuted) ++refuted;
      if (d.status == Status::unknown) {
        ++unknown;
        traced += std::abs(d.min_coefficient) <= d.error_at_worst;
      }
    }
    pass = pass && refuted == 0 && unknown < 2 && traced == unknown && param == 200;
    detail += h::to_string(k) + fmt(" %g/%g/%g", holds, refuted, unknown) + "; ";
  }
  verdict(3, pass, "holds/refuted/unknown per scenario: " + detail);
}

// 4. Worked example.
void worked_example() {
  const dist::ConvolutionSpec s1{dist::Family::gamma, {0.4, 0.6, 0.5}, {2, 3, 4}};
  const dist::ConvolutionSpec s2{dist::Family::gamma, {0.7, 0.3, 0.5}, {1, 3, 5}};
  const std::vector<arrangement::PairClass> mids{{{0.4, 0.6, 0.5}, {2, 2, 5}},
                                                 {{0.7, 0.3, 0.5}, {2, 2, 5}}};
  const h::Report r = h::verify_theorem_instance(s1, s2, h::Order::conv, {}, mids);
  bool chain_ok = r.witness && r.witness->moves.size() == 3 &&
                  rc::verify_witness({s1.shapes, s1.scales}, {s2.shapes, s2.scales}, *r.witness);
  if (chain_ok) {
    for (int m = 0; m < 2; ++m) {
      const auto& p = r.witness->pairs[m + 1];
      chain_ok = chain_ok && arrangement::check_pair_equal_a(p, mids[m]);
    }
  }
  const bool numeric = r.numeric_status == Status::holds && r.shape_gap && *r.shape_gap <= 0.0;
  verdict(4, chain_ok && numeric && r.status == Status::holds,
          std::string("3-move chain through the two intermediate pairs ") +
              (chain_ok ? "verified" : "not verified") + "; common-rate deconvolution " +
              std::string(to_string(r.deconvolution->status)) +
              fmt(" (min coefficient %.2e)", r.deconvolution->min_coefficient));
}

// 5. Constructive chains for oppositely ordered weak targets.
void opposite_construction() {
  int accepted = 0, necessary = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto fam = s % 2 ? dist::Family::gamma : dist::Family::negbin;
    const std::size_t n = 1 + s % 5;
    const h::Instance in = h::generate_instance({h::ScenarioKind::opposite_ordered_weak, fam, n, s});
    const arrangement::PairClass p1{in.spec1.shapes, in.spec1.scales};
    const arrangement::PairClass p2{in.spec2.shapes, in.spec2.scales};
    const rc::RcChain c = rc::construct_chain_opposite(p1, p2, rc::ChainMode::weak);
    accepted += rc::verify_rc_chain(c) && rc::verify_witness(p1, p2, c);
    necessary += static_cast<bool>(
        rc::check_necessary(c.pairs.front(), c.pairs.back(), rc::ChainMode::weak));
  }
  verdict(5, accepted == 200 && necessary == 200,
          fmt("%g/200 chains accepted, %g/200 endpoints satisfy the necessary conditions",
              accepted, necessary));
}

// 6. Usual stochastic order scenarios and reversed pairs.
void st_suite() {
  using K = h::ScenarioKind;
  struct Case {
    K kind;
    dist::Family fam;
    const char* name;
  };
  bool pass = true;
  std::string detail;
  for (const Case& c : {Case{K::log_majorize_beta_st, dist::Family::negbin, "LogMajorizeBetaSt"},
                        Case{K::st_general, dist::Family::negbin, "StGeneral(NegBin)"},
                        Case{K::st_general, dist::Family::gamma, "StGeneral(Gamma)"},
                        Case{K::ai_tail, dist::Family::gamma, "AITail"},
                        Case{K::mixture_lemma_st, dist::Family::negbin, "MixtureLemmaSt"}}) {
    int ok = 0, holds = 0, rev_refuted = 0, strict = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      const h::Report r = h::run_scenario({c.kind, c.fam, 0, s});
      const auto& v = *r.survival;
      ok += v.min_margin >= -(r.tolerances.survival_tol + v.error_at_worst) &&
            r.param_status == Status::holds;
      holds += v.status == Status::holds;
      // Generated pairs always have distinct laws, so every reversal is strict.
      const h::Report rev = h::run_scenario({c.kind, c.fam, 0, s, true});
      ++strict;
      rev_refuted += rev.survival->status == Status::refuted;
    }
    pass = pass && ok == 200 && rev_refuted >= 0.95 * strict;
    detail += std::string(c.name) + fmt(" %g/200 (Holds %g), reversed refuted %g/%g; ", ok, holds,
                                        rev_refuted, strict);
  }
  verdict(6, pass, detail);
}

// 7. Monte Carlo agreement.
void monte_carlo() {
  Rng rng(707);
  const std::size_t n = 1000000;
  const double level = 1.63 / std::sqrt(static_cast<double>(n));
  int within = 0;
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    dist::ConvolutionSpec spec{dist::Family::gamma, {}, {}};
    const int m = 1 + c % 4;
    for (int i = 0; i < m; ++i) {
      spec.shapes.push_back(unif(rng, 0.2, 3.0));
      spec.scales.push_back(unif(rng, 0.5, 5.0));
    }
    const dist::GammaMixture mix(spec);
    const dist::EmpiricalCdf emp = dist::mc_sampler(spec, n, 9000 + c);
    const double ks = emp.kolmogorov_bound([&](double t) { return mix.cdf(t); });
    worst = std::max(worst, ks);
    within += ks <= level;
  }
  verdict(7, within >= 19,
          fmt("%g/20 specs within %.5f (largest Kolmogorov bound %.5f)", within, level, worst));
}

// 8. Order theory on small rational instances.
void order_theory() {
  namespace maj = majorization;
  // Every sorted vector of length n with entries in {0, ..., 4}.
  auto sorted_vectors = [](std::size_t n) {
    std::vector<std::vector<double>> out;
    std::vector<double> v(n, 0.0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int lo) {
      if (i == n) {
        out.push_back(v);
        return;
      }
      for (int a = lo; a <= 4; ++a) {
        v[i] = a;
        rec(i + 1, a);
      }
    };
    rec(0, 0);
    return out;
  };
  long checked = 0, bad_pred = 0, bad_chain = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto all = sorted_vectors(n);
    for (const auto& x : all) {
      for (const auto& y : all) {
        for (char mode : {'b', 'a', 'f'}) {
          const auto m = mode == 'b' ? maj::Mode::below : mode == 'a' ? maj::Mode::above : maj::Mode::full;
          bad_pred += static_cast<bool>(maj::check_majorization(x, y, m)) != oracle::majorized(x, y, mode);
          ++checked;
        }
        if (oracle::majorized(x, y, 'f')) {
          const maj::TChain c = maj::t_transform_chain(x, y);
          bool ok = !c.vectors.empty() && c.vectors.front() == x && c.vectors.back() == y &&
                    c.steps.size() + 1 == c.vectors.size() && c.steps.size() <= n;
          for (std::size_t s = 0; ok && s + 1 < c.vectors.size(); ++s) {
            ok = maj::verify_t_step(c.vectors[s], c.vectors[s + 1]) &&
                 oracle::majorized(c.vectors[s], c.vectors[s + 1], 'f');
          }
          bad_chain += !ok;
        }
      }
    }
  }

  // Arrangement sandwich, embedding into the rc order, strict implies weak.
  long pairs = 0, bad_order = 0, bad_sandwich = 0, bad_embed = 0, bad_mono = 0;
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> bases{
      {{1, 2, 3, 4}, {1, 2, 3, 4}}, {{1, 2, 2, 4}, {0, 1, 3, 5}}, {{1, 2, 3}, {2, 2, 5}},
      {{0, 1, 3}, {1, 4, 6}},       {{1, 3}, {2, 7}},             {{1, 1, 2, 3}, {1, 2, 2, 3}}};
  for (const auto& [x, ybase] : bases) {
    std::vector<std::vector<double>> perms;
    std::vector<double> y = ybase;
    std::sort(y.begin(), y.end());
    do perms.push_back(y);
    while (std::next_permutation(y.begin(), y.end()));
    for (const auto& ya : perms) {
      const arrangement::PairClass p{x, ya};
      const auto up = oracle::arrangement_up_set(x, ya);
      const auto lo = arrangement::opposite_arrangement(p);
      const auto hi = arrangement::similar_arrangement(p);
      bad_sandwich += arrangement::check_arrangement_leq(lo, p).status != Status::holds ||
                      arrangement::check_arrangement_leq(p, hi).status != Status::holds;
      for (const auto& yb : perms) {
        const arrangement::PairClass q{x, yb};
        ++pairs;
        const bool leq = up.count(oracle::canonical(x, yb)) > 0;
        const auto av = arrangement::check_arrangement_leq(p, q);
        bad_order += (av.status == Status::holds) != leq ||
                     (leq && !arrangement::verify_arrangement_chain(p, q, av.moves));
        // q above p in the arrangement order puts q below p in the rc order.
        const rc::RcVerdict sv = rc::decide_wrc(q, p, rc::ChainMode::strict);
        if (leq) bad_embed += sv.status != Status::holds;
        const rc::RcVerdict wv = rc::decide_wrc(q, p, rc::ChainMode::weak);
        if (sv.status == Status::holds) {
          rc::RcChain as_weak = *sv.witness;
          as_weak.mode = rc::ChainMode::weak;
          bad_mono += wv.status != Status::holds || !rc::verify_rc_chain(as_weak);
        }
      }
    }
  }
  // Strict implies weak on random small-integer pairs as well.
  Rng rng(808);
  long random_pairs = 0;
  for (int t = 0; t < 400; ++t) {
    const std::size_t n = 2 + t % 3;
    arrangement::PairClass a, b;
    for (std::size_t i = 0; i < n; ++i) {
      a.x.push_back(1 + rng() % 4);
      a.y.push_back(1 + rng() % 4);
    }
    b = a;
    // Random transfer on x or y toward a spread, kept on integers.
    std::vector<double>& v = (t % 2) ? b.x : b.y;
    const std::size_t i = rng() % n, j = (i + 1 + rng() % (n - 1)) % n;
    if (v[i] <= v[j] && v[i] > 0) {
      v[i] -= 1;
      v[j] += 1;
    }
    const rc::RcVerdict sv = rc::decide_wrc(a, b, rc::ChainMode::strict, 2000);
    if (sv.status == Status::holds) {
      ++random_pairs;
      bad_mono += rc::decide_wrc(a, b, rc::ChainMode::weak, 2000).status != Status::holds;
      bad_mono += !oracle::majorized(a.x, b.x, 'f') || !oracle::majorized(a.y, b.y, 'f');
    }
  }
  const bool pass = bad_pred == 0 && bad_chain == 0 && bad_order == 0 && bad_sandwich == 0 &&
                    bad_embed == 0 && bad_mono == 0;
  verdict(8, pass,
          fmt("%g majorization predicates, %g arrangement pairs, %g random rc pairs; ", checked,
              pairs, random_pairs) +
              fmt("mismatches: predicate %g, chain %g, arrangement %g, ", bad_pred, bad_chain,
                  bad_order) +
              fmt("sandwich %g, embedding %g, strict-to-weak %g", bad_sandwich, bad_embed,
                  bad_mono));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> suites{identities,  infinite_divisibility,
                                                  propositions, worked_example,
                                                  opposite_construction, st_suite,
                                                  monte_carlo, order_theory};
  for (std::size_t i = 0; i < suites.size(); ++i) {
    try {
      suites[i]();
    } catch (const std::exception& e) {
      verdict(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}
