#include "stochord/majorization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stochord::majorization {

std::vector<std::size_t> sorting_permutation(std::span<const double> v, SortDirection dir) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (dir == SortDirection::increasing) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  }
  return order;
}

RealVector sort_components(std::span<const double> v, SortDirection dir) {
  RealVector out;
  out.reserve(v.size());
  for (std::size_t k : sorting_permutation(v, dir)) out.push_back(v[k]);
  return out;
}

namespace {

// First k (zero based) where the running prefix comparison fails.
template <class Cmp>
std::optional<std::size_t> first_prefix_violation(const RealVector& xs, const RealVector& ys,
                                                  double tol, Cmp violates) {
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    if (violates(sx, sy, tol)) return k;
  }
  return std::nullopt;
}

}  // namespace

MajorizationResult check_majorization(std::span<const double> x, std::span<const double> y,
                                      Mode mode) {
  require_same_length(x, y, "check_majorization");
  require_finite(x, "check_majorization x");
  require_finite(y, "check_majorization y");
  const double tol = scaled_tolerance(x, y);

  std::optional<std::size_t> below;
  std::optional<std::size_t> above;
  if (mode != Mode::above) {
    below = first_prefix_violation(sort_components(x, SortDirection::decreasing),
                                   sort_components(y, SortDirection::decreasing), tol,
                                   [](double sx, double sy, double t) { return sx > sy + t; });
  }
  if (mode != Mode::below) {
    above = first_prefix_violation(sort_components(x, SortDirection::increasing),
                                   sort_components(y, SortDirection::increasing), tol,
                                   [](double sx, double sy, double t) { return sx < sy - t; });
  }

  MajorizationResult r;
  if (below || above) {
    r.holds = false;
    if (below && above) {
      r.violated_prefix = std::min(*below, *above);
    } else {
      r.violated_prefix = below ? below : above;
    }
  }
  return r;
}

std::optional<TStep> match_t_step(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "verify_t_step");
  const double tol = scaled_tolerance(a, b);
  std::vector<std::size_t> changed;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(b[k] - a[k]) > tol) {
      changed.push_back(k);
      if (changed.size() > 2) return std::nullopt;
    }
  }
  if (changed.empty()) return TStep{0, a.size() > 1 ? 1u : 0u, 0.0};
  if (changed.size() != 2) return std::nullopt;

  const std::size_t i = changed[0];
  const std::size_t j = changed[1];
  const double di = b[i] - a[i];
  const double dj = b[j] - a[j];
  if (di >= 0.0 || dj <= 0.0) return std::nullopt;
  if (std::abs(di + dj) > tol) return std::nullopt;
  return TStep{i, j, 0.5 * (dj - di)};
}

TChain t_transform_chain(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, "t_transform_chain");
  require_finite(x, "t_transform_chain x");
  require_finite(y, "t_transform_chain y");
  const double tol = scaled_tolerance(x, y);
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (x[k] < x[k - 1] - tol || y[k] < y[k - 1] - tol) {
      throw PreconditionError("t_transform_chain: inputs must be sorted increasing");
    }
  }
  if (!check_majorization(x, y, Mode::full)) {
    throw PreconditionError("t_transform_chain: x is not majorized by y");
  }

  // Walk backwards from y towards x. Each transfer pulls the first surplus
  // coordinate b and the nearest deficit a < b towards x; everything strictly
  // between them already agrees with x, which keeps the iterate sorted.
  const std::size_t n = x.size();
  RealVector psi(y.begin(), y.end());
  std::vector<RealVector> rev{psi};
  std::vector<TStep> rev_steps;
  for (std::size_t iter = 0; iter < n; ++iter) {
    std::size_t b = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (psi[k] - x[k] > tol) {
        b = k;
        break;
      }
    }
    if (b == n) break;
    std::size_t a = n;
    for (std::size_t k = b; k-- > 0;) {
      if (x[k] - psi[k] > tol) {
        a = k;
        break;
      }
    }
    if (a == n) throw NumericFailure("t_transform_chain: no deficit precedes surplus");

    const double delta = std::min(x[a] - psi[a], psi[b] - x[b]);
    psi[a] += delta;
    psi[b] -= delta;
    if (std::abs(psi[a] - x[a]) <= tol) psi[a] = x[a];
    if (std::abs(psi[b] - x[b]) <= tol) psi[b] = x[b];
    rev.push_back(psi);
    rev_steps.push_back(TStep{a, b, delta});
  }

  TChain chain;
  chain.vectors.assign(rev.rbegin(), rev.rend());
  chain.vectors.front().assign(x.begin(), x.end());
  chain.steps.assign(rev_steps.rbegin(), rev_steps.rend());
  return chain;
}

}  // namespace stochord::majorization
