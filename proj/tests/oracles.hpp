#pragma once

// Reference implementations used only by the tests. Each one follows a
// different route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oracle {

using Vec = std::vector<double>;

inline double positive_part_sum(const Vec& v, double t, bool above) {
  double s = 0.0;
  for (double x : v) s += std::max(0.0, above ? t - x : x - t);
  return s;
}

/// Weak majorization through the convex-function characterization:
/// below: sum (x_i - t)^+ <= sum (y_i - t)^+ for every t;
/// above: sum (t - x_i)^+ <= sum (t - y_i)^+ for every t;
/// full: both. Testing t at every component value suffices.
inline bool majorized(const Vec& x, const Vec& y, char mode, double tol = 1e-9) {
  Vec ts = x;
  ts.insert(ts.end(), y.begin(), y.end());
  const bool need_below = mode != 'a';
  const bool need_above = mode != 'b';
  for (double t : ts) {
    if (need_below && positive_part_sum(x, t, false) > positive_part_sum(y, t, false) + tol) return false;
    if (need_above && positive_part_sum(x, t, true) > positive_part_sum(y, t, true) + tol) return false;
  }
  return true;
}

using Point = std::vector<std::pair<double, double>>;

inline Point canonical(const Vec& x, const Vec& y) {
  Point p;
  for (std::size_t i = 0; i < x.size(); ++i) p.emplace_back(x[i], y[i]);
  std::sort(p.begin(), p.end());
  return p;
}

/// Every pair reachable from (x, y) by swapping the y-values of two
/// coordinates with x_i < x_j and y_i > y_j.
inline std::set<Point> arrangement_up_set(const Vec& x, const Vec& y) {
  std::set<Point> seen{canonical(x, y)};
  std::queue<Point> q;
  q.push(*seen.begin());
  while (!q.empty()) {
    const Point p = q.front();
    q.pop();
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[i].first < p[j].first && p[i].second > p[j].second) {
          Point n = p;
          std::swap(n[i].second, n[j].second);
          std::sort(n.begin(), n.end());
          if (seen.insert(n).second) q.push(n);
        }
      }
    }
  }
  return seen;
}

inline double nb_pdf(double alpha, double p, double k) {
  return boost::math::pdf(boost::math::negative_binomial(alpha, p), k);
}

inline double gamma_cdf(double alpha, double beta, double t) {
  return t <= 0.0 ? 0.0 : boost::math::gamma_p(alpha, beta * t);
}

/// CDF of G_{a1,b1} + G_{a2,b2} at t by quadrature of the first density
/// against the second CDF.
inline double gamma2_cdf(double a1, double b1, double a2, double b2, double t) {
  if (t <= 0.0) return 0.0;
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto f = [&](double s) {
    if (s <= 0.0 || s >= t) return 0.0;
    return boost::math::gamma_p_derivative(a1, b1 * s) * b1 * gamma_cdf(a2, b2, t - s);
  };
  return integrator.integrate(f, 0.0, t);
}

}  // namespace oracle
