#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stochord/common.hpp"

// Vector majorization: prefix-sum predicates and constructive chains of
// two-coordinate transfers (T-transforms) linking a majorized pair.
namespace stochord::majorization {

enum class SortDirection { increasing, decreasing };

/// Which family of prefix inequalities is checked.
///   below: decreasing-order prefix sums of x do not exceed those of y
///   above: increasing-order prefix sums of x are at least those of y
///   full:  both, which forces equal totals
enum class Mode { below, above, full };

/// Stable sort; ties keep their original relative order.
RealVector sort_components(std::span<const double> v, SortDirection dir);

/// Permutation that stably sorts v. `order[k]` is the index of the k-th element.
std::vector<std::size_t> sorting_permutation(std::span<const double> v, SortDirection dir);

struct MajorizationResult {
  bool holds = true;
  /// Zero-based index of the last element of the first violated prefix.
  std::optional<std::size_t> violated_prefix;
  explicit operator bool() const { return holds; }
};

/// Throws PreconditionError on length mismatch or non-finite input.
MajorizationResult check_majorization(std::span<const double> x, std::span<const double> y,
                                      Mode mode);

/// One elementary transfer of `eps` from coordinate i to coordinate j (i < j):
/// next[i] = prev[i] - eps, next[j] = prev[j] + eps.
struct TStep {
  std::size_t i = 0;
  std::size_t j = 0;
  double eps = 0.0;
};

struct TChain {
  std::vector<RealVector> vectors;
  std::vector<TStep> steps;
};

/// Returns the transfer linking a to b, or nullopt if b is not a single
/// nonnegative low-to-high transfer away from a. Identical vectors yield
/// a zero transfer.
std::optional<TStep> match_t_step(std::span<const double> a, std::span<const double> b);

inline bool verify_t_step(std::span<const double> a, std::span<const double> b) {
  return match_t_step(a, b).has_value();
}

/// Chain of at most n increasing vectors from x to y, each one a single
/// transfer away from the previous and majorized by the next.
/// Requires x and y sorted increasing with x majorized by y.
TChain t_transform_chain(std::span<const double> x, std::span<const double> y);

}  // namespace stochord::majorization
