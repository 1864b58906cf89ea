#pragma once

#include <cstddef>
#include <vector>

#include "stochord/common.hpp"

// Vector pairs modulo a common permutation, equality in that space, and the
// arrangement order generated by swapping two y-components where the earlier
// one is larger.
namespace stochord::arrangement {

/// Pair (x, y) of equal-length vectors. Two pairs that differ by applying the
/// same permutation to both vectors represent the same point.
struct PairClass {
  RealVector x;
  RealVector y;

  std::size_t size() const { return x.size(); }
  void validate(const char* what) const;
};

/// Swap of y-positions i < j; legal only while y[i] > y[j].
struct SwapMove {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const SwapMove&, const SwapMove&) = default;
};

struct ArrangementVerdict {
  Status status = Status::unknown;
  std::vector<SwapMove> moves;
  std::size_t explored = 0;
};

/// Coordinate pairs sorted lexicographically ascending (x first, then y).
PairClass canonical_form(const PairClass& p);

bool check_pair_equal_a(const PairClass& p1, const PairClass& p2);

/// Covers every arrangement for n <= 8.
inline constexpr std::size_t kDefaultNodeBudget = 40320;

/// Decides p1 <=^a p2 by breadth-first search over y-arrangements with x
/// held sorted increasing. On success the moves transform the canonical
/// y-arrangement of p1 into an arrangement equal to p2 in the pair space.
/// Throws PreconditionError when the x or y multisets differ.
ArrangementVerdict check_arrangement_leq(const PairClass& p1, const PairClass& p2,
                                         std::size_t node_budget = kDefaultNodeBudget);

/// Replays moves on the canonical arrangement of p1 and checks legality of
/// each swap and equality with p2 at the end.
bool verify_arrangement_chain(const PairClass& p1, const PairClass& p2,
                              const std::vector<SwapMove>& moves);

/// Number of pairs i < j with y[i] > y[j] (strictly, up to tolerance).
std::size_t inversion_count(const RealVector& y);

/// (x ascending, y descending): the bottom of the arrangement order.
PairClass opposite_arrangement(const PairClass& p);
/// (x ascending, y ascending): the top of the arrangement order.
PairClass similar_arrangement(const PairClass& p);

/// True when p equals (x ascending, y descending) in the pair space, i.e.
/// no two coordinates are similarly ordered.
bool is_opposite_ordered(const PairClass& p);

}  // namespace stochord::arrangement
