#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "stochord/arrangement.hpp"

using namespace stochord;
using namespace stochord::arrangement;

TEST_CASE("canonical form sorts by x then y") {
  const PairClass p{{3, 1, 1}, {0, 5, 2}};
  const PairClass c = canonical_form(p);
  CHECK(c.x == RealVector{1, 1, 3});
  CHECK(c.y == RealVector{2, 5, 0});
}

TEST_CASE("pair equality ignores a common permutation only") {
  const PairClass p{{1, 2}, {3, 4}};
  CHECK(check_pair_equal_a(p, PairClass{{2, 1}, {4, 3}}));
  CHECK_FALSE(check_pair_equal_a(p, PairClass{{1, 2}, {4, 3}}));
  CHECK_THROWS_AS(check_pair_equal_a(p, PairClass{{1, 2, 3}, {3, 4, 5}}), PreconditionError);
}

TEST_CASE("inversions and the extreme arrangements") {
  CHECK(inversion_count({1, 2, 3}) == 0);
  CHECK(inversion_count({3, 2, 1}) == 3);
  CHECK(inversion_count({2, 2, 1}) == 2);
  const PairClass p{{2, 0, 1}, {5, 4, 6}};
  const PairClass lo = opposite_arrangement(p);
  const PairClass hi = similar_arrangement(p);
  CHECK(lo.x == RealVector{0, 1, 2});
  CHECK(lo.y == RealVector{6, 5, 4});
  CHECK(hi.y == RealVector{4, 5, 6});
  CHECK(is_opposite_ordered(lo));
  CHECK_FALSE(is_opposite_ordered(hi));
  CHECK(check_arrangement_leq(lo, hi).status == Status::holds);
  CHECK(check_arrangement_leq(hi, lo).status == Status::refuted);
}

TEST_CASE("tied x values make every arrangement equivalent") {
  const PairClass a{{1, 1}, {2, 3}};
  const PairClass b{{1, 1}, {3, 2}};
  CHECK(check_pair_equal_a(a, b));
  CHECK(is_opposite_ordered(a));
  CHECK(check_arrangement_leq(a, b).status == Status::holds);
}

TEST_CASE("multiset mismatch is a precondition error") {
  const PairClass a{{1, 2}, {3, 4}};
  CHECK_THROWS_AS(check_arrangement_leq(a, PairClass{{1, 2}, {3, 5}}), PreconditionError);
  CHECK_THROWS_AS(check_arrangement_leq(a, PairClass{{1, 3}, {3, 4}}), PreconditionError);
}

TEST_CASE("bfs verdicts match the brute-force reachability set") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 2 + trial % 4;
    RealVector x(n);
    RealVector y(n);
    // Small integer values force ties now and then.
    for (auto& v : x) v = static_cast<double>(rng() % 4);
    for (auto& v : y) v = static_cast<double>(rng() % 5);
    RealVector y2 = y;
    std::shuffle(y2.begin(), y2.end(), rng);
    const PairClass p1{x, y};
    const PairClass p2{x, y2};
    const auto up = oracle::arrangement_up_set(x, y);
    const bool expected = up.count(oracle::canonical(x, y2)) > 0;
    const auto v = check_arrangement_leq(p1, p2);
    REQUIRE(v.status != Status::unknown);
    CHECK((v.status == Status::holds) == expected);
    if (v.status == Status::holds) {
      CHECK(verify_arrangement_chain(p1, p2, v.moves));
    }
  }
}

TEST_CASE("chain replay rejects illegal swaps") {
  const PairClass p1{{0, 1, 2}, {1, 2, 3}};
  const PairClass p2{{0, 1, 2}, {3, 2, 1}};
  // Already similarly ordered, so the first swap (y0 < y2) is not allowed.
  CHECK_FALSE(verify_arrangement_chain(p1, p2, {{0, 2}}));
  CHECK(verify_arrangement_chain(p2, p1, {{0, 2}}));
  CHECK_FALSE(verify_arrangement_chain(p2, p1, {}));
}

TEST_CASE("a small budget yields Unknown rather than a wrong answer") {
  const PairClass p1{{0, 1, 2, 3, 4, 5}, {6, 5, 4, 3, 2, 1}};
  const PairClass p2{{0, 1, 2, 3, 4, 5}, {1, 2, 3, 4, 5, 6}};
  const auto v = check_arrangement_leq(p1, p2, 3);
  CHECK(v.status != Status::refuted);
  const auto full = check_arrangement_leq(p1, p2);
  CHECK(full.status == Status::holds);
  CHECK(verify_arrangement_chain(p1, p2, full.moves));
}
