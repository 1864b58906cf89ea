#include "stochord/arrangement.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>
#include <unordered_map>

#include "stochord/majorization.hpp"

namespace stochord::arrangement {

namespace maj = stochord::majorization;

void PairClass::validate(const char* what) const {
  require_same_length(x, y, what);
  require_finite(x, what);
  require_finite(y, what);
}

PairClass canonical_form(const PairClass& p) {
  p.validate("canonical_form");
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (p.x[a] != p.x[b]) return p.x[a] < p.x[b];
    return p.y[a] < p.y[b];
  });
  PairClass out;
  out.x.reserve(p.size());
  out.y.reserve(p.size());
  for (std::size_t k : order) {
    out.x.push_back(p.x[k]);
    out.y.push_back(p.y[k]);
  }
  return out;
}

bool check_pair_equal_a(const PairClass& p1, const PairClass& p2) {
  p1.validate("check_pair_equal_a");
  p2.validate("check_pair_equal_a");
  require_same_length(p1.x, p2.x, "check_pair_equal_a");
  const PairClass a = canonical_form(p1);
  const PairClass b = canonical_form(p2);
  const double tx = scaled_tolerance(a.x, b.x);
  const double ty = scaled_tolerance(a.y, b.y);
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a.x[k] - b.x[k]) > tx || std::abs(a.y[k] - b.y[k]) > ty) return false;
  }
  return true;
}

std::size_t inversion_count(const RealVector& y) {
  const double tol = scaled_tolerance(y);
  std::size_t count = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = i + 1; j < y.size(); ++j) {
      if (y[i] > y[j] + tol) ++count;
    }
  }
  return count;
}

PairClass opposite_arrangement(const PairClass& p) {
  p.validate("opposite_arrangement");
  return {maj::sort_components(p.x, maj::SortDirection::increasing),
          maj::sort_components(p.y, maj::SortDirection::decreasing)};
}

PairClass similar_arrangement(const PairClass& p) {
  p.validate("similar_arrangement");
  return {maj::sort_components(p.x, maj::SortDirection::increasing),
          maj::sort_components(p.y, maj::SortDirection::increasing)};
}

bool is_opposite_ordered(const PairClass& p) {
  p.validate("is_opposite_ordered");
  const double tx = scaled_tolerance(p.x);
  const double ty = scaled_tolerance(p.y);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double dx = p.x[j] - p.x[i];
      const double dy = p.y[j] - p.y[i];
      if ((dx > tx && dy > ty) || (dx < -tx && dy < -ty)) return false;
    }
  }
  return true;
}

namespace {

// Integer ranks of values, equal ranks for values within tolerance.
std::vector<int> value_ranks(const RealVector& values, const RealVector& reference, double tol) {
  RealVector levels = maj::sort_components(reference, maj::SortDirection::increasing);
  RealVector distinct;
  for (double v : levels) {
    if (distinct.empty() || v - distinct.back() > tol) distinct.push_back(v);
  }
  std::vector<int> ranks;
  ranks.reserve(values.size());
  for (double v : values) {
    auto it = std::lower_bound(distinct.begin(), distinct.end(), v - tol);
    ranks.push_back(static_cast<int>(it - distinct.begin()));
  }
  return ranks;
}

// Block id per position of a sorted x: equal (within tol) x share a block.
std::vector<int> tie_blocks(const RealVector& sorted_x, double tol) {
  std::vector<int> block(sorted_x.size(), 0);
  for (std::size_t k = 1; k < sorted_x.size(); ++k) {
    block[k] = block[k - 1] + (sorted_x[k] - sorted_x[k - 1] > tol ? 1 : 0);
  }
  return block;
}

// Arrangements that differ only inside an x tie-block are the same point;
// sorting y inside each block picks one representative.
void canonicalize(std::vector<int>& ranks, const std::vector<int>& block) {
  std::size_t start = 0;
  while (start < ranks.size()) {
    std::size_t end = start + 1;
    while (end < ranks.size() && block[end] == block[start]) ++end;
    std::sort(ranks.begin() + static_cast<std::ptrdiff_t>(start),
              ranks.begin() + static_cast<std::ptrdiff_t>(end));
    start = end;
  }
}

std::string key_of(const std::vector<int>& ranks) {
  return std::string(ranks.begin(), ranks.end());
}

bool same_multiset(const RealVector& a, const RealVector& b) {
  const RealVector sa = maj::sort_components(a, maj::SortDirection::increasing);
  const RealVector sb = maj::sort_components(b, maj::SortDirection::increasing);
  const double tol = scaled_tolerance(sa, sb);
  for (std::size_t k = 0; k < sa.size(); ++k) {
    if (std::abs(sa[k] - sb[k]) > tol) return false;
  }
  return true;
}

struct Node {
  std::vector<int> ranks;
  std::ptrdiff_t parent = -1;
  SwapMove move;
};

}  // namespace

ArrangementVerdict check_arrangement_leq(const PairClass& p1, const PairClass& p2,
                                         std::size_t node_budget) {
  p1.validate("check_arrangement_leq");
  p2.validate("check_arrangement_leq");
  require_same_length(p1.x, p2.x, "check_arrangement_leq");
  if (!same_multiset(p1.x, p2.x) || !same_multiset(p1.y, p2.y)) {
    throw PreconditionError("check_arrangement_leq: component multisets differ");
  }

  const PairClass c1 = canonical_form(p1);
  const PairClass c2 = canonical_form(p2);
  const double tx = scaled_tolerance(c1.x, c2.x);
  const double ty = scaled_tolerance(c1.y, c2.y);
  const std::vector<int> block = tie_blocks(c1.x, tx);

  std::vector<int> start = value_ranks(c1.y, c1.y, ty);
  std::vector<int> goal = value_ranks(c2.y, c1.y, ty);
  canonicalize(start, block);
  canonicalize(goal, block);
  const std::string goal_key = key_of(goal);

  ArrangementVerdict verdict;
  std::vector<Node> nodes{Node{start, -1, {}}};
  std::unordered_map<std::string, std::size_t> seen{{key_of(start), 0}};
  std::deque<std::size_t> frontier{0};
  std::ptrdiff_t found = key_of(start) == goal_key ? 0 : -1;
  const std::size_t n = c1.size();

  while (found < 0 && !frontier.empty()) {
    if (verdict.explored >= node_budget) {
      verdict.status = Status::unknown;
      return verdict;
    }
    const std::size_t cur = frontier.front();
    frontier.pop_front();
    ++verdict.explored;
    for (std::size_t i = 0; i < n && found < 0; ++i) {
      for (std::size_t j = i + 1; j < n && found < 0; ++j) {
        if (block[i] == block[j]) continue;
        if (nodes[cur].ranks[i] <= nodes[cur].ranks[j]) continue;
        std::vector<int> next = nodes[cur].ranks;
        std::swap(next[i], next[j]);
        canonicalize(next, block);
        std::string k = key_of(next);
        if (seen.contains(k)) continue;
        seen.emplace(k, nodes.size());
        nodes.push_back(Node{std::move(next), static_cast<std::ptrdiff_t>(cur), SwapMove{i, j}});
        frontier.push_back(nodes.size() - 1);
        if (k == goal_key) found = static_cast<std::ptrdiff_t>(nodes.size() - 1);
      }
    }
  }

  if (found < 0) {
    verdict.status = Status::refuted;
    return verdict;
  }

  // The search works on block-sorted representatives; translate each move to
  // positions in the raw arrangement reached by replaying the earlier moves.
  std::vector<std::size_t> path;
  for (std::ptrdiff_t k = found; nodes[static_cast<std::size_t>(k)].parent >= 0;
       k = nodes[static_cast<std::size_t>(k)].parent) {
    path.push_back(static_cast<std::size_t>(k));
  }
  std::reverse(path.begin(), path.end());

  std::vector<int> raw = start;
  auto locate = [&](std::size_t canon_pos, int rank) {
    for (std::size_t k = 0; k < n; ++k) {
      if (block[k] == block[canon_pos] && raw[k] == rank) return k;
    }
    throw NumericFailure("check_arrangement_leq: lost track of arrangement");
  };
  for (std::size_t idx : path) {
    const Node& node = nodes[idx];
    const std::vector<int>& before = nodes[static_cast<std::size_t>(node.parent)].ranks;
    const std::size_t i = locate(node.move.i, before[node.move.i]);
    const std::size_t j = locate(node.move.j, before[node.move.j]);
    std::swap(raw[i], raw[j]);
    verdict.moves.push_back(SwapMove{i, j});
  }
  verdict.status = Status::holds;
  return verdict;
}

bool verify_arrangement_chain(const PairClass& p1, const PairClass& p2,
                              const std::vector<SwapMove>& moves) {
  if (p1.x.size() != p1.y.size() || p2.x.size() != p2.y.size() || p1.size() != p2.size()) {
    return false;
  }
  PairClass cur = canonical_form(p1);
  const double ty = scaled_tolerance(cur.y);
  for (const SwapMove& m : moves) {
    if (m.i >= m.j || m.j >= cur.size()) return false;
    if (!(cur.y[m.i] > cur.y[m.j] + ty)) return false;
    std::swap(cur.y[m.i], cur.y[m.j]);
  }
  return check_pair_equal_a(cur, p2);
}

}  // namespace stochord::arrangement
