#include "stochord/rc_order.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <functional>
#include <queue>
#include <tuple>
#include <unordered_set>

namespace stochord::rc {

namespace maj = stochord::majorization;

std::string to_string(MoveKind k) {
  switch (k) {
    case MoveKind::majorize_x: return "majorize_x";
    case MoveKind::majorize_y: return "majorize_y";
    case MoveKind::raise_x: return "raise_x";
    case MoveKind::lower_y: return "lower_y";
    case MoveKind::weak_majorize_x: return "weak_majorize_x";
    case MoveKind::weak_majorize_y: return "weak_majorize_y";
  }
  return "majorize_x";
}

MoveKind move_kind_from_string(const std::string& s) {
  for (MoveKind k : {MoveKind::majorize_x, MoveKind::majorize_y, MoveKind::raise_x,
                     MoveKind::lower_y, MoveKind::weak_majorize_x, MoveKind::weak_majorize_y}) {
    if (to_string(k) == s) return k;
  }
  throw PreconditionError("unknown move kind '" + s + "'");
}

std::string to_string(ChainMode m) { return m == ChainMode::strict ? "strict" : "weak"; }

ChainMode chain_mode_from_string(const std::string& s) {
  if (s == "strict") return ChainMode::strict;
  if (s == "weak") return ChainMode::weak;
  throw PreconditionError("unknown chain mode '" + s + "'");
}

std::string Violation::describe() const {
  const char* rel = mode == maj::Mode::full ? "majorization"
                    : mode == maj::Mode::below ? "weak majorization from below"
                                               : "weak majorization from above";
  return std::string(1, coordinate) + ": " + rel + " fails at prefix " + std::to_string(prefix);
}

namespace {

bool all_close(const RealVector& a, const RealVector& b, double tol) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) > tol) return false;
  }
  return true;
}

bool close_except(const RealVector& a, const RealVector& b, std::size_t i, std::size_t j,
                  double tol) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (k == i || k == j) continue;
    if (std::abs(a[k] - b[k]) > tol) return false;
  }
  return true;
}

// Ties in either coordinate satisfy the (non-strict) reverse-pair condition.
bool reverse_pair(const PairClass& target, std::size_t i, std::size_t j, double tx, double ty) {
  const double dx = target.x[j] - target.x[i];
  const double dy = target.y[j] - target.y[i];
  if (std::abs(dx) <= tx || std::abs(dy) <= ty) return true;
  return dx * dy < 0.0;
}

bool two_coordinate_majorized(const RealVector& a, const RealVector& b, std::size_t i,
                              std::size_t j, maj::Mode mode) {
  const double lhs[2] = {a[i], a[j]};
  const double rhs[2] = {b[i], b[j]};
  return maj::check_majorization(lhs, rhs, mode).holds;
}

bool is_weak_only(MoveKind k) {
  return k == MoveKind::raise_x || k == MoveKind::lower_y || k == MoveKind::weak_majorize_x ||
         k == MoveKind::weak_majorize_y;
}

}  // namespace

bool verify_rc_move(const PairClass& a, const PairClass& b, const ElementaryMove& m,
                    ChainMode mode) {
  const std::size_t n = a.size();
  if (a.y.size() != n || b.x.size() != n || b.y.size() != n || n == 0) return false;
  if (mode == ChainMode::strict && is_weak_only(m.kind)) return false;
  const double tx = scaled_tolerance(a.x, b.x);
  const double ty = scaled_tolerance(a.y, b.y);

  switch (m.kind) {
    case MoveKind::raise_x:
      if (!all_close(a.y, b.y, ty)) return false;
      for (std::size_t k = 0; k < n; ++k) {
        if (b.x[k] < a.x[k] - tx) return false;
      }
      return true;
    case MoveKind::lower_y:
      if (!all_close(a.x, b.x, tx)) return false;
      for (std::size_t k = 0; k < n; ++k) {
        if (b.y[k] > a.y[k] + ty) return false;
      }
      return true;
    default:
      break;
  }

  if (m.i >= m.j || m.j >= n) return false;
  const bool on_x = m.kind == MoveKind::majorize_x || m.kind == MoveKind::weak_majorize_x;
  const bool weak = m.kind == MoveKind::weak_majorize_x || m.kind == MoveKind::weak_majorize_y;
  const RealVector& moved_a = on_x ? a.x : a.y;
  const RealVector& moved_b = on_x ? b.x : b.y;
  const RealVector& fixed_a = on_x ? a.y : a.x;
  const RealVector& fixed_b = on_x ? b.y : b.x;
  const double t_moved = on_x ? tx : ty;
  const double t_fixed = on_x ? ty : tx;

  if (!all_close(fixed_a, fixed_b, t_fixed)) return false;
  if (!close_except(moved_a, moved_b, m.i, m.j, t_moved)) return false;
  const maj::Mode rel = !weak ? maj::Mode::full : (on_x ? maj::Mode::below : maj::Mode::above);
  if (!two_coordinate_majorized(moved_a, moved_b, m.i, m.j, rel)) return false;
  return reverse_pair(b, m.i, m.j, tx, ty);
}

bool verify_rc_chain(const RcChain& chain) {
  if (chain.pairs.empty()) return false;
  if (chain.moves.size() + 1 != chain.pairs.size()) return false;
  for (const PairClass& p : chain.pairs) {
    if (p.x.size() != p.y.size() || p.x.size() != chain.pairs.front().size()) return false;
  }
  for (std::size_t s = 0; s < chain.moves.size(); ++s) {
    if (!verify_rc_move(chain.pairs[s], chain.pairs[s + 1], chain.moves[s], chain.mode)) {
      return false;
    }
  }
  return true;
}

bool verify_witness(const PairClass& p1, const PairClass& p2, const RcChain& chain) {
  if (!verify_rc_chain(chain)) return false;
  if (chain.pairs.front().size() != p1.size() || p1.size() != p2.size()) return false;
  return arrangement::check_pair_equal_a(chain.pairs.front(), p1) &&
         arrangement::check_pair_equal_a(chain.pairs.back(), p2);
}

NecessaryResult check_necessary(const PairClass& p1, const PairClass& p2, ChainMode mode) {
  p1.validate("check_necessary");
  p2.validate("check_necessary");
  require_same_length(p1.x, p2.x, "check_necessary");
  const maj::Mode mx = mode == ChainMode::strict ? maj::Mode::full : maj::Mode::below;
  const maj::Mode my = mode == ChainMode::strict ? maj::Mode::full : maj::Mode::above;
  NecessaryResult r;
  if (auto cx = maj::check_majorization(p1.x, p2.x, mx); !cx) {
    r.holds = false;
    r.violation = Violation{'x', mx, *cx.violated_prefix};
    return r;
  }
  if (auto cy = maj::check_majorization(p1.y, p2.y, my); !cy) {
    r.holds = false;
    r.violation = Violation{'y', my, *cy.violated_prefix};
  }
  return r;
}

namespace {

// Raise the smallest components of an increasing x to a common level until the
// total reaches `target_total`. The result dominates x componentwise, stays
// increasing, and is majorized by any vector x itself is weakly majorized
// from below by with that total.
RealVector water_fill(const RealVector& x, double target_total) {
  const std::size_t n = x.size();
  double rest = std::accumulate(x.begin(), x.end(), 0.0);
  for (std::size_t m = 1; m <= n; ++m) {
    rest -= x[m - 1];
    const double level = (target_total - rest) / static_cast<double>(m);
    if (m == n || level <= x[m]) {
      RealVector out(x);
      for (std::size_t k = 0; k < m; ++k) out[k] = std::max(out[k], level);
      return out;
    }
  }
  return x;
}

void push(RcChain& chain, PairClass next, ElementaryMove move) {
  chain.pairs.push_back(std::move(next));
  chain.moves.push_back(move);
}

}  // namespace

RcChain construct_chain_opposite(const PairClass& p1, const PairClass& p2, ChainMode mode) {
  p1.validate("construct_chain_opposite");
  p2.validate("construct_chain_opposite");
  require_same_length(p1.x, p2.x, "construct_chain_opposite");
  if (!arrangement::is_opposite_ordered(p2)) {
    throw PreconditionError("construct_chain_opposite: target pair is not oppositely ordered");
  }
  if (auto nec = check_necessary(p1, p2, mode); !nec) {
    throw PreconditionError("construct_chain_opposite: " + nec.violation->describe());
  }
  const std::size_t n = p1.size();

  // Target frame: x ascending, ties broken by y descending, so y is descending.
  std::vector<std::size_t> o2(n);
  std::iota(o2.begin(), o2.end(), std::size_t{0});
  std::stable_sort(o2.begin(), o2.end(), [&](std::size_t a, std::size_t b) {
    if (p2.x[a] != p2.x[b]) return p2.x[a] < p2.x[b];
    return p2.y[a] > p2.y[b];
  });
  RealVector x2(n), y2(n);
  for (std::size_t k = 0; k < n; ++k) {
    x2[k] = p2.x[o2[k]];
    y2[k] = p2.y[o2[k]];
  }
  const PairClass start = arrangement::canonical_form(p1);

  RcChain chain;
  chain.mode = mode;
  chain.pairs.push_back(start);
  const double tx = scaled_tolerance(start.x, x2);
  const double ty = scaled_tolerance(start.y, y2);

  RealVector x = start.x;
  RealVector y = start.y;
  RealVector y2_raised = y2;
  if (mode == ChainMode::weak) {
    const double sx1 = std::accumulate(x.begin(), x.end(), 0.0);
    const double sx2 = std::accumulate(x2.begin(), x2.end(), 0.0);
    if (sx2 - sx1 > tx) {
      x = water_fill(x, sx2);
      push(chain, {x, y}, {MoveKind::raise_x, 0, 0});
    }
    const double sy1 = std::accumulate(y.begin(), y.end(), 0.0);
    const double sy2 = std::accumulate(y2.begin(), y2.end(), 0.0);
    if (sy1 - sy2 > ty) y2_raised[0] += sy1 - sy2;
  }

  // Rearrange y into decreasing order against the increasing x; every swap
  // lands on an oppositely ordered coordinate pair.
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t best = k;
    for (std::size_t m = k + 1; m < n; ++m) {
      if (y[m] > y[best]) best = m;
    }
    if (best != k && y[best] > y[k] + ty) {
      std::swap(y[k], y[best]);
      push(chain, {x, y}, {MoveKind::majorize_y, k, best});
    }
  }

  // Spread y towards the (raised) target with transfers computed in the
  // increasing frame; position p of the decreasing frame is n - 1 - p there.
  {
    RealVector inc_from(y.rbegin(), y.rend());
    RealVector inc_to(y2_raised.rbegin(), y2_raised.rend());
    const maj::TChain tc = maj::t_transform_chain(inc_from, inc_to);
    for (std::size_t s = 0; s < tc.steps.size(); ++s) {
      const RealVector& v = tc.vectors[s + 1];
      y.assign(v.rbegin(), v.rend());
      const std::size_t a = n - 1 - tc.steps[s].j;
      const std::size_t b = n - 1 - tc.steps[s].i;
      push(chain, {x, y}, {MoveKind::majorize_y, a, b});
    }
    y = y2_raised;
    if (!chain.pairs.empty()) chain.pairs.back().y = y;
  }

  {
    const maj::TChain tc = maj::t_transform_chain(x, x2);
    for (std::size_t s = 0; s < tc.steps.size(); ++s) {
      x = tc.vectors[s + 1];
      push(chain, {x, y}, {MoveKind::majorize_x, tc.steps[s].i, tc.steps[s].j});
    }
    x = x2;
    chain.pairs.back().x = x;
  }

  if (mode == ChainMode::weak && !all_close(y, y2, ty)) {
    push(chain, {x, y2}, {MoveKind::lower_y, 0, 0});
  }

  if (!verify_witness(p1, p2, chain)) {
    throw NumericFailure("construct_chain_opposite: constructed chain failed verification");
  }
  return chain;
}

std::optional<RcChain> chain_from_waypoints(const std::vector<PairClass>& waypoints,
                                            ChainMode mode) {
  if (waypoints.empty()) return std::nullopt;
  static constexpr MoveKind kPreference[] = {MoveKind::majorize_x,      MoveKind::majorize_y,
                                             MoveKind::raise_x,         MoveKind::lower_y,
                                             MoveKind::weak_majorize_x, MoveKind::weak_majorize_y};
  RcChain chain;
  chain.mode = mode;
  chain.pairs.push_back(waypoints.front());
  const std::size_t n = waypoints.front().size();
  for (std::size_t s = 1; s < waypoints.size(); ++s) {
    const PairClass& a = chain.pairs.back();
    const PairClass& b = waypoints[s];
    if (b.size() != n || b.y.size() != n) return std::nullopt;
    if (all_close(a.x, b.x, scaled_tolerance(a.x, b.x)) &&
        all_close(a.y, b.y, scaled_tolerance(a.y, b.y))) {
      continue;
    }
    std::optional<ElementaryMove> found;
    for (MoveKind kind : kPreference) {
      if (kind == MoveKind::raise_x || kind == MoveKind::lower_y) {
        if (verify_rc_move(a, b, {kind, 0, 0}, mode)) found = ElementaryMove{kind, 0, 0};
      } else {
        for (std::size_t i = 0; i < n && !found; ++i) {
          for (std::size_t j = i + 1; j < n && !found; ++j) {
            if (verify_rc_move(a, b, {kind, i, j}, mode)) found = ElementaryMove{kind, i, j};
          }
        }
      }
      if (found) break;
    }
    if (!found) return std::nullopt;
    push(chain, b, *found);
  }
  return chain;
}

namespace {

RcVerdict holds(RcChain chain, ChainMode mode, std::string route, std::size_t explored) {
  chain.mode = mode;
  RcVerdict v;
  v.status = Status::holds;
  v.witness = std::move(chain);
  v.route = std::move(route);
  v.explored = explored;
  return v;
}

bool same_multiset(const RealVector& a, const RealVector& b) {
  const RealVector sa = maj::sort_components(a, maj::SortDirection::increasing);
  const RealVector sb = maj::sort_components(b, maj::SortDirection::increasing);
  return all_close(sa, sb, scaled_tolerance(sa, sb));
}

// Reverse the swap sequence that takes p2's arrangement up to p1's. With
// equal multisets every move preserves both sums and both sums of squares,
// so only swaps remain and a refuted arrangement check refutes the order.
std::optional<RcChain> arrangement_route(const PairClass& p1, const PairClass& p2,
                                         Status& status) {
  const arrangement::ArrangementVerdict av = arrangement::check_arrangement_leq(p2, p1);
  status = av.status;
  if (av.status != Status::holds) return std::nullopt;
  PairClass cur = arrangement::canonical_form(p2);
  std::vector<PairClass> forward{cur};
  for (const arrangement::SwapMove& m : av.moves) {
    std::swap(cur.y[m.i], cur.y[m.j]);
    forward.push_back(cur);
  }
  RcChain chain;
  chain.pairs.assign(forward.rbegin(), forward.rend());
  for (std::size_t s = av.moves.size(); s-- > 0;) {
    chain.moves.push_back({MoveKind::majorize_y, av.moves[s].i, av.moves[s].j});
  }
  return chain;
}

RealVector distinct_values(const RealVector& v) {
  RealVector s = maj::sort_components(v, maj::SortDirection::increasing);
  const double tol = scaled_tolerance(s);
  RealVector out;
  for (double d : s) {
    if (out.empty() || d - out.back() > tol) out.push_back(d);
  }
  return out;
}

std::size_t unmatched(const RealVector& v, const RealVector& target) {
  const RealVector a = maj::sort_components(v, maj::SortDirection::increasing);
  const RealVector b = maj::sort_components(target, maj::SortDirection::increasing);
  const double tol = scaled_tolerance(a, b);
  std::size_t i = 0, j = 0, matched = 0;
  while (i < a.size() && j < b.size()) {
    if (std::abs(a[i] - b[j]) <= tol) {
      ++matched, ++i, ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return a.size() - matched;
}

std::string state_key(const PairClass& p) {
  const PairClass c = arrangement::canonical_form(p);
  std::string key;
  for (const RealVector* v : {&c.x, &c.y}) {
    for (double d : *v) {
      key += std::to_string(std::llround(d * 1e9));
      key += ',';
    }
    key += '|';
  }
  return key;
}

struct SearchNode {
  PairClass pair;
  std::ptrdiff_t parent = -1;
  ElementaryMove move;
  std::size_t depth = 0;
};

// Best-first search over moves that place target component values. Every
// candidate successor is screened by verify_rc_move.
std::optional<RcChain> search(const PairClass& p1, const PairClass& p2, ChainMode mode,
                              std::size_t budget, std::size_t& explored) {
  const std::size_t n = p1.size();
  const RealVector vx = distinct_values(p2.x);
  const RealVector vy = distinct_values(p2.y);
  auto heuristic = [&](const PairClass& p) {
    const std::size_t hx = unmatched(p.x, p2.x);
    const std::size_t hy = unmatched(p.y, p2.y);
    std::size_t h = (hx + 1) / 2 + (hy + 1) / 2;
    if (h == 0 && !arrangement::check_pair_equal_a(p, p2)) h = 1;
    return h;
  };

  std::vector<SearchNode> nodes{{p1, -1, {}, 0}};
  std::unordered_set<std::string> seen{state_key(p1)};
  using Entry = std::tuple<std::size_t, std::size_t, std::size_t>;  // f, h, id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  open.emplace(heuristic(p1), heuristic(p1), 0);

  auto finish = [&](std::size_t id) {
    std::vector<std::size_t> path;
    for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(id); k >= 0; k = nodes[k].parent) {
      path.push_back(static_cast<std::size_t>(k));
    }
    std::reverse(path.begin(), path.end());
    RcChain chain;
    chain.mode = mode;
    chain.pairs.push_back(nodes[path.front()].pair);
    for (std::size_t s = 1; s < path.size(); ++s) {
      chain.pairs.push_back(nodes[path[s]].pair);
      chain.moves.push_back(nodes[path[s]].move);
    }
    return chain;
  };

  if (arrangement::check_pair_equal_a(p1, p2)) return finish(0);

  while (!open.empty() && explored < budget) {
    const std::size_t cur = std::get<2>(open.top());
    open.pop();
    ++explored;
    std::vector<std::pair<PairClass, ElementaryMove>> succ;
    const PairClass base = nodes[cur].pair;

    for (int axis = 0; axis < 2; ++axis) {
      const bool on_x = axis == 0;
      const RealVector& vals = on_x ? vx : vy;
      const RealVector& cv = on_x ? base.x : base.y;
      const MoveKind strict_kind = on_x ? MoveKind::majorize_x : MoveKind::majorize_y;
      const MoveKind weak_kind = on_x ? MoveKind::weak_majorize_x : MoveKind::weak_majorize_y;
      auto emit = [&](std::size_t i, std::size_t j, double a, double b, MoveKind kind) {
        PairClass next = base;
        RealVector& w = on_x ? next.x : next.y;
        w[i] = a;
        w[j] = b;
        succ.emplace_back(std::move(next), ElementaryMove{kind, i, j});
      };
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double total = cv[i] + cv[j];
          emit(i, j, cv[j], cv[i], strict_kind);
          for (double v : vals) {
            emit(i, j, v, total - v, strict_kind);
            emit(i, j, total - v, v, strict_kind);
          }
          if (mode == ChainMode::weak) {
            for (double a : vals) {
              for (double b : vals) emit(i, j, a, b, weak_kind);
            }
          }
        }
      }
      if (mode == ChainMode::weak) {
        for (std::size_t i = 0; i < n; ++i) {
          for (double v : vals) {
            if (on_x ? v <= cv[i] : v >= cv[i]) continue;
            PairClass next = base;
            (on_x ? next.x : next.y)[i] = v;
            succ.emplace_back(std::move(next), ElementaryMove{on_x ? MoveKind::raise_x
                                                                   : MoveKind::lower_y,
                                                              0, 0});
          }
        }
      }
    }

    for (auto& [next, move] : succ) {
      if (!verify_rc_move(base, next, move, mode)) continue;
      std::string key = state_key(next);
      if (!seen.insert(std::move(key)).second) continue;
      const std::size_t depth = nodes[cur].depth + 1;
      const std::size_t h = heuristic(next);
      nodes.push_back({std::move(next), static_cast<std::ptrdiff_t>(cur), move, depth});
      const std::size_t id = nodes.size() - 1;
      if (h == 0) return finish(id);
      open.emplace(depth + h, h, id);
    }
  }
  return std::nullopt;
}

RcVerdict decide_impl(const PairClass& p1, const PairClass& p2, ChainMode mode,
                      std::size_t budget, const std::vector<PairClass>& waypoints) {
  RcVerdict verdict;
  if (auto nec = check_necessary(p1, p2, mode); !nec) {
    verdict.status = Status::refuted;
    verdict.violation = nec.violation;
    verdict.route = "necessary";
    return verdict;
  }

  if (mode == ChainMode::weak && check_necessary(p1, p2, ChainMode::strict)) {
    RcVerdict strict = decide_impl(p1, p2, ChainMode::strict, budget, waypoints);
    if (strict.status == Status::holds) {
      return holds(std::move(*strict.witness), mode, strict.route, strict.explored);
    }
  }

  if (!waypoints.empty()) {
    std::vector<PairClass> all{p1};
    all.insert(all.end(), waypoints.begin(), waypoints.end());
    all.push_back(p2);
    if (auto chain = chain_from_waypoints(all, mode); chain && verify_witness(p1, p2, *chain)) {
      return holds(std::move(*chain), mode, "waypoints", 0);
    }
  }

  if (arrangement::is_opposite_ordered(p2)) {
    return holds(construct_chain_opposite(p1, p2, mode), mode, "opposite-order", 0);
  }

  if (same_multiset(p1.x, p2.x) && same_multiset(p1.y, p2.y)) {
    Status st = Status::unknown;
    if (auto chain = arrangement_route(p1, p2, st)) {
      return holds(std::move(*chain), mode, "arrangement", 0);
    }
    if (st == Status::refuted) {
      verdict.status = Status::refuted;
      verdict.route = "arrangement";
      return verdict;
    }
  }

  std::size_t explored = 0;
  if (auto chain = search(p1, p2, mode, budget, explored)) {
    return holds(std::move(*chain), mode, "search", explored);
  }
  verdict.status = Status::unknown;
  verdict.route = "search-exhausted";
  verdict.explored = explored;
  return verdict;
}

}  // namespace

RcVerdict decide_wrc(const PairClass& p1, const PairClass& p2, ChainMode mode,
                     std::size_t budget, const std::vector<PairClass>& waypoints) {
  p1.validate("decide_wrc");
  p2.validate("decide_wrc");
  require_same_length(p1.x, p2.x, "decide_wrc");
  for (const PairClass& w : waypoints) {
    w.validate("decide_wrc waypoint");
    require_same_length(w.x, p1.x, "decide_wrc waypoint");
  }
  RcVerdict v = decide_impl(p1, p2, mode, budget, waypoints);
  if (v.status == Status::holds && !verify_witness(p1, p2, *v.witness)) {
    throw NumericFailure("decide_wrc: witness from route '" + v.route + "' failed verification");
  }
  return v;
}

}  // namespace stochord::rc
