#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stochord/arrangement.hpp"
#include "stochord/common.hpp"
#include "stochord/majorization.hpp"

// The reverse-coupled majorization order on vector pairs and its weak
// (sub/sup) variant: elementary moves, chain verification, necessary
// conditions, the constructive criterion for oppositely ordered targets and a
// bounded decision procedure.
//
// Chains act on raw coordinates. Consecutive pairs share one coordinate
// labelling; only the endpoints are compared modulo a common permutation.
namespace stochord::rc {

using arrangement::PairClass;

enum class ChainMode { strict, weak };

enum class MoveKind {
  majorize_x,       // (x_i, x_j) spread inside a majorization, y fixed
  majorize_y,       // (y_i, y_j) spread inside a majorization, x fixed
  raise_x,          // x increases componentwise, y fixed (weak only)
  lower_y,          // y decreases componentwise, x fixed (weak only)
  weak_majorize_x,  // (x_i, x_j) weakly majorized from below, y fixed (weak only)
  weak_majorize_y,  // (y_i, y_j) weakly majorized from above, x fixed (weak only)
};

std::string to_string(MoveKind k);
MoveKind move_kind_from_string(const std::string& s);
std::string to_string(ChainMode m);
ChainMode chain_mode_from_string(const std::string& s);

/// The target pair of a move is the next pair of the chain. Coordinates i < j
/// are meaningful for the two-coordinate kinds only.
struct ElementaryMove {
  MoveKind kind = MoveKind::majorize_x;
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const ElementaryMove&, const ElementaryMove&) = default;
};

struct RcChain {
  std::vector<PairClass> pairs;
  std::vector<ElementaryMove> moves;  // moves[s] leads pairs[s] to pairs[s + 1]
  ChainMode mode = ChainMode::strict;
};

/// Which necessary condition failed.
struct Violation {
  char coordinate = 'x';  // 'x' or 'y'
  majorization::Mode mode = majorization::Mode::full;
  std::size_t prefix = 0;
  std::string describe() const;
};

struct NecessaryResult {
  bool holds = true;
  std::optional<Violation> violation;
  explicit operator bool() const { return holds; }
};

struct RcVerdict {
  Status status = Status::unknown;
  std::optional<RcChain> witness;
  std::optional<Violation> violation;
  std::string route;  // which stage of the pipeline produced the verdict
  std::size_t explored = 0;
};

/// True iff b arises from a by m under the mode's generator set, including the
/// reverse-pair condition (y_j - y_i)(x_j - x_i) <= 0 on the target pair for
/// two-coordinate moves.
bool verify_rc_move(const PairClass& a, const PairClass& b, const ElementaryMove& m,
                    ChainMode mode);

bool verify_rc_chain(const RcChain& chain);

/// verify_rc_chain plus: first pair equals p1 and last pair equals p2 modulo
/// a common permutation.
bool verify_witness(const PairClass& p1, const PairClass& p2, const RcChain& chain);

/// Strict: x1 majorized by x2 and y1 by y2. Weak: x1 weakly majorized from
/// below by x2, y1 weakly majorized from above by y2.
NecessaryResult check_necessary(const PairClass& p1, const PairClass& p2, ChainMode mode);

/// Builds a chain from p1 to p2 when p2 is oppositely ordered. Throws
/// PreconditionError naming the failed hypothesis otherwise.
RcChain construct_chain_opposite(const PairClass& p1, const PairClass& p2, ChainMode mode);

/// Infers the elementary move linking consecutive waypoints (a pair of raw
/// vectors each); nullopt if some consecutive pair is not one move apart.
std::optional<RcChain> chain_from_waypoints(const std::vector<PairClass>& waypoints,
                                            ChainMode mode);

inline constexpr std::size_t kDefaultSearchBudget = 20000;

/// Pipeline: necessary conditions (Refuted on failure), caller supplied
/// waypoints, the opposite-order construction, the arrangement route, then a
/// bounded best-first search. Unknown when nothing applies within budget.
/// Every Holds carries a witness accepted by verify_witness.
RcVerdict decide_wrc(const PairClass& p1, const PairClass& p2, ChainMode mode,
                     std::size_t budget = kDefaultSearchBudget,
                     const std::vector<PairClass>& waypoints = {});

}  // namespace stochord::rc
