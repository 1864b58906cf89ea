#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stochord/distributions.hpp"
#include "stochord/io.hpp"
#include "stochord/rc_order.hpp"

// Theorem instantiation: seeded generators for every hypothesis family,
// verification through both the parameter-order engine and the numeric
// oracles, and a search for weak log-rc gamma pairs whose sufficient
// convolution check fails.
namespace stochord::harness {

enum class ScenarioKind {
  raise_alpha,
  lower_beta,
  majorize_beta,
  diff_alpha_majorize_beta,
  majorize_alpha,
  conv_ai,
  rc_general,
  gamma_conv,
  opposite_ordered_weak,
  log_majorize_beta_st,
  st_general,
  ai_tail,
  coupled_gamma_pair,
  mixture_lemma_st,
};

std::string to_string(ScenarioKind k);
ScenarioKind scenario_from_string(const std::string& s);
std::vector<ScenarioKind> all_scenarios();

enum class Order { conv, st };
std::string to_string(Order o);
Order order_from_string(const std::string& s);

inline constexpr std::size_t kMaxScenarioSize = 6;

/// n = 0 picks the scenario's default size for the seed.
struct Scenario {
  ScenarioKind kind = ScenarioKind::rc_general;
  dist::Family family = dist::Family::negbin;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool reversed = false;  // verify spec2 against spec1 instead
};

/// Extra data some scenarios carry beside the two specs.
struct Instance {
  dist::ConvolutionSpec spec1;
  dist::ConvolutionSpec spec2;
  /// Intermediate pairs of the generating walk, in the coordinates of the
  /// order the scenario targets (log scales for St).
  std::vector<arrangement::PairClass> waypoints;
  double threshold = 0.0;   // AITail: tail point c
  double mix_p = 0.0;       // MixtureLemmaSt: success probability of the mixing family
  double c0 = 0.0;          // CoupledGammaPair
  double lambda_mix = 0.0;  // CoupledGammaPair: spread of the mixture side
  double lambda_target = 0.0;
};

/// The order the scenario's theorem concludes; nullopt for identities in law.
std::optional<Order> scenario_order(ScenarioKind k);

/// Deterministic in (kind, family, n, seed). Throws PreconditionError for
/// infeasible sizes or families.
Instance generate_instance(const Scenario& s);

struct Tolerances {
  double tail_cap = dist::kDefaultTailCap;
  double deconv_tol = 1e-12;
  double survival_tol = 1e-10;
  double identity_tol = 1e-9;
  std::size_t grid_points = 256;
  std::size_t search_budget = rc::kDefaultSearchBudget;
};

struct DeconvSummary {
  Status status = Status::unknown;
  double min_coefficient = 0.0;
  std::size_t worst_index = 0;
  double error_at_worst = 0.0;
  double mass = 0.0;
  double mass_floor = 0.0;
  bool certified = false;
  std::size_t length = 0;
  double rate = 0.0;  // common rate of the gamma reduction, 0 for negbin
};

struct Report {
  std::string scenario;  // empty for ad hoc verification
  std::uint64_t seed = 0;
  std::string order;     // "conv", "st" or "identity"
  dist::ConvolutionSpec spec1;
  dist::ConvolutionSpec spec2;

  Status param_status = Status::unknown;
  std::string param_route;
  std::optional<rc::RcChain> witness;
  std::optional<rc::Violation> violation;

  Status numeric_status = Status::unknown;
  std::optional<DeconvSummary> deconvolution;
  std::optional<dist::SurvivalVerdict> survival;
  std::optional<double> residual;  // identity scenarios: L-infinity gap
  std::optional<double> shape_gap;  // gamma conv: total shape of spec1 minus spec2

  Status status = Status::unknown;  // Holds only when both layers hold
  std::string agreement;            // "consistent", "discrepancy" or "inconclusive"
  Tolerances tolerances;
  double param_ms = 0.0;
  double numeric_ms = 0.0;
};

/// JSON-lines record with schema version "v": 1; timing fields are omitted
/// when include_timing is false.
io::json report_to_json(const Report& r, bool include_timing = true);

/// Parameter layer on (shapes, scales) for Conv or (shapes, log scales) for
/// St in weak mode, then the numeric layer: deconvolution (negbin) or the
/// reduction to a common rate with the shape-total check (gamma) for Conv,
/// survival dominance for St. Throws PreconditionError on family or size
/// mismatch.
Report verify_theorem_instance(const dist::ConvolutionSpec& spec1,
                               const dist::ConvolutionSpec& spec2, Order order,
                               const Tolerances& tol = {},
                               const std::vector<arrangement::PairClass>& waypoints = {});

/// Generates and verifies one scenario instance.
Report run_scenario(const Scenario& s, const Tolerances& tol = {});

struct TailCheck {
  bool holds = false;
  double tail1 = 0.0;  // P(sum lambda1_i G_i >= c)
  double tail2 = 0.0;
  double error = 0.0;
};

/// Certifies P(sum lambda1_i G_{alpha1_i,1} >= c) <= P(sum lambda2_i G_{alpha2_i,1} >= c)
/// up to the certified CDF error. Throws PreconditionError unless lambda > 0
/// and c > 0.
TailCheck check_ai_tail(const RealVector& shapes1, const RealVector& lambda1,
                        const RealVector& shapes2, const RealVector& lambda2, double c,
                        double tail_cap = dist::kDefaultTailCap);

struct Candidate {
  std::uint64_t iteration = 0;
  dist::ConvolutionSpec spec1;
  dist::ConvolutionSpec spec2;
  rc::RcChain witness;  // weak chain on (shapes, log rates)
  DeconvSummary deconvolution;
  std::string label = "evidence";
};

/// Random weak log-rc gamma pairs whose reduced deconvolution is Refuted
/// beyond its error bounds at common rates 2, 4 and 8 times the largest rate;
/// the reported summary is the last one. Throws PreconditionError when budget is zero.
std::vector<Candidate> explore_counterexamples(std::size_t budget, std::uint64_t seed,
                                               const Tolerances& tol = {});

io::json candidate_to_json(const Candidate& c);

/// Re-runs both oracles on a candidate at every common rate.
bool recheck_candidate(const Candidate& c, const Tolerances& tol = {});

}  // namespace stochord::harness
