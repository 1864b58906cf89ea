#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stochord {

/// Finite ordered list of real parameters (shapes, scales, probabilities).
using RealVector = std::vector<double>;

/// Three-valued outcome shared by every order check in the library.
enum class Status { holds, refuted, unknown };

std::string_view to_string(Status s);
Status status_from_string(std::string_view s);

/// Raised when an input violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numeric routine cannot meet its error budget.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base tolerance for parameter comparisons, scaled by the data magnitude.
inline constexpr double kParamTol = 1e-12;

/// kParamTol scaled by the largest absolute component of the given vectors
/// (never below kParamTol itself).
double scaled_tolerance(std::span<const double> a, std::span<const double> b = {});

void require_finite(std::span<const double> v, std::string_view what);
void require_same_length(std::span<const double> a, std::span<const double> b,
                         std::string_view what);

}  // namespace stochord
