#include "stochord/common.hpp"

#include <algorithm>
#include <cmath>

namespace stochord {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::holds: return "holds";
    case Status::refuted: return "refuted";
    case Status::unknown: return "unknown";
  }
  return "unknown";
}

Status status_from_string(std::string_view s) {
  if (s == "holds") return Status::holds;
  if (s == "refuted") return Status::refuted;
  if (s == "unknown") return Status::unknown;
  throw PreconditionError("unrecognised status '" + std::string(s) + "'");
}

double scaled_tolerance(std::span<const double> a, std::span<const double> b) {
  double scale = 1.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  for (double v : b) scale = std::max(scale, std::abs(v));
  return kParamTol * scale;
}

void require_finite(std::span<const double> v, std::string_view what) {
  if (v.empty()) throw PreconditionError(std::string(what) + ": empty vector");
  for (double x : v) {
    if (!std::isfinite(x)) throw PreconditionError(std::string(what) + ": non-finite component");
  }
}

void require_same_length(std::span<const double> a, std::span<const double> b,
                         std::string_view what) {
  if (a.size() != b.size()) {
    throw PreconditionError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace stochord
