#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "stochord/distributions.hpp"
#include "stochord/rc_order.hpp"

// JSON and CSV serialization shared by the harness and the command line.
// Malformed documents raise MalformedInput.
namespace stochord::io {

using json = nlohmann::ordered_json;

class MalformedInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `{"family": "negbin"|"gamma", "shapes": [...], "scales": [...]}`
json spec_to_json(const dist::ConvolutionSpec& spec);
dist::ConvolutionSpec spec_from_json(const json& j);

/// `{"config1": spec, "config2": spec}` with an optional "waypoints" list of
/// intermediate {"shapes", "scales"} pairs in the coordinates of the order
/// being decided.
struct PairFile {
  dist::ConvolutionSpec config1;
  dist::ConvolutionSpec config2;
  std::vector<arrangement::PairClass> waypoints;
};
PairFile pair_file_from_json(const json& j);
json pair_file_to_json(const PairFile& f);

json pair_to_json(const arrangement::PairClass& p);
arrangement::PairClass pair_from_json(const json& j);

/// Array of {"pair", "move"} records; the first record's move is null and
/// every later move leads from the previous pair to its own.
json chain_to_json(const rc::RcChain& chain);
rc::RcChain chain_from_json(const json& j, rc::ChainMode mode);

json read_json_file(const std::string& path);

/// Header `k_or_t,value,error_bound`, 17 significant digits.
void write_csv(std::ostream& out, const RealVector& at, const RealVector& value,
               const RealVector& error);

/// Shortest decimal that keeps 17 significant digits.
std::string format17(double v);

}  // namespace stochord::io
