#include "stochord/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace stochord::io {
namespace {

RealVector real_array(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw MalformedInput(std::string("missing array '") + key + "'");
  }
  RealVector out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw MalformedInput(std::string("non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

json spec_to_json(const dist::ConvolutionSpec& spec) {
  return json{{"family", dist::to_string(spec.family)},
              {"shapes", spec.shapes},
              {"scales", spec.scales}};
}

dist::ConvolutionSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw MalformedInput("spec must be a JSON object");
  if (!j.contains("family") || !j.at("family").is_string()) {
    throw MalformedInput("spec needs a string 'family'");
  }
  dist::ConvolutionSpec spec;
  try {
    spec.family = dist::family_from_string(j.at("family").get<std::string>());
  } catch (const PreconditionError& e) {
    throw MalformedInput(e.what());
  }
  spec.shapes = real_array(j, "shapes");
  spec.scales = real_array(j, "scales");
  return spec;
}

json pair_to_json(const arrangement::PairClass& p) {
  return json{{"shapes", p.x}, {"scales", p.y}};
}

arrangement::PairClass pair_from_json(const json& j) {
  if (!j.is_object()) throw MalformedInput("pair must be a JSON object");
  return {real_array(j, "shapes"), real_array(j, "scales")};
}

PairFile pair_file_from_json(const json& j) {
  if (!j.is_object() || !j.contains("config1") || !j.contains("config2")) {
    throw MalformedInput("pair file needs 'config1' and 'config2'");
  }
  PairFile f{spec_from_json(j.at("config1")), spec_from_json(j.at("config2")), {}};
  if (j.contains("waypoints")) {
    if (!j.at("waypoints").is_array()) throw MalformedInput("'waypoints' must be an array");
    for (const auto& w : j.at("waypoints")) f.waypoints.push_back(pair_from_json(w));
  }
  return f;
}

json pair_file_to_json(const PairFile& f) {
  json j{{"config1", spec_to_json(f.config1)}, {"config2", spec_to_json(f.config2)}};
  if (!f.waypoints.empty()) {
    j["waypoints"] = json::array();
    for (const auto& w : f.waypoints) j["waypoints"].push_back(pair_to_json(w));
  }
  return j;
}

json chain_to_json(const rc::RcChain& chain) {
  json out = json::array();
  for (std::size_t s = 0; s < chain.pairs.size(); ++s) {
    json rec{{"pair", pair_to_json(chain.pairs[s])}, {"move", nullptr}};
    if (s > 0) {
      const auto& m = chain.moves[s - 1];
      rec["move"] = json{{"kind", rc::to_string(m.kind)}, {"i", m.i}, {"j", m.j}};
    }
    out.push_back(std::move(rec));
  }
  return out;
}

rc::RcChain chain_from_json(const json& j, rc::ChainMode mode) {
  if (!j.is_array() || j.empty()) throw MalformedInput("witness must be a non-empty array");
  rc::RcChain chain;
  chain.mode = mode;
  for (std::size_t s = 0; s < j.size(); ++s) {
    const json& rec = j[s];
    if (!rec.is_object() || !rec.contains("pair")) throw MalformedInput("witness record needs 'pair'");
    chain.pairs.push_back(pair_from_json(rec.at("pair")));
    if (s == 0) continue;
    if (!rec.contains("move") || !rec.at("move").is_object()) {
      throw MalformedInput("witness record needs a 'move' object after the first");
    }
    const json& m = rec.at("move");
    try {
      chain.moves.push_back({rc::move_kind_from_string(m.at("kind").get<std::string>()),
                             m.at("i").get<std::size_t>(), m.at("j").get<std::size_t>()});
    } catch (const json::exception& e) {
      throw MalformedInput(std::string("bad move: ") + e.what());
    } catch (const PreconditionError& e) {
      throw MalformedInput(e.what());
    }
  }
  return chain;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw MalformedInput(path + ": " + e.what());
  }
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const RealVector& at, const RealVector& value,
               const RealVector& error) {
  out << "k_or_t,value,error_bound\n";
  for (std::size_t k = 0; k < at.size(); ++k) {
    out << format17(at[k]) << ',' << format17(value[k]) << ',' << format17(error[k]) << '\n';
  }
}

}  // namespace stochord::io
