#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ptlab/common.hpp"
#include "ptlab/instance.hpp"

namespace ptlab {

using json = nlohmann::json;

namespace detail {

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("instance JSON: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("instance JSON: bad field '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline json to_json(const ImpurityBandInstance& inst) {
  json j;
  j["kind"] = "impurity_band";
  j["version"] = kFormatVersion;
  j["n"] = inst.n;
  json marked = json::array();
  for (const auto& z : inst.marked) marked.push_back(z.to_string());
  j["marked"] = marked;
  j["eps"] = inst.eps;
  j["W"] = inst.W;
  j["B_perp"] = inst.B_perp;
  j["base_energy"] = inst.base_energy;
  j["seed"] = inst.seed;
  return j;
}

/// Quantized instances store grid levels; anything else falls back to raw
/// doubles, which nlohmann round-trips exactly.
inline json to_json(const SpinGlassInstance& inst) {
  json j;
  j["kind"] = "spin_glass";
  j["version"] = kFormatVersion;
  j["n"] = inst.n;
  const bool grid = inst.quantized();
  j["encoding"] = grid ? "grid" : "real";
  if (grid) j["grid"] = {{"levels", kGridLevels}, {"min", -1.0}, {"max", 1.0}};
  json h = json::array();
  for (double x : inst.classical.h) {
    if (grid)
      h.push_back(grid_level(x));
    else
      h.push_back(x);
  }
  j["h"] = h;
  json J = json::array();
  for (int a = 0; a < inst.n; ++a)
    for (int b = a + 1; b < inst.n; ++b) {
      if (inst.is_dimer(a, b)) continue;
      const double v = inst.classical.coupling(a, b);
      if (grid)
        J.push_back({a, b, grid_level(v)});
      else if (v != 0.0)
        J.push_back({a, b, v});
    }
  j["J"] = J;
  json dimers = json::array();
  for (auto [a, b] : inst.dimers) dimers.push_back({a, b});
  j["dimers"] = dimers;
  j["dimer_coupling"] = kDimerCoupling;
  j["driver_scale"] = inst.driver_scale;
  j["seed"] = inst.seed;
  return j;
}

inline json to_json(const ProblemInstance& inst) {
  return std::visit([](const auto& x) { return to_json(x); }, inst);
}

inline ProblemInstance instance_from_json(const json& j) {
  using detail::field;
  if (!j.is_object()) throw InputError("instance JSON: expected an object");
  const auto kind = field<std::string>(j, "kind");
  const int version = field<int>(j, "version");
  if (version != kFormatVersion) throw InputError("instance JSON: unsupported version " + std::to_string(version));
  const int n = field<int>(j, "n");
  try {
    if (kind == "impurity_band") {
      std::vector<BitString> marked;
      for (const auto& s : field<std::vector<std::string>>(j, "marked")) {
        if (static_cast<int>(s.size()) != n) throw InputError("instance JSON: marked string length differs from n");
        marked.push_back(BitString::parse(s));
      }
      return ImpurityBandInstance(n, std::move(marked), field<std::vector<double>>(j, "eps"), field<double>(j, "W"),
                                  field<double>(j, "B_perp"), field<double>(j, "base_energy"),
                                  field<std::uint64_t>(j, "seed"));
    }
    if (kind == "spin_glass") {
      const bool grid = field<std::string>(j, "encoding") == "grid";
      IsingCoefficients c(n);
      const auto& h = j.at("h");
      if (!h.is_array() || static_cast<int>(h.size()) != n) throw InputError("instance JSON: h must have n entries");
      for (int i = 0; i < n; ++i) c.h[i] = grid ? grid_value(h[i].get<int>()) : h[i].get<double>();
      for (const auto& e : field<json>(j, "J")) {
        const int a = e.at(0).get<int>(), b = e.at(1).get<int>();
        if (a < 0 || b < 0 || a >= n || b >= n || a == b) throw InputError("instance JSON: coupling index out of range");
        c.set_coupling(a, b, grid ? grid_value(e.at(2).get<int>()) : e.at(2).get<double>());
      }
      std::vector<std::pair<int, int>> dimers;
      for (const auto& e : field<json>(j, "dimers")) {
        const int a = e.at(0).get<int>(), b = e.at(1).get<int>();
        if (a < 0 || b < 0 || a >= n || b >= n || a == b) throw InputError("instance JSON: dimer index out of range");
        dimers.emplace_back(a, b);
        c.set_coupling(a, b, kDimerCoupling);
      }
      return SpinGlassInstance(std::move(c), std::move(dimers), field<double>(j, "driver_scale"),
                               field<std::uint64_t>(j, "seed"));
    }
  } catch (const InputError&) {
    throw;
  } catch (const json::exception& e) {
    throw InputError(std::string("instance JSON: ") + e.what());
  } catch (const Error& e) {
    throw InputError(std::string("instance JSON: invalid instance: ") + e.what());
  }
  throw InputError("instance JSON: unknown kind '" + kind + "'");
}

/// Parses JSON text; syntax errors report the byte offset.
inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << origin << ": parse error at byte " << e.byte << ": " << e.what();
    throw InputError(msg.str());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json_text(buffer.str(), path);
}

inline ProblemInstance load_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

}  // namespace ptlab
