#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>
#include <string>

#include <json.hpp>

#include "mmris/scenario.hpp"

namespace mmris {

namespace io_detail {

using nlohmann::json;

[[noreturn]] inline void load_fail(const std::string& path, const std::string& msg) {
  throw LoadError(path + ": " + msg);
}

inline double number(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) load_fail(path + "." + key, "missing");
  if (!j.at(key).is_number()) load_fail(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

inline int integer(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) load_fail(path + "." + key, "missing");
  if (!j.at(key).is_number_integer()) load_fail(path + "." + key, "expected an integer");
  return j.at(key).get<int>();
}

inline Vec3 vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) load_fail(path, "expected [x, y, z]");
  Vec3 v;
  for (int a = 0; a < 3; ++a) {
    if (!j[static_cast<std::size_t>(a)].is_number()) load_fail(path, "expected numbers");
    v(a) = j[static_cast<std::size_t>(a)].get<double>();
  }
  return v;
}

/// Reads a power-like quantity given either linearly or in dB. Exactly one
/// spelling may be present.
inline double linear_or_db(const json& j, const std::string& linear_key,
                           const std::vector<std::pair<std::string, double>>& db_keys,
                           const std::string& path, std::optional<double> fallback = std::nullopt) {
  int found = 0;
  double value = 0.0;
  if (j.contains(linear_key)) {
    value = number(j, linear_key, path);
    ++found;
  }
  for (const auto& [key, offset_db] : db_keys) {
    if (j.contains(key)) {
      value = db_to_linear(number(j, key, path) + offset_db);
      ++found;
    }
  }
  if (found > 1) load_fail(path + "." + linear_key, "given in more than one unit");
  if (found == 0) {
    if (fallback) return *fallback;
    load_fail(path + "." + linear_key, "missing");
  }
  return value;
}

inline NodeKind node_kind(const json& j, const std::string& path) {
  if (!j.is_string()) load_fail(path, "expected \"bs\", \"ris\" or \"user\"");
  const std::string k = j.get<std::string>();
  if (k == "bs") return NodeKind::BS;
  if (k == "ris") return NodeKind::RIS;
  if (k == "user") return NodeKind::User;
  load_fail(path, "unknown node kind \"" + k + "\"");
}

}  // namespace io_detail

/// Parses and validates a scenario document. dB fields are converted to linear:
/// ref_gain | ref_gain_dB, noise_power_w | noise_power_dBW | noise_power_dBm,
/// tx_power_w | tx_power_dBW.
inline Scenario parse_scenario(const nlohmann::json& doc) {
  using namespace io_detail;
  if (!doc.is_object()) load_fail("$", "expected an object");
  Scenario s;
  const std::string root = "$";
  try {
    s.name = doc.value("name", std::string{});
    s.wavelength = number(doc, "wavelength_m", root);
    s.bs_antennas = integer(doc, "bs_antennas", root);
    s.antenna_spacing = doc.contains("antenna_spacing_m") ? number(doc, "antenna_spacing_m", root)
                                                          : s.wavelength / 2.0;
    s.element_spacing = doc.contains("element_spacing_m") ? number(doc, "element_spacing_m", root)
                                                          : s.wavelength / 2.0;
    s.ref_gain = linear_or_db(doc, "ref_gain", {{"ref_gain_dB", 0.0}}, root);
    s.noise_power = linear_or_db(doc, "noise_power_w",
                                 {{"noise_power_dBW", 0.0}, {"noise_power_dBm", -30.0}}, root);
    s.tx_power = linear_or_db(doc, "tx_power_w", {{"tx_power_dBW", 0.0}}, root);
    if (doc.contains("bs_boresight")) s.bs_boresight = vec3(doc.at("bs_boresight"), root + ".bs_boresight");
    if (doc.contains("seed")) {
      if (!doc.at("seed").is_number_unsigned()) load_fail(root + ".seed", "expected a nonnegative integer");
      s.rng_seed = doc.at("seed").get<std::uint64_t>();
    }

    if (doc.contains("visibility")) {
      const auto& vis = doc.at("visibility");
      const std::string vp = root + ".visibility";
      if (!vis.is_object()) load_fail(vp, "expected an object");
      if (vis.contains("max_range_m") && !vis.at("max_range_m").is_null())
        s.visibility.max_range = number(vis, "max_range_m", vp);
      if (vis.contains("obstacles")) {
        const auto& obs = vis.at("obstacles");
        if (!obs.is_array()) load_fail(vp + ".obstacles", "expected an array");
        for (std::size_t b = 0; b < obs.size(); ++b) {
          const std::string bp = vp + ".obstacles[" + std::to_string(b) + "]";
          if (!obs[b].contains("min_m") || !obs[b].contains("max_m")) load_fail(bp, "needs min_m and max_m");
          s.visibility.obstacles.push_back({vec3(obs[b].at("min_m"), bp + ".min_m"),
                                            vec3(obs[b].at("max_m"), bp + ".max_m")});
        }
      }
      if (vis.contains("overrides")) {
        const auto& ovr = vis.at("overrides");
        if (!ovr.is_array()) load_fail(vp + ".overrides", "expected an array");
        for (std::size_t o = 0; o < ovr.size(); ++o) {
          const std::string op = vp + ".overrides[" + std::to_string(o) + "]";
          const int i = integer(ovr[o], "i", op);
          const int j = integer(ovr[o], "j", op);
          if (!ovr[o].contains("visible") || !ovr[o].at("visible").is_boolean())
            load_fail(op + ".visible", "expected a boolean");
          const bool visible = ovr[o].at("visible").get<bool>();
          if (auto prev = s.visibility.override_for(i, j); prev && *prev != visible)
            load_fail(op, "contradicts an earlier override of the same pair");
          s.visibility.set_override(i, j, visible);
        }
      }
    }

    if (!doc.contains("nodes") || !doc.at("nodes").is_array()) load_fail(root + ".nodes", "expected an array");
    const auto& nodes = doc.at("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::string np = root + ".nodes[" + std::to_string(i) + "]";
      const auto& jn = nodes[i];
      if (!jn.is_object()) load_fail(np, "expected an object");
      Node n;
      n.index = jn.contains("index") ? integer(jn, "index", np) : static_cast<int>(i);
      if (!jn.contains("kind")) load_fail(np + ".kind", "missing");
      n.kind = node_kind(jn.at("kind"), np + ".kind");
      if (!jn.contains("position_m")) load_fail(np + ".position_m", "missing");
      n.position = vec3(jn.at("position_m"), np + ".position_m");
      if (n.kind == NodeKind::RIS) {
        n.elements_x = integer(jn, "elements_x", np);
        n.elements_y = integer(jn, "elements_y", np);
        if (!jn.contains("facing_normal")) load_fail(np + ".facing_normal", "missing");
        n.facing_normal = vec3(jn.at("facing_normal"), np + ".facing_normal");
      }
      s.nodes.push_back(n);
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("$: malformed document: ") + e.what());
  }
  try {
    validate(s);
  } catch (const std::invalid_argument& e) {
    throw LoadError(std::string("$.") + e.what());
  }
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path + ": cannot open file");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(path + ": parse error: " + e.what());
  }
  return parse_scenario(doc);
}

/// Serializes with linear units so that parse_scenario(to_json(s)) reproduces s exactly.
inline nlohmann::json to_json(const Scenario& s) {
  using nlohmann::json;
  auto arr = [](const Vec3& v) { return json::array({v(0), v(1), v(2)}); };
  json doc;
  doc["name"] = s.name;
  doc["wavelength_m"] = s.wavelength;
  doc["bs_antennas"] = s.bs_antennas;
  doc["antenna_spacing_m"] = s.antenna_spacing;
  doc["element_spacing_m"] = s.element_spacing;
  doc["ref_gain"] = s.ref_gain;
  doc["noise_power_w"] = s.noise_power;
  doc["tx_power_w"] = s.tx_power;
  doc["bs_boresight"] = arr(s.bs_boresight);
  doc["seed"] = s.rng_seed;
  json vis;
  vis["max_range_m"] = std::isfinite(s.visibility.max_range) ? json(s.visibility.max_range) : json(nullptr);
  vis["obstacles"] = json::array();
  for (const Box& b : s.visibility.obstacles) vis["obstacles"].push_back({{"min_m", arr(b.min)}, {"max_m", arr(b.max)}});
  vis["overrides"] = json::array();
  for (const auto& [key, visible] : s.visibility.overrides)
    vis["overrides"].push_back({{"i", key.first}, {"j", key.second}, {"visible", visible}});
  doc["visibility"] = vis;
  doc["nodes"] = json::array();
  for (const Node& n : s.nodes) {
    json jn{{"index", n.index}, {"kind", to_string(n.kind)}, {"position_m", arr(n.position)}};
    if (n.kind == NodeKind::RIS) {
      jn["elements_x"] = n.elements_x;
      jn["elements_y"] = n.elements_y;
      jn["facing_normal"] = arr(n.facing_normal);
    }
    doc["nodes"].push_back(jn);
  }
  return doc;
}

}  // namespace mmris
