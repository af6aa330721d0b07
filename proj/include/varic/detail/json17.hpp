#pragma once

// Deterministic JSON rendering: objects with sorted keys, numbers printed
// with 17 significant digits so doubles round-trip exactly and reruns are
// byte-identical. nlohmann::json's default shortest-representation printer
// would also round-trip but varies in width; reports pin the format instead.

#include <cstdio>
#include <string>

#include <json.hpp>

#include "varic/common.hpp"

namespace varic::detail {

using json = nlohmann::json;

inline std::string fmt17(double v) {
  if (v == 0.0) v = 0.0;  // collapse signed zero so reports never print "-0"
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline void dump_json_to(const json& j, std::string& out, int indent) {
  auto pad = [&out](int n) { out.append(static_cast<std::size_t>(n), ' '); };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        pad(indent + 2);
        out += json(it.key()).dump();
        out += ": ";
        dump_json_to(it.value(), out, indent + 2);
      }
      out += "\n";
      pad(indent);
      out += "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool scalars = true;
      for (const auto& e : j) {
        if (e.is_structured()) {
          scalars = false;
          break;
        }
      }
      if (scalars) {
        out += "[";
        bool first = true;
        for (const auto& e : j) {
          if (!first) out += ", ";
          first = false;
          dump_json_to(e, out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ",\n";
        first = false;
        pad(indent + 2);
        dump_json_to(e, out, indent + 2);
      }
      out += "\n";
      pad(indent);
      out += "]";
      return;
    }
    case json::value_t::number_float:
      out += fmt17(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

// Renders with 2-space indentation, sorted object keys (nlohmann::json
// already iterates objects in key order), and 17-digit floats.
inline std::string dump_json(const json& j) {
  std::string out;
  dump_json_to(j, out, 0);
  out += "\n";
  return out;
}

}  // namespace varic::detail
