#include "scn/topology.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace scn {

using nlohmann::json;

namespace {

std::string node(int chain, int inv) {
  return "chain" + std::to_string(chain) + "/inv" + std::to_string(inv);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// graphviz reads "weight" as a layout hint, so the gain goes in its own attribute
std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string topology_to_dot(const Topology& t) {
  std::ostringstream os;
  os << "digraph scn {\n";
  for (const auto& e : t.edges)
    os << "  \"" << node(e.from_chain, e.from_inventory) << "\" -> \"" << node(e.to_chain, e.to_inventory)
       << "\" [gain=" << fmt(e.weight) << ", label=\"" << label(e.weight) << "\"];\n";
  os << "}\n";
  return os.str();
}

std::string topology_to_json(const Topology& t, double threshold_rel, int indent) {
  json edges = json::array();
  for (const auto& e : t.edges)
    edges.push_back({{"from_chain", e.from_chain},
                     {"to_chain", e.to_chain},
                     {"from_inventory", e.from_inventory},
                     {"to_inventory", e.to_inventory},
                     {"weight", e.weight}});
  json root = {{"N", t.N}, {"n", t.n}, {"threshold", threshold_rel}, {"edges", edges}};
  return root.dump(indent) + "\n";
}

Topology topology_from_json(const std::string& text) {
  try {
    const json root = json::parse(text);
    Topology t;
    t.N = root.at("N").get<int>();
    t.n = root.at("n").get<int>();
    for (const auto& e : root.at("edges")) {
      TopologyEdge te;
      te.from_chain = e.at("from_chain").get<int>();
      te.to_chain = e.at("to_chain").get<int>();
      te.from_inventory = e.at("from_inventory").get<int>();
      te.to_inventory = e.at("to_inventory").get<int>();
      te.weight = e.at("weight").get<double>();
      if (te.from_chain < 0 || te.from_chain >= t.N || te.to_chain < 0 || te.to_chain >= t.N ||
          te.from_inventory < 0 || te.from_inventory >= t.n || te.to_inventory < 0 || te.to_inventory >= t.n)
        throw ConfigError("topology edge index out of range");
      t.edges.push_back(te);
    }
    return t;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed topology file: ") + e.what());
  }
}

TopologyFormat parse_topology_format(const std::string& s) {
  if (s == "dot") return TopologyFormat::Dot;
  if (s == "json") return TopologyFormat::Json;
  throw InvalidParameter("unknown topology format '" + s + "' (use dot or json)");
}

}  // namespace scn
