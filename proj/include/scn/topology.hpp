#pragma once

#include <string>

#include "scn/codesign.hpp"

namespace scn {

// Node names are chain{i}/inv{k}, zero based. Self loops are not exported.
std::string topology_to_dot(const Topology& t);
std::string topology_to_json(const Topology& t, double threshold_rel, int indent = 2);
Topology topology_from_json(const std::string& text);

enum class TopologyFormat { Dot, Json };
TopologyFormat parse_topology_format(const std::string& s);

}  // namespace scn
