#pragma once

#include <string>

#include "scn/codesign.hpp"

namespace scn {

// Design files are JSON; doubles are written with round-trip precision.
std::string design_to_json(const NetworkDesign& d, int indent = 2);
NetworkDesign design_from_json(const std::string& text);

void save_design(const std::string& path, const NetworkDesign& d);
NetworkDesign load_design(const std::string& path);

// Writes to path.tmp, then renames over path.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace scn
