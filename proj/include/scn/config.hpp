#pragma once

#include <cstdint>
#include <string>

#include "scn/codesign.hpp"
#include "scn/model.hpp"
#include "scn/sim.hpp"

namespace scn {

struct DesignSettings {
  PipelineOptions pipeline;
  double gcc_epsilon = 0.1;
  double topology_threshold = 1e-5;
};

// One run configuration. Chain waste means and dbar are filled from the
// disturbance section unless a chain overrides dbar.
struct Config {
  NetworkSpec network;
  DisturbanceModel disturbances;
  DesignSettings design;
  SimConfig simulation;
  double cost_penalty = 20.0;  // used when no explicit cost matrix is given
};

// JSON text in, validated Config out. Unknown keys throw ConfigError.
Config parse_config(const std::string& json_text);
Config load_config(const std::string& path);

// Canonical JSON of a config (explicit values for every key).
std::string config_to_json(const Config& cfg, int indent = 2);

// Random scenario: tau = 1 + randi(1,4), perish 0.1, targets 500, random
// disturbance means, reference topology the line 0-1-...-(N-1).
Config random_scenario(std::uint64_t seed, int N = 3, int n = 4);

}  // namespace scn
