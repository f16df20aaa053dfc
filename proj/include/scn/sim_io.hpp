#pragma once

#include <string>

#include "scn/sim.hpp"

namespace scn {

// Shortest round-trip decimal form.
std::string format_double(double v);

// One row per step: t, pmae, cpmae, then x_i_k, pipe_i_k_l, u_i_k, y_i_k,
// z_i_k, r_i_k, winv_i_k, wtr_i_k, d_i. Indices are zero based.
std::string sim_trajectory_csv(const SimResult& sr);
std::string sim_events_csv(const SimResult& sr);  // time,kind,chain,index

// t, apmae, capmae for one strategy.
std::string mc_series_csv(const StrategySeries& s);
// strategy, final_capmae (one row per strategy)
std::string mc_summary_csv(const MonteCarloResult& mc);
// realization, seed, then one final CPMAE column per strategy
std::string mc_realizations_csv(const MonteCarloResult& mc);

// `config_json` is echoed verbatim under "config".
std::string sim_summary_json(const SimResult& sr, StrategyKind kind, const SimConfig& sc,
                             const std::string& config_json);
std::string mc_summary_json(const MonteCarloResult& mc, const std::string& config_json);

}  // namespace scn
