#include "scn/sim_io.hpp"

#include <charconv>
#include <sstream>

#include <json.hpp>

namespace scn {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void header_block(std::ostringstream& os, const char* prefix, int N, int n) {
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < n; ++k) os << ',' << prefix << '_' << i << '_' << k;
}

void row_block(std::ostringstream& os, const MatrixXd& M, Eigen::Index t) {
  for (Eigen::Index c = 0; c < M.cols(); ++c) os << ',' << format_double(M(t, c));
}

}  // namespace

std::string sim_trajectory_csv(const SimResult& sr) {
  std::ostringstream os;
  os << "t,pmae,cpmae";
  header_block(os, "x", sr.N, sr.n);
  for (int i = 0; i < static_cast<int>(sr.tau.size()); ++i)
    for (int k = 0; k < static_cast<int>(sr.tau[i].size()); ++k)
      for (int l = 0; l < sr.tau[i][k]; ++l) os << ",pipe_" << i << '_' << k << '_' << l;
  header_block(os, "u", sr.N, sr.n);
  header_block(os, "y", sr.N, sr.n);
  header_block(os, "z", sr.N, sr.n);
  header_block(os, "r", sr.N, sr.n);
  header_block(os, "winv", sr.N, sr.n);
  header_block(os, "wtr", sr.N, sr.n);
  for (int i = 0; i < sr.N; ++i) os << ",d_" << i;
  os << '\n';
  for (int t = 0; t < sr.T; ++t) {
    os << t + 1 << ',' << format_double(sr.pmae(t)) << ',' << format_double(sr.cpmae(t));
    for (const MatrixXd* M : {&sr.inventory, &sr.pipeline, &sr.orders, &sr.y, &sr.z, &sr.r, &sr.w_inv,
                              &sr.w_tr, &sr.demand})
      row_block(os, *M, t);
    os << '\n';
  }
  return os.str();
}

std::string sim_events_csv(const SimResult& sr) {
  std::ostringstream os;
  os << "time,kind,chain,index\n";
  for (const auto& e : sr.events)
    os << e.time << ',' << to_string(e.kind) << ',' << e.chain << ',' << e.index << '\n';
  return os.str();
}

std::string mc_series_csv(const StrategySeries& s) {
  std::ostringstream os;
  os << "t,apmae,capmae\n";
  for (Eigen::Index t = 0; t < s.apmae.size(); ++t)
    os << t + 1 << ',' << format_double(s.apmae(t)) << ',' << format_double(s.capmae(t)) << '\n';
  return os.str();
}

std::string mc_summary_csv(const MonteCarloResult& mc) {
  std::ostringstream os;
  os << "strategy,final_capmae\n";
  for (const auto& s : mc.series) os << to_string(s.kind) << ',' << format_double(s.final_capmae) << '\n';
  return os.str();
}

std::string mc_realizations_csv(const MonteCarloResult& mc) {
  std::ostringstream os;
  os << "realization,seed";
  for (const auto& s : mc.series) os << ',' << to_string(s.kind);
  os << '\n';
  for (int r = 0; r < mc.R; ++r) {
    os << r << ',' << mc.seeds[r];
    for (const auto& f : mc.final_cpmae) os << ',' << format_double(f[r]);
    os << '\n';
  }
  return os.str();
}

std::string sim_summary_json(const SimResult& sr, StrategyKind kind, const SimConfig& sc,
                             const std::string& config_json) {
  json events = json::array();
  for (const auto& e : sr.events)
    events.push_back({{"time", e.time}, {"kind", to_string(e.kind)}, {"chain", e.chain}, {"index", e.index}});
  json root = {{"strategy", to_string(kind)},
               {"seed", sc.seed},
               {"T", sr.T},
               {"final_pmae", sr.T ? sr.pmae(sr.T - 1) : 0.0},
               {"final_cpmae", sr.T ? sr.cpmae(sr.T - 1) : 0.0},
               {"sum_z_squared", sr.z.squaredNorm()},
               {"sum_r_squared", sr.r.squaredNorm()},
               {"events", events},
               {"config", json::parse(config_json)}};
  return root.dump(2) + "\n";
}

std::string mc_summary_json(const MonteCarloResult& mc, const std::string& config_json) {
  json finals = json::object();
  json order = json::array();
  for (const auto& s : mc.series) {
    finals[to_string(s.kind)] = s.final_capmae;
    order.push_back(to_string(s.kind));
  }
  json root = {{"realizations", mc.R},
               {"base_seed", mc.base_seed},
               {"seeds", mc.seeds},
               {"strategies", order},
               {"final_capmae", finals},
               {"config", json::parse(config_json)}};
  return root.dump(2) + "\n";
}

}  // namespace scn
