#include "scn/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace scn {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Object reader that remembers which keys were consumed so leftovers can be
// reported as typos.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(path_ + ": missing key '" + key + "'");
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double def) { return has(key) ? number(key) : def; }
  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    return v.get<double>();
  }
  int integer(const std::string& key, int def) { return has(key) ? integer(key) : def; }
  int integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    return v.get<int>();
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = get(key);
    if (!v.is_number_unsigned()) throw ConfigError(where(key) + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = get(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = get(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  Section child(const std::string& key) { return Section(get(key), where(key)); }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

// A scalar broadcast to `size` entries, or a list of exactly `size` numbers.
std::vector<double> scalar_or_list(const json& v, int size, const std::string& where) {
  if (v.is_number()) return std::vector<double>(size, v.get<double>());
  std::vector<double> out = number_list(v, where);
  if (static_cast<int>(out.size()) != size)
    throw ConfigError(where + ": expected " + std::to_string(size) + " entries");
  return out;
}

MatrixXd number_matrix(const json& v, int rows, int cols, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows)
    throw ConfigError(where + ": expected " + std::to_string(rows) + " rows");
  MatrixXd M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    std::vector<double> row = number_list(v[r], where);
    if (static_cast<int>(row.size()) != cols)
      throw ConfigError(where + ": expected " + std::to_string(cols) + " columns");
    for (int c = 0; c < cols; ++c) M(r, c) = row[c];
  }
  return M;
}

template <typename J = json>
J matrix_json(const MatrixXd& M) {
  J a = J::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    J row = J::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    a.push_back(row);
  }
  return a;
}

void parse_solver(Section s, SolverOptions& o) {
  o.eps_strict = s.number("eps_strict", o.eps_strict);
  o.tol_psd = s.number("tol_psd", o.tol_psd);
  o.ipm.max_iterations = s.integer("max_iterations", o.ipm.max_iterations);
  o.ipm.tol_gap = s.number("tol_gap", o.ipm.tol_gap);
  o.ipm.tol_feas = s.number("tol_feas", o.ipm.tol_feas);
  o.ipm.tol_infeas = s.number("tol_infeas", o.ipm.tol_infeas);
  o.ipm.step_fraction = s.number("step_fraction", o.ipm.step_fraction);
  o.ipm.box_bound = s.number("box_bound", o.ipm.box_bound);
  s.finish();
  if (!(o.eps_strict > 0) || !(o.tol_psd > 0) || o.ipm.max_iterations < 1 || !(o.ipm.tol_gap > 0) ||
      !(o.ipm.tol_feas > 0) || !(o.ipm.tol_infeas > 0) || !(o.ipm.box_bound > 0) ||
      !(o.ipm.step_fraction > 0 && o.ipm.step_fraction < 1))
    throw ConfigError("design.solver: values out of range");
}

FailureKind parse_failure_kind(const std::string& s, const std::string& where) {
  if (s == "transport") return FailureKind::TransportLink;
  if (s == "inventory") return FailureKind::Inventory;
  throw ConfigError(where + ": kind must be \"transport\" or \"inventory\"");
}

}  // namespace

Config parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Config cfg;
  Section top(root, "config");

  // network
  Section net = top.child("network");
  const json& chains = net.get("chains");
  if (!chains.is_array() || chains.empty()) throw ConfigError("network.chains: expected a nonempty array");
  std::vector<std::optional<double>> dbar_override;
  for (size_t i = 0; i < chains.size(); ++i) {
    const std::string path = "network.chains[" + std::to_string(i) + "]";
    Section c(chains[i], path);
    ChainSpec spec;
    for (double t : number_list(c.get("tau"), path + ".tau")) {
      if (t != static_cast<int>(t)) throw ConfigError(path + ".tau: delays must be integers");
      spec.tau.push_back(static_cast<int>(t));
    }
    const int n = spec.size();
    if (n == 0) throw ConfigError(path + ".tau: at least one link");
    spec.perish_rate = scalar_or_list(c.get("perish_rate"), n, path + ".perish_rate");
    spec.xbar = scalar_or_list(c.get("xbar"), n, path + ".xbar");
    dbar_override.push_back(c.has("dbar") ? std::optional<double>(c.number("dbar")) : std::nullopt);
    c.finish();
    spec.wbar_inv.assign(n, 0.0);
    spec.wbar_tr.assign(n, 0.0);
    cfg.network.chains.push_back(spec);
  }
  const int N = cfg.network.num_chains(), n = cfg.network.inventories();
  for (const auto& c : cfg.network.chains)
    if (c.size() != n) throw ConfigError("network.chains: every chain needs the same number of links");

  if (net.has("reference_topology")) {
    const json& ref = net.get("reference_topology");
    if (!ref.is_array()) throw ConfigError("network.reference_topology: expected an array of pairs");
    std::set<ChainPair> pairs;
    for (const auto& p : ref) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
        throw ConfigError("network.reference_topology: pairs are [i, j] with integer chain indices");
      const int a = p[0].get<int>(), b = p[1].get<int>();
      if (a < 0 || b < 0 || a >= N || b >= N)
        throw ConfigError("network.reference_topology: chain index out of range");
      pairs.insert({a, b});
      pairs.insert({b, a});
    }
    cfg.network.reference_topology = pairs;
  }
  cfg.network.c0 = net.number("c0", 1.0);
  cfg.network.gamma_bar = net.number("gamma_bar", 1e3);
  bool explicit_cost = false;
  if (net.has("cost")) {
    Section cost = net.child("cost");
    if (cost.has("matrix") && cost.has("penalty"))
      throw ConfigError("network.cost: give either 'matrix' or 'penalty'");
    if (cost.has("matrix")) {
      cfg.network.cost = number_matrix(cost.get("matrix"), N * n, N * n, "network.cost.matrix");
      explicit_cost = true;
    } else {
      cfg.cost_penalty = cost.number("penalty", cfg.cost_penalty);
    }
    cost.finish();
  }
  net.finish();
  if (!(cfg.cost_penalty >= 0)) throw ConfigError("network.cost.penalty must be >= 0");
  if (!explicit_cost)
    cfg.network.cost = default_cost_matrix(N, n, cfg.network.reference_topology, cfg.cost_penalty);

  // disturbances
  Section d = top.child("disturbances");
  DisturbanceModel& dm = cfg.disturbances;
  dm.wbar_inv = number_matrix(d.get("wbar_inv"), N, n, "disturbances.wbar_inv");
  dm.wbar_tr = number_matrix(d.get("wbar_tr"), N, n, "disturbances.wbar_tr");
  dm.demand_means = number_matrix(d.get("demand_means"), N, 7, "disturbances.demand_means");
  dm.rel_std = d.number("rel_std", dm.rel_std);
  dm.alpha_waste = d.number("alpha_waste", dm.alpha_waste);
  dm.alpha_demand = d.number("alpha_demand", dm.alpha_demand);
  dm.steps_per_day = d.integer("steps_per_day", dm.steps_per_day);
  d.finish();

  // design
  DesignSettings& ds = cfg.design;
  if (top.has("design")) {
    Section s = top.child("design");
    LocalDesignOptions& lo = ds.pipeline.local;
    lo.extended_output = s.boolean("extended_output", lo.extended_output);
    lo.rho_tilde_min = s.number("rho_tilde_min", lo.rho_tilde_min);
    lo.rho_tilde_max = s.number("rho_tilde_max", lo.rho_tilde_max);
    if (s.has("rho_grid")) lo.rho_grid = number_list(s.get("rho_grid"), "design.rho_grid");
    lo.refine = s.boolean("refine", lo.refine);
    ds.pipeline.p_local = s.number("p_local", ds.pipeline.p_local);
    ds.pipeline.p_feedback_iterations = s.integer("p_feedback_iterations", ds.pipeline.p_feedback_iterations);
    ds.gcc_epsilon = s.number("gcc_epsilon", ds.gcc_epsilon);
    ds.topology_threshold = s.number("topology_threshold", ds.topology_threshold);
    if (s.has("solver")) parse_solver(s.child("solver"), lo.solver);
    s.finish();
    ds.pipeline.global.solver = lo.solver;
    if (!(lo.rho_tilde_min > 0) || !(lo.rho_tilde_max > lo.rho_tilde_min))
      throw ConfigError("design: need 0 < rho_tilde_min < rho_tilde_max");
    for (double r : lo.rho_grid)
      if (!(r > 0)) throw ConfigError("design.rho_grid: entries must be positive");
    if (!(ds.pipeline.p_local > 0)) throw ConfigError("design.p_local must be positive");
    if (ds.pipeline.p_feedback_iterations < 0) throw ConfigError("design.p_feedback_iterations must be >= 0");
    if (!(ds.gcc_epsilon > 0)) throw ConfigError("design.gcc_epsilon must be positive");
    if (!(ds.topology_threshold > 0 && ds.topology_threshold < 1))
      throw ConfigError("design.topology_threshold must lie in (0, 1)");
  }

  // simulation
  SimConfig& sc = cfg.simulation;
  if (top.has("simulation")) {
    Section s = top.child("simulation");
    sc.T = s.integer("T", sc.T);
    sc.seed = s.unsigned_integer("seed", sc.seed);
    const std::string init = s.string("init", "random");
    if (init == "random") sc.init = InitMode::Random;
    else if (init == "equilibrium") sc.init = InitMode::Equilibrium;
    else throw ConfigError("simulation.init must be \"random\" or \"equilibrium\"");
    if (s.has("init_range")) {
      std::vector<double> r = number_list(s.get("init_range"), "simulation.init_range");
      if (r.size() != 2 || r[0] != static_cast<int>(r[0]) || r[1] != static_cast<int>(r[1]))
        throw ConfigError("simulation.init_range: expected two integers");
      sc.init_lo = static_cast<int>(r[0]);
      sc.init_hi = static_cast<int>(r[1]);
    }
    if (s.has("failures")) {
      const json& f = s.get("failures");
      if (!f.is_array()) throw ConfigError("simulation.failures: expected an array");
      sc.failures.clear();
      for (size_t k = 0; k < f.size(); ++k) {
        const std::string path = "simulation.failures[" + std::to_string(k) + "]";
        Section e(f[k], path);
        FailureEvent ev;
        ev.time = e.integer("time");
        ev.kind = parse_failure_kind(e.string("kind", ""), path);
        ev.targets = e.integer("targets");
        e.finish();
        sc.failures.push_back(ev);
      }
    }
    sc.xbar_norm = s.number("xbar_norm", sc.xbar_norm);
    sc.clamp = s.boolean("clamp", sc.clamp);
    sc.deterministic = s.boolean("deterministic", sc.deterministic);
    s.finish();
  }
  top.finish();

  try {
    apply_disturbance_means(cfg.network, dm);
    for (int i = 0; i < N; ++i)
      if (dbar_override[i]) cfg.network.chains[i].dbar = *dbar_override[i];
    cfg.network = validate_network(cfg.network);
    sc.check();
    for (const auto& f : sc.failures)
      if (f.targets > N * n) throw InvalidParameter("more failure targets than sites");
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const Config& cfg, int indent) {
  ojson root;
  ojson chains = ojson::array();
  const VectorXd dmean = cfg.disturbances.overall_demand();
  for (int i = 0; i < cfg.network.num_chains(); ++i) {
    const ChainSpec& c = cfg.network.chains[i];
    ojson jc = {{"tau", c.tau}, {"perish_rate", c.perish_rate}, {"xbar", c.xbar}};
    if (c.dbar != dmean(i)) jc["dbar"] = c.dbar;
    chains.push_back(jc);
  }
  ojson net = {{"chains", chains},
              {"c0", cfg.network.c0},
              {"gamma_bar", cfg.network.gamma_bar},
              {"cost", ojson::object()}};
  if (cfg.network.cost == default_cost_matrix(cfg.network.num_chains(), cfg.network.inventories(),
                                              cfg.network.reference_topology, cfg.cost_penalty))
    net["cost"]["penalty"] = cfg.cost_penalty;
  else
    net["cost"]["matrix"] = matrix_json<ojson>(cfg.network.cost);
  if (cfg.network.reference_topology) {
    ojson pairs = ojson::array();
    for (const auto& [a, b] : *cfg.network.reference_topology)
      if (a < b) pairs.push_back({a, b});
    net["reference_topology"] = pairs;
  }
  root["network"] = net;

  const DisturbanceModel& dm = cfg.disturbances;
  root["disturbances"] = {{"wbar_inv", matrix_json<ojson>(dm.wbar_inv)},
                          {"wbar_tr", matrix_json<ojson>(dm.wbar_tr)},
                          {"demand_means", matrix_json<ojson>(dm.demand_means)},
                          {"rel_std", dm.rel_std},
                          {"alpha_waste", dm.alpha_waste},
                          {"alpha_demand", dm.alpha_demand},
                          {"steps_per_day", dm.steps_per_day}};

  const DesignSettings& ds = cfg.design;
  const LocalDesignOptions& lo = ds.pipeline.local;
  ojson design = {{"extended_output", lo.extended_output},
                 {"rho_tilde_min", lo.rho_tilde_min},
                 {"rho_tilde_max", lo.rho_tilde_max},
                 {"refine", lo.refine},
                 {"p_local", ds.pipeline.p_local},
                 {"p_feedback_iterations", ds.pipeline.p_feedback_iterations},
                 {"gcc_epsilon", ds.gcc_epsilon},
                 {"topology_threshold", ds.topology_threshold},
                 {"solver",
                  {{"eps_strict", lo.solver.eps_strict},
                   {"tol_psd", lo.solver.tol_psd},
                   {"max_iterations", lo.solver.ipm.max_iterations},
                   {"tol_gap", lo.solver.ipm.tol_gap},
                   {"tol_feas", lo.solver.ipm.tol_feas},
                   {"tol_infeas", lo.solver.ipm.tol_infeas},
                   {"step_fraction", lo.solver.ipm.step_fraction},
                   {"box_bound", lo.solver.ipm.box_bound}}}};
  if (!lo.rho_grid.empty()) design["rho_grid"] = lo.rho_grid;
  root["design"] = design;

  const SimConfig& sc = cfg.simulation;
  ojson failures = ojson::array();
  for (const auto& f : sc.failures)
    failures.push_back({{"time", f.time}, {"kind", to_string(f.kind)}, {"targets", f.targets}});
  root["simulation"] = {{"T", sc.T},
                        {"seed", sc.seed},
                        {"init", sc.init == InitMode::Random ? "random" : "equilibrium"},
                        {"init_range", {sc.init_lo, sc.init_hi}},
                        {"failures", failures},
                        {"xbar_norm", sc.xbar_norm},
                        {"clamp", sc.clamp},
                        {"deterministic", sc.deterministic}};
  return root.dump(indent) + "\n";
}

Config random_scenario(std::uint64_t seed, int N, int n) {
  if (N < 1 || n < 1) throw InvalidParameter("scenario needs N, n >= 1");
  Rng rng(stream_seed(seed, 0, 0, 100));
  Config cfg;
  for (int i = 0; i < N; ++i) {
    ChainSpec c;
    for (int k = 0; k < n; ++k) c.tau.push_back(1 + rng.uniform_int(1, 4));
    c.perish_rate.assign(n, 0.1);
    c.xbar.assign(n, 500.0);
    c.wbar_inv.assign(n, 0.0);
    c.wbar_tr.assign(n, 0.0);
    cfg.network.chains.push_back(c);
  }
  std::set<ChainPair> ref;
  for (int i = 0; i + 1 < N; ++i) {
    ref.insert({i, i + 1});
    ref.insert({i + 1, i});
  }
  cfg.network.reference_topology = ref;
  cfg.disturbances = random_disturbance_model(N, n, rng);
  apply_disturbance_means(cfg.network, cfg.disturbances);
  cfg.network = validate_network(cfg.network);
  cfg.network.cost = default_cost_matrix(N, n, cfg.network.reference_topology, cfg.cost_penalty);
  cfg.simulation.seed = seed;
  for (auto& f : cfg.simulation.failures) f.targets = std::min(f.targets, N * n);
  return cfg;
}

}  // namespace scn
