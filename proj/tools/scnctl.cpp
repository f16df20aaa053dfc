// scnctl: synthesis, simulation and Monte Carlo front end.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "scn/config.hpp"
#include "scn/design_io.hpp"
#include "scn/sim_io.hpp"
#include "scn/topology.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scn;

namespace {

constexpr const char* kVersion = "scnctl 1.0.0";

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kInfeasible = 3, kNumerical = 4 };

// Collects outputs and phase timings; written last so a crash leaves no manifest.
class Manifest {
 public:
  Manifest(std::string command, fs::path out) : command_(std::move(command)), out_(std::move(out)) {}

  void set(const std::string& key, json v) { extra_[key] = std::move(v); }

  template <typename F>
  auto phase(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Stop {
      Manifest* m;
      std::string name;
      std::chrono::steady_clock::time_point t0;
      ~Stop() { m->timings_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
    } stop{this, name, t0};
    return f();
  }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic((out_ / name).string(), content);
    files_.push_back(name);
  }

  void finish() {
    json m = extra_;
    m["command"] = command_;
    m["output_directory"] = out_.string();
    m["tool_version"] = kVersion;
    m["timings_seconds"] = timings_;
    files_.push_back("manifest.json");
    m["outputs"] = files_;
    write_file_atomic((out_ / "manifest.json").string(), m.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path out_;
  json extra_ = json::object();
  json timings_ = json::object();
  std::vector<std::string> files_;
};

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error("cannot create output directory " + p.string() + ": " + ec.message());
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string design_file_name(StrategyKind k) { return "design_" + lower(to_string(k)) + ".json"; }

json certificate_report(const NetworkDesign& d) {
  json local = json::array();
  for (size_t i = 0; i < d.local.size(); ++i) {
    const LocalDesign& l = d.local[i];
    local.push_back({{"chain", i},
                     {"method", l.method == LocalMethod::Basic ? "basic" : "improved"},
                     {"nu", l.nu},
                     {"rho", l.passivity_rho},
                     {"gamma_tilde", l.gamma_tilde},
                     {"min_eigenvalue", l.min_eigenvalue}});
  }
  json r = {{"strategy", to_string(d.kind)}, {"local", local}, {"global", nullptr}};
  if (d.global)
    r["global"] = {{"gamma_tilde", d.global->gamma_tilde},
                   {"objective", d.global->objective},
                   {"p", std::vector<double>(d.global->p.data(), d.global->p.data() + d.global->p.size())},
                   {"min_eigenvalue", d.global->min_eigenvalue},
                   {"gamma_binding", d.global->gamma_binding}};
  return r;
}

Topology topology_of(const NetworkDesign& d, int N, int n, double threshold) {
  if (d.global) return extract_topology(*d.global, threshold);
  Topology t;
  t.N = N;
  t.n = n;
  return t;
}

// Designs for strategies that need them: from --design files first, else synthesized here.
NetworkDesign design_for(StrategyKind kind, const Config& cfg, const std::vector<NetworkDesign>& given) {
  for (const auto& d : given)
    if (d.kind == kind) return d;
  if (kind == StrategyKind::LSSC || kind == StrategyKind::GCC) return NetworkDesign{kind, {}, {}};
  return synthesize_network(cfg.network, kind, cfg.design.pipeline);
}

struct Common {
  std::string config;
  std::string out = "out";
  int jobs = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory")->capture_default_str();
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

int run_synthesize(const Common& c, const std::string& strategy, std::optional<double> threshold) {
  Config cfg = load_config(c.config);
  cfg.design.pipeline.local.jobs = c.jobs;
  const StrategyKind kind = parse_strategy(strategy);
  const double thr = threshold.value_or(cfg.design.topology_threshold);
  ensure_dir(c.out);
  Manifest m("synthesize", c.out);
  m.set("config", c.config);
  m.set("strategy", to_string(kind));
  const NetworkDesign d = m.phase("synthesis", [&] { return synthesize_network(cfg.network, kind, cfg.design.pipeline); });
  const Topology t = topology_of(d, cfg.network.num_chains(), cfg.network.inventories(), thr);
  m.phase("export", [&] {
    m.write(design_file_name(kind), design_to_json(d));
    m.write("certificates.json", certificate_report(d).dump(2) + "\n");
    m.write("topology.dot", topology_to_dot(t));
    m.write("topology.json", topology_to_json(t, thr));
    return 0;
  });
  m.finish();
  std::cout << to_string(kind) << ": " << t.chain_edges().size() << " inter-chain links, " << t.edges.size()
            << " inventory pairs";
  if (d.global) std::cout << ", gamma_tilde=" << d.global->gamma_tilde;
  std::cout << "\n";
  return kOk;
}

int run_simulate(const Common& c, const std::string& strategy, const std::vector<std::string>& design_files,
                 std::optional<std::uint64_t> seed, std::optional<int> T, bool clamp) {
  Config cfg = load_config(c.config);
  cfg.design.pipeline.local.jobs = c.jobs;
  if (seed) cfg.simulation.seed = *seed;
  if (T) {
    if (*T < 1) throw ConfigError("--T must be >= 1");
    cfg.simulation.T = *T;
    auto& f = cfg.simulation.failures;
    const auto before = f.size();
    f.erase(std::remove_if(f.begin(), f.end(), [&](const FailureEvent& e) { return e.time > *T; }), f.end());
    if (f.size() != before) std::cerr << "note: dropped " << before - f.size() << " failure event(s) after T\n";
    try {
      cfg.simulation.check();
    } catch (const InvalidParameter& e) {
      throw ConfigError(e.what());
    }
  }
  if (clamp) cfg.simulation.clamp = true;
  const StrategyKind kind = parse_strategy(strategy);
  std::vector<NetworkDesign> given;
  for (const auto& f : design_files) given.push_back(load_design(f));
  const bool needs_design = kind != StrategyKind::LSSC && kind != StrategyKind::GCC;
  if (needs_design && std::none_of(given.begin(), given.end(), [&](const NetworkDesign& d) { return d.kind == kind; }))
    throw ConfigError(std::string(to_string(kind)) + " needs --design with a " + to_string(kind) + " design file");

  ensure_dir(c.out);
  Manifest m("simulate", c.out);
  m.set("config", c.config);
  m.set("strategy", to_string(kind));
  m.set("seed", cfg.simulation.seed);
  ControllerSet cs;
  try {
    cs = build_strategy(kind, cfg.network, design_for(kind, cfg, given), cfg.design.gcc_epsilon);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  const SimResult sr = m.phase("simulation", [&] { return simulate(cfg.network, cs, cfg.simulation, cfg.disturbances); });
  m.phase("export", [&] {
    m.write("trajectory.csv", sim_trajectory_csv(sr));
    m.write("events.csv", sim_events_csv(sr));
    m.write("summary.json", sim_summary_json(sr, kind, cfg.simulation, config_to_json(cfg)));
    return 0;
  });
  m.finish();
  std::cout << to_string(kind) << ": final CPMAE " << format_double(sr.cpmae(sr.T - 1)) << "\n";
  return kOk;
}

int run_montecarlo(const Common& c, const std::string& strategies, const std::vector<std::string>& design_files,
                   int R, std::optional<std::uint64_t> seed, bool clamp) {
  Config cfg = load_config(c.config);
  cfg.design.pipeline.local.jobs = c.jobs;
  if (clamp) cfg.simulation.clamp = true;
  const std::uint64_t base = seed.value_or(cfg.simulation.seed);
  std::vector<StrategyKind> kinds;
  std::stringstream ss(strategies);
  for (std::string s; std::getline(ss, s, ',');)
    if (!s.empty()) kinds.push_back(parse_strategy(s));
  if (kinds.empty()) throw ConfigError("--strategies is empty");
  std::vector<NetworkDesign> given;
  for (const auto& f : design_files) given.push_back(load_design(f));

  ensure_dir(c.out);
  Manifest m("montecarlo", c.out);
  m.set("config", c.config);
  m.set("base_seed", base);
  m.set("realizations", R);
  std::vector<ControllerSet> sets = m.phase("synthesis", [&] {
    std::vector<ControllerSet> v;
    for (auto k : kinds) v.push_back(build_strategy(k, cfg.network, design_for(k, cfg, given), cfg.design.gcc_epsilon));
    return v;
  });
  const MonteCarloResult mc =
      m.phase("simulation", [&] { return monte_carlo(cfg.network, sets, cfg.simulation, cfg.disturbances, R, base, c.jobs); });
  m.phase("export", [&] {
    for (const auto& s : mc.series) m.write("series_" + lower(to_string(s.kind)) + ".csv", mc_series_csv(s));
    m.write("summary.csv", mc_summary_csv(mc));
    m.write("realizations.csv", mc_realizations_csv(mc));
    m.write("summary.json", mc_summary_json(mc, config_to_json(cfg)));
    return 0;
  });
  m.finish();
  for (const auto& s : mc.series) std::cout << to_string(s.kind) << " " << format_double(s.final_capmae) << "\n";
  return kOk;
}

int run_export_topology(const std::string& design, const std::string& input, const std::string& format,
                        std::optional<double> threshold, const std::string& out) {
  const TopologyFormat fmt = parse_topology_format(format);
  Topology t;
  double thr = threshold.value_or(1e-5);
  if (!design.empty()) {
    const NetworkDesign d = load_design(design);
    if (d.global) {
      t = extract_topology(*d.global, thr);
    } else {
      t.N = static_cast<int>(d.local.size());
      t.n = d.local.empty() ? 0 : static_cast<int>(d.local.front().L.rows());
    }
  } else {
    const json j = json::parse(read_file(input));
    t = topology_from_json(j.dump());
    if (!threshold) thr = j.value("threshold", thr);
  }
  const std::string text = fmt == TopologyFormat::Dot ? topology_to_dot(t) : topology_to_json(t, thr);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    const fs::path p(out);
    if (p.has_parent_path()) ensure_dir(p.parent_path());
    write_file_atomic(out, text);
  }
  return kOk;
}

int run_scenario(std::uint64_t seed, int N, int n, const std::string& out) {
  const Config cfg = random_scenario(seed, N, n);
  const std::string text = config_to_json(cfg);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    const fs::path p(out);
    if (p.has_parent_path()) ensure_dir(p.parent_path());
    write_file_atomic(out, text);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supply chain network co-design and simulation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  std::string strategy = "DCC-U", strategies = "LSSC,LSFC,GCC,DCC-C,DCC-U";
  std::vector<std::string> design_files;
  std::optional<std::uint64_t> seed;
  std::optional<int> T;
  std::optional<double> threshold;
  bool clamp = false;
  int R = 200;

  auto* syn = app.add_subcommand("synthesize", "run the local and global designs for one strategy");
  add_common(syn, common);
  syn->add_option("--strategy", strategy, "LSSC, LSFC, GCC, DCC-C or DCC-U")->capture_default_str();
  syn->add_option("--threshold", threshold, "relative gain threshold for the topology");

  auto* sim = app.add_subcommand("simulate", "simulate one strategy over one realization");
  add_common(sim, common);
  sim->add_option("--strategy", strategy)->capture_default_str();
  sim->add_option("--design", design_files, "design file(s) from synthesize")->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "overrides simulation.seed");
  sim->add_option("--T", T, "overrides simulation.T");
  sim->add_flag("--clamp", clamp, "clamp orders and inventories at zero");

  auto* mc = app.add_subcommand("montecarlo", "paired Monte Carlo comparison of strategies");
  add_common(mc, common);
  mc->add_option("--strategies,--strategy", strategies, "comma separated list")->capture_default_str();
  mc->add_option("--design", design_files, "design file(s); missing ones are synthesized")->check(CLI::ExistingFile);
  mc->add_option("--realizations", R, "number of realizations")->check(CLI::PositiveNumber)->capture_default_str();
  mc->add_option("--seed", seed, "base seed (realization r uses seed + r)");
  mc->add_flag("--clamp", clamp, "clamp orders and inventories at zero");

  std::string topo_design, topo_input, topo_format = "dot", topo_out;
  auto* topo = app.add_subcommand("export-topology", "write the communication topology of a design");
  auto* g = topo->add_option_group("source");
  g->add_option("--design", topo_design, "design file")->check(CLI::ExistingFile);
  g->add_option("--input", topo_input, "topology JSON file")->check(CLI::ExistingFile);
  g->require_option(1);
  topo->add_option("--format", topo_format, "dot or json")->capture_default_str();
  topo->add_option("--threshold", threshold, "relative gain threshold (default 1e-5)");
  topo->add_option("--out", topo_out, "output file, - for stdout");

  std::uint64_t scen_seed = 1;
  int scen_N = 3, scen_n = 4;
  std::string scen_out;
  auto* scen = app.add_subcommand("scenario", "write a random scenario config");
  scen->add_option("--seed", scen_seed)->capture_default_str();
  scen->add_option("--chains", scen_N)->check(CLI::PositiveNumber)->capture_default_str();
  scen->add_option("--inventories", scen_n)->check(CLI::PositiveNumber)->capture_default_str();
  scen->add_option("--out", scen_out, "output file, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*syn) return run_synthesize(common, strategy, threshold);
    if (*sim) return run_simulate(common, strategy, design_files, seed, T, clamp);
    if (*mc) return run_montecarlo(common, strategies, design_files, R, seed, clamp);
    if (*topo) return run_export_topology(topo_design, topo_input, topo_format, threshold, topo_out);
    if (*scen) return run_scenario(scen_seed, scen_N, scen_n, scen_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const InvalidParameter& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfig;
  } catch (const json::exception& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
