// Acceptance run on the reference scenario. One PASS/FAIL line per criterion;
// exit status 1 if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "scn/codesign.hpp"
#include "scn/config.hpp"
#include "scn/lmi/dissipativity.hpp"
#include "scn/sim.hpp"
#include "scn/sim_io.hpp"

using namespace scn;

namespace {

// pinned tolerances
constexpr double kEigTol = 1e-7;
constexpr double kTrajTol = 1e-8;
constexpr double kSteadyTol = 1e-6;
constexpr double kGainRel = 1e-6;
constexpr double kGainAbs = 1e-6;
constexpr double kZeroBlock = 1e-12;
constexpr double kTopoThreshold = 1e-5;
constexpr double kLssSlack = 0.9;
constexpr double kCertSeconds = 120;
constexpr double kOracleSeconds = 30;
constexpr double kMcSeconds = 600;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;
void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %-26s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

StateSpaceRealization closed_loop(const ErrorDynamics& ed, const LocalDesign& d) {
  StateSpaceRealization s;
  s.A = ed.Acal + ed.Bcal * d.L;
  s.B = MatrixXd::Identity(ed.n_i, ed.n_i);
  s.C = d.output_map(ed);
  s.D = MatrixXd::Zero(s.C.rows(), ed.n_i);
  return s;
}

// local dissipation LMI rebuilt from the returned P and K
double local_lmi_min_eig(const ErrorDynamics& ed, const LocalDesign& d) {
  const SupplyRate X = d.supply_rate();
  const MatrixXd neg_inv = -X.X22.inverse();
  const lmi::AffineExpr M = lmi::local_dissipation_lmi(
      ed.Acal, ed.Bcal, d.output_map(ed), lmi::AffineExpr(d.P), lmi::AffineExpr(d.K),
      lmi::AffineExpr(MatrixXd(0.5 * (neg_inv + neg_inv.transpose()))), X.X12, lmi::AffineExpr(X.X11));
  return std::min(lmi::min_eigenvalue(M.evaluate(VectorXd())), lmi::min_eigenvalue(d.P));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : std::string(SCN_CONFIG_DIR) + "/reference_scenario.json";
  const Config cfg = load_config(path);
  const NetworkSpec& net = cfg.network;
  const DisturbanceModel& dm = cfg.disturbances;
  const PipelineOptions& po = cfg.design.pipeline;
  const int N = net.num_chains(), n = net.inventories();
  const int jobs = std::max(1u, std::thread::hardware_concurrency());
  std::printf("scenario %s: N=%d n=%d, %d worker(s)\n", path.c_str(), N, n, jobs);

  std::vector<ErrorDynamics> eds;
  for (const auto& c : net.chains) eds.push_back(build_chain_error_dynamics(c));

  // 1. certificates
  NetworkDesign lsfc, dcc_c, dcc_u;
  lsfc.kind = StrategyKind::LSFC;
  dcc_c.kind = StrategyKind::DCC_C;
  dcc_u.kind = StrategyKind::DCC_U;
  {
    const auto t0 = Clock::now();
    bool ok = true;
    double worst = 1e300;
    std::string why;
    try {
      for (const auto& ed : eds) lsfc.local.push_back(design_local_basic(ed, po.local));
      std::vector<LocalDesign> improved;
      for (const auto& ed : eds) improved.push_back(design_local_improved(ed, po.p_local, N, po.local));
      for (int i = 0; i < N; ++i) {
        worst = std::min(worst, local_lmi_min_eig(eds[i], lsfc.local[i]));
        worst = std::min(worst, local_lmi_min_eig(eds[i], improved[i]));
        const LocalDesign& d = improved[i];
        worst = std::min(worst, lmi::min_eigenvalue(
                                    necessary_condition_matrix(d.p_used, d.nu, d.passivity_rho, d.gamma_tilde, N)));
      }
      for (bool constrained : {true, false}) {
        const GlobalSynthesis g = codesign_global(net, eds, improved, constrained, po.global);
        if (!g.result.optimal()) {
          ok = false;
          why += std::string(" global(") + (constrained ? "C" : "U") + ") " + lmi::to_string(g.result.status);
          continue;
        }
        for (const auto& c : g.result.certificates) worst = std::min(worst, c.min_eigenvalue);
        worst = std::min(worst, lmi::min_eigenvalue(global_lmi_value(net, eds, improved, g.design.Kbar,
                                                                     g.design.p, g.design.gamma_tilde)));
        NetworkDesign& nd = constrained ? dcc_c : dcc_u;
        nd.local = improved;
        nd.global = g.design;
      }
    } catch (const std::exception& e) {
      ok = false;
      why += std::string(" ") + e.what();
    }
    const double secs = seconds_since(t0);
    ok = ok && worst >= -kEigTol && secs <= kCertSeconds;
    report(ok, "lmi-certificates",
           "min eig " + fmt("%.3e", worst) + " (>= -1e-7), " + fmt("%.1f s", secs) + " (<= 120 s)" + why);
  }
  if (!dcc_u.global || !dcc_c.global) {
    std::printf("designs unavailable, remaining criteria skipped\n");
    return 1;
  }
  const double gamma = dcc_u.global->gamma_tilde;
  std::printf("DCC-U gamma_tilde = %.6g\n", gamma);

  // 2. dissipativity oracle
  {
    const auto t0 = Clock::now();
    double worst = -1e300;
    Rng rng(2024);
    for (const NetworkDesign* d : {&lsfc, &dcc_u})
      for (int i = 0; i < N; ++i) {
        const LocalDesign& l = d->local[i];
        worst = std::max(worst, lmi::trajectory_dissipativity_check(closed_loop(eds[i], l), l.storage(),
                                                                    l.supply_rate(), 10000, 50, rng));
      }
    const double secs = seconds_since(t0);
    report(worst <= kTrajTol && secs <= kOracleSeconds, "dissipativity-oracle",
           "max violation " + fmt("%.3e", worst) + " (<= 1e-8) over " + std::to_string(2 * N) +
               " designs, " + fmt("%.1f s", secs));
  }

  // 3. steady state under LSSC
  {
    SimConfig sc = cfg.simulation;
    sc.T = 300;
    sc.failures.clear();
    sc.deterministic = true;
    sc.init = InitMode::Random;
    double worst = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      sc.seed = seed;
      const SimResult r = simulate(net, build_strategy(StrategyKind::LSSC, net), sc, dm);
      worst = std::max(worst, r.y.row(sc.T - 1).cwiseAbs().maxCoeff());
    }
    report(worst <= kSteadyTol, "lssc-steady-state",
           "max |x - xbar| at t=300 " + fmt("%.3e", worst) + " (<= 1e-6), 10 random starts");
  }

  // 4. empirical gain of the DCC-U loop
  {
    const ControllerSet cs = build_strategy(StrategyKind::DCC_U, net, dcc_u);
    SimConfig sc = cfg.simulation;
    sc.failures.clear();
    sc.init = InitMode::Equilibrium;
    double worst_ratio = 0;
    for (int k = 0; k < 100; ++k) {
      sc.seed = 5000 + k;
      worst_ratio = std::max(worst_ratio, empirical_gain(simulate(net, cs, sc, dm)));
    }
    const bool ok_ratio = worst_ratio <= gamma * (1 + kGainRel);

    // nonzero initial error: the storage enters the bound
    sc.init = InitMode::Random;
    double worst_slack = -1e300;
    for (int k = 0; k < 20; ++k) {
      sc.seed = 7000 + k;
      const SimResult r = simulate(net, cs, sc, dm);
      double storage = 0;
      for (int i = 0; i < N; ++i) {
        const ChainSpec& c = net.chains[i];
        VectorXd x0(c.state_dim());
        int off = 0;
        for (int j = 0; j < i; ++j) off += net.chains[j].total_delay();
        x0 << r.y.row(0).segment(i * n, n).transpose(),
            r.pipeline.row(0).segment(off, c.total_delay()).transpose() - cs.pipe_target[i];
        storage += dcc_u.global->p(i) * x0.dot(dcc_u.local[i].storage() * x0);
      }
      worst_slack = std::max(worst_slack, r.z.squaredNorm() - gamma * r.r.squaredNorm() - storage);
    }
    const bool ok_offset = worst_slack <= kGainAbs;
    report(ok_ratio && ok_offset, "empirical-l2-gain",
           "max ratio " + fmt("%.6g", worst_ratio) + " vs gamma " + fmt("%.6g", gamma) +
               ", max offset-bound excess " + fmt("%.3e", worst_slack) + " (<= 1e-6)");
  }

  // 5. Monte Carlo comparison
  {
    const auto t0 = Clock::now();
    std::vector<ControllerSet> cs{build_strategy(StrategyKind::LSSC, net),
                                  build_strategy(StrategyKind::LSFC, net, lsfc),
                                  build_strategy(StrategyKind::GCC, net, {}, cfg.design.gcc_epsilon),
                                  build_strategy(StrategyKind::DCC_C, net, dcc_c),
                                  build_strategy(StrategyKind::DCC_U, net, dcc_u)};
    const MonteCarloResult mc = monte_carlo(net, cs, cfg.simulation, dm, 200, cfg.simulation.seed, jobs);
    const double lssc = mc.series[0].final_capmae, gcc = mc.series[2].final_capmae,
                 dc = mc.series[3].final_capmae, du = mc.series[4].final_capmae;
    const double secs = seconds_since(t0);
    std::string detail;
    for (const auto& s : mc.series) detail += std::string(to_string(s.kind)) + "=" + fmt("%.6f ", s.final_capmae);
    report(du <= dc && dc <= gcc && du <= kLssSlack * lssc && secs <= kMcSeconds, "monte-carlo-ordering",
           detail + fmt("(R=200, %.1f s)", secs));
  }

  // 6. structure of the consensus gains
  {
    const GlobalDesign& gc = *dcc_c.global;
    double off_ref = 0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (!net.reference_topology->count({i, j}))
          off_ref = std::max(off_ref, gc.K_block(i, j).cwiseAbs().maxCoeff());
    const std::size_t edges = extract_topology(*dcc_u.global, kTopoThreshold).chain_edges().size();
    const std::size_t complete = static_cast<std::size_t>(N * (N - 1));
    report(off_ref <= kZeroBlock && edges < complete, "structural-constraints",
           "DCC-C off-reference max " + fmt("%.3e", off_ref) + ", DCC-U chain edges " + std::to_string(edges) +
               " of " + std::to_string(complete));
  }

  // 7. determinism
  {
    SimConfig sc = cfg.simulation;
    sc.seed = 77;
    const ControllerSet cs = build_strategy(StrategyKind::DCC_U, net, dcc_u);
    const std::string a = sim_trajectory_csv(simulate(net, cs, sc, dm));
    const std::string b = sim_trajectory_csv(simulate(net, cs, sc, dm));
    SimConfig short_sc = sc;
    short_sc.T = 300;
    short_sc.failures = {{100, FailureKind::TransportLink, 2}, {200, FailureKind::Inventory, 4}};
    const std::vector<ControllerSet> all{build_strategy(StrategyKind::LSSC, net), cs};
    const MonteCarloResult m1 = monte_carlo(net, all, short_sc, dm, 8, 3, 1);
    const MonteCarloResult m2 = monte_carlo(net, all, short_sc, dm, 8, 3, jobs);
    const bool ok = a == b && mc_summary_csv(m1) == mc_summary_csv(m2) &&
                    mc_realizations_csv(m1) == mc_realizations_csv(m2) &&
                    mc_series_csv(m1.series[1]) == mc_series_csv(m2.series[1]);
    report(ok, "determinism", "trajectory CSV and Monte Carlo CSVs byte-identical across repeated runs");
  }

  // 8. interconnection synthesis on a toy network, both branches
  {
    auto scalar = [](double a, double b, double c, double d) {
      StateSpaceRealization s;
      s.A = MatrixXd::Constant(1, 1, a);
      s.B = MatrixXd::Constant(1, 1, b);
      s.C = MatrixXd::Constant(1, 1, c);
      s.D = MatrixXd::Constant(1, 1, d);
      return s;
    };
    lmi::InterconnectionOptions o;
    o.Mzy = MatrixXd::Identity(2, 2);
    o.Muw = MatrixXd::Identity(2, 2);
    o.Mzw = MatrixXd::Zero(2, 2);
    const SupplyRate Y = SupplyRate::l2g(5.0, 2, 2);
    struct Case {
      std::vector<StateSpaceRealization> subs;
      SupplyRate X;
      lmi::DissipativityBranch branch;
      const char* name;
    };
    const std::vector<Case> cases{
        {{scalar(0.5, 1, 1, 0), scalar(0.3, 1, 1, 0)}, SupplyRate::if_ofp(-1, 0.1, 1),
         lmi::DissipativityBranch::PositiveX11, "X11>0"},
        {{scalar(0.5, 0.2, 1, 1), scalar(0.3, 0.2, 1, 1)}, SupplyRate::if_ofp(0.2, 0.1, 1),
         lmi::DissipativityBranch::NegativeX11, "X11<0"},
    };
    bool ok = true;
    std::string detail;
    Rng rng(11);
    for (const auto& c : cases) {
      std::vector<MatrixXd> P;
      bool certified = true;
      for (const auto& s : c.subs) {
        const lmi::XeidCheck x = lmi::check_xeid_lti(s, c.X);
        certified = certified && x.certified;
        P.push_back(x.P);
      }
      const lmi::InterconnectionDesign d = lmi::synthesize_interconnection({c.X, c.X}, Y, o);
      if (!certified || !d.result.optimal() || d.branch != c.branch) {
        ok = false;
        detail += std::string(c.name) + " not synthesized; ";
        continue;
      }
      const double v = lmi::network_dissipativity_check(c.subs, P, d.p, d.M, Y, 10000, 50, rng);
      ok = ok && v <= kTrajTol;
      detail += std::string(c.name) + " violation " + fmt("%.3e", v) + "; ";
    }
    report(ok, "interconnection-branches", detail + "(<= 1e-8)");
  }

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
