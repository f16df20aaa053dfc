#include "doctest.h"

#include <cmath>

#include "scn/sim.hpp"

using namespace scn;

namespace {

struct Setup {
  NetworkSpec net;
  DisturbanceModel dm;
};

Setup setup(int N = 3, int n = 3, std::uint64_t seed = 4) {
  Setup s;
  Rng rng(seed);
  for (int i = 0; i < N; ++i) {
    ChainSpec c;
    for (int k = 0; k < n; ++k) c.tau.push_back(1 + rng.uniform_int(1, 3));
    c.perish_rate.assign(n, 0.1);
    c.xbar.assign(n, 500);
    c.wbar_inv.assign(n, 0);
    c.wbar_tr.assign(n, 0);
    s.net.chains.push_back(c);
  }
  s.dm = random_disturbance_model(N, n, rng);
  apply_disturbance_means(s.net, s.dm);
  s.net = validate_network(s.net);
  return s;
}

SimConfig quiet(int T) {
  SimConfig sc;
  sc.T = T;
  sc.failures.clear();
  return sc;
}

double sq(double v) { return v * v; }

}  // namespace

TEST_CASE("exponential smoothing") {
  VectorXd raw(4);
  raw << 1, 5, -2, 8;
  CHECK(exponential_smoothing(raw, 1.0) == raw);
  const VectorXd s = exponential_smoothing(raw, 0.5);
  CHECK(s(0) == 1.0);
  CHECK(s(1) == 3.0);
  CHECK(s(2) == 0.5);
  CHECK(s(3) == 4.25);
}

TEST_CASE("zero spread gives the mean pattern") {
  Setup s = setup();
  s.dm.rel_std = 0.0;
  const Disturbances d = generate_disturbances(s.dm, 400, 9);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) CHECK((d.w_inv.col(i * 3 + k).array() == s.dm.wbar_inv(i, k)).all());
  // demand follows the weekly pattern through the smoother
  CHECK(d.demand(0, 0) == s.dm.demand_means(0, 0));
  VectorXd raw(400);
  for (int t = 0; t < 400; ++t) raw(t) = s.dm.demand_means(1, (t / 24) % 7);
  CHECK((d.demand.col(1) - exponential_smoothing(raw, 0.1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sample moments of the disturbances") {
  Setup s = setup(2, 2);
  s.dm.demand_means.setConstant(150.0);
  const int T = 100000;
  const Disturbances d = generate_disturbances(s.dm, T, 3);
  CHECK(d.demand.col(0).mean() == doctest::Approx(150.0).epsilon(0.01));
  CHECK(d.w_tr.col(3).mean() == doctest::Approx(s.dm.wbar_tr(1, 1)).epsilon(0.01));
  // raw draws have sd 0.2 m; smoothing with alpha shrinks the variance by alpha / (2 - alpha)
  const VectorXd c = d.w_inv.col(0).array() - d.w_inv.col(0).mean();
  const double var = c.squaredNorm() / (T - 1);
  const double m = s.dm.wbar_inv(0, 0);
  CHECK(var == doctest::Approx(sq(0.2 * m) * 0.5 / 1.5).epsilon(0.05));
}

TEST_CASE("equilibrium start with mean disturbances stays put") {
  const Setup s = setup();
  SimConfig sc = quiet(200);
  sc.init = InitMode::Equilibrium;
  sc.deterministic = true;
  for (StrategyKind k : {StrategyKind::LSSC, StrategyKind::GCC}) {
    const SimResult r = simulate(s.net, build_strategy(k, s.net), sc, s.dm);
    CHECK(r.y.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(r.pmae.maxCoeff() < 1e-9);
  }
}

TEST_CASE("LSSC errors decay at the perish rate") {
  const Setup s = setup();
  SimConfig sc = quiet(300);
  sc.deterministic = true;
  const SimResult r = simulate(s.net, build_strategy(StrategyKind::LSSC, s.net), sc, s.dm);
  int tau_max = 0;
  for (const auto& c : s.net.chains) tau_max = std::max(tau_max, c.total_delay());
  // once the initial pipeline has drained the error shrinks by 0.9 each step
  for (int t = tau_max + 1; t + 1 < 300; ++t) {
    const double a = r.y.row(t).cwiseAbs().maxCoeff(), b = r.y.row(t + 1).cwiseAbs().maxCoeff();
    if (a > 1e-6) CHECK(b <= 0.9 * a * (1 + 1e-9) + 1e-9);
  }
  CHECK(r.y.row(299).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("single chain has zero consensus error") {
  const Setup s = setup(1, 3);
  const SimResult r = simulate(s.net, build_strategy(StrategyKind::GCC, s.net), quiet(100), s.dm);
  CHECK(r.z.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.pmae.maxCoeff() == 0.0);
}

TEST_CASE("PMAE and CPMAE") {
  MatrixXd z = MatrixXd::Constant(2, 12, 50.0);
  z.row(1) *= -2.0;
  const VectorXd p = pmae(z, 500.0);
  CHECK(p(0) == doctest::Approx(10.0));
  CHECK(p(1) == doctest::Approx(20.0));
  const VectorXd c = cumulative_mean(VectorXd::Constant(5, 3.5));
  CHECK((c.array() == 3.5).all());
  VectorXd v(3);
  v << 1, 2, 6;
  CHECK(cumulative_mean(v)(2) == 3.0);
  CHECK_THROWS_AS(pmae(z, 0.0), InvalidParameter);
}

TEST_CASE("empirical gain edge cases") {
  SimResult r;
  r.z = MatrixXd::Zero(3, 2);
  r.r = MatrixXd::Ones(3, 2);
  CHECK(empirical_gain(r) == 0.0);
  r.z.setConstant(2.0);
  CHECK(empirical_gain(r) == 4.0);
  r.r.setZero();
  CHECK_THROWS_AS(empirical_gain(r), InvalidParameter);
}

TEST_CASE("recorded trajectory satisfies the inventory balance") {
  const Setup s = setup();
  SimConfig sc;
  sc.T = 300;
  sc.failures = {{100, FailureKind::TransportLink, 2}, {200, FailureKind::Inventory, 3}};
  const ControllerSet cs = build_strategy(StrategyKind::GCC, s.net);
  const SimResult r = simulate(s.net, cs, sc, s.dm);
  const int N = 3, n = 3;
  const MatrixXd E = consensus_matrix(N, n);
  double worst = 0;
  int checked = 0;
  for (int t = 0; t + 1 < sc.T; ++t) {
    CHECK((r.z.row(t).transpose() - E * r.y.row(t).transpose()).cwiseAbs().maxCoeff() < 1e-9);
    // failures edit the state at the start of step t+2 (1-based), skip those
    if (t + 2 == 100 || t + 2 == 200) continue;
    int poff = 0;
    for (int i = 0; i < N; ++i) {
      const ChainSpec& c = s.net.chains[i];
      int off = poff;
      for (int k = 0; k < n; ++k) {
        const int col = i * n + k;
        const double taken = k + 1 < n ? r.orders(t, col + 1) : r.demand(t, i);
        const double expect = 0.9 * r.inventory(t, col) + r.pipeline(t, off) - r.w_tr(t, col) - taken -
                              r.w_inv(t, col);
        worst = std::max(worst, std::abs(r.inventory(t + 1, col) - expect));
        off += c.tau[k];
        ++checked;
      }
      poff += c.total_delay();
    }
  }
  CHECK(checked > 0);
  CHECK(worst < 1e-9);
}

TEST_CASE("failure events are logged and applied") {
  const Setup s = setup();
  SimConfig sc;
  sc.T = 300;
  sc.failures = {{100, FailureKind::TransportLink, 2}, {200, FailureKind::Inventory, 3}};
  const SimResult r = simulate(s.net, build_strategy(StrategyKind::LSSC, s.net), sc, s.dm);
  REQUIRE(r.events.size() == 5);
  std::set<std::pair<int, int>> inv_sites;
  for (const auto& e : r.events) {
    if (e.kind == FailureKind::Inventory) {
      CHECK(e.time == 200);
      CHECK(r.inventory(199, e.chain * 3 + e.index) == 0.0);
      inv_sites.insert({e.chain, e.index});
    } else {
      CHECK(e.time == 100);
      int off = 0;
      for (int i = 0; i < e.chain; ++i) off += s.net.chains[i].total_delay();
      for (int k = 0; k < e.index; ++k) off += s.net.chains[e.chain].tau[k];
      for (int j = 0; j < s.net.chains[e.chain].tau[e.index]; ++j) CHECK(r.pipeline(99, off + j) == 0.0);
    }
  }
  CHECK(inv_sites.size() == 3);

  SimConfig bad = sc;
  bad.failures = {{0, FailureKind::Inventory, 1}};
  CHECK_THROWS_AS(simulate(s.net, build_strategy(StrategyKind::LSSC, s.net), bad, s.dm), InvalidParameter);
  bad.failures = {{10, FailureKind::Inventory, 10}};
  CHECK_THROWS_AS(simulate(s.net, build_strategy(StrategyKind::LSSC, s.net), bad, s.dm), InvalidParameter);
}

TEST_CASE("runs are reproducible and paired across strategies") {
  const Setup s = setup();
  SimConfig sc;
  sc.T = 200;
  sc.failures = {{50, FailureKind::TransportLink, 1}};
  sc.seed = 17;
  const ControllerSet a = build_strategy(StrategyKind::LSSC, s.net);
  const ControllerSet b = build_strategy(StrategyKind::GCC, s.net);
  const SimResult r1 = simulate(s.net, a, sc, s.dm), r2 = simulate(s.net, a, sc, s.dm);
  CHECK(r1.inventory == r2.inventory);
  CHECK(r1.pmae == r2.pmae);
  const SimResult rb = simulate(s.net, b, sc, s.dm);
  CHECK(rb.demand == r1.demand);
  CHECK(rb.w_tr == r1.w_tr);
  CHECK(rb.inventory.row(0) == r1.inventory.row(0));
  CHECK(rb.events.size() == r1.events.size());
  CHECK(rb.events[0].chain == r1.events[0].chain);
  sc.seed = 18;
  CHECK(simulate(s.net, a, sc, s.dm).demand != r1.demand);
}

TEST_CASE("Monte Carlo aggregates") {
  const Setup s = setup();
  SimConfig sc;
  sc.T = 150;
  sc.failures = {{60, FailureKind::TransportLink, 1}};
  const std::vector<ControllerSet> cs{build_strategy(StrategyKind::LSSC, s.net),
                                      build_strategy(StrategyKind::GCC, s.net)};
  SUBCASE("one realization equals a single run") {
    const MonteCarloResult mc = monte_carlo(s.net, cs, sc, s.dm, 1, 7);
    SimConfig one = sc;
    one.seed = 7;
    const SimResult r = simulate(s.net, cs[0], one, s.dm);
    CHECK((mc.series[0].apmae - r.pmae).cwiseAbs().maxCoeff() == 0.0);
    CHECK(mc.series[0].final_capmae == r.cpmae(149));
  }
  SUBCASE("threads do not change the numbers") {
    const MonteCarloResult a = monte_carlo(s.net, cs, sc, s.dm, 6, 3, 1);
    const MonteCarloResult b = monte_carlo(s.net, cs, sc, s.dm, 6, 3, 4);
    for (int k = 0; k < 2; ++k) {
      CHECK(a.series[k].apmae == b.series[k].apmae);
      CHECK(a.final_cpmae[k] == b.final_cpmae[k]);
    }
    // the final CAPMAE is the mean of the per-run CPMAE finals
    double m = 0;
    for (double v : a.final_cpmae[1]) m += v;
    CHECK(a.series[1].final_capmae == doctest::Approx(m / 6).epsilon(1e-12));
    CHECK(a.seeds == std::vector<std::uint64_t>{3, 4, 5, 6, 7, 8});
  }
  CHECK_THROWS_AS(monte_carlo(s.net, cs, sc, s.dm, 0, 1), InvalidParameter);
}
