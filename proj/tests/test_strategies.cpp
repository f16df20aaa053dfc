#include "doctest.h"

#include "scn/rng.hpp"
#include "scn/strategies.hpp"

using namespace scn;

namespace {

NetworkSpec net3() {
  NetworkSpec net;
  const std::vector<std::vector<int>> taus{{1, 2}, {3, 1}, {2, 2}};
  for (size_t i = 0; i < taus.size(); ++i) {
    ChainSpec c;
    c.tau = taus[i];
    c.perish_rate.assign(2, 0.1);
    c.xbar.assign(2, 400 + 50.0 * i);
    c.wbar_inv.assign(2, 10);
    c.wbar_tr.assign(2, 12);
    c.dbar = 100 + 20.0 * i;
    net.chains.push_back(c);
  }
  return validate_network(net);
}

MatrixXd random_matrix(Rng& rng, int r, int c) {
  MatrixXd M(r, c);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < c; ++b) M(a, b) = rng.normal();
  return M;
}

NetworkDesign fake_design(const NetworkSpec& net, StrategyKind kind, Rng& rng) {
  NetworkDesign d;
  d.kind = kind;
  for (const auto& c : net.chains) {
    LocalDesign l;
    l.L = random_matrix(rng, c.size(), c.state_dim());
    d.local.push_back(l);
  }
  if (kind == StrategyKind::DCC_C || kind == StrategyKind::DCC_U) {
    GlobalDesign g;
    g.N = net.num_chains();
    g.n = net.inventories();
    g.K = random_matrix(rng, g.N * g.n, g.N * g.n);
    g.constrained = kind == StrategyKind::DCC_C;
    d.global = g;
  }
  return d;
}

MeasuredState random_state(const ControllerSet& cs, Rng& rng) {
  MeasuredState ms;
  for (int i = 0; i < cs.N; ++i) {
    ms.inventory.push_back(cs.x_target[i] + 50 * random_matrix(rng, cs.n, 1));
    ms.pipeline.push_back(cs.pipe_target[i] + 20 * random_matrix(rng, cs.pipe_target[i].size(), 1));
  }
  return ms;
}

MeasuredState equilibrium(const ControllerSet& cs) {
  MeasuredState ms;
  ms.inventory = cs.x_target;
  ms.pipeline = cs.pipe_target;
  return ms;
}

}  // namespace

TEST_CASE("LSSC orders are the steady orders whatever the state") {
  const NetworkSpec net = net3();
  const ControllerSet cs = build_strategy(StrategyKind::LSSC, net);
  CHECK_FALSE(cs.has_local());
  CHECK_FALSE(cs.K);
  Rng rng(1);
  const auto u = compute_orders(cs, random_state(cs, rng));
  for (int i = 0; i < 3; ++i) CHECK(u[i] == steady_state(net.chains[i]).u_bar);
}

TEST_CASE("GCC default gains") {
  const MatrixXd K = gcc_default_gains(3, 2, 0.1);
  CHECK(K(0, 2) == doctest::Approx(0.1 / 3));
  CHECK(K(0, 0) == doctest::Approx(-0.2 / 3));
  CHECK(K(0, 1) == 0.0);
  // every ordered pair of chains is coupled
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(K.block(2 * i, 2 * j, 2, 2).diagonal().cwiseAbs().minCoeff() > 0);
  // rows sum to zero so equal outputs give no correction
  CHECK(K.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(gcc_default_gains(3, 2, 0.0), InvalidParameter);
}

TEST_CASE("consensus layer on equal outputs") {
  const NetworkSpec net = net3();
  Rng rng(4);
  NetworkDesign d = fake_design(net, StrategyKind::DCC_U, rng);
  const ControllerSet cs = build_strategy(StrategyKind::DCC_U, net, d);
  VectorXd c(2);
  c << 3.0, -7.0;
  std::vector<VectorXd> y(3, c);
  const MatrixXd L = recover_L_from_K(*cs.K, 3, 2);
  for (int i = 0; i < 3; ++i)
    CHECK((consensus_term(cs, y, i) - L.block(2 * i, 2 * i, 2, 2) * c).cwiseAbs().maxCoeff() < 1e-12);

  const ControllerSet g = build_strategy(StrategyKind::GCC, net);
  for (int i = 0; i < 3; ++i) CHECK(consensus_term(g, y, i).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("every strategy orders the steady amount at equilibrium") {
  const NetworkSpec net = net3();
  Rng rng(2);
  for (StrategyKind k : all_strategies()) {
    CAPTURE(to_string(k));
    const ControllerSet cs = build_strategy(k, net, fake_design(net, k, rng));
    const auto u = compute_orders(cs, equilibrium(cs));
    for (int i = 0; i < 3; ++i) CHECK((u[i] - cs.u_bar[i]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("layers add up") {
  const NetworkSpec net = net3();
  Rng rng(3);
  const NetworkDesign d = fake_design(net, StrategyKind::DCC_U, rng);
  const ControllerSet dcc = build_strategy(StrategyKind::DCC_U, net, d);
  NetworkDesign dl = d;
  dl.kind = StrategyKind::LSFC;
  dl.global.reset();
  const ControllerSet lsfc = build_strategy(StrategyKind::LSFC, net, dl);
  const MeasuredState ms = random_state(dcc, rng);
  const auto u = compute_orders(dcc, ms);
  const auto ul = compute_orders(lsfc, ms);
  std::vector<VectorXd> y;
  for (int i = 0; i < 3; ++i) y.push_back(ms.inventory[i] - dcc.x_target[i]);
  for (int i = 0; i < 3; ++i) {
    // independent local term: L [y; pipe - pipe_target]
    VectorXd xi(net.chains[i].state_dim());
    xi << y[i], ms.pipeline[i] - dcc.pipe_target[i];
    CHECK((ul[i] - dcc.u_bar[i] - d.local[i].L * xi).cwiseAbs().maxCoeff() < 1e-9);
    VectorXd cons = VectorXd::Zero(2);
    for (int j = 0; j < 3; ++j) cons += d.global->K.block(2 * i, 2 * j, 2, 2) * y[j];
    CHECK((u[i] - ul[i] - cons).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("design and strategy must agree") {
  const NetworkSpec net = net3();
  Rng rng(5);
  const NetworkDesign lsfc = fake_design(net, StrategyKind::LSFC, rng);
  CHECK_THROWS_AS(build_strategy(StrategyKind::DCC_C, net, lsfc), InvalidParameter);
  CHECK_THROWS_AS(build_strategy(StrategyKind::LSFC, net, NetworkDesign{}), InvalidParameter);

  NetworkDesign u = fake_design(net, StrategyKind::DCC_U, rng);
  u.kind = StrategyKind::DCC_C;
  CHECK_THROWS_AS(build_strategy(StrategyKind::DCC_C, net, u), InvalidParameter);

  NetworkDesign bad = fake_design(net, StrategyKind::LSFC, rng);
  bad.local[1].L = MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(build_strategy(StrategyKind::LSFC, net, bad), InvalidParameter);

  const ControllerSet cs = build_strategy(StrategyKind::LSSC, net);
  MeasuredState ms = equilibrium(cs);
  ms.inventory.pop_back();
  CHECK_THROWS_AS(compute_orders(cs, ms), InvalidParameter);
}
