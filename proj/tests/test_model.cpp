#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>

#include "scn/model.hpp"

using namespace scn;

namespace {

ChainSpec make_chain(std::vector<int> tau, double perish, double xbar, double waste, double dbar) {
  ChainSpec c;
  const size_t n = tau.size();
  c.tau = std::move(tau);
  c.perish_rate.assign(n, perish);
  c.xbar.assign(n, xbar);
  c.wbar_inv.assign(n, waste);
  c.wbar_tr.assign(n, waste);
  c.dbar = dbar;
  return c;
}

// Direct recursion of the link and inventory equations with constant orders and
// mean disturbances. Returns the inventory after `steps`.
VectorXd run_chain(const ChainSpec& c, const VectorXd& x0, const VectorXd& u, int steps) {
  const int n = c.size();
  std::vector<std::vector<double>> hist(n);  // past orders per link, newest last
  for (int k = 0; k < n; ++k) hist[k].assign(c.tau[k], u(k));
  VectorXd x = x0;
  for (int t = 0; t < steps; ++t) {
    VectorXd nx(n);
    for (int k = 0; k < n; ++k) {
      const double delivered = hist[k][hist[k].size() - c.tau[k]] - c.wbar_tr[k];
      const double taken = k + 1 < n ? u(k + 1) : c.dbar;
      nx(k) = (1 - c.perish_rate[k]) * x(k) + delivered - taken - c.wbar_inv[k];
    }
    for (int k = 0; k < n; ++k) hist[k].push_back(u(k));
    x = nx;
  }
  return x;
}

}  // namespace

TEST_CASE("transport realization matches the shift pattern") {
  auto s1 = build_transport_realization(1);
  CHECK(s1.A(0, 0) == 0.0);
  CHECK(s1.B(0, 0) == 1.0);
  CHECK(s1.C(0, 0) == 1.0);

  auto s2 = build_transport_realization(2);
  MatrixXd A2(2, 2), B2(2, 1), C2(1, 2);
  A2 << 0, 1, 0, 0;
  B2 << 0, 1;
  C2 << 1, 0;
  CHECK(s2.A == A2);
  CHECK(s2.B == B2);
  CHECK(s2.C == C2);
  CHECK(s2.D.isZero());

  CHECK_THROWS_AS(build_transport_realization(0), InvalidParameter);
}

TEST_CASE("tau=3 realization delays its input by three steps") {
  auto s = build_transport_realization(3);
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> U(-10, 10);
  std::vector<double> u(10);
  for (auto& v : u) v = U(g);
  VectorXd x = VectorXd::Zero(3);
  for (int t = 0; t < 10; ++t) {
    const double y = (s.C * x)(0);
    if (t >= 3) CHECK(y == doctest::Approx(u[t - 3]).epsilon(1e-14));
    else CHECK(y == 0.0);
    x = s.A * x + s.B * u[t];
  }
}

TEST_CASE("single-link chain error dynamics") {
  auto ed = build_chain_error_dynamics(make_chain({1}, 0.1, 500, 0, 0));
  MatrixXd A(2, 2), B(2, 1), C(1, 2), D(2, 1);
  A << 0.9, 1, 0, 0;
  B << 0, 1;
  C << 1, 0;
  D << -1, 0;
  CHECK(ed.Acal.isApprox(A));
  CHECK(ed.Bcal == B);
  CHECK(ed.Ccal == C);
  CHECK(ed.Dcal == D);
  CHECK(ed.n_i == 2);
}

TEST_CASE("error dynamics spectrum and dimensions") {
  ChainSpec c = make_chain({2, 3, 2, 4}, 0.0, 500, 0, 0);
  c.perish_rate = {0.1, 0.2, 0.05, 0.3};
  auto ed = build_chain_error_dynamics(c);
  CHECK(ed.n_i == 15);
  // block upper triangular with the perish factors on the top-left diagonal
  CHECK(ed.Acal.bottomLeftCorner(11, 4).isZero());
  for (int k = 0; k < 4; ++k) CHECK(ed.Acal(k, k) == doctest::Approx(1 - c.perish_rate[k]));
  Eigen::EigenSolver<MatrixXd> es(ed.Acal);
  std::vector<double> ev;
  for (int k = 0; k < 15; ++k) ev.push_back(std::abs(es.eigenvalues()(k)));
  std::sort(ev.begin(), ev.end());
  // nilpotent shift blocks give zeros; loose tolerance for defective eigenvalues
  for (int k = 0; k < 11; ++k) CHECK(ev[k] < 1e-2);
  std::vector<double> expect{0.7, 0.8, 0.9, 0.95};
  for (int k = 0; k < 4; ++k) CHECK(ev[11 + k] == doctest::Approx(expect[k]).epsilon(1e-10));
  Eigen::FullPivLU<MatrixXd> lu(ed.Bcal);
  CHECK(lu.rank() == 4);
}

TEST_CASE("steady state examples") {
  auto s1 = steady_state(make_chain({3}, 0.1, 500, 0, 100));
  CHECK(s1.u_bar(0) == doctest::Approx(150));

  auto s0 = steady_state(make_chain({2, 2, 3}, 0.0, 500, 0, 80));
  for (int k = 0; k < 3; ++k) CHECK(s0.u_bar(k) == doctest::Approx(80));

  // cumulative sums from the downstream end
  auto s2 = steady_state(make_chain({2, 3}, 0.1, 500, 10, 100));
  CHECK(s2.u_bar(0) == doctest::Approx(240));
  CHECK(s2.u_bar(1) == doctest::Approx(170));
}

TEST_CASE("steady orders hold the targets under mean disturbances") {
  std::mt19937_64 g(11);
  std::uniform_int_distribution<int> Tau(1, 5);
  std::uniform_real_distribution<double> U(0.0, 30.0);
  for (int trial = 0; trial < 20; ++trial) {
    ChainSpec c;
    const int n = 1 + trial % 4;
    for (int k = 0; k < n; ++k) {
      c.tau.push_back(Tau(g));
      c.perish_rate.push_back(0.05 + 0.01 * k);
      c.xbar.push_back(300 + 10 * k);
      c.wbar_inv.push_back(U(g));
      c.wbar_tr.push_back(U(g));
    }
    c.dbar = 100 + U(g);
    const SteadyState ss = steady_state(c);
    const VectorXd xbar = Eigen::Map<VectorXd>(c.xbar.data(), n);
    // at the target the recursion stays put
    CHECK((run_chain(c, xbar, ss.u_bar, 50) - xbar).cwiseAbs().maxCoeff() < 1e-9);
    // from elsewhere it contracts at the slowest perish factor
    VectorXd x0 = xbar + VectorXd::Constant(n, 200.0);
    const int T = 200;
    double rate = 0;
    for (double p : c.perish_rate) rate = std::max(rate, 1 - p);
    const double err = (run_chain(c, x0, ss.u_bar, T) - xbar).cwiseAbs().maxCoeff();
    CHECK(err <= 200.0 * std::pow(rate, T - c.total_delay()) + 1e-9);
    // pipeline equilibrium is the fill matrix applied to the orders
    CHECK(ss.xbar_tr.isApprox(pipeline_fill_matrix(c) * ss.u_bar));
  }
}

TEST_CASE("pipeline identities") {
  std::mt19937_64 g(3);
  std::uniform_int_distribution<int> Tau(1, 6);
  for (int trial = 0; trial < 25; ++trial) {
    ChainSpec c = make_chain({Tau(g), Tau(g), Tau(g)}, 0.1, 500, 0, 0);
    const auto pipe = build_pipeline(c);
    const int tau = c.total_delay();
    const MatrixXd Dbar = (MatrixXd::Identity(tau, tau) - pipe.A).lu().solve(pipe.B);
    CHECK(Dbar.isApprox(pipeline_fill_matrix(c)));
    CHECK((pipe.C * Dbar).isApprox(MatrixXd::Identity(3, 3)));
    for (int k = 0; k < 3; ++k) CHECK(Dbar.col(k).sum() == doctest::Approx(c.tau[k]));
  }
}

TEST_CASE("zero error is a fixed point of the error dynamics") {
  auto ed = build_chain_error_dynamics(make_chain({2, 4, 3}, 0.1, 500, 12, 150));
  VectorXd x = VectorXd::Zero(ed.n_i);
  CHECK((ed.Acal * x + ed.Bcal * VectorXd::Zero(3) + ed.Dcal * VectorXd::Zero(3)).isZero());
}

TEST_CASE("network validation") {
  NetworkSpec net;
  CHECK_THROWS_AS(validate_network(net), InvalidParameter);

  for (int i = 0; i < 3; ++i) net.chains.push_back(make_chain({2, 3, 2, 4}, 0.1, 500, 15, 130));
  net.reference_topology = std::set<ChainPair>{{0, 1}, {1, 0}};
  NetworkSpec v = validate_network(net);
  CHECK(v.num_chains() == 3);
  CHECK(v.reference_topology->count({2, 2}) == 1);
  CHECK(v.cost.rows() == 12);

  NetworkSpec bad = net;
  bad.cost = MatrixXd::Ones(11, 12);
  CHECK_THROWS_AS(validate_network(bad), InvalidParameter);

  bad = net;
  bad.chains[1].tau.pop_back();
  bad.chains[1].perish_rate.pop_back();
  bad.chains[1].xbar.pop_back();
  bad.chains[1].wbar_inv.pop_back();
  bad.chains[1].wbar_tr.pop_back();
  CHECK_THROWS_AS(validate_network(bad), InvalidParameter);

  bad = net;
  bad.chains[0].perish_rate[0] = 1.0;
  CHECK_THROWS_AS(validate_network(bad), InvalidParameter);

  bad = net;
  bad.chains[0].wbar_tr[2] = -1.0;
  CHECK_THROWS_AS(validate_network(bad), InvalidParameter);
}

TEST_CASE("consensus matrix and default costs") {
  const MatrixXd E = consensus_matrix(3, 2);
  CHECK(E.block(0, 0, 2, 2).isApprox((2.0 / 3.0) * MatrixXd::Identity(2, 2)));
  CHECK(E.block(0, 2, 2, 2).isApprox((-1.0 / 3.0) * MatrixXd::Identity(2, 2)));
  // equal outputs are in the kernel
  VectorXd y(6);
  y << 1, 2, 1, 2, 1, 2;
  CHECK((E * y).isZero(1e-14));

  const MatrixXd C = default_cost_matrix(3, 2, std::set<ChainPair>{{0, 1}, {1, 0}}, 20.0);
  CHECK(C.block(0, 0, 2, 2).isZero());
  CHECK(C(0, 2) == 1.0);
  CHECK(C(0, 4) == 20.0);
}
