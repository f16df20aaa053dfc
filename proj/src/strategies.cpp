#include "scn/strategies.hpp"

#include <string>

namespace scn {

MatrixXd gcc_default_gains(int N, int n, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidParameter("GCC epsilon must be positive");
  if (N < 1 || n < 1) throw InvalidParameter("GCC gains need N, n >= 1");
  const double off = epsilon / N;
  MatrixXd K = MatrixXd::Zero(N * n, N * n);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      K.block(i * n, j * n, n, n) = (i == j ? -(N - 1) * off : off) * MatrixXd::Identity(n, n);
  return K;
}

ControllerSet build_strategy(StrategyKind kind, const NetworkSpec& network,
                             const NetworkDesign& design, double gcc_epsilon) {
  const NetworkSpec net = validate_network(network);
  ControllerSet cs;
  cs.kind = kind;
  cs.N = net.num_chains();
  cs.n = net.inventories();
  for (const auto& c : net.chains) {
    const SteadyState ss = steady_state(c);
    cs.u_bar.push_back(ss.u_bar);
    cs.x_target.push_back(Eigen::Map<const VectorXd>(c.xbar.data(), c.size()));
    cs.pipe_target.push_back(ss.xbar_tr);
  }

  const bool wants_local = kind == StrategyKind::LSFC || kind == StrategyKind::DCC_C ||
                           kind == StrategyKind::DCC_U;
  const bool wants_global = kind == StrategyKind::DCC_C || kind == StrategyKind::DCC_U;
  if (wants_local) {
    if (design.kind != kind)
      throw InvalidParameter(std::string("design was made for ") + to_string(design.kind) +
                             ", not " + to_string(kind));
    if (static_cast<int>(design.local.size()) != cs.N)
      throw InvalidParameter(std::string(to_string(kind)) + " needs one local design per chain");
    for (int i = 0; i < cs.N; ++i) {
      const MatrixXd& L = design.local[i].L;
      if (L.rows() != cs.n || L.cols() != net.chains[i].state_dim())
        throw InvalidParameter("local gain dimension mismatch for chain " + std::to_string(i));
      cs.local_gain.push_back(L);
    }
  }
  if (wants_global) {
    if (!design.global) throw InvalidParameter(std::string(to_string(kind)) + " needs a global design");
    const GlobalDesign& g = *design.global;
    if (g.constrained != (kind == StrategyKind::DCC_C))
      throw InvalidParameter("global design topology mode does not match the strategy");
    if (g.K.rows() != cs.N * cs.n || g.K.cols() != cs.N * cs.n)
      throw InvalidParameter("global design dimension mismatch");
    cs.K = g.K;
  }
  if (kind == StrategyKind::GCC) cs.K = gcc_default_gains(cs.N, cs.n, gcc_epsilon);
  return cs;
}

VectorXd consensus_term(const ControllerSet& cs, const std::vector<VectorXd>& y, int i) {
  VectorXd u = VectorXd::Zero(cs.n);
  if (!cs.K) return u;
  for (int j = 0; j < cs.N; ++j) u += cs.K->block(i * cs.n, j * cs.n, cs.n, cs.n) * y[j];
  return u;
}

std::vector<VectorXd> compute_orders(const ControllerSet& cs, const MeasuredState& ms) {
  if (static_cast<int>(ms.inventory.size()) != cs.N || static_cast<int>(ms.pipeline.size()) != cs.N)
    throw InvalidParameter("measured state has the wrong number of chains");
  std::vector<VectorXd> y(cs.N);
  for (int i = 0; i < cs.N; ++i) {
    if (ms.inventory[i].size() != cs.n || ms.pipeline[i].size() != cs.pipe_target[i].size())
      throw InvalidParameter("measured state dimension mismatch");
    y[i] = ms.inventory[i] - cs.x_target[i];
  }
  std::vector<VectorXd> u(cs.N);
  for (int i = 0; i < cs.N; ++i) {
    u[i] = cs.u_bar[i];
    if (cs.has_local()) {
      const MatrixXd& L = cs.local_gain[i];
      u[i].noalias() += L.leftCols(cs.n) * y[i];
      u[i].noalias() += L.rightCols(L.cols() - cs.n) * (ms.pipeline[i] - cs.pipe_target[i]);
    }
    if (cs.K) u[i] += consensus_term(cs, y, i);
  }
  return u;
}

}  // namespace scn
