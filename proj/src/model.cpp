#include "scn/model.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace scn {

int ChainSpec::total_delay() const { return std::accumulate(tau.begin(), tau.end(), 0); }

MatrixXd block_diagonal(const std::vector<MatrixXd>& blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  MatrixXd out = MatrixXd::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

StateSpaceRealization build_pipeline(const ChainSpec& chain) {
  std::vector<MatrixXd> a, b, c;
  for (int t : chain.tau) {
    auto link = build_transport_realization<double>(t);
    a.push_back(link.A);
    b.push_back(link.B);
    c.push_back(link.C);
  }
  StateSpaceRealization p;
  p.A = block_diagonal(a);
  p.B = block_diagonal(b);
  p.C = block_diagonal(c);
  p.D = MatrixXd::Zero(chain.size(), chain.size());
  return p;
}

void validate_chain(const ChainSpec& chain) {
  const int n = chain.size();
  if (n < 1) throw InvalidParameter("chain must have at least one inventory");
  auto check_len = [n](const std::vector<double>& v, const char* name) {
    if (static_cast<int>(v.size()) != n)
      throw InvalidParameter(std::string(name) + " length does not match tau length");
  };
  check_len(chain.perish_rate, "perish_rate");
  check_len(chain.xbar, "xbar");
  check_len(chain.wbar_inv, "wbar_inv");
  check_len(chain.wbar_tr, "wbar_tr");
  for (int k = 0; k < n; ++k) {
    if (chain.tau[k] < 1) throw InvalidParameter("transport delay must be >= 1");
    const double r = chain.perish_rate[k];
    if (!(r >= 0.0 && r < 1.0)) throw InvalidParameter("perish_rate must lie in [0, 1)");
    if (!(chain.xbar[k] >= 0.0)) throw InvalidParameter("xbar must be nonnegative");
    if (!(chain.wbar_inv[k] >= 0.0) || !(chain.wbar_tr[k] >= 0.0))
      throw InvalidParameter("waste means must be nonnegative");
  }
  if (!(chain.dbar >= 0.0)) throw InvalidParameter("dbar must be nonnegative");
}

ErrorDynamics build_chain_error_dynamics(const ChainSpec& chain) {
  validate_chain(chain);
  const int n = chain.size();
  const int tau = chain.total_delay();
  const auto pipe = build_pipeline(chain);

  ErrorDynamics ed;
  ed.n = n;
  ed.n_i = n + tau;
  ed.Acal = MatrixXd::Zero(ed.n_i, ed.n_i);
  for (int k = 0; k < n; ++k) ed.Acal(k, k) = 1.0 - chain.perish_rate[k];
  ed.Acal.block(0, n, n, tau) = pipe.C;
  ed.Acal.block(n, n, tau, tau) = pipe.A;

  ed.Bcal = MatrixXd::Zero(ed.n_i, n);
  ed.Bcal.topRows(n) = -shift_matrix(n);
  ed.Bcal.bottomRows(tau) = pipe.B;

  ed.Ccal = MatrixXd::Zero(n, ed.n_i);
  ed.Ccal.leftCols(n).setIdentity();

  ed.Dcal = MatrixXd::Zero(ed.n_i, n);
  ed.Dcal.topRows(n) = -MatrixXd::Identity(n, n);
  return ed;
}

MatrixXd pipeline_fill_matrix(const ChainSpec& chain) {
  const int n = chain.size();
  MatrixXd D = MatrixXd::Zero(chain.total_delay(), n);
  int row = 0;
  for (int k = 0; k < n; ++k) {
    D.block(row, k, chain.tau[k], 1).setOnes();
    row += chain.tau[k];
  }
  return D;
}

SteadyState steady_state(const ChainSpec& chain) {
  validate_chain(chain);
  const int n = chain.size();
  VectorXd rhs(n);
  for (int k = 0; k < n; ++k) {
    rhs(k) = chain.perish_rate[k] * chain.xbar[k] + chain.wbar_tr[k] + chain.wbar_inv[k];
  }
  rhs(n - 1) += chain.dbar;
  const MatrixXd IminusB = MatrixXd::Identity(n, n) - shift_matrix(n);
  SteadyState ss;
  ss.u_bar = IminusB.triangularView<Eigen::Upper>().solve(rhs);
  if (!ss.u_bar.allFinite()) throw NumericalError("degenerate chain: steady state not finite");
  ss.xbar_tr = pipeline_fill_matrix(chain) * ss.u_bar;
  return ss;
}

MatrixXd consensus_matrix(int N, int n) {
  if (N < 1 || n < 1) throw InvalidParameter("consensus_matrix needs N, n >= 1");
  MatrixXd E(N * n, N * n);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      E.block(i * n, j * n, n, n) =
          ((i == j ? 1.0 : 0.0) - 1.0 / N) * MatrixXd::Identity(n, n);
  return E;
}

MatrixXd default_cost_matrix(int N, int n, const std::optional<std::set<ChainPair>>& reference,
                             double penalty) {
  MatrixXd C = MatrixXd::Zero(N * n, N * n);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const bool inside = !reference || reference->count({i, j}) > 0;
      C.block(i * n, j * n, n, n).setConstant(inside ? 1.0 : penalty);
    }
  return C;
}

NetworkSpec validate_network(NetworkSpec spec) {
  const int N = spec.num_chains();
  if (N < 1) throw InvalidParameter("network needs at least one chain");
  const int n = spec.chains.front().size();
  for (const auto& c : spec.chains) {
    validate_chain(c);
    if (c.size() != n) throw InvalidParameter("all chains must have the same number of inventories");
  }
  if (spec.cost.size() == 0) spec.cost = default_cost_matrix(N, n, spec.reference_topology, 20.0);
  if (spec.cost.rows() != N * n || spec.cost.cols() != N * n)
    throw InvalidParameter("cost matrix must be " + std::to_string(N * n) + "x" +
                           std::to_string(N * n));
  if ((spec.cost.array() < 0.0).any() || !spec.cost.allFinite())
    throw InvalidParameter("cost entries must be finite and nonnegative");
  if (!(spec.c0 >= 0.0)) throw InvalidParameter("c0 must be nonnegative");
  if (!(spec.gamma_bar >= 0.0)) throw InvalidParameter("gamma_bar must be nonnegative");
  if (spec.reference_topology) {
    for (const auto& [i, j] : *spec.reference_topology)
      if (i < 0 || j < 0 || i >= N || j >= N)
        throw InvalidParameter("reference topology pair out of range");
    for (int i = 0; i < N; ++i) spec.reference_topology->insert({i, i});
  }
  return spec;
}

}  // namespace scn
