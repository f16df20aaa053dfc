#pragma once

#include <Eigen/Dense>

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "scn/error.hpp"

namespace scn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// One serial chain of n inventories fed by n transport links.
struct ChainSpec {
  std::vector<int> tau;             // transport delay of link k (steps)
  std::vector<double> perish_rate;  // per-step fractional inventory decay
  std::vector<double> xbar;         // inventory targets
  std::vector<double> wbar_inv;     // mean inventory waste
  std::vector<double> wbar_tr;      // mean transport waste
  double dbar = 0.0;                // overall mean customer demand

  int size() const { return static_cast<int>(tau.size()); }
  int total_delay() const;
  int state_dim() const { return size() + total_delay(); }
};

using ChainPair = std::pair<int, int>;  // (i, j), zero based

struct NetworkSpec {
  std::vector<ChainSpec> chains;
  MatrixXd cost;  // (nN)x(nN) weights of |Kbar_ij^kl|
  double c0 = 1.0;
  double gamma_bar = 1e3;
  std::optional<std::set<ChainPair>> reference_topology;

  int num_chains() const { return static_cast<int>(chains.size()); }
  int inventories() const { return chains.empty() ? 0 : chains.front().size(); }
};

template <typename Scalar>
struct StateSpace {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix A, B, C, D;

  Eigen::Index nx() const { return A.rows(); }
  Eigen::Index nu() const { return B.cols(); }
  Eigen::Index ny() const { return C.rows(); }
};

using StateSpaceRealization = StateSpace<double>;

// Closed-form error model of one chain: state [inventory error; pipeline error].
struct ErrorDynamics {
  MatrixXd Acal, Bcal, Ccal, Dcal;
  int n = 0;    // inventories
  int n_i = 0;  // state dimension n + total delay
};

struct SteadyState {
  VectorXd u_bar;    // per-link steady orders
  VectorXd xbar_tr;  // pipeline equilibrium
};

// n x n matrix with ones on the first superdiagonal.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> shift_matrix(int n) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> S =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) S(k, k + 1) = Scalar(1);
  return S;
}

template <typename Scalar = double>
StateSpace<Scalar> build_transport_realization(int tau) {
  if (tau < 1) throw InvalidParameter("transport delay must be >= 1");
  using M = typename StateSpace<Scalar>::Matrix;
  StateSpace<Scalar> s;
  s.A = shift_matrix<Scalar>(tau);
  s.B = M::Zero(tau, 1);
  s.B(tau - 1, 0) = Scalar(1);
  s.C = M::Zero(1, tau);
  s.C(0, 0) = Scalar(1);
  s.D = M::Zero(1, 1);
  return s;
}

// Stacked per-link realizations (block diagonal Abar, Bbar, Cbar).
StateSpaceRealization build_pipeline(const ChainSpec& chain);

ErrorDynamics build_chain_error_dynamics(const ChainSpec& chain);

SteadyState steady_state(const ChainSpec& chain);

// Pipeline equilibrium map: block diagonal of ones columns, one per link.
MatrixXd pipeline_fill_matrix(const ChainSpec& chain);

void validate_chain(const ChainSpec& chain);

// Checks invariants and adds self pairs to the reference topology.
NetworkSpec validate_network(NetworkSpec spec);

// Consensus error map E with blocks (delta_ij - 1/N) I_n.
MatrixXd consensus_matrix(int N, int n);

// Weights 1 on reference pairs, `penalty` elsewhere, 0 on self pairs.
MatrixXd default_cost_matrix(int N, int n, const std::optional<std::set<ChainPair>>& reference,
                             double penalty);

MatrixXd block_diagonal(const std::vector<MatrixXd>& blocks);

}  // namespace scn
