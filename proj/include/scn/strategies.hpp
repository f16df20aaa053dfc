#pragma once

#include <optional>
#include <vector>

#include "scn/codesign.hpp"
#include "scn/model.hpp"

namespace scn {

// Order policy u_i = ubar_i + L_i x_i + sum_j K_ij y_j with absent layers zero.
struct ControllerSet {
  StrategyKind kind = StrategyKind::LSSC;
  int N = 0, n = 0;
  std::vector<VectorXd> u_bar;
  std::vector<VectorXd> x_target;     // inventory targets
  std::vector<VectorXd> pipe_target;  // pipeline equilibrium
  std::vector<MatrixXd> local_gain;   // empty or one n x n_i matrix per chain
  std::optional<MatrixXd> K;          // (nN)x(nN) consensus gains

  bool has_local() const { return !local_gain.empty(); }
};

struct MeasuredState {
  std::vector<VectorXd> inventory;
  std::vector<VectorXd> pipeline;
};

// Complete-graph consensus law K_ij = (eps/N) I (j != i), K_ii = -(N-1) eps/N I,
// i.e. pairwise gains L_ij = -(eps/N) I and L_ii = 0.
MatrixXd gcc_default_gains(int N, int n, double epsilon);

// `design` must come from synthesize_network with the same kind (unused by
// LSSC and GCC).
ControllerSet build_strategy(StrategyKind kind, const NetworkSpec& network,
                             const NetworkDesign& design = {}, double gcc_epsilon = 0.1);

std::vector<VectorXd> compute_orders(const ControllerSet& cs, const MeasuredState& ms);

// Consensus layer sum_j K_ij y_j for chain i.
VectorXd consensus_term(const ControllerSet& cs, const std::vector<VectorXd>& y, int i);

}  // namespace scn
