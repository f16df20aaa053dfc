#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "scn/lmi/problem.hpp"
#include "scn/lmi/supply_rate.hpp"
#include "scn/model.hpp"

namespace scn {

using lmi::SolveResult;
using lmi::SolverOptions;
using lmi::SupplyRate;

enum class LocalMethod { Basic, Improved };

struct RhoGridPoint {
  double rho = 0.0;
  lmi::SolveStatus status = lmi::SolveStatus::Infeasible;
  double gamma_tilde = 0.0;
  std::string note;
};

// Local controller L_i for one chain together with its IF-OFP certificate.
// The subsystem output is the full error state when `extended_output` is set,
// else the inventory error C_i x_i.
struct LocalDesign {
  LocalMethod method = LocalMethod::Basic;
  bool extended_output = true;
  MatrixXd L;  // n x n_i
  MatrixXd K;  // L P
  MatrixXd P;  // n_i x n_i, storage V(x) = x' P^-1 x
  double nu = 0.0;
  double passivity_rho = 0.0;
  double rho_tilde = 0.0;
  double gamma_tilde = 0.0;  // improved design only
  double p_used = 0.0;       // improved design only
  double min_eigenvalue = 0.0;
  std::vector<RhoGridPoint> grid;

  SupplyRate supply_rate() const;
  MatrixXd output_map(const ErrorDynamics& ed) const;  // C_i or I
  MatrixXd storage() const;                            // P^-1
};

struct LocalDesignOptions {
  SolverOptions solver;
  bool extended_output = true;
  double rho_tilde_min = 1e-3, rho_tilde_max = 1e3;
  std::vector<double> rho_grid;  // empty: default_rho_grid()
  bool refine = true;
  int jobs = 1;
};

// 25 log-spaced output passivity indices in [1e-3, 1e3].
std::vector<double> default_rho_grid();

// Free IF-OFP search over (K, P, nu, rho_tilde), maximizing nu.
LocalDesign design_local_basic(const ErrorDynamics& ed, const LocalDesignOptions& opts = {});

// Same LMI with the supply rate X fixed.
LocalDesign design_local_basic(const ErrorDynamics& ed, const SupplyRate& X,
                               const LocalDesignOptions& opts = {});

// Local design with the global-feasibility necessary condition, searching the
// output passivity index over a grid and minimizing gamma_tilde_i per point.
LocalDesign design_local_improved(const ErrorDynamics& ed, double p_i, int N,
                                  const LocalDesignOptions& opts = {});

// The 4x4 scalar necessary condition for given (p, nu, rho, gamma_tilde, N).
MatrixXd necessary_condition_matrix(double p, double nu, double rho, double gamma_tilde, int N);

// Consensus gains over N chains stored as dense (nN)x(nN) block matrices.
struct GlobalDesign {
  int N = 0, n = 0;
  MatrixXd Kbar;  // raw LMI variable
  MatrixXd K;     // K_ij = Kbar_ij / p_i
  MatrixXd L;     // pairwise form of the same law
  VectorXd p;
  double gamma_tilde = 0.0;
  double objective = 0.0;
  double min_eigenvalue = 0.0;
  bool constrained = false;
  bool gamma_binding = false;

  MatrixXd K_block(int i, int j) const { return K.block(i * n, j * n, n, n); }
  MatrixXd L_block(int i, int j) const { return L.block(i * n, j * n, n, n); }
};

struct GlobalDesignOptions {
  SolverOptions solver;
};

// Main co-design LMI for given local designs. Returns the result status with
// the design on success; the LMI expression is exposed for certificate checks.
struct GlobalSynthesis {
  SolveResult result;
  GlobalDesign design;
};

GlobalSynthesis codesign_global(const NetworkSpec& network, const std::vector<ErrorDynamics>& eds,
                                const std::vector<LocalDesign>& local, bool constrain_to_reference,
                                const GlobalDesignOptions& opts = {});

// Evaluates the co-design LMI at a given (Kbar, p, gamma_tilde).
MatrixXd global_lmi_value(const NetworkSpec& network, const std::vector<ErrorDynamics>& eds,
                          const std::vector<LocalDesign>& local, const MatrixXd& Kbar,
                          const VectorXd& p, double gamma_tilde);

// L_ij = -K_ij (j != i), L_ii = sum_j K_ij.
MatrixXd recover_L_from_K(const MatrixXd& K, int N, int n);

struct TopologyEdge {
  int from_chain = 0, to_chain = 0;  // information flows from_chain -> to_chain
  int from_inventory = 0, to_inventory = 0;
  double weight = 0.0;  // |K_{to,from}^{kl}|
};

struct Topology {
  int N = 0, n = 0;
  std::vector<TopologyEdge> edges;       // inter-chain entries
  std::vector<TopologyEdge> self_loops;  // entries of K_ii
  std::set<ChainPair> chain_edges() const;  // distinct (from, to), from != to
};

// Keeps entries with |K_ij^kl| > threshold_rel * max |K|.
Topology extract_topology(const GlobalDesign& gd, double threshold_rel = 1e-5);
Topology extract_topology(const MatrixXd& K, int N, int n, double threshold_rel);

// Full synthesis pipeline for one strategy.
enum class StrategyKind { LSSC, LSFC, GCC, DCC_C, DCC_U };

const char* to_string(StrategyKind k);
StrategyKind parse_strategy(const std::string& s);
const std::vector<StrategyKind>& all_strategies();

struct PipelineOptions {
  LocalDesignOptions local;
  GlobalDesignOptions global;
  double p_local = 1.0;
  int p_feedback_iterations = 0;  // extra rounds feeding global p_i back into local designs
};

struct NetworkDesign {
  StrategyKind kind = StrategyKind::LSSC;
  std::vector<LocalDesign> local;
  std::optional<GlobalDesign> global;
};

// Throws InfeasibleError or NumericalError naming the failing step.
NetworkDesign synthesize_network(const NetworkSpec& network, StrategyKind kind,
                                 const PipelineOptions& opts = {});

}  // namespace scn
