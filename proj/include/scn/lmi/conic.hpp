#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <string>
#include <vector>

namespace scn::lmi {

// Standard conic form shared by all backends:
//
//   minimize    c' y
//   subject to  h + A y  in  K = R_+^{lp_dim} x S_+^{n_1} x ... x S_+^{n_p}
//
// Rows of A and h are stacked cone by cone: first the lp_dim nonnegative
// rows, then svec(.) of each semidefinite block in order.
struct ConicProblem {
  int num_vars = 0;
  Eigen::VectorXd c;
  int lp_dim = 0;
  std::vector<int> psd_dims;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd h;

  Eigen::Index rows() const;
  void check() const;  // throws on inconsistent dimensions
};

enum class ConicStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(ConicStatus s);

struct ConicSolution {
  ConicStatus status = ConicStatus::NumericalFailure;
  Eigen::VectorXd y;
  Eigen::VectorXd slack;  // h + A y
  Eigen::VectorXd dual;   // multiplier in K, same layout as slack
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  std::string message;
};

struct IpmOptions {
  int max_iterations = 120;
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;  // relative to 1 + |c| + |z| for the dual side
  double tol_infeas = 1e-8;
  double step_fraction = 0.95;
  // Every variable is kept inside [-box_bound, box_bound]. Keeps the central
  // path well defined when the feasible set is unbounded.
  double box_bound = 1e7;
  bool verbose = false;
};

class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual std::string name() const = 0;
  virtual ConicSolution solve(const ConicProblem& problem) const = 0;
};

// Infeasible-start primal-dual path following with the HKM search direction
// and Mehrotra predictor-corrector steps.
class PrimalDualIpm final : public ConicBackend {
 public:
  explicit PrimalDualIpm(IpmOptions opts = {}) : opts_(opts) {}
  std::string name() const override { return "primal-dual-ipm"; }
  ConicSolution solve(const ConicProblem& problem) const override;

 private:
  ConicSolution solve_impl(const ConicProblem& problem, bool allow_phase_one) const;
  ConicStatus classify_by_phase_one(const ConicProblem& problem, std::string& note) const;
  IpmOptions opts_;
};

// Plain-text dump of a conic problem; layout documented in docs/conic_format.md.
void write_conic_problem(std::ostream& os, const ConicProblem& problem);

}  // namespace scn::lmi
