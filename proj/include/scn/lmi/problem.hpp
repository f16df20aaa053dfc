#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scn/lmi/conic.hpp"
#include "scn/lmi/expr.hpp"

namespace scn::lmi {

enum class VarShape { Scalar, Symmetric, Rectangular };

// A named matrix of decision variables. Usable wherever an AffineExpr is.
class Var : public AffineExpr {
 public:
  Var() = default;
  Var(AffineExpr e, std::string name) : AffineExpr(std::move(e)), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

struct LmiVariable {
  std::string name;
  VarShape shape = VarShape::Scalar;
  Index rows = 1, cols = 1;
  Eigen::MatrixXi index;  // scalar variable index per entry
  std::optional<double> lower, upper;
};

struct PsdConstraint {
  std::string name;
  AffineExpr expr;
  double margin = 0.0;  // expr >= margin * I
  bool strict = false;  // margin taken from SolverOptions::eps_strict
};

struct EqualityConstraint {
  std::string name;
  AffineExpr expr;  // every entry == 0
};

struct SolverOptions {
  double eps_strict = 1e-6;
  double tol_psd = 1e-7;
  IpmOptions ipm;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(SolveStatus s);

struct ConstraintCertificate {
  std::string name;
  double min_eigenvalue = 0.0;  // of the expression itself, margin not subtracted
  double margin = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::string message;
  double objective_value = 0.0;
  VectorXd y;
  std::map<std::string, MatrixXd> assignment;
  std::vector<ConstraintCertificate> certificates;
  double equality_residual = 0.0;
  int iterations = 0;

  bool optimal() const { return status == SolveStatus::Optimal; }
  const MatrixXd& value(const std::string& name) const;
  double scalar(const std::string& name) const;
  double min_certificate() const;
};

// Reduced variables z with y = y0 + N z after removing equality constraints.
struct EqualityReduction {
  VectorXd y0;
  SparseMatrixXd N;
  bool consistent = true;
};

class LmiProblem {
 public:
  Var scalar(const std::string& name, std::optional<double> lower = {},
             std::optional<double> upper = {});
  Var symmetric(const std::string& name, Index n);
  Var matrix(const std::string& name, Index rows, Index cols);

  void add_psd(const std::string& name, const AffineExpr& expr, double margin = 0.0);
  void add_strict(const std::string& name, const AffineExpr& expr);
  void add_equality(const std::string& name, const AffineExpr& expr);
  void minimize(const AffineExpr& objective);

  int num_scalars() const { return num_scalars_; }
  const std::vector<LmiVariable>& variables() const { return vars_; }
  const std::vector<PsdConstraint>& psd_constraints() const { return psd_; }

  EqualityReduction reduce_equalities() const;
  ConicProblem to_conic(const SolverOptions& opts, const EqualityReduction& red) const;

  SolveResult solve(const SolverOptions& opts = {}) const;
  SolveResult solve(const SolverOptions& opts, const ConicBackend& backend) const;

  // Writes the reduced conic form (see docs/conic_format.md).
  void dump(std::ostream& os, const SolverOptions& opts = {}) const;

 private:
  int new_index() { return num_scalars_++; }
  void register_var(LmiVariable v);

  int num_scalars_ = 0;
  std::vector<LmiVariable> vars_;
  std::vector<PsdConstraint> psd_;
  std::vector<EqualityConstraint> eq_;
  std::optional<AffineExpr> objective_;
};

// Smallest eigenvalue of the symmetric part of M.
double min_eigenvalue(const MatrixXd& M);

}  // namespace scn::lmi
