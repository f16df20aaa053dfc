#include "scn/lmi/problem.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "scn/error.hpp"
#include "scn/lmi/svec.hpp"

namespace scn::lmi {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

double min_eigenvalue(const MatrixXd& M) {
  if (M.size() == 0) return std::numeric_limits<double>::infinity();
  const MatrixXd S = 0.5 * (M + M.transpose());
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

const MatrixXd& SolveResult::value(const std::string& name) const {
  auto it = assignment.find(name);
  if (it == assignment.end()) throw InvalidParameter("no variable named " + name);
  return it->second;
}

double SolveResult::scalar(const std::string& name) const { return value(name)(0, 0); }

double SolveResult::min_certificate() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : certificates) m = std::min(m, c.min_eigenvalue);
  return m;
}

void LmiProblem::register_var(LmiVariable v) {
  for (const auto& o : vars_)
    if (o.name == v.name) throw InvalidParameter("duplicate variable name " + v.name);
  vars_.push_back(std::move(v));
}

Var LmiProblem::scalar(const std::string& name, std::optional<double> lower,
                       std::optional<double> upper) {
  LmiVariable v{name, VarShape::Scalar, 1, 1, Eigen::MatrixXi(1, 1), lower, upper};
  const int k = new_index();
  v.index(0, 0) = k;
  register_var(v);
  SparseMatrixXd one(1, 1);
  one.insert(0, 0) = 1.0;
  return Var(AffineExpr::unit(k, 1, 1, one), name);
}

Var LmiProblem::symmetric(const std::string& name, Index n) {
  if (n < 1) throw InvalidParameter("symmetric variable needs n >= 1");
  LmiVariable v{name, VarShape::Symmetric, n, n, Eigen::MatrixXi(n, n), {}, {}};
  AffineExpr e(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) {
      const int k = new_index();
      v.index(i, j) = v.index(j, i) = k;
      SparseMatrixXd E(n, n);
      E.insert(i, j) = 1.0;
      if (i != j) E.insert(j, i) = 1.0;
      e.add_term(k, E);
    }
  register_var(v);
  return Var(std::move(e), name);
}

Var LmiProblem::matrix(const std::string& name, Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw InvalidParameter("matrix variable needs positive shape");
  LmiVariable v{name, VarShape::Rectangular, rows, cols, Eigen::MatrixXi(rows, cols), {}, {}};
  AffineExpr e(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const int k = new_index();
      v.index(i, j) = k;
      SparseMatrixXd E(rows, cols);
      E.insert(i, j) = 1.0;
      e.add_term(k, E);
    }
  register_var(v);
  return Var(std::move(e), name);
}

void LmiProblem::add_psd(const std::string& name, const AffineExpr& expr, double margin) {
  if (expr.rows() != expr.cols() || expr.rows() == 0)
    throw InvalidParameter("constraint " + name + " is not a square matrix");
  psd_.push_back({name, expr, margin, false});
}

void LmiProblem::add_strict(const std::string& name, const AffineExpr& expr) {
  add_psd(name, expr, 0.0);
  psd_.back().strict = true;
}

void LmiProblem::add_equality(const std::string& name, const AffineExpr& expr) {
  if (expr.empty()) throw InvalidParameter("empty equality " + name);
  eq_.push_back({name, expr});
}

void LmiProblem::minimize(const AffineExpr& objective) {
  if (objective.rows() != 1 || objective.cols() != 1)
    throw InvalidParameter("objective must be a scalar expression");
  objective_ = objective;
}

EqualityReduction LmiProblem::reduce_equalities() const {
  const int m = num_scalars_;
  EqualityReduction red;
  red.y0 = VectorXd::Zero(m);

  // Rows: coefficients and right-hand side of sum_k a_k y_k = b.
  struct Row {
    std::map<int, double> a;
    double b;
  };
  std::vector<Row> rows;
  for (const auto& eq : eq_)
    for (Index c = 0; c < eq.expr.cols(); ++c)
      for (Index r = 0; r < eq.expr.rows(); ++r) {
        Row row{{}, -eq.expr.constant()(r, c)};
        for (const auto& [k, C] : eq.expr.terms()) {
          const double v = C.coeff(r, c);
          if (v != 0.0) row.a[k] = v;
        }
        if (row.a.empty()) {
          if (std::abs(row.b) > 1e-12) red.consistent = false;
          continue;
        }
        rows.push_back(std::move(row));
      }

  std::vector<char> fixed(m, 0);
  std::vector<Row> general;
  for (const auto& row : rows) {
    if (row.a.size() == 1) {
      const auto [k, a] = *row.a.begin();
      const double val = row.b / a;
      if (fixed[k] && std::abs(red.y0(k) - val) > 1e-12 * (1.0 + std::abs(val)))
        red.consistent = false;
      fixed[k] = 1;
      red.y0(k) = val;
    } else {
      general.push_back(row);
    }
  }
  // Substitute singletons into the remaining rows.
  std::set<int> gen_vars;
  std::vector<Row> remaining;
  for (auto row : general) {
    Row r{{}, row.b};
    for (const auto& [k, a] : row.a) {
      if (fixed[k])
        r.b -= a * red.y0(k);
      else
        r.a[k] = a;
    }
    if (r.a.empty()) {
      if (std::abs(r.b) > 1e-10) red.consistent = false;
      continue;
    }
    for (const auto& [k, a] : r.a) gen_vars.insert(k);
    remaining.push_back(std::move(r));
  }

  std::vector<int> gv(gen_vars.begin(), gen_vars.end());
  std::map<int, int> gpos;
  for (size_t i = 0; i < gv.size(); ++i) gpos[gv[i]] = static_cast<int>(i);
  MatrixXd nullspace;
  if (!remaining.empty()) {
    MatrixXd Ar = MatrixXd::Zero(remaining.size(), gv.size());
    VectorXd br(remaining.size());
    for (size_t i = 0; i < remaining.size(); ++i) {
      br(i) = remaining[i].b;
      for (const auto& [k, a] : remaining[i].a) Ar(i, gpos[k]) = a;
    }
    Eigen::JacobiSVD<MatrixXd> svd(Ar, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-12);
    const Index rank = svd.rank();
    const VectorXd part = svd.solve(br);
    if ((Ar * part - br).norm() > 1e-9 * (1.0 + br.norm())) red.consistent = false;
    for (size_t i = 0; i < gv.size(); ++i) red.y0(gv[i]) = part(i);
    nullspace = svd.matrixV().rightCols(gv.size() - rank);
  }

  std::vector<Eigen::Triplet<double>> trip;
  int col = 0;
  for (int k = 0; k < m; ++k) {
    if (fixed[k] || gpos.count(k)) continue;
    trip.emplace_back(k, col++, 1.0);
  }
  for (Index j = 0; j < nullspace.cols(); ++j, ++col)
    for (Index i = 0; i < nullspace.rows(); ++i)
      if (nullspace(i, j) != 0.0) trip.emplace_back(gv[i], col, nullspace(i, j));
  red.N.resize(m, col);
  red.N.setFromTriplets(trip.begin(), trip.end());
  return red;
}

namespace {

void check_symmetric(const std::string& name, const AffineExpr& e) {
  const double scale = 1.0 + e.constant().cwiseAbs().maxCoeff();
  if ((e.constant() - e.constant().transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidParameter("constraint " + name + " has an asymmetric constant part");
  for (const auto& [k, C] : e.terms()) {
    const SparseMatrixXd D = C - SparseMatrixXd(C.transpose());
    double dmax = 0.0, cmax = 0.0;
    for (Index j = 0; j < D.outerSize(); ++j)
      for (SparseMatrixXd::InnerIterator it(D, j); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
    for (Index j = 0; j < C.outerSize(); ++j)
      for (SparseMatrixXd::InnerIterator it(C, j); it; ++it) cmax = std::max(cmax, std::abs(it.value()));
    if (dmax > 1e-12 * (1.0 + cmax))
      throw InvalidParameter("constraint " + name + " is not symmetric in variable " +
                             std::to_string(k));
  }
}

}  // namespace

ConicProblem LmiProblem::to_conic(const SolverOptions& opts, const EqualityReduction& red) const {
  const int m = num_scalars_;
  std::vector<const PsdConstraint*> lp_cons, sdp_cons;
  for (const auto& c : psd_) {
    check_symmetric(c.name, c.expr);
    (c.expr.rows() == 1 ? lp_cons : sdp_cons).push_back(&c);
  }
  auto margin_of = [&](const PsdConstraint& c) { return c.strict ? opts.eps_strict : c.margin; };

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> h;
  int lp = 0;
  for (const auto* c : lp_cons) {
    h.push_back(c->expr.constant()(0, 0) - margin_of(*c));
    for (const auto& [k, C] : c->expr.terms()) trip.emplace_back(lp, k, C.coeff(0, 0));
    ++lp;
  }
  for (const auto& v : vars_) {
    if (v.lower) {
      trip.emplace_back(lp++, v.index(0, 0), 1.0);
      h.push_back(-*v.lower);
    }
    if (v.upper) {
      trip.emplace_back(lp++, v.index(0, 0), -1.0);
      h.push_back(*v.upper);
    }
  }
  std::vector<int> dims;
  Index row = lp;
  for (const auto* c : sdp_cons) {
    const Index n = c->expr.rows();
    dims.push_back(static_cast<int>(n));
    MatrixXd F0 = c->expr.constant() - margin_of(*c) * MatrixXd::Identity(n, n);
    F0 = (0.5 * (F0 + F0.transpose())).eval();
    const VectorXd s0 = svec(F0);
    for (Index t = 0; t < s0.size(); ++t) h.push_back(s0(t));
    for (const auto& [k, C] : c->expr.terms())
      for (Index j = 0; j < C.outerSize(); ++j)
        for (SparseMatrixXd::InnerIterator it(C, j); it; ++it) {
          if (it.row() < it.col()) continue;
          const double v = it.row() == it.col() ? it.value() : std::sqrt(2.0) * it.value();
          trip.emplace_back(row + svec_index(n, it.row(), it.col()), k, v);
        }
    row += svec_size(n);
  }
  SparseMatrixXd Afull(row, m);
  Afull.setFromTriplets(trip.begin(), trip.end());
  const VectorXd hfull = Eigen::Map<const VectorXd>(h.data(), static_cast<Index>(h.size()));

  VectorXd cfull = VectorXd::Zero(m);
  if (objective_)
    for (const auto& [k, C] : objective_->terms()) cfull(k) = C.coeff(0, 0);

  ConicProblem cp;
  cp.num_vars = static_cast<int>(red.N.cols());
  cp.lp_dim = lp;
  cp.psd_dims = dims;
  cp.A = Afull * red.N;
  cp.A.prune(0.0);
  cp.A.makeCompressed();
  cp.h = hfull + Afull * red.y0;
  cp.c = red.N.transpose() * cfull;
  return cp;
}

SolveResult LmiProblem::solve(const SolverOptions& opts) const {
  return solve(opts, PrimalDualIpm(opts.ipm));
}

SolveResult LmiProblem::solve(const SolverOptions& opts, const ConicBackend& backend) const {
  SolveResult res;
  const EqualityReduction red = reduce_equalities();
  if (!red.consistent) {
    res.status = SolveStatus::Infeasible;
    res.message = "equality constraints are inconsistent";
    return res;
  }
  const ConicProblem cp = to_conic(opts, red);
  const ConicSolution sol = backend.solve(cp);
  res.iterations = sol.iterations;
  res.y = red.y0 + red.N * sol.y;
  res.message = backend.name() + ": " + sol.message;
  switch (sol.status) {
    case ConicStatus::Optimal: res.status = SolveStatus::Optimal; break;
    case ConicStatus::Infeasible: res.status = SolveStatus::Infeasible; break;
    case ConicStatus::NumericalFailure: res.status = SolveStatus::NumericalFailure; break;
  }
  for (const auto& v : vars_) {
    MatrixXd val(v.rows, v.cols);
    for (Index i = 0; i < v.rows; ++i)
      for (Index j = 0; j < v.cols; ++j) val(i, j) = res.y(v.index(i, j));
    res.assignment.emplace(v.name, std::move(val));
  }
  for (const auto& c : psd_)
    res.certificates.push_back(
        {c.name, min_eigenvalue(c.expr.evaluate(res.y)), c.strict ? opts.eps_strict : c.margin});
  for (const auto& e : eq_)
    res.equality_residual =
        std::max(res.equality_residual, e.expr.evaluate(res.y).cwiseAbs().maxCoeff());
  if (objective_) res.objective_value = objective_->value(res.y);

  if (res.status == SolveStatus::Optimal) {
    for (const auto& c : res.certificates)
      if (!(c.min_eigenvalue >= -opts.tol_psd)) {
        res.status = SolveStatus::NumericalFailure;
        res.message += "; certificate check failed for " + c.name;
        break;
      }
    if (!(res.equality_residual <= 1e-8)) {
      res.status = SolveStatus::NumericalFailure;
      res.message += "; equality residual too large";
    }
  }
  return res;
}

void LmiProblem::dump(std::ostream& os, const SolverOptions& opts) const {
  const EqualityReduction red = reduce_equalities();
  write_conic_problem(os, to_conic(opts, red));
}

}  // namespace scn::lmi
