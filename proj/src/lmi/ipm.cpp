#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "scn/error.hpp"
#include "scn/lmi/conic.hpp"
#include "scn/lmi/svec.hpp"

namespace scn::lmi {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

Index ConicProblem::rows() const {
  Index r = lp_dim;
  for (int n : psd_dims) r += svec_size(n);
  return r;
}

void ConicProblem::check() const {
  if (num_vars < 0 || lp_dim < 0) throw InvalidParameter("conic problem: negative dimension");
  for (int n : psd_dims)
    if (n < 1) throw InvalidParameter("conic problem: empty semidefinite block");
  if (c.size() != num_vars) throw InvalidParameter("conic problem: objective length mismatch");
  if (A.cols() != num_vars || A.rows() != rows() || h.size() != rows())
    throw InvalidParameter("conic problem: constraint data shape mismatch");
  if (!c.allFinite() || !h.allFinite()) throw InvalidParameter("conic problem: non-finite data");
}

const char* to_string(ConicStatus s) {
  switch (s) {
    case ConicStatus::Optimal: return "optimal";
    case ConicStatus::Infeasible: return "infeasible";
    case ConicStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

struct Entry {
  int r, c;
  double v;
};

struct VarBlock {
  int var;
  std::vector<Entry> entries;  // both triangles
  std::vector<int> cols;       // distinct column indices among entries
};

// Augmented problem with box rows appended to the LP cone.
struct Work {
  int m = 0;
  int lp = 0;
  std::vector<int> dims;
  std::vector<Index> off;
  Index total = 0;
  SpMat A, At, Alp;
  VectorXd h, c;
  std::vector<std::vector<VarBlock>> block_terms;
};

Work build_work(const ConicProblem& p, double box) {
  Work w;
  w.m = p.num_vars;
  const int nbox = box > 0 ? 2 * p.num_vars : 0;
  w.lp = p.lp_dim + nbox;
  w.dims = p.psd_dims;
  Index o = w.lp;
  for (int n : w.dims) {
    w.off.push_back(o);
    o += svec_size(n);
  }
  w.total = o;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(p.A.nonZeros() + nbox);
  for (int k = 0; k < p.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(p.A, k); it; ++it) {
      const Index row = it.row() < p.lp_dim ? it.row() : it.row() + nbox;
      trip.emplace_back(row, it.col(), it.value());
    }
  w.h = VectorXd::Zero(w.total);
  w.h.head(p.lp_dim) = p.h.head(p.lp_dim);
  w.h.tail(w.total - w.lp) = p.h.tail(p.h.size() - p.lp_dim);
  for (int j = 0; j < nbox / 2; ++j) {
    trip.emplace_back(p.lp_dim + 2 * j, j, 1.0);
    trip.emplace_back(p.lp_dim + 2 * j + 1, j, -1.0);
    w.h(p.lp_dim + 2 * j) = box;
    w.h(p.lp_dim + 2 * j + 1) = box;
  }
  w.A.resize(w.total, w.m);
  w.A.setFromTriplets(trip.begin(), trip.end());
  w.A.makeCompressed();
  w.At = w.A.transpose();
  w.Alp = w.A.topRows(w.lp);
  w.c = p.c;

  // Per-block sparse coefficient matrices for the Schur complement.
  const int nb = static_cast<int>(w.dims.size());
  w.block_terms.assign(nb, {});
  std::vector<std::vector<std::pair<int, int>>> pos(nb);
  for (int b = 0; b < nb; ++b) {
    const int n = w.dims[b];
    for (int j = 0; j < n; ++j)
      for (int i = j; i < n; ++i) pos[b].emplace_back(i, j);
  }
  for (int j = 0; j < w.m; ++j) {
    std::vector<VarBlock> local;
    for (SpMat::InnerIterator it(w.A, j); it; ++it) {
      if (it.row() < w.lp) continue;
      const int b = static_cast<int>(std::upper_bound(w.off.begin(), w.off.end(), it.row()) -
                                     w.off.begin()) - 1;
      const auto [r, c] = pos[b][it.row() - w.off[b]];
      if (local.empty() || local.back().var != b) local.push_back({b, {}, {}});
      auto& e = local.back().entries;
      if (r == c) {
        e.push_back({r, c, it.value()});
      } else {
        const double v = it.value() / std::sqrt(2.0);
        e.push_back({r, c, v});
        e.push_back({c, r, v});
      }
    }
    for (auto& vb : local) {
      const int b = vb.var;
      vb.var = j;
      for (const auto& e : vb.entries) vb.cols.push_back(e.c);
      std::sort(vb.cols.begin(), vb.cols.end());
      vb.cols.erase(std::unique(vb.cols.begin(), vb.cols.end()), vb.cols.end());
      w.block_terms[b].push_back(std::move(vb));
    }
  }
  return w;
}

struct Point {
  VectorXd s_lp, z_lp;
  std::vector<MatrixXd> S, Z;
};

VectorXd stack(const Work& w, const VectorXd& lp, const std::vector<MatrixXd>& blocks) {
  VectorXd v(w.total);
  v.head(w.lp) = lp;
  for (size_t b = 0; b < blocks.size(); ++b)
    v.segment(w.off[b], svec_size(w.dims[b])) = svec(blocks[b], 1e300);
  return v;
}

MatrixXd block_of(const Work& w, const VectorXd& v, size_t b) {
  return smat(v.segment(w.off[b], svec_size(w.dims[b])));
}

MatrixXd sym(const MatrixXd& X) { return 0.5 * (X + X.transpose()); }

// Largest alpha with X + alpha dX still positive semidefinite.
double max_step(const MatrixXd& X, const MatrixXd& dX) {
  Eigen::LLT<MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd W = llt.matrixL().solve(dX);
  W = llt.matrixL().solve(W.transpose().eval());
  const double lmin =
      Eigen::SelfAdjointEigenSolver<MatrixXd>(sym(W), Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double max_step_lp(const VectorXd& x, const VectorXd& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < x.size(); ++k)
    if (dx(k) < 0.0) a = std::min(a, -x(k) / dx(k));
  return a;
}

struct Direction {
  VectorXd dy, ds_lp, dz_lp;
  std::vector<MatrixXd> dS, dZ;
};

}  // namespace

ConicSolution PrimalDualIpm::solve(const ConicProblem& problem) const {
  return solve_impl(problem, true);
}

ConicSolution PrimalDualIpm::solve_impl(const ConicProblem& problem, bool allow_phase_one) const {
  problem.check();
  const Work w = build_work(problem, opts_.box_bound);
  const int m = w.m;
  const size_t nb = w.dims.size();
  double nu = w.lp;
  for (int n : w.dims) nu += n;

  ConicSolution out;
  if (nu == 0) {
    out.status = m == 0 || w.c.isZero() ? ConicStatus::Optimal : ConicStatus::NumericalFailure;
    out.y = VectorXd::Zero(m);
    out.message = "empty cone";
    return out;
  }

  // Starting point scaled to the data.
  const double hnorm = problem.h.norm(), cnorm = w.c.norm();
  Point pt;
  {
    VectorXd colnorm(m);
    for (int j = 0; j < m; ++j) colnorm(j) = w.A.col(j).norm();
    double zscale = 10.0, sscale = 10.0;
    for (int j = 0; j < m; ++j)
      zscale = std::max(zscale, (1.0 + std::abs(w.c(j))) / (1.0 + colnorm(j)));
    sscale = std::max(sscale, (1.0 + hnorm) / std::sqrt(nu));
    if (m > 0) sscale = std::max(sscale, colnorm.maxCoeff());
    pt.s_lp = VectorXd::Constant(w.lp, sscale);
    for (int k = 0; k < w.lp; ++k) pt.s_lp(k) = std::max(sscale, w.h(k));
    pt.z_lp.resize(w.lp);
    for (int k = 0; k < w.lp; ++k) pt.z_lp(k) = sscale * zscale / pt.s_lp(k);
    for (size_t b = 0; b < nb; ++b) {
      const int n = w.dims[b];
      pt.S.push_back(sscale * std::max(1.0, std::sqrt(double(n))) * MatrixXd::Identity(n, n));
      pt.Z.push_back(zscale * std::max(1.0, std::sqrt(double(n))) * MatrixXd::Identity(n, n));
    }
  }
  VectorXd y = VectorXd::Zero(m);

  int stall = 0, since_best = 0;
  double best_gap = std::numeric_limits<double>::infinity(), best_pinf = best_gap, best_dinf = best_gap;
  bool converged = false, infeasible = false;
  double pinf = 0, dinf = 0, dinf_scaled = 0, relgap = 0, pobj = 0, dobj = 0;
  int iter = 0;
  std::string why;
  for (; iter < opts_.max_iterations; ++iter) {
    const VectorXd Fy = w.h + w.A * y;
    const VectorXd rd_lp = Fy.head(w.lp) - pt.s_lp;
    std::vector<MatrixXd> Rd(nb);
    double rd_norm2 = rd_lp.squaredNorm();
    double gap = pt.s_lp.dot(pt.z_lp);
    for (size_t b = 0; b < nb; ++b) {
      Rd[b] = block_of(w, Fy, b) - pt.S[b];
      rd_norm2 += Rd[b].squaredNorm();
      gap += pt.S[b].cwiseProduct(pt.Z[b]).sum();
    }
    const VectorXd zvec = stack(w, pt.z_lp, pt.Z);
    const VectorXd Atz = w.At * zvec;
    const VectorXd rp = w.c - Atz;
    const double mu = gap / nu;
    pobj = w.c.dot(y);
    dobj = -w.h.dot(zvec);
    pinf = std::sqrt(rd_norm2) / (1.0 + hnorm);
    dinf = rp.norm() / (1.0 + cnorm);
    dinf_scaled = rp.norm() / (1.0 + cnorm + zvec.norm());
    relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (opts_.verbose)
      std::fprintf(stderr, "ipm %3d  pobj % .9e  dobj % .9e  gap %.2e  pinf %.2e  dinf %.2e (%.2e)\n",
                   iter, pobj, dobj, relgap, pinf, dinf, dinf_scaled);
    if (!std::isfinite(gap) || !std::isfinite(pinf) || !std::isfinite(dinf)) {
      why = "non-finite iterate";
      break;
    }
    if (relgap < opts_.tol_gap && pinf < opts_.tol_feas && dinf_scaled < opts_.tol_feas) {
      converged = true;
      break;
    }
    bool improved = false;
    for (auto [val, best] : {std::pair{relgap, &best_gap}, std::pair{pinf, &best_pinf},
                             std::pair{dinf_scaled, &best_dinf}})
      if (val < 0.9 * *best) {
        *best = val;
        improved = true;
      }
    if (improved) {
      since_best = 0;
    } else if (++since_best >= 10) {
      why = "no progress";
      break;
    }
    const double hz = w.h.dot(zvec);
    if (hz < 0.0 && -hz > 1e8 * (1.0 + cnorm) && Atz.norm() <= opts_.tol_infeas * (-hz)) {
      infeasible = true;
      why = "dual ray certifies infeasibility";
      break;
    }

    // Inverse slack blocks.
    std::vector<MatrixXd> Sinv(nb);
    bool ok = true;
    for (size_t b = 0; b < nb; ++b) {
      Eigen::LLT<MatrixXd> llt(pt.S[b]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Sinv[b] = llt.solve(MatrixXd::Identity(w.dims[b], w.dims[b]));
    }
    if (!ok) {
      why = "slack lost positive definiteness";
      break;
    }

    // Schur complement M_ij = <F_i, Z F_j S^-1>.
    MatrixXd M = MatrixXd::Zero(m, m);
    for (size_t b = 0; b < nb; ++b) {
      const int n = w.dims[b];
      const MatrixXd& Z = pt.Z[b];
      MatrixXd ZF(n, n), G(n, n);
      for (const auto& tj : w.block_terms[b]) {
        ZF.setZero();
        for (const auto& e : tj.entries) ZF.col(e.c) += e.v * Z.col(e.r);
        G.setZero();
        for (int d : tj.cols) G.noalias() += ZF.col(d) * Sinv[b].row(d);
        for (const auto& ti : w.block_terms[b]) {
          double acc = 0.0;
          for (const auto& e : ti.entries) acc += e.v * G(e.c, e.r);
          M(ti.var, tj.var) += acc;
        }
      }
    }
    if (w.lp > 0) {
      const VectorXd d = pt.z_lp.cwiseQuotient(pt.s_lp);
      const SpMat DA = d.asDiagonal() * w.Alp;
      M += MatrixXd(SpMat(w.Alp.transpose()) * DA);
    }
    M = sym(M);
    Eigen::LLT<MatrixXd> chol;
    {
      double reg = 0.0;
      const double diag_scale = std::max(1e-300, M.diagonal().cwiseAbs().maxCoeff());
      for (int attempt = 0; attempt < 8; ++attempt) {
        chol.compute(M + reg * MatrixXd::Identity(m, m));
        if (chol.info() == Eigen::Success) break;
        reg = reg == 0.0 ? 1e-14 * diag_scale : reg * 100.0;
      }
      if (chol.info() != Eigen::Success) {
        why = "Schur complement factorization failed";
        break;
      }
    }

    auto direction = [&](double target, const std::vector<MatrixXd>* Ka, const VectorXd* ka) {
      Direction d;
      VectorXd r_lp(w.lp);
      for (int k = 0; k < w.lp; ++k) {
        const double t = target - (ka ? (*ka)(k) : 0.0);
        r_lp(k) = (t - pt.z_lp(k) * rd_lp(k)) / pt.s_lp(k);
      }
      std::vector<MatrixXd> R(nb), T(nb);
      for (size_t b = 0; b < nb; ++b) {
        const int n = w.dims[b];
        T[b] = target * MatrixXd::Identity(n, n);
        if (Ka) T[b] -= (*Ka)[b];
        R[b] = sym((T[b] - pt.Z[b] * Rd[b]) * Sinv[b]);
      }
      const VectorXd rhs = w.At * stack(w, r_lp, R) - w.c;
      d.dy = chol.solve(rhs);
      for (int refine = 0; refine < 2; ++refine) d.dy += chol.solve(rhs - M * d.dy);
      const VectorXd Ady = w.A * d.dy;
      d.ds_lp = rd_lp + Ady.head(w.lp);
      d.dz_lp.resize(w.lp);
      for (int k = 0; k < w.lp; ++k) {
        const double t = target - (ka ? (*ka)(k) : 0.0);
        d.dz_lp(k) = (t - pt.z_lp(k) * d.ds_lp(k)) / pt.s_lp(k) - pt.z_lp(k);
      }
      d.dS.resize(nb);
      d.dZ.resize(nb);
      for (size_t b = 0; b < nb; ++b) {
        d.dS[b] = Rd[b] + block_of(w, Ady, b);
        d.dZ[b] = sym((T[b] - pt.Z[b] * d.dS[b]) * Sinv[b]) - pt.Z[b];
      }
      return d;
    };
    auto steps = [&](const Direction& d) {
      double ap = max_step_lp(pt.s_lp, d.ds_lp), ad = max_step_lp(pt.z_lp, d.dz_lp);
      for (size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, max_step(pt.S[b], d.dS[b]));
        ad = std::min(ad, max_step(pt.Z[b], d.dZ[b]));
      }
      return std::make_pair(ap, ad);
    };

    // Predictor.
    const Direction pred = direction(0.0, nullptr, nullptr);
    auto [ap_a, ad_a] = steps(pred);
    ap_a = std::min(1.0, ap_a);
    ad_a = std::min(1.0, ad_a);
    double gap_aff = (pt.s_lp + ap_a * pred.ds_lp).dot(pt.z_lp + ad_a * pred.dz_lp);
    for (size_t b = 0; b < nb; ++b)
      gap_aff += (pt.S[b] + ap_a * pred.dS[b]).cwiseProduct(pt.Z[b] + ad_a * pred.dZ[b]).sum();
    const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, 3.0), 0.0, 1.0);

    // Corrector.
    std::vector<MatrixXd> Ka(nb);
    for (size_t b = 0; b < nb; ++b) Ka[b] = pred.dZ[b] * pred.dS[b];
    const VectorXd ka = pred.dz_lp.cwiseProduct(pred.ds_lp);
    const Direction d = direction(sigma * mu, &Ka, &ka);
    auto [ap, ad] = steps(d);
    const double frac = opts_.step_fraction;
    ap = std::min(1.0, frac * ap);
    ad = std::min(1.0, frac * ad);
    if (!std::isfinite(ap) || !std::isfinite(ad) || !d.dy.allFinite()) {
      why = "non-finite search direction";
      break;
    }

    y += ap * d.dy;
    pt.s_lp += ap * d.ds_lp;
    pt.z_lp += ad * d.dz_lp;
    for (size_t b = 0; b < nb; ++b) {
      pt.S[b] = sym(pt.S[b] + ap * d.dS[b]);
      pt.Z[b] = sym(pt.Z[b] + ad * d.dZ[b]);
    }
    stall = (ap < 1e-8 && ad < 1e-8) ? stall + 1 : 0;
    if (stall >= 3) {
      why = "step length stalled";
      break;
    }
  }

  out.y = y;
  out.iterations = iter;
  out.primal_objective = pobj;
  out.dual_objective = dobj;
  const VectorXd full = w.h + w.A * y;
  out.slack.resize(problem.rows());
  out.slack.head(problem.lp_dim) = full.head(problem.lp_dim);
  out.slack.tail(problem.rows() - problem.lp_dim) = full.tail(w.total - w.lp);
  const VectorXd zfull = stack(w, pt.z_lp, pt.Z);
  out.dual.resize(problem.rows());
  out.dual.head(problem.lp_dim) = zfull.head(problem.lp_dim);
  out.dual.tail(problem.rows() - problem.lp_dim) = zfull.tail(w.total - w.lp);

  if (converged) {
    out.status = ConicStatus::Optimal;
    out.message = "converged";
    return out;
  }
  if (infeasible) {
    out.status = ConicStatus::Infeasible;
    out.message = why;
    return out;
  }
  if (why.empty()) why = "iteration limit";
  // Accept a slightly less accurate point; callers re-verify certificates.
  if (relgap < 1e-6 && pinf < 1e-7 && dinf_scaled < 1e-7) {
    out.status = ConicStatus::Optimal;
    out.message = "reduced accuracy (" + why + ")";
    return out;
  }
  if (allow_phase_one) {
    std::string note;
    out.status = classify_by_phase_one(problem, note);
    out.message = why + "; " + note;
    return out;
  }
  out.status = ConicStatus::NumericalFailure;
  out.message = why;
  return out;
}

// maximize t  s.t.  h + A y - t e in K,  t <= 1.
ConicStatus PrimalDualIpm::classify_by_phase_one(const ConicProblem& p, std::string& note) const {
  ConicProblem q;
  q.num_vars = p.num_vars + 1;
  q.lp_dim = p.lp_dim + 1;
  q.psd_dims = p.psd_dims;
  const Index rows = q.rows();
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < p.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(p.A, k); it; ++it) {
      const Index row = it.row() < p.lp_dim ? it.row() : it.row() + 1;
      trip.emplace_back(row, it.col(), it.value());
    }
  q.h = VectorXd::Zero(rows);
  q.h.head(p.lp_dim) = p.h.head(p.lp_dim);
  q.h(p.lp_dim) = 1.0;
  q.h.tail(rows - q.lp_dim) = p.h.tail(p.h.size() - p.lp_dim);
  const int t = p.num_vars;
  for (int k = 0; k < p.lp_dim; ++k) trip.emplace_back(k, t, -1.0);
  trip.emplace_back(p.lp_dim, t, -1.0);
  Index o = q.lp_dim;
  for (int n : p.psd_dims) {
    for (int j = 0; j < n; ++j) trip.emplace_back(o + svec_index(n, j, j), t, -1.0);
    o += svec_size(n);
  }
  q.A.resize(rows, q.num_vars);
  q.A.setFromTriplets(trip.begin(), trip.end());
  q.c = VectorXd::Zero(q.num_vars);
  q.c(t) = -1.0;

  const ConicSolution s = solve_impl(q, false);
  if (s.status != ConicStatus::Optimal) {
    note = std::string("phase one ") + to_string(s.status) + " (" + s.message + ")";
    return ConicStatus::NumericalFailure;
  }
  const double tstar = s.y(t);
  char buf[96];
  std::snprintf(buf, sizeof buf, "phase one margin %.3e", tstar);
  note = buf;
  return tstar < -opts_.tol_infeas ? ConicStatus::Infeasible : ConicStatus::NumericalFailure;
}

}  // namespace scn::lmi
