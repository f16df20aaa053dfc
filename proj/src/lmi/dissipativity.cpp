#include "scn/lmi/dissipativity.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "scn/error.hpp"

namespace scn::lmi {

namespace {

MatrixXd Id(Index n) { return MatrixXd::Identity(n, n); }

bool definite(const MatrixXd& M, int sign) {
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return sign > 0 ? es.eigenvalues().minCoeff() > 0.0 : es.eigenvalues().maxCoeff() < 0.0;
}

VectorXd randn(Index n, Rng& rng) {
  VectorXd v(n);
  for (Index k = 0; k < n; ++k) v(k) = rng.normal();
  return v;
}

}  // namespace

XeidCheck check_xeid_lti(const StateSpaceRealization& sys, const SupplyRate& X,
                         const SolverOptions& opts) {
  X.check();
  const Index n = sys.nx(), m = sys.nu(), q = sys.ny();
  if (X.input_dim() != m || X.output_dim() != q)
    throw InvalidParameter("supply rate dimensions do not match the system");
  if (sys.C.cols() != n || sys.D.rows() != q || sys.D.cols() != m || sys.B.rows() != n)
    throw InvalidParameter("inconsistent state-space dimensions");
  const MatrixXd &A = sys.A, &B = sys.B, &C = sys.C, &D = sys.D;
  const MatrixXd X21 = X.X21();

  LmiProblem prob;
  const Var P = prob.symmetric("P", n);
  prob.add_strict("P", P);
  const AffineExpr lmi = block_matrix({
      {P, P * A, P * B},
      {A.transpose() * P, P + AffineExpr(MatrixXd(C.transpose() * X.X22 * C)),
       AffineExpr(MatrixXd(C.transpose() * X21 + C.transpose() * X.X22 * D))},
      {B.transpose() * P, AffineExpr(MatrixXd(X.X12 * C + D.transpose() * X.X22 * C)),
       AffineExpr(MatrixXd(X.X11 + D.transpose() * X21 + X.X12 * D + D.transpose() * X.X22 * D))},
  });
  prob.add_psd("dissipation", lmi);

  XeidCheck out;
  out.result = prob.solve(opts);
  out.certified = out.result.optimal();
  if (out.certified) out.P = out.result.value("P");
  return out;
}

AffineExpr local_dissipation_lmi(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
                                 const AffineExpr& P, const AffineExpr& K,
                                 const AffineExpr& neg_inv_X22, const MatrixXd& X12,
                                 const AffineExpr& X11) {
  const Index n = A.rows(), q = C.rows(), m = X11.rows();
  if (m != n) throw InvalidParameter("external input must enter every state (X11 is n x n)");
  const MatrixXd X21 = X12.transpose();
  const AffineExpr CP = C * P;
  const AffineExpr cl = A * P + B * K;
  return block_matrix({
      {neg_inv_X22, AffineExpr(), CP, AffineExpr::zero(q, m)},
      {AffineExpr::zero(n, q), P, cl, AffineExpr::identity(n)},
      {CP.transpose(), cl.transpose(), P, P * MatrixXd(C.transpose() * X21)},
      {AffineExpr(), AffineExpr::identity(n), MatrixXd(X12 * C) * P, X11},
  });
}

void check_conditioning(const MatrixXd& P, double limit) {
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (P + P.transpose()), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > limit)
    throw NumericalError("storage matrix is ill conditioned (cond " + std::to_string(hi / lo) + ")");
}

LocalDissipation dissipativate_local(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
                                     const SupplyRate& X, const SolverOptions& opts) {
  X.check();
  const Index n = A.rows(), m = B.cols();
  if (A.cols() != n || B.rows() != n || C.cols() != n)
    throw InvalidParameter("inconsistent dimensions in dissipativate_local");
  if (X.input_dim() != n || X.output_dim() != C.rows())
    throw InvalidParameter("supply rate must act on (eta, y) with eta of state dimension");
  if (!definite(X.X22, -1)) throw InvalidParameter("dissipativate_local requires X22 < 0");

  LmiProblem prob;
  const Var P = prob.symmetric("P", n);
  const Var K = prob.matrix("K", m, n);
  prob.add_strict("P", P);
  const MatrixXd neg_inv = -X.X22.inverse();
  prob.add_strict("dissipation",
                  local_dissipation_lmi(A, B, C, P, K, AffineExpr(MatrixXd(0.5 * (neg_inv + neg_inv.transpose()))),
                                        X.X12, AffineExpr(X.X11)));
  LocalDissipation out;
  out.result = prob.solve(opts);
  if (!out.result.optimal()) return out;
  out.P = out.result.value("P");
  out.K = out.result.value("K");
  check_conditioning(out.P);
  out.L = out.P.llt().solve(out.K.transpose()).transpose();
  return out;
}

LocalDissipation dissipativate_local(const MatrixXd& A, const MatrixXd& B, const SupplyRate& X,
                                     const SolverOptions& opts) {
  const Index n = A.rows(), q = X.output_dim();
  if (q > n) throw InvalidParameter("output dimension exceeds state dimension");
  MatrixXd C = MatrixXd::Zero(q, n);
  C.leftCols(q) = Id(q);
  return dissipativate_local(A, B, C, X, opts);
}

namespace {

struct NetworkDims {
  std::vector<Index> u, y;
  Index nu = 0, ny = 0;
};

InterconnectionDesign solve_interconnection(const std::vector<SupplyRate>& subs, const SupplyRate& Y,
                                            const InterconnectionOptions& opts, bool positive,
                                            double alpha) {
  const size_t N = subs.size();
  NetworkDims d;
  for (const auto& s : subs) {
    d.u.push_back(s.input_dim());
    d.y.push_back(s.output_dim());
    d.nu += s.input_dim();
    d.ny += s.output_dim();
  }
  const Index nw = Y.input_dim(), nz = Y.output_dim();

  LmiProblem prob;
  std::vector<AffineExpr> Xp11_blocks, Xp22_blocks;
  std::vector<MatrixXd> bX12;
  std::vector<Var> p;
  for (size_t i = 0; i < N; ++i) {
    p.push_back(prob.scalar("p" + std::to_string(i)));
    prob.add_strict("p" + std::to_string(i) + ">0", p.back());
    Xp11_blocks.push_back(scale(p.back(), subs[i].X11));
    Xp22_blocks.push_back(scale(p.back(), subs[i].X22));
    bX12.push_back(subs[i].X11.inverse() * subs[i].X12);
  }
  const AffineExpr Xp11 = block_diag(Xp11_blocks);
  const AffineExpr Xp22 = block_diag(Xp22_blocks);
  const MatrixXd X12b = block_diagonal(bX12);
  const MatrixXd X21b = X12b.transpose();

  auto fixed_or_var = [&](const std::optional<MatrixXd>& fixed, const char* name, Index r, Index c,
                          bool premultiply) -> std::pair<AffineExpr, bool> {
    if (fixed) {
      if (fixed->rows() != r || fixed->cols() != c)
        throw InvalidParameter(std::string("fixed block ") + name + " has the wrong shape");
      return {premultiply ? Xp11 * *fixed : AffineExpr(*fixed), true};
    }
    return {prob.matrix(name, r, c), false};
  };
  const auto [Luy, fuy] = fixed_or_var(opts.Muy, "Luy", d.nu, d.ny, true);
  const auto [Luw, fuw] = fixed_or_var(opts.Muw, "Luw", d.nu, nw, true);
  const auto [Mzy, fzy] = fixed_or_var(opts.Mzy, "Mzy", nz, d.ny, false);
  const auto [Mzw, fzw] = fixed_or_var(opts.Mzw, "Mzw", nz, nw, false);

  const MatrixXd nY22 = -Y.X22;
  const MatrixXd Y12 = Y.X12, Y21 = Y.X21();
  AffineExpr yy = -(Luy.transpose() * X12b) - X21b * Luy - Xp22;
  AffineExpr yw = -(X21b * Luw) + Mzy.transpose() * Y21;
  AffineExpr ww = Mzw.transpose() * Y21 + Y12 * Mzw + AffineExpr(Y.X11);
  const AffineExpr zy = nY22 * Mzy, zw = nY22 * Mzw;

  InterconnectionDesign out;
  out.branch = positive ? DissipativityBranch::PositiveX11 : DissipativityBranch::NegativeX11;
  out.alpha = positive ? 0.0 : alpha;
  if (positive) {
    prob.add_strict("network", block_matrix({
                                   {Xp11, AffineExpr(), Luy, Luw},
                                   {AffineExpr::zero(nz, d.nu), AffineExpr(nY22), zy, zw},
                                   {Luy.transpose(), zy.transpose(), yy, yw},
                                   {Luw.transpose(), zw.transpose(), yw.transpose(), ww},
                               }));
  } else {
    const MatrixXd Ey = MatrixXd::Identity(d.nu, d.ny), Ew = MatrixXd::Identity(d.nu, nw);
    const double a2 = alpha * alpha;
    yy += a2 * (Ey.transpose() * Xp11 * Ey) - alpha * he(Ey.transpose() * Luy);
    yw += a2 * (Ey.transpose() * Xp11 * Ew) -
          alpha * (Ey.transpose() * Luw + Luy.transpose() * Ew);
    ww += a2 * (Ew.transpose() * Xp11 * Ew) - alpha * he(Ew.transpose() * Luw);
    prob.add_strict("network", block_matrix({
                                   {AffineExpr(nY22), zy, zw},
                                   {zy.transpose(), yy, yw},
                                   {zw.transpose(), yw.transpose(), ww},
                               }));
  }
  out.result = prob.solve(opts.solver);
  if (!out.result.optimal()) return out;

  const VectorXd& y = out.result.y;
  out.p.resize(static_cast<Index>(N));
  for (size_t i = 0; i < N; ++i) out.p(static_cast<Index>(i)) = p[i].value(y);
  const MatrixXd Xp11v = Xp11.evaluate(y);
  const auto lu = Xp11v.partialPivLu();
  out.M.Muy = fuy ? *opts.Muy : MatrixXd(lu.solve(Luy.evaluate(y)));
  out.M.Muw = fuw ? *opts.Muw : MatrixXd(lu.solve(Luw.evaluate(y)));
  out.M.Mzy = fzy ? *opts.Mzy : Mzy.evaluate(y);
  out.M.Mzw = fzw ? *opts.Mzw : Mzw.evaluate(y);
  return out;
}

}  // namespace

InterconnectionDesign synthesize_interconnection(const std::vector<SupplyRate>& subsystems,
                                                 const SupplyRate& Y,
                                                 const InterconnectionOptions& opts) {
  if (subsystems.empty()) throw InvalidParameter("no subsystems given");
  Y.check();
  if (!definite(Y.X22, -1)) throw InvalidParameter("network supply needs Y22 < 0");
  int pos = 0, neg = 0;
  for (const auto& s : subsystems) {
    s.check();
    if (definite(s.X11, +1))
      ++pos;
    else if (definite(s.X11, -1))
      ++neg;
  }
  const int N = static_cast<int>(subsystems.size());
  if (pos != N && neg != N)
    throw InvalidParameter("mixed or indefinite X11 blocks are not supported");
  if (pos == N) return solve_interconnection(subsystems, Y, opts, true, 0.0);

  InterconnectionDesign best = solve_interconnection(subsystems, Y, opts, false, opts.alpha);
  if (best.result.optimal() || !opts.retry_alpha) return best;
  for (double a : opts.alpha_grid) {
    if (a == opts.alpha) continue;
    InterconnectionDesign d = solve_interconnection(subsystems, Y, opts, false, a);
    if (d.result.optimal()) return d;
  }
  return best;
}

double trajectory_dissipativity_check(const StateSpaceRealization& sys, const MatrixXd& P,
                                      const SupplyRate& X, int trials, int horizon, Rng& rng) {
  const Index n = sys.nx(), m = sys.nu();
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    VectorXd x = randn(n, rng);
    for (int k = 0; k < horizon; ++k) {
      const VectorXd u = randn(m, rng);
      const VectorXd y = sys.C * x + sys.D * u;
      const VectorXd xn = sys.A * x + sys.B * u;
      const double dv = xn.dot(P * xn) - x.dot(P * x);
      worst = std::max(worst, dv - X.evaluate(u, y));
      x = xn;
    }
  }
  return worst;
}

double network_dissipativity_check(const std::vector<StateSpaceRealization>& subs,
                                   const std::vector<MatrixXd>& storages, const VectorXd& p,
                                   const Interconnection& M, const SupplyRate& Y, int trials,
                                   int horizon, Rng& rng) {
  std::vector<MatrixXd> A, B, C, D, Pw;
  for (size_t i = 0; i < subs.size(); ++i) {
    A.push_back(subs[i].A);
    B.push_back(subs[i].B);
    C.push_back(subs[i].C);
    D.push_back(subs[i].D);
    Pw.push_back(p(static_cast<Index>(i)) * storages[i]);
  }
  const MatrixXd Ab = block_diagonal(A), Bb = block_diagonal(B), Cb = block_diagonal(C),
                 Db = block_diagonal(D), Pb = block_diagonal(Pw);
  const Index n = Ab.rows(), ny = Cb.rows(), nw = M.Muw.cols();
  // y = C x + D (Muy y + Muw w)
  const auto loop = (MatrixXd::Identity(ny, ny) - Db * M.Muy).partialPivLu();
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    VectorXd x = randn(n, rng);
    for (int k = 0; k < horizon; ++k) {
      const VectorXd w = randn(nw, rng);
      const VectorXd y = loop.solve(Cb * x + Db * M.Muw * w);
      const VectorXd u = M.Muy * y + M.Muw * w;
      const VectorXd z = M.Mzy * y + M.Mzw * w;
      const VectorXd xn = Ab * x + Bb * u;
      const double dv = xn.dot(Pb * xn) - x.dot(Pb * x);
      worst = std::max(worst, dv - Y.evaluate(w, z));
      x = xn;
    }
  }
  return worst;
}

}  // namespace scn::lmi
