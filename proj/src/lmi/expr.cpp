#include "scn/lmi/expr.hpp"

#include <string>

#include "scn/error.hpp"

namespace scn::lmi {

namespace {

void require_same_shape(const AffineExpr& a, const AffineExpr& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidParameter(std::string("affine expression shape mismatch in ") + op + ": " +
                           std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                           std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

SparseMatrixXd to_sparse(const MatrixXd& M) { return M.sparseView(); }

}  // namespace

AffineExpr::AffineExpr(Index rows, Index cols) : constant_(MatrixXd::Zero(rows, cols)) {}

AffineExpr::AffineExpr(const MatrixXd& constant) : constant_(constant) {}

AffineExpr AffineExpr::identity(Index n, double s) {
  return AffineExpr(MatrixXd(s * MatrixXd::Identity(n, n)));
}

AffineExpr AffineExpr::unit(int var, Index rows, Index cols, const SparseMatrixXd& pattern) {
  AffineExpr e(rows, cols);
  e.add_term(var, pattern);
  return e;
}

void AffineExpr::add_term(int var, const SparseMatrixXd& coeff) {
  if (coeff.rows() != rows() || coeff.cols() != cols())
    throw InvalidParameter("coefficient shape does not match expression");
  auto it = terms_.find(var);
  if (it == terms_.end()) {
    if (coeff.nonZeros() > 0) terms_.emplace(var, coeff);
  } else {
    it->second += coeff;
    it->second.prune(0.0);
    if (it->second.nonZeros() == 0) terms_.erase(it);
  }
}

AffineExpr AffineExpr::transpose() const {
  AffineExpr t(MatrixXd(constant_.transpose()));
  for (const auto& [k, C] : terms_) t.terms_.emplace(k, SparseMatrixXd(C.transpose()));
  return t;
}

AffineExpr AffineExpr::block(Index r, Index c, Index nr, Index nc) const {
  AffineExpr b(MatrixXd(constant_.block(r, c, nr, nc)));
  for (const auto& [k, C] : terms_) {
    SparseMatrixXd s = C.block(r, c, nr, nc);
    if (s.nonZeros() > 0) b.terms_.emplace(k, s);
  }
  return b;
}

MatrixXd AffineExpr::evaluate(const VectorXd& y) const {
  MatrixXd v = constant_;
  for (const auto& [k, C] : terms_) {
    if (k >= y.size()) throw InvalidParameter("assignment shorter than variable index");
    v += y(k) * MatrixXd(C);
  }
  return v;
}

double AffineExpr::value(const VectorXd& y) const {
  if (rows() != 1 || cols() != 1) throw InvalidParameter("value() needs a 1x1 expression");
  return evaluate(y)(0, 0);
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  require_same_shape(*this, o, "+");
  constant_ += o.constant_;
  for (const auto& [k, C] : o.terms_) add_term(k, C);
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o) {
  require_same_shape(*this, o, "-");
  constant_ -= o.constant_;
  for (const auto& [k, C] : o.terms_) add_term(k, -C);
  return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
  constant_ *= s;
  if (s == 0.0) {
    terms_.clear();
  } else {
    for (auto& [k, C] : terms_) C *= s;
  }
  return *this;
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
AffineExpr operator-(AffineExpr a) { return a *= -1.0; }
AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
AffineExpr operator*(AffineExpr a, double s) { return a *= s; }

AffineExpr operator*(const MatrixXd& M, const AffineExpr& a) {
  if (M.cols() != a.rows()) throw InvalidParameter("matrix times expression: inner dimension");
  AffineExpr out(MatrixXd(M * a.constant()));
  for (const auto& [k, C] : a.terms()) out.add_term(k, to_sparse(M * C));
  return out;
}

AffineExpr operator*(const AffineExpr& a, const MatrixXd& M) {
  if (a.cols() != M.rows()) throw InvalidParameter("expression times matrix: inner dimension");
  AffineExpr out(MatrixXd(a.constant() * M));
  for (const auto& [k, C] : a.terms()) out.add_term(k, to_sparse(C * M));
  return out;
}

AffineExpr scale(const AffineExpr& scalar, const MatrixXd& M) {
  if (scalar.rows() != 1 || scalar.cols() != 1) throw InvalidParameter("scale() needs a 1x1 expression");
  AffineExpr out(MatrixXd(scalar.constant()(0, 0) * M));
  const SparseMatrixXd Ms = to_sparse(M);
  for (const auto& [k, C] : scalar.terms()) out.add_term(k, C.coeff(0, 0) * Ms);
  return out;
}

AffineExpr weighted_sum(const AffineExpr& a, const MatrixXd& W) {
  if (W.rows() != a.rows() || W.cols() != a.cols()) throw InvalidParameter("weighted_sum: shape");
  AffineExpr out(MatrixXd::Constant(1, 1, a.constant().cwiseProduct(W).sum()));
  for (const auto& [k, C] : a.terms()) {
    double s = 0.0;
    for (Index j = 0; j < C.outerSize(); ++j)
      for (SparseMatrixXd::InnerIterator it(C, j); it; ++it) s += it.value() * W(it.row(), it.col());
    SparseMatrixXd one(1, 1);
    one.insert(0, 0) = s;
    if (s != 0.0) out.add_term(k, one);
  }
  return out;
}

AffineExpr he(const AffineExpr& a) { return a + a.transpose(); }

AffineExpr block_matrix(const std::vector<std::vector<AffineExpr>>& grid) {
  const size_t R = grid.size();
  if (R == 0) return AffineExpr();
  const size_t Cn = grid.front().size();
  std::vector<Index> rh(R, -1), cw(Cn, -1);
  for (size_t i = 0; i < R; ++i) {
    if (grid[i].size() != Cn) throw InvalidParameter("block_matrix: ragged grid");
    for (size_t j = 0; j < Cn; ++j) {
      const auto& b = grid[i][j];
      if (b.empty()) continue;
      if ((rh[i] >= 0 && rh[i] != b.rows()) || (cw[j] >= 0 && cw[j] != b.cols()))
        throw InvalidParameter("block_matrix: inconsistent block sizes at (" + std::to_string(i) +
                               "," + std::to_string(j) + ")");
      rh[i] = b.rows();
      cw[j] = b.cols();
    }
  }
  for (Index h : rh)
    if (h < 0) throw InvalidParameter("block_matrix: row of placeholders");
  for (Index w : cw)
    if (w < 0) throw InvalidParameter("block_matrix: column of placeholders");
  std::vector<Index> ro(R + 1, 0), co(Cn + 1, 0);
  for (size_t i = 0; i < R; ++i) ro[i + 1] = ro[i] + rh[i];
  for (size_t j = 0; j < Cn; ++j) co[j + 1] = co[j] + cw[j];

  MatrixXd C0 = MatrixXd::Zero(ro[R], co[Cn]);
  std::map<int, std::vector<Eigen::Triplet<double>>> trip;
  for (size_t i = 0; i < R; ++i)
    for (size_t j = 0; j < Cn; ++j) {
      const auto& b = grid[i][j];
      if (b.empty()) continue;
      C0.block(ro[i], co[j], rh[i], cw[j]) = b.constant();
      for (const auto& [k, C] : b.terms())
        for (Index c = 0; c < C.outerSize(); ++c)
          for (SparseMatrixXd::InnerIterator it(C, c); it; ++it)
            trip[k].emplace_back(ro[i] + it.row(), co[j] + it.col(), it.value());
    }
  AffineExpr out(C0);
  for (auto& [k, t] : trip) {
    SparseMatrixXd S(ro[R], co[Cn]);
    S.setFromTriplets(t.begin(), t.end());
    out.add_term(k, S);
  }
  return out;
}

AffineExpr block_diag(const std::vector<AffineExpr>& blocks) {
  const size_t n = blocks.size();
  std::vector<std::vector<AffineExpr>> grid(n, std::vector<AffineExpr>(n));
  for (size_t i = 0; i < n; ++i) {
    grid[i][i] = blocks[i];
    for (size_t j = 0; j < n; ++j)
      if (j != i) grid[i][j] = AffineExpr::zero(blocks[i].rows(), blocks[j].cols());
  }
  return block_matrix(grid);
}

}  // namespace scn::lmi
