#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <map>
#include <vector>

namespace scn::lmi {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseMatrixXd = Eigen::SparseMatrix<double>;

// Matrix-valued affine function  C0 + sum_k y_k C_k  of the scalar decision
// variables y. A default-constructed expression is an empty placeholder that
// block_matrix() expands into a zero block of the inferred size.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(Index rows, Index cols);
  explicit AffineExpr(const MatrixXd& constant);

  static AffineExpr zero(Index rows, Index cols) { return AffineExpr(rows, cols); }
  static AffineExpr identity(Index n, double scale = 1.0);
  static AffineExpr unit(int var, Index rows, Index cols, const SparseMatrixXd& pattern);

  Index rows() const { return constant_.rows(); }
  Index cols() const { return constant_.cols(); }
  bool empty() const { return rows() == 0 && cols() == 0; }
  bool is_constant() const { return terms_.empty(); }

  const MatrixXd& constant() const { return constant_; }
  const std::map<int, SparseMatrixXd>& terms() const { return terms_; }

  void add_term(int var, const SparseMatrixXd& coeff);
  AffineExpr transpose() const;
  AffineExpr block(Index r, Index c, Index nr, Index nc) const;
  MatrixXd evaluate(const VectorXd& y) const;
  double value(const VectorXd& y) const;  // 1x1 expressions only

  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator-=(const AffineExpr& o);
  AffineExpr& operator*=(double s);

 private:
  MatrixXd constant_;
  std::map<int, SparseMatrixXd> terms_;
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a);
AffineExpr operator*(double s, AffineExpr a);
AffineExpr operator*(AffineExpr a, double s);
AffineExpr operator*(const MatrixXd& M, const AffineExpr& a);
AffineExpr operator*(const AffineExpr& a, const MatrixXd& M);

// Scalar (1x1) expression times a constant matrix.
AffineExpr scale(const AffineExpr& scalar, const MatrixXd& M);

// Sum of all entries weighted by W (same shape): sum_ij W_ij a_ij, as 1x1.
AffineExpr weighted_sum(const AffineExpr& a, const MatrixXd& W);

// a + a'.
AffineExpr he(const AffineExpr& a);

// Assembles a block matrix. Empty placeholders become zero blocks; every row
// and column of the grid needs at least one non-empty block to fix its size.
AffineExpr block_matrix(const std::vector<std::vector<AffineExpr>>& grid);

AffineExpr block_diag(const std::vector<AffineExpr>& blocks);

}  // namespace scn::lmi
