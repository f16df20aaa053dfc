#pragma once

#include <Eigen/Dense>

#include <string>

namespace scn::lmi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class SupplyKind { Passive, IfOfp, L2G, Sector, General };

const char* to_string(SupplyKind k);

// Quadratic supply s(u, y) = [u; y]' X [u; y] with X = [[X11, X12], [X12', X22]].
struct SupplyRate {
  MatrixXd X11, X12, X22;
  SupplyKind kind = SupplyKind::General;
  double nu = 0.0, rho = 0.0;  // IF-OFP indices
  double gamma = 0.0;          // L2G gain
  double a = 0.0, b = 0.0;     // sector bounds

  Eigen::Index input_dim() const { return X11.rows(); }
  Eigen::Index output_dim() const { return X22.rows(); }
  MatrixXd X21() const { return X12.transpose(); }
  MatrixXd full() const;
  double evaluate(const VectorXd& u, const VectorXd& y) const;
  void check() const;  // shapes and symmetry

  static SupplyRate general(const MatrixXd& X11, const MatrixXd& X12, const MatrixXd& X22);
  static SupplyRate passive(Eigen::Index n);
  static SupplyRate if_ofp(double nu, double rho, Eigen::Index n);
  static SupplyRate l2g(double gamma, Eigen::Index nu, Eigen::Index ny);
  static SupplyRate sector(double a, double b, Eigen::Index n);
};

}  // namespace scn::lmi
