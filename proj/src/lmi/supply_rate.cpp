#include "scn/lmi/supply_rate.hpp"

#include "scn/error.hpp"

namespace scn::lmi {

const char* to_string(SupplyKind k) {
  switch (k) {
    case SupplyKind::Passive: return "passive";
    case SupplyKind::IfOfp: return "if-ofp";
    case SupplyKind::L2G: return "l2g";
    case SupplyKind::Sector: return "sector";
    case SupplyKind::General: return "general";
  }
  return "unknown";
}

MatrixXd SupplyRate::full() const {
  const auto m = input_dim(), p = output_dim();
  MatrixXd X(m + p, m + p);
  X << X11, X12, X12.transpose(), X22;
  return X;
}

double SupplyRate::evaluate(const VectorXd& u, const VectorXd& y) const {
  return u.dot(X11 * u) + 2.0 * u.dot(X12 * y) + y.dot(X22 * y);
}

void SupplyRate::check() const {
  if (X11.rows() != X11.cols() || X22.rows() != X22.cols())
    throw InvalidParameter("supply rate diagonal blocks must be square");
  if (X12.rows() != X11.rows() || X12.cols() != X22.rows())
    throw InvalidParameter("supply rate X12 has the wrong shape");
  const double tol = 1e-12 * (1.0 + X11.cwiseAbs().maxCoeff() + X22.cwiseAbs().maxCoeff());
  if ((X11 - X11.transpose()).cwiseAbs().maxCoeff() > tol ||
      (X22 - X22.transpose()).cwiseAbs().maxCoeff() > tol)
    throw InvalidParameter("supply rate blocks must be symmetric");
}

SupplyRate SupplyRate::general(const MatrixXd& X11, const MatrixXd& X12, const MatrixXd& X22) {
  SupplyRate s;
  s.X11 = X11;
  s.X12 = X12;
  s.X22 = X22;
  s.check();
  return s;
}

SupplyRate SupplyRate::passive(Eigen::Index n) {
  SupplyRate s = general(MatrixXd::Zero(n, n), 0.5 * MatrixXd::Identity(n, n), MatrixXd::Zero(n, n));
  s.kind = SupplyKind::Passive;
  return s;
}

SupplyRate SupplyRate::if_ofp(double nu, double rho, Eigen::Index n) {
  SupplyRate s = general(-nu * MatrixXd::Identity(n, n), 0.5 * MatrixXd::Identity(n, n),
                         -rho * MatrixXd::Identity(n, n));
  s.kind = SupplyKind::IfOfp;
  s.nu = nu;
  s.rho = rho;
  return s;
}

SupplyRate SupplyRate::l2g(double gamma, Eigen::Index nu, Eigen::Index ny) {
  if (!(gamma >= 0.0)) throw InvalidParameter("L2G gain must be nonnegative");
  SupplyRate s = general(gamma * gamma * MatrixXd::Identity(nu, nu), MatrixXd::Zero(nu, ny),
                         -MatrixXd::Identity(ny, ny));
  s.kind = SupplyKind::L2G;
  s.gamma = gamma;
  return s;
}

// s = (y - a u)'(b u - y)
SupplyRate SupplyRate::sector(double a, double b, Eigen::Index n) {
  SupplyRate s = general(-a * b * MatrixXd::Identity(n, n), 0.5 * (a + b) * MatrixXd::Identity(n, n),
                         -MatrixXd::Identity(n, n));
  s.kind = SupplyKind::Sector;
  s.a = a;
  s.b = b;
  return s;
}

}  // namespace scn::lmi
