#pragma once

#include <optional>
#include <vector>

#include "scn/lmi/problem.hpp"
#include "scn/lmi/supply_rate.hpp"
#include "scn/model.hpp"
#include "scn/rng.hpp"

namespace scn::lmi {

struct XeidCheck {
  SolveResult result;
  bool certified = false;
  MatrixXd P;  // storage V(x) = x' P x
};

// Quadratic-storage test of X-EID for x+ = Ax + Bu, y = Cx + Du. A negative
// answer means "not certified", never a disproof.
XeidCheck check_xeid_lti(const StateSpaceRealization& sys, const SupplyRate& X,
                         const SolverOptions& opts = {});

// The 4x4 block matrix that certifies x+ = (A + B K P^-1) x + eta, y = C x as
// X-EID from eta to y. `neg_inv_X22` stands for -(X22)^-1.
AffineExpr local_dissipation_lmi(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
                                 const AffineExpr& P, const AffineExpr& K,
                                 const AffineExpr& neg_inv_X22, const MatrixXd& X12,
                                 const AffineExpr& X11);

struct LocalDissipation {
  SolveResult result;
  MatrixXd L;  // feedback gain K P^-1
  MatrixXd P;  // LMI variable; the storage matrix is P^-1
  MatrixXd K;
};

// Synthesizes L such that x+ = (A + B L) x + eta, y = C x is X-EID from eta to y.
// Requires X22 negative definite. Throws NumericalError when cond(P) > 1e10.
LocalDissipation dissipativate_local(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
                                     const SupplyRate& X, const SolverOptions& opts = {});
LocalDissipation dissipativate_local(const MatrixXd& A, const MatrixXd& B, const SupplyRate& X,
                                     const SolverOptions& opts = {});

// Reject P with condition number above `limit`.
void check_conditioning(const MatrixXd& P, double limit = 1e10);

// Interconnection u = Muy y + Muw w, z = Mzy y + Mzw w.
struct Interconnection {
  MatrixXd Muy, Muw, Mzy, Mzw;
};

struct InterconnectionOptions {
  std::optional<MatrixXd> Muy, Muw, Mzy, Mzw;  // fixed blocks, free when empty
  double alpha = 1.0;                          // negative branch only
  std::vector<double> alpha_grid{0.1, 0.5, 1.0, 2.0, 10.0};
  bool retry_alpha = true;
  SolverOptions solver;
};

enum class DissipativityBranch { PositiveX11, NegativeX11 };

struct InterconnectionDesign {
  SolveResult result;
  Interconnection M;
  VectorXd p;
  DissipativityBranch branch = DissipativityBranch::PositiveX11;
  double alpha = 0.0;
};

// Finds an interconnection and weights p_i > 0 making the network Y-EID from w
// to z given X_i-EID subsystems. All X_i^11 must share a definite sign.
InterconnectionDesign synthesize_interconnection(const std::vector<SupplyRate>& subsystems,
                                                 const SupplyRate& Y,
                                                 const InterconnectionOptions& opts = {});

// max over sampled steps of V(x+) - V(x) - s(u, y) with V = x' P x.
double trajectory_dissipativity_check(const StateSpaceRealization& sys, const MatrixXd& P,
                                      const SupplyRate& X, int trials, int horizon, Rng& rng);

// Same test for the interconnected network with storage sum_i p_i x_i' P_i x_i
// against the network supply Y(w, z).
double network_dissipativity_check(const std::vector<StateSpaceRealization>& subsystems,
                                   const std::vector<MatrixXd>& storages, const VectorXd& p,
                                   const Interconnection& M, const SupplyRate& Y, int trials,
                                   int horizon, Rng& rng);

}  // namespace scn::lmi
