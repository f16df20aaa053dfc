#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <random>
#include <sstream>

#include "scn/lmi/problem.hpp"

using namespace scn::lmi;

namespace {

MatrixXd I(Index n) { return MatrixXd::Identity(n, n); }

// Every psd constraint re-evaluated at the returned point with a fresh eigensolver.
double recheck(const LmiProblem& p, const SolveResult& r) {
  double worst = 1e300;
  for (const auto& c : p.psd_constraints()) {
    const MatrixXd M = c.expr.evaluate(r.y);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues().minCoeff() - c.margin);
  }
  return worst;
}

}  // namespace

TEST_CASE("minimize t subject to [[t,1],[1,t]] psd") {
  LmiProblem p;
  Var t = p.scalar("t");
  MatrixXd J(2, 2);
  J << 0, 1, 1, 0;
  p.add_psd("m", AffineExpr(J) + scale(t, I(2)));
  p.minimize(t);
  SolveResult r = p.solve();
  REQUIRE(r.optimal());
  CHECK(r.scalar("t") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(recheck(p, r) >= -1e-7);
}

TEST_CASE("negative definite constraint is infeasible") {
  LmiProblem p;
  Var x = p.scalar("x");
  MatrixXd J(2, 2);
  J << 0, 1, 1, 0;
  p.add_psd("neg", AffineExpr(MatrixXd(-I(2))) + scale(x, J));
  SolveResult r = p.solve();
  CHECK(r.status == SolveStatus::Infeasible);
}

TEST_CASE("discrete Lyapunov inequality for a contraction") {
  const MatrixXd A = 0.5 * I(2);
  LmiProblem p;
  Var P = p.symmetric("P", 2);
  p.add_strict("P", P);
  p.add_strict("lyap", P - A.transpose() * P * A);
  SolveResult r = p.solve();
  REQUIRE(r.optimal());
  const MatrixXd Pv = r.value("P");
  CHECK(min_eigenvalue(Pv) >= 1e-6 - 1e-7);
  CHECK(min_eigenvalue(Pv - A.transpose() * Pv * A) >= 1e-6 - 1e-7);
  for (const auto& c : r.certificates) CHECK(c.min_eigenvalue >= c.margin - 1e-7);
}

TEST_CASE("trace minimization recovers the smallest eigenvalue") {
  // min <C, X> s.t. trace X = 1, X psd has value lambda_min(C)
  std::mt19937_64 g(7);
  std::normal_distribution<double> N01;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 4;
    MatrixXd C(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) C(i, j) = N01(g);
    C = (0.5 * (C + C.transpose())).eval();
    LmiProblem p;
    Var X = p.symmetric("X", n);
    p.add_psd("X", X);
    p.add_equality("trace", weighted_sum(X, I(n)) - AffineExpr(MatrixXd::Ones(1, 1)));
    p.minimize(weighted_sum(X, C));
    SolveResult r = p.solve();
    REQUIRE(r.optimal());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(C);
    CHECK(r.objective_value == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-6));
    CHECK(r.equality_residual <= 1e-8);
    CHECK(recheck(p, r) >= -1e-7);
  }
}

TEST_CASE("bounded scalars act as box constraints") {
  LmiProblem p;
  Var x = p.scalar("x", -2.0, 3.0);
  Var y = p.scalar("y", 0.5, {});
  p.minimize(x + y);
  SolveResult r = p.solve();
  REQUIRE(r.optimal());
  CHECK(r.scalar("x") == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(r.scalar("y") == doctest::Approx(0.5).epsilon(1e-6));

  LmiProblem q;
  Var z = q.scalar("z", 1.0, {});
  q.add_psd("z<=0", -AffineExpr(z));
  CHECK(q.solve().status == SolveStatus::Infeasible);
}

TEST_CASE("equality constraints are eliminated exactly") {
  LmiProblem p;
  Var a = p.scalar("a");
  Var b = p.scalar("b");
  p.add_equality("a-b=1", a - b - AffineExpr(MatrixXd::Ones(1, 1)));
  p.add_psd("a", a);
  p.add_psd("b", b);
  p.minimize(a + b);
  SolveResult r = p.solve();
  REQUIRE(r.optimal());
  CHECK(r.scalar("a") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(r.scalar("b")) < 1e-6);
  CHECK(std::abs(r.scalar("a") - r.scalar("b") - 1.0) <= 1e-8);

  LmiProblem q;
  Var c = q.scalar("c");
  q.add_equality("c=1", c - AffineExpr(MatrixXd::Ones(1, 1)));
  q.add_equality("c=2", c - AffineExpr(MatrixXd::Constant(1, 1, 2.0)));
  CHECK(q.solve().status == SolveStatus::Infeasible);
}

TEST_CASE("strict constraints keep the margin") {
  LmiProblem p;
  Var x = p.scalar("x");
  p.add_strict("x>0", x);
  p.minimize(x);
  SolverOptions o;
  o.eps_strict = 1e-3;
  SolveResult r = p.solve(o);
  REQUIRE(r.optimal());
  CHECK(r.scalar("x") == doctest::Approx(1e-3).epsilon(1e-5));
}

TEST_CASE("conic dump is deterministic") {
  LmiProblem p;
  Var P = p.symmetric("P", 3);
  p.add_strict("P", P);
  p.minimize(weighted_sum(P, I(3)));
  std::ostringstream a, b;
  p.dump(a);
  p.dump(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("psd 1 3") != std::string::npos);
}

TEST_CASE("duplicate variable names are rejected") {
  LmiProblem p;
  p.scalar("x");
  CHECK_THROWS(p.scalar("x"));
}
