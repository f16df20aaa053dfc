#include "doctest.h"

#include <random>

#include "scn/lmi/svec.hpp"

using namespace scn::lmi;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_sym(int n, std::mt19937_64& g) {
  std::normal_distribution<double> N01;
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = N01(g);
  return 0.5 * (M + M.transpose());
}

}  // namespace

TEST_CASE("svec of small matrices") {
  VectorXd v = svec(MatrixXd::Identity(2, 2));
  REQUIRE(v.size() == 3);
  CHECK(v(0) == 1.0);
  CHECK(v(1) == 0.0);
  CHECK(v(2) == 1.0);

  MatrixXd S(2, 2);
  S << 0, 1, 1, 0;
  v = svec(S);
  CHECK(v(0) == 0.0);
  CHECK(v(1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(v(2) == 0.0);
}

TEST_CASE("svec preserves the trace inner product") {
  std::mt19937_64 g(1);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd S = random_sym(5, g), T = random_sym(5, g);
    CHECK(svec(S).dot(svec(T)) == doctest::Approx((S * T).trace()).epsilon(1e-12));
  }
}

TEST_CASE("smat inverts svec") {
  std::mt19937_64 g(2);
  for (int n : {1, 2, 3, 7, 20, 50}) {
    const MatrixXd S = random_sym(n, g);
    const MatrixXd R = smat(svec(S));
    CHECK((R - S).cwiseAbs().maxCoeff() <= 1e-15 * (1 + S.cwiseAbs().maxCoeff()) * 4);
  }
}

TEST_CASE("svec rejects asymmetric input and bad lengths") {
  MatrixXd A(2, 2);
  A << 1, 2, 3, 4;
  CHECK_THROWS_AS(svec(A), scn::InvalidParameter);
  CHECK_THROWS_AS(svec(MatrixXd(2, 3)), scn::InvalidParameter);
  CHECK_THROWS_AS(smat(VectorXd::Zero(4)), scn::InvalidParameter);
  CHECK(svec_index(3, 2, 1) == 4);
}
