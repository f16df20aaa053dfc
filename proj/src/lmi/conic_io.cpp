#include <cstdio>
#include <ostream>

#include "scn/lmi/conic.hpp"

namespace scn::lmi {

namespace {
void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}
}  // namespace

void write_conic_problem(std::ostream& os, const ConicProblem& p) {
  p.check();
  os << "# conic problem: minimize c'y  s.t.  h + A y in K\n";
  os << "vars " << p.num_vars << "\n";
  os << "lp " << p.lp_dim << "\n";
  os << "psd " << p.psd_dims.size();
  for (int n : p.psd_dims) os << ' ' << n;
  os << "\nrows " << p.rows() << "\n";
  os << "c\n";
  for (int j = 0; j < p.num_vars; ++j) {
    put(os, p.c(j));
    os << '\n';
  }
  Eigen::Index nz = 0;
  for (Eigen::Index k = 0; k < p.h.size(); ++k) nz += p.h(k) != 0.0;
  os << "h " << nz << "\n";
  for (Eigen::Index k = 0; k < p.h.size(); ++k)
    if (p.h(k) != 0.0) {
      os << k << ' ';
      put(os, p.h(k));
      os << '\n';
    }
  os << "A " << p.A.nonZeros() << "\n";
  for (int j = 0; j < p.A.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(p.A, j); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ';
      put(os, it.value());
      os << '\n';
    }
}

}  // namespace scn::lmi
