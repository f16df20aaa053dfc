#include "scn/codesign.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scn/lmi/dissipativity.hpp"
#include "scn/parallel.hpp"

namespace scn {

using lmi::AffineExpr;
using lmi::LmiProblem;
using lmi::SolveStatus;
using lmi::Var;

namespace {

// gain budget used when diagnosing an infeasible co-design
constexpr double kRelaxedGammaBar = 1e6;

MatrixXd Id(Eigen::Index n) { return MatrixXd::Identity(n, n); }

MatrixXd output_matrix(const ErrorDynamics& ed, bool extended) {
  return extended ? Id(ed.n_i) : ed.Ccal;
}

double certificate_floor(const SolveResult& r) { return r.min_certificate(); }

void finish_local(LocalDesign& d, const SolveResult& r) {
  d.P = r.value("P");
  d.K = r.value("K");
  lmi::check_conditioning(d.P);
  d.L = d.P.llt().solve(d.K.transpose()).transpose();
  d.min_eigenvalue = certificate_floor(r);
}

[[noreturn]] void fail(const SolveResult& r, const std::string& what) {
  if (r.status == SolveStatus::Infeasible) throw InfeasibleError(what + ": infeasible (" + r.message + ")");
  throw NumericalError(what + ": numerical failure (" + r.message + ")");
}

// Local LMI at fixed rho_tilde (when rho_tilde > 0) or with rho_tilde free.
struct LocalProblem {
  LmiProblem prob;
  Var P, K, nu, rho_tilde, gamma;
};

void add_local_lmi(LocalProblem& lp, const ErrorDynamics& ed, bool extended,
                   const AffineExpr& neg_inv_X22, const MatrixXd& X12, const AffineExpr& X11) {
  const MatrixXd C = output_matrix(ed, extended);
  lp.P = lp.prob.symmetric("P", ed.n_i);
  lp.K = lp.prob.matrix("K", ed.n, ed.n_i);
  lp.prob.add_strict("P", lp.P);
  lp.prob.add_strict("dissipation",
                     lmi::local_dissipation_lmi(ed.Acal, ed.Bcal, C, lp.P, lp.K, neg_inv_X22, X12, X11));
}

MatrixXd half_identity(Eigen::Index rows, Eigen::Index cols) {
  return 0.5 * MatrixXd::Identity(rows, cols);
}

}  // namespace

SupplyRate LocalDesign::supply_rate() const {
  const Eigen::Index ni = P.rows();
  const Eigen::Index q = extended_output ? ni : K.rows();
  if (extended_output) return SupplyRate::if_ofp(nu, passivity_rho, ni);
  return SupplyRate::general(-nu * Id(ni), half_identity(ni, q), -passivity_rho * Id(q));
}

MatrixXd LocalDesign::output_map(const ErrorDynamics& ed) const {
  return output_matrix(ed, extended_output);
}

MatrixXd LocalDesign::storage() const {
  MatrixXd S = P.llt().solve(Id(P.rows()));
  return 0.5 * (S + S.transpose());
}

std::vector<double> default_rho_grid() {
  std::vector<double> g(25);
  for (int k = 0; k < 25; ++k) g[k] = std::pow(10.0, -3.0 + 6.0 * k / 24.0);
  return g;
}

LocalDesign design_local_basic(const ErrorDynamics& ed, const LocalDesignOptions& opts) {
  const Eigen::Index ni = ed.n_i;
  const Eigen::Index q = opts.extended_output ? ni : ed.n;
  LocalProblem lp;
  lp.nu = lp.prob.scalar("nu");
  lp.rho_tilde = lp.prob.scalar("rho_tilde", opts.rho_tilde_min, opts.rho_tilde_max);
  add_local_lmi(lp, ed, opts.extended_output, lmi::scale(lp.rho_tilde, Id(q)), half_identity(ni, q),
                lmi::scale(lp.nu, -Id(ni)));
  lp.prob.minimize(-lp.nu);
  const SolveResult r = lp.prob.solve(opts.solver);
  if (!r.optimal()) fail(r, "local design");

  LocalDesign d;
  d.method = LocalMethod::Basic;
  d.extended_output = opts.extended_output;
  d.nu = r.scalar("nu");
  d.rho_tilde = r.scalar("rho_tilde");
  d.passivity_rho = 1.0 / d.rho_tilde;
  finish_local(d, r);
  return d;
}

LocalDesign design_local_basic(const ErrorDynamics& ed, const SupplyRate& X,
                               const LocalDesignOptions& opts) {
  X.check();
  const Eigen::Index q = opts.extended_output ? ed.n_i : ed.n;
  if (X.input_dim() != ed.n_i || X.output_dim() != q)
    throw InvalidParameter("supply rate dimensions do not match the chain");
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(X.X22, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().maxCoeff() < 0.0)) throw InvalidParameter("local design requires X22 < 0");
  LocalProblem lp;
  const MatrixXd neg_inv = -X.X22.inverse();
  add_local_lmi(lp, ed, opts.extended_output, AffineExpr(MatrixXd(0.5 * (neg_inv + neg_inv.transpose()))),
                X.X12, AffineExpr(X.X11));
  const SolveResult r = lp.prob.solve(opts.solver);
  if (!r.optimal()) fail(r, "local design");

  LocalDesign d;
  d.method = LocalMethod::Basic;
  d.extended_output = opts.extended_output;
  d.nu = X.nu;
  d.passivity_rho = X.rho;
  d.rho_tilde = X.rho != 0.0 ? 1.0 / X.rho : 0.0;
  finish_local(d, r);
  return d;
}

MatrixXd necessary_condition_matrix(double p, double nu, double rho, double gamma_tilde, int N) {
  const double c = 1.0 - 1.0 / N;
  MatrixXd M(4, 4);
  M << -p * nu, 0, 0, p * nu,  //
      0, 1, c, 0,              //
      0, c, p * rho, 0.5 * p,  //
      p * nu, 0, 0.5 * p, gamma_tilde;
  return M;
}

namespace {

struct ImprovedPoint {
  RhoGridPoint info;
  SolveResult result;
};

ImprovedPoint solve_improved_point(const ErrorDynamics& ed, double p, int N, double rho,
                                   const LocalDesignOptions& opts) {
  ImprovedPoint pt;
  pt.info.rho = rho;
  const double c = 1.0 - 1.0 / N;
  if (p * rho <= c * c) {
    pt.info.status = SolveStatus::Infeasible;
    pt.info.note = "p rho <= (1 - 1/N)^2";
    return pt;
  }
  const Eigen::Index ni = ed.n_i;
  const Eigen::Index q = opts.extended_output ? ni : ed.n;
  LocalProblem lp;
  lp.nu = lp.prob.scalar("nu");
  lp.gamma = lp.prob.scalar("gamma_tilde");
  add_local_lmi(lp, ed, opts.extended_output, AffineExpr(MatrixXd((1.0 / rho) * Id(q))),
                half_identity(ni, q), lmi::scale(lp.nu, -Id(ni)));

  // Entries affine in (nu, gamma_tilde) at fixed p, rho.
  MatrixXd base = necessary_condition_matrix(p, 0.0, rho, 0.0, N);
  MatrixXd dnu = MatrixXd::Zero(4, 4), dgam = MatrixXd::Zero(4, 4);
  dnu(0, 0) = -p;
  dnu(0, 3) = dnu(3, 0) = p;
  dgam(3, 3) = 1.0;
  lp.prob.add_strict("necessary",
                     AffineExpr(base) + lmi::scale(lp.nu, dnu) + lmi::scale(lp.gamma, dgam));
  lp.prob.minimize(lp.gamma);
  pt.result = lp.prob.solve(opts.solver);
  pt.info.status = pt.result.status;
  if (pt.result.optimal()) pt.info.gamma_tilde = pt.result.scalar("gamma_tilde");
  pt.info.note = pt.result.message;
  return pt;
}

bool better(const ImprovedPoint& a, const ImprovedPoint& b) {
  if (!a.result.optimal()) return false;
  if (!b.result.optimal()) return true;
  if (a.info.gamma_tilde != b.info.gamma_tilde) return a.info.gamma_tilde < b.info.gamma_tilde;
  return a.info.rho < b.info.rho;
}

}  // namespace

LocalDesign design_local_improved(const ErrorDynamics& ed, double p_i, int N,
                                  const LocalDesignOptions& opts) {
  if (!(p_i > 0.0)) throw InvalidParameter("p_i must be positive");
  if (N < 2) throw InvalidParameter("improved local design needs N >= 2");
  std::vector<double> grid = opts.rho_grid.empty() ? default_rho_grid() : opts.rho_grid;
  for (double r : grid)
    if (!(r > 0.0)) throw InvalidParameter("output passivity grid must be positive");
  std::sort(grid.begin(), grid.end());

  std::vector<ImprovedPoint> pts(grid.size());
  parallel_for(static_cast<int>(grid.size()), opts.jobs,
               [&](int k) { pts[k] = solve_improved_point(ed, p_i, N, grid[k], opts); });
  int best = -1;
  for (int k = 0; k < static_cast<int>(pts.size()); ++k)
    if (best < 0 ? pts[k].result.optimal() : better(pts[k], pts[best])) best = k;

  if (best >= 0 && opts.refine) {
    std::vector<double> extra;
    if (best > 0) extra.push_back(std::sqrt(grid[best - 1] * grid[best]));
    if (best + 1 < static_cast<int>(grid.size())) extra.push_back(std::sqrt(grid[best] * grid[best + 1]));
    std::vector<ImprovedPoint> more(extra.size());
    parallel_for(static_cast<int>(extra.size()), opts.jobs,
                 [&](int k) { more[k] = solve_improved_point(ed, p_i, N, extra[k], opts); });
    for (auto& m : more) pts.push_back(std::move(m));
    for (int k = 0; k < static_cast<int>(pts.size()); ++k)
      if (better(pts[k], pts[best])) best = k;
  }

  LocalDesign d;
  for (const auto& pt : pts) d.grid.push_back(pt.info);
  std::sort(d.grid.begin(), d.grid.end(),
            [](const RhoGridPoint& a, const RhoGridPoint& b) { return a.rho < b.rho; });
  if (best < 0) {
    std::ostringstream os;
    bool any_infeasible = false;
    os << "improved local design: no feasible grid point";
    for (const auto& g : d.grid) {
      os << "; rho=" << g.rho << " " << lmi::to_string(g.status) << " [" << g.note << "]";
      any_infeasible |= g.status == SolveStatus::Infeasible;
    }
    if (any_infeasible) throw InfeasibleError(os.str());
    throw NumericalError(os.str());
  }

  const SolveResult& r = pts[best].result;
  d.method = LocalMethod::Improved;
  d.extended_output = opts.extended_output;
  d.nu = r.scalar("nu");
  d.passivity_rho = pts[best].info.rho;
  d.rho_tilde = 1.0 / d.passivity_rho;
  d.gamma_tilde = pts[best].info.gamma_tilde;
  d.p_used = p_i;
  finish_local(d, r);
  return d;
}

namespace {

struct GlobalTerms {
  AffineExpr Kbar;
  std::vector<AffineExpr> p;  // 1x1 each
  AffineExpr gamma;           // 1x1
};

AffineExpr build_global_lmi(const NetworkSpec& net, const std::vector<ErrorDynamics>& eds,
                            const std::vector<LocalDesign>& local, const GlobalTerms& t) {
  const int N = net.num_chains(), n = net.inventories();
  std::vector<AffineExpr> Xp11, Xp11D, negXp22, rowsL;
  std::vector<MatrixXd> X12b, H;
  for (int i = 0; i < N; ++i) {
    const LocalDesign& d = local[i];
    const SupplyRate X = d.supply_rate();
    Xp11.push_back(lmi::scale(t.p[i], X.X11));
    Xp11D.push_back(lmi::scale(t.p[i], MatrixXd(X.X11 * eds[i].Dcal)));
    negXp22.push_back(lmi::scale(t.p[i], MatrixXd(-X.X22)));
    X12b.push_back(X.X11.inverse() * X.X12);
    H.push_back(d.extended_output ? eds[i].Ccal : Id(n));
  }
  std::vector<std::vector<AffineExpr>> Lgrid(N, std::vector<AffineExpr>(N));
  for (int i = 0; i < N; ++i) {
    const MatrixXd left = local[i].supply_rate().X11 * eds[i].Bcal;
    for (int j = 0; j < N; ++j) Lgrid[i][j] = left * t.Kbar.block(i * n, j * n, n, n) * H[j];
  }
  const AffineExpr L = lmi::block_matrix(Lgrid);
  const AffineExpr P11 = lmi::block_diag(Xp11);
  const AffineExpr P11D = lmi::block_diag(Xp11D);
  const MatrixXd X12 = block_diagonal(X12b);
  const MatrixXd X21 = X12.transpose();
  const MatrixXd EH = consensus_matrix(N, n) * block_diagonal(H);
  const auto nN = static_cast<Eigen::Index>(N) * n;
  const Eigen::Index nbar = P11.rows();

  const AffineExpr yy = -(L.transpose() * X12) - X21 * L + lmi::block_diag(negXp22);
  const AffineExpr yr = -(X21 * P11D);
  return lmi::block_matrix({
      {P11, AffineExpr::zero(nbar, nN), L, P11D},
      {AffineExpr(), AffineExpr::identity(nN), AffineExpr(EH), AffineExpr::zero(nN, nN)},
      {L.transpose(), AffineExpr(MatrixXd(EH.transpose())), yy, yr},
      {P11D.transpose(), AffineExpr::zero(nN, nN), yr.transpose(), lmi::scale(t.gamma, Id(nN))},
  });
}

void check_global_inputs(const NetworkSpec& net, const std::vector<ErrorDynamics>& eds,
                         const std::vector<LocalDesign>& local) {
  const int N = net.num_chains();
  if (static_cast<int>(eds.size()) != N || static_cast<int>(local.size()) != N)
    throw InvalidParameter("one error model and one local design per chain required");
  for (int i = 0; i < N; ++i) {
    if (local[i].P.rows() != eds[i].n_i) throw InvalidParameter("local design dimension mismatch");
    if (!(local[i].nu < 0.0))
      throw InvalidParameter("global co-design needs nu_i < 0 in every local design");
    if (!(local[i].passivity_rho > 0.0))
      throw InvalidParameter("global co-design needs a positive output passivity index");
  }
}

}  // namespace

MatrixXd global_lmi_value(const NetworkSpec& net, const std::vector<ErrorDynamics>& eds,
                          const std::vector<LocalDesign>& local, const MatrixXd& Kbar,
                          const VectorXd& p, double gamma_tilde) {
  check_global_inputs(net, eds, local);
  GlobalTerms t;
  t.Kbar = AffineExpr(Kbar);
  for (Eigen::Index i = 0; i < p.size(); ++i) t.p.emplace_back(MatrixXd::Constant(1, 1, p(i)));
  t.gamma = AffineExpr(MatrixXd::Constant(1, 1, gamma_tilde));
  return build_global_lmi(net, eds, local, t).constant();
}

GlobalSynthesis codesign_global(const NetworkSpec& net, const std::vector<ErrorDynamics>& eds,
                                const std::vector<LocalDesign>& local, bool constrain_to_reference,
                                const GlobalDesignOptions& opts) {
  check_global_inputs(net, eds, local);
  const int N = net.num_chains(), n = net.inventories();
  const int nN = N * n;
  if (constrain_to_reference && !net.reference_topology)
    throw InvalidParameter("constrained co-design needs a reference topology");
  if (net.cost.rows() != nN || net.cost.cols() != nN)
    throw InvalidParameter("cost matrix has the wrong shape");

  LmiProblem prob;
  GlobalTerms t;
  const Var Kbar = prob.matrix("Kbar", nN, nN);
  t.Kbar = Kbar;
  std::vector<Var> p;
  for (int i = 0; i < N; ++i) {
    p.push_back(prob.scalar("p" + std::to_string(i)));
    prob.add_strict("p" + std::to_string(i) + ">0", p.back());
    t.p.push_back(p.back());
  }
  const Var gamma = prob.scalar("gamma_tilde", 0.0, net.gamma_bar);
  t.gamma = gamma;

  auto fixed_zero = [&](int i, int j) {
    return constrain_to_reference && i != j && net.reference_topology->count({i, j}) == 0;
  };
  AffineExpr objective = net.c0 * AffineExpr(gamma);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (fixed_zero(i, j)) {
        prob.add_equality("topology(" + std::to_string(i) + "," + std::to_string(j) + ")",
                          Kbar.block(i * n, j * n, n, n));
        continue;
      }
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const int r = i * n + k, c = j * n + l;
          const double w = net.cost(r, c);
          if (!(w > 0.0)) continue;
          const Var s = prob.scalar("s" + std::to_string(r) + "_" + std::to_string(c));
          const AffineExpr e = Kbar.block(r, c, 1, 1);
          prob.add_psd("abs+", s - e);
          prob.add_psd("abs-", s + e);
          objective += w * AffineExpr(s);
        }
    }
  prob.add_strict("coupling", build_global_lmi(net, eds, local, t));
  prob.minimize(objective);

  GlobalSynthesis out;
  out.result = prob.solve(opts.solver);
  if (out.result.status == SolveStatus::Infeasible && net.gamma_bar < kRelaxedGammaBar) {
    // name the culprit: the gain budget or the coupling LMI itself
    NetworkSpec relaxed = net;
    relaxed.gamma_bar = kRelaxedGammaBar;
    const GlobalSynthesis r = codesign_global(relaxed, eds, local, constrain_to_reference, opts);
    if (r.result.optimal())
      out.result.message = "constraint gamma_tilde<=gamma_bar fails: gamma_bar=" + std::to_string(net.gamma_bar) +
                           " but the coupling LMI needs gamma_tilde >= " + std::to_string(r.design.gamma_tilde);
    else
      out.result.message = "constraint 'coupling' is infeasible for these local designs (" + out.result.message + ")";
  }
  if (!out.result.optimal()) return out;

  GlobalDesign& g = out.design;
  g.N = N;
  g.n = n;
  g.constrained = constrain_to_reference;
  g.Kbar = out.result.value("Kbar");
  g.p.resize(N);
  for (int i = 0; i < N; ++i) g.p(i) = out.result.scalar("p" + std::to_string(i));
  g.gamma_tilde = out.result.scalar("gamma_tilde");
  g.gamma_binding = g.gamma_tilde >= net.gamma_bar - 1e-6 * (1.0 + net.gamma_bar);
  g.objective = out.result.objective_value;
  g.K = g.Kbar;
  for (int i = 0; i < N; ++i) g.K.middleRows(i * n, n) /= g.p(i);
  g.L = recover_L_from_K(g.K, N, n);
  g.min_eigenvalue = out.result.min_certificate();
  for (const auto& c : out.result.certificates)
    if (c.name == "coupling") g.min_eigenvalue = c.min_eigenvalue;
  return out;
}

MatrixXd recover_L_from_K(const MatrixXd& K, int N, int n) {
  if (K.rows() != N * n || K.cols() != N * n) throw InvalidParameter("K has the wrong shape");
  MatrixXd L = -K;
  for (int i = 0; i < N; ++i) {
    MatrixXd diag = MatrixXd::Zero(n, n);
    for (int j = 0; j < N; ++j) diag += K.block(i * n, j * n, n, n);
    L.block(i * n, i * n, n, n) = diag;
  }
  return L;
}

std::set<ChainPair> Topology::chain_edges() const {
  std::set<ChainPair> s;
  for (const auto& e : edges) s.insert({e.from_chain, e.to_chain});
  return s;
}

Topology extract_topology(const MatrixXd& K, int N, int n, double threshold_rel) {
  if (!(threshold_rel > 0.0)) throw InvalidParameter("threshold must be positive");
  Topology t;
  t.N = N;
  t.n = n;
  const double mx = K.size() ? K.cwiseAbs().maxCoeff() : 0.0;
  if (!(mx > 0.0)) return t;
  const double cut = threshold_rel * mx;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double w = std::abs(K(i * n + k, j * n + l));
          if (!(w > cut)) continue;
          TopologyEdge e{j, i, l, k, w};
          (i == j ? t.self_loops : t.edges).push_back(e);
        }
  return t;
}

Topology extract_topology(const GlobalDesign& gd, double threshold_rel) {
  return extract_topology(gd.K, gd.N, gd.n, threshold_rel);
}

const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::LSSC: return "LSSC";
    case StrategyKind::LSFC: return "LSFC";
    case StrategyKind::GCC: return "GCC";
    case StrategyKind::DCC_C: return "DCC-C";
    case StrategyKind::DCC_U: return "DCC-U";
  }
  return "?";
}

StrategyKind parse_strategy(const std::string& s) {
  std::string u;
  for (char c : s) u += static_cast<char>(c == '_' ? '-' : std::toupper(static_cast<unsigned char>(c)));
  for (auto k : all_strategies())
    if (u == to_string(k)) return k;
  throw InvalidParameter("unknown strategy '" + s + "'");
}

const std::vector<StrategyKind>& all_strategies() {
  static const std::vector<StrategyKind> v{StrategyKind::LSSC, StrategyKind::LSFC, StrategyKind::GCC,
                                           StrategyKind::DCC_C, StrategyKind::DCC_U};
  return v;
}

NetworkDesign synthesize_network(const NetworkSpec& network, StrategyKind kind,
                                 const PipelineOptions& opts) {
  const NetworkSpec net = validate_network(network);
  const int N = net.num_chains();
  std::vector<ErrorDynamics> eds;
  for (const auto& c : net.chains) eds.push_back(build_chain_error_dynamics(c));

  NetworkDesign out;
  out.kind = kind;
  if (kind == StrategyKind::LSSC || kind == StrategyKind::GCC) return out;
  if (kind == StrategyKind::LSFC) {
    for (const auto& ed : eds) out.local.push_back(design_local_basic(ed, opts.local));
    return out;
  }

  const bool constrained = kind == StrategyKind::DCC_C;
  VectorXd p = VectorXd::Constant(N, opts.p_local);
  for (int round = 0; round <= opts.p_feedback_iterations; ++round) {
    std::vector<LocalDesign> local;
    for (int i = 0; i < N; ++i)
      local.push_back(N >= 2 ? design_local_improved(eds[i], p(i), N, opts.local)
                             : design_local_basic(eds[i], opts.local));
    GlobalSynthesis g = codesign_global(net, eds, local, constrained, opts.global);
    if (!g.result.optimal()) {
      if (round > 0) break;  // keep the previous feasible round
      fail(g.result, std::string("global co-design (") + to_string(kind) + ")");
    }
    out.local = std::move(local);
    out.global = g.design;
    p = g.design.p;
  }
  return out;
}

}  // namespace scn
