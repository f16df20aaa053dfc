#include "scn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "scn/parallel.hpp"

namespace scn {

VectorXd DisturbanceModel::overall_demand() const { return demand_means.rowwise().mean(); }

int DisturbanceModel::day_of(int step) const { return (step / steps_per_day) % 7; }

void DisturbanceModel::check() const {
  const int N = num_chains(), n = inventories();
  if (N < 1 || n < 1) throw InvalidParameter("disturbance model is empty");
  if (wbar_tr.rows() != N || wbar_tr.cols() != n)
    throw InvalidParameter("transport waste means must be N x n");
  if (demand_means.rows() != N || demand_means.cols() != 7)
    throw InvalidParameter("demand means must be N x 7");
  if (!(wbar_inv.array() > 0).all() || !(wbar_tr.array() > 0).all() ||
      !(demand_means.array() > 0).all())
    throw InvalidParameter("disturbance means must be positive");
  if (!(rel_std >= 0.0) || !std::isfinite(rel_std)) throw InvalidParameter("rel_std must be >= 0");
  for (double a : {alpha_waste, alpha_demand})
    if (!(a > 0.0 && a <= 1.0)) throw InvalidParameter("smoothing factor must lie in (0, 1]");
  if (steps_per_day < 1) throw InvalidParameter("steps_per_day must be >= 1");
}

DisturbanceModel random_disturbance_model(int N, int n, Rng& rng) {
  if (N < 1 || n < 1) throw InvalidParameter("need N, n >= 1");
  DisturbanceModel dm;
  dm.wbar_inv.resize(N, n);
  dm.wbar_tr.resize(N, n);
  dm.demand_means.resize(N, 7);
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < n; ++k) dm.wbar_inv(i, k) = 10 + 2 * rng.uniform_int(1, 5) + 2 * (i + 1);
    for (int k = 0; k < n; ++k) dm.wbar_tr(i, k) = 10 + 2 * rng.uniform_int(1, 5) + 2 * (i + 1);
    for (int d = 0; d < 7; ++d)
      dm.demand_means(i, d) = 100 + 2 * rng.uniform_int(1, 10 * N) + 20 * (i + 1);
  }
  return dm;
}

void apply_disturbance_means(NetworkSpec& net, const DisturbanceModel& dm) {
  dm.check();
  if (dm.num_chains() != net.num_chains() || dm.inventories() != net.inventories())
    throw InvalidParameter("disturbance model does not match the network");
  const VectorXd d = dm.overall_demand();
  for (int i = 0; i < net.num_chains(); ++i) {
    ChainSpec& c = net.chains[i];
    for (int k = 0; k < c.size(); ++k) {
      c.wbar_inv[k] = dm.wbar_inv(i, k);
      c.wbar_tr[k] = dm.wbar_tr(i, k);
    }
    c.dbar = d(i);
  }
}

VectorXd exponential_smoothing(const VectorXd& raw, double alpha) {
  VectorXd s(raw.size());
  for (Eigen::Index t = 0; t < raw.size(); ++t)
    s(t) = t == 0 ? raw(0) : alpha * raw(t) + (1.0 - alpha) * s(t - 1);
  return s;
}

Disturbances generate_disturbances(const DisturbanceModel& dm, int T, std::uint64_t seed,
                                   std::uint64_t realization) {
  dm.check();
  if (T < 1) throw InvalidParameter("horizon must be >= 1");
  const int N = dm.num_chains(), n = dm.inventories();
  Disturbances out;
  out.w_inv.resize(T, N * n);
  out.w_tr.resize(T, N * n);
  out.demand.resize(T, N);
  VectorXd raw(T);
  for (int i = 0; i < N; ++i) {
    Rng g_inv(stream_seed(seed, realization, i, kSignalInventoryWaste));
    Rng g_tr(stream_seed(seed, realization, i, kSignalTransportWaste));
    Rng g_d(stream_seed(seed, realization, i, kSignalDemand));
    for (int k = 0; k < n; ++k) {
      const double m_inv = dm.wbar_inv(i, k), m_tr = dm.wbar_tr(i, k);
      for (int t = 0; t < T; ++t) raw(t) = g_inv.normal(m_inv, dm.rel_std * m_inv);
      out.w_inv.col(i * n + k) = exponential_smoothing(raw, dm.alpha_waste);
      for (int t = 0; t < T; ++t) raw(t) = g_tr.normal(m_tr, dm.rel_std * m_tr);
      out.w_tr.col(i * n + k) = exponential_smoothing(raw, dm.alpha_waste);
    }
    for (int t = 0; t < T; ++t) {
      const double m = dm.demand_means(i, dm.day_of(t));
      raw(t) = g_d.normal(m, dm.rel_std * m);
    }
    out.demand.col(i) = exponential_smoothing(raw, dm.alpha_demand);
  }
  return out;
}

const char* to_string(FailureKind k) {
  return k == FailureKind::TransportLink ? "transport" : "inventory";
}

void SimConfig::check() const {
  if (T < 1) throw InvalidParameter("T must be >= 1");
  if (init_lo < 0 || init_hi < init_lo) throw InvalidParameter("init range must be 0 <= lo <= hi");
  if (!(xbar_norm > 0.0)) throw InvalidParameter("xbar_norm must be positive");
  for (const auto& f : failures) {
    if (f.time < 1 || f.time > T) throw InvalidParameter("failure time outside [1, T]");
    if (f.targets < 0) throw InvalidParameter("failure target count must be >= 0");
  }
}

Scenario draw_scenario(const NetworkSpec& net, const SimConfig& sc, const DisturbanceModel& dm) {
  sc.check();
  const int N = net.num_chains(), n = net.inventories();
  Scenario s;
  if (sc.deterministic) {
    dm.check();
    if (dm.num_chains() != N || dm.inventories() != n)
      throw InvalidParameter("disturbance model does not match the network");
    // constant means, with the overall demand rather than the weekly pattern
    const VectorXd d = dm.overall_demand();
    s.dist.w_inv.resize(sc.T, N * n);
    s.dist.w_tr.resize(sc.T, N * n);
    s.dist.demand.resize(sc.T, N);
    for (int i = 0; i < N; ++i) {
      for (int k = 0; k < n; ++k) {
        s.dist.w_inv.col(i * n + k).setConstant(dm.wbar_inv(i, k));
        s.dist.w_tr.col(i * n + k).setConstant(dm.wbar_tr(i, k));
      }
      s.dist.demand.col(i).setConstant(d(i));
    }
  } else {
    s.dist = generate_disturbances(dm, sc.T, sc.seed, sc.realization);
  }
  if (s.dist.w_inv.cols() != N * n) throw InvalidParameter("disturbance model does not match the network");

  for (int i = 0; i < N; ++i) {
    const ChainSpec& c = net.chains[i];
    if (sc.init == InitMode::Equilibrium) {
      s.inventory0.push_back(Eigen::Map<const VectorXd>(c.xbar.data(), c.size()));
      s.pipeline0.push_back(steady_state(c).xbar_tr);
    } else {
      Rng g(stream_seed(sc.seed, sc.realization, i, kSignalInitialState));
      VectorXd x(c.size()), p(c.total_delay());
      for (auto& v : x) v = g.uniform_int(sc.init_lo, sc.init_hi);
      for (auto& v : p) v = g.uniform_int(sc.init_lo, sc.init_hi);
      s.inventory0.push_back(x);
      s.pipeline0.push_back(p);
    }
  }

  // sites are drawn without replacement over the whole network
  Rng g(stream_seed(sc.seed, sc.realization, N, kSignalFailures));
  for (const auto& f : sc.failures) {
    const int total = N * n;
    if (f.targets > total)
      throw InvalidParameter("more failure targets than " + std::string(to_string(f.kind)) + " sites");
    std::vector<int> sites(total);
    std::iota(sites.begin(), sites.end(), 0);
    for (int j = 0; j < f.targets; ++j) {
      const int pick = g.uniform_int(j, total - 1);
      std::swap(sites[j], sites[pick]);
      s.failures.push_back({f.time, f.kind, sites[j] / n, sites[j] % n});
    }
  }
  return s;
}

SimResult simulate(const NetworkSpec& network, const ControllerSet& cs, const SimConfig& sc,
                   const Scenario& scn) {
  sc.check();
  const NetworkSpec net = validate_network(network);
  const int N = net.num_chains(), n = net.inventories(), T = sc.T;
  if (cs.N != N || cs.n != n) throw InvalidParameter("controller set does not match the network");
  if (scn.dist.w_inv.rows() < T || scn.dist.w_inv.cols() != N * n || scn.dist.demand.cols() != N)
    throw InvalidParameter("scenario does not cover the horizon");
  if (static_cast<int>(scn.inventory0.size()) != N || static_cast<int>(scn.pipeline0.size()) != N)
    throw InvalidParameter("scenario initial state has the wrong number of chains");

  // offsets of each link inside the flattened pipeline record
  std::vector<std::vector<int>> link_off(N);
  int total_pipe = 0;
  for (int i = 0; i < N; ++i) {
    const ChainSpec& c = net.chains[i];
    if (scn.inventory0[i].size() != n || scn.pipeline0[i].size() != c.total_delay())
      throw InvalidParameter("scenario initial state dimension mismatch");
    int off = 0;
    for (int k = 0; k < n; ++k) {
      link_off[i].push_back(off);
      off += c.tau[k];
    }
    total_pipe += off;
  }

  SimResult res;
  res.N = N;
  res.n = n;
  res.T = T;
  for (const auto& c : net.chains) res.tau.push_back(c.tau);
  res.xbar_norm = sc.xbar_norm;
  res.inventory.resize(T, N * n);
  res.pipeline.resize(T, total_pipe);
  res.orders.resize(T, N * n);
  res.y.resize(T, N * n);
  res.z.resize(T, N * n);
  res.r.resize(T, N * n);
  res.demand = scn.dist.demand.topRows(T);
  res.w_inv = scn.dist.w_inv.topRows(T);
  res.w_tr = scn.dist.w_tr.topRows(T);

  MeasuredState ms{scn.inventory0, scn.pipeline0};
  std::vector<VectorXd> y(N);
  const MatrixXd E = consensus_matrix(N, n);
  VectorXd ystack(N * n);

  for (int s = 0; s < T; ++s) {
    const int t = s + 1;
    for (const auto& f : scn.failures) {
      if (f.time != t) continue;
      if (f.kind == FailureKind::TransportLink)
        ms.pipeline[f.chain].segment(link_off[f.chain][f.index], net.chains[f.chain].tau[f.index]).setZero();
      else
        ms.inventory[f.chain](f.index) = 0.0;
      res.events.push_back(f);
    }

    int poff = 0;
    for (int i = 0; i < N; ++i) {
      const ChainSpec& c = net.chains[i];
      res.inventory.row(s).segment(i * n, n) = ms.inventory[i].transpose();
      res.pipeline.row(s).segment(poff, c.total_delay()) = ms.pipeline[i].transpose();
      poff += c.total_delay();
      y[i] = ms.inventory[i] - cs.x_target[i];
      ystack.segment(i * n, n) = y[i];
    }
    res.y.row(s) = ystack.transpose();
    res.z.row(s) = (E * ystack).transpose();

    std::vector<VectorXd> u = compute_orders(cs, ms);
    if (sc.clamp)
      for (auto& ui : u) ui = ui.cwiseMax(0.0);

    for (int i = 0; i < N; ++i) {
      const ChainSpec& c = net.chains[i];
      VectorXd& x = ms.inventory[i];
      VectorXd& p = ms.pipeline[i];
      const double d = scn.dist.demand(s, i);
      for (int k = 0; k < n; ++k) {
        const int col = i * n + k;
        const double w_tr = scn.dist.w_tr(s, col), w_inv = scn.dist.w_inv(s, col);
        const double delivered = p(link_off[i][k]) - w_tr;
        const double taken = k + 1 < n ? u[i](k + 1) : d;
        x(k) = (1.0 - c.perish_rate[k]) * x(k) + delivered - taken - w_inv;
        res.r(s, col) = (w_tr - c.wbar_tr[k]) + (w_inv - c.wbar_inv[k]) + (k + 1 == n ? d - c.dbar : 0.0);
      }
      if (sc.clamp) x = x.cwiseMax(0.0);
      for (int k = 0; k < n; ++k) {
        auto seg = p.segment(link_off[i][k], c.tau[k]);
        for (int j = 0; j + 1 < c.tau[k]; ++j) seg(j) = seg(j + 1);
        seg(c.tau[k] - 1) = u[i](k);
      }
      res.orders.row(s).segment(i * n, n) = u[i].transpose();
      if (!x.allFinite() || !p.allFinite())
        throw NumericalError("simulation state became non-finite at t=" + std::to_string(t));
    }
  }
  res.pmae = pmae(res.z, sc.xbar_norm);
  res.cpmae = cumulative_mean(res.pmae);
  return res;
}

SimResult simulate(const NetworkSpec& net, const ControllerSet& cs, const SimConfig& sc,
                   const DisturbanceModel& dm) {
  return simulate(net, cs, sc, draw_scenario(net, sc, dm));
}

VectorXd pmae(const MatrixXd& z, double xbar_norm) {
  if (!(xbar_norm > 0.0)) throw InvalidParameter("xbar_norm must be positive");
  if (z.cols() == 0) throw InvalidParameter("pmae needs at least one output");
  const double scale = 100.0 / (static_cast<double>(z.cols()) * xbar_norm);
  VectorXd out(z.rows());
  for (Eigen::Index t = 0; t < z.rows(); ++t) out(t) = z.row(t).lpNorm<1>() * scale;
  return out;
}

VectorXd cumulative_mean(const VectorXd& v) {
  VectorXd out(v.size());
  double acc = 0.0;
  for (Eigen::Index t = 0; t < v.size(); ++t) {
    acc += v(t);
    out(t) = acc / static_cast<double>(t + 1);
  }
  return out;
}

double empirical_gain(const SimResult& sr) {
  const double den = sr.r.squaredNorm();
  if (!(den > 0.0)) throw InvalidParameter("empirical gain undefined: disturbance energy is zero");
  return sr.z.squaredNorm() / den;
}

MonteCarloResult monte_carlo(const NetworkSpec& net, const std::vector<ControllerSet>& strategies,
                             const SimConfig& sc, const DisturbanceModel& dm, int R,
                             std::uint64_t base_seed, int jobs) {
  if (R < 1) throw InvalidParameter("R must be >= 1");
  if (strategies.empty()) throw InvalidParameter("no strategies to simulate");
  sc.check();
  const int S = static_cast<int>(strategies.size()), T = sc.T;

  // per[strategy][realization] holds that run's PMAE series
  std::vector<std::vector<VectorXd>> per(S, std::vector<VectorXd>(R));
  parallel_for(R, jobs, [&](int r) {
    SimConfig cfg = sc;
    cfg.seed = base_seed + static_cast<std::uint64_t>(r);
    cfg.realization = static_cast<std::uint64_t>(r);
    const Scenario scn = draw_scenario(net, cfg, dm);
    for (int s = 0; s < S; ++s) per[s][r] = simulate(net, strategies[s], cfg, scn).pmae;
  });

  MonteCarloResult out;
  out.R = R;
  out.base_seed = base_seed;
  for (int r = 0; r < R; ++r) out.seeds.push_back(base_seed + static_cast<std::uint64_t>(r));
  for (int s = 0; s < S; ++s) {
    StrategySeries ser;
    ser.kind = strategies[s].kind;
    VectorXd acc = VectorXd::Zero(T);
    std::vector<double> finals;
    for (int r = 0; r < R; ++r) {
      acc += per[s][r];
      finals.push_back(cumulative_mean(per[s][r])(T - 1));
    }
    ser.apmae = acc / static_cast<double>(R);
    ser.capmae = cumulative_mean(ser.apmae);
    ser.final_capmae = ser.capmae(T - 1);
    out.series.push_back(std::move(ser));
    out.final_cpmae.push_back(std::move(finals));
  }
  return out;
}

}  // namespace scn
