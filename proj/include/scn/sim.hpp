#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scn/model.hpp"
#include "scn/rng.hpp"
#include "scn/strategies.hpp"

namespace scn {

// Means and noise shape of waste and demand. Rows are chains.
struct DisturbanceModel {
  MatrixXd wbar_inv;      // N x n
  MatrixXd wbar_tr;       // N x n
  MatrixXd demand_means;  // N x 7, one mean per day of the week
  double rel_std = 0.2;
  double alpha_waste = 0.5;
  double alpha_demand = 0.1;
  int steps_per_day = 24;

  int num_chains() const { return static_cast<int>(wbar_inv.rows()); }
  int inventories() const { return static_cast<int>(wbar_inv.cols()); }
  VectorXd overall_demand() const;  // mean of the daily means
  int day_of(int step) const;       // step is 0-based
  void check() const;
};

// Waste means 10 + 2 randi(1,5) + 2i and daily demand means
// 100 + 2 randi(1,10N) + 20i with i the 1-based chain index.
DisturbanceModel random_disturbance_model(int N, int n, Rng& rng);

// Copies the means into the chain specs (dbar = mean of the daily means).
void apply_disturbance_means(NetworkSpec& net, const DisturbanceModel& dm);

// Streams of one realization. Matrices have one row per step; columns are
// chain-major (chain i inventory k at column i*n + k).
struct Disturbances {
  MatrixXd w_inv, w_tr;  // T x nN
  MatrixXd demand;       // T x N
};

// Signal ids for stream_seed(seed, realization, chain, signal).
enum Signal : std::uint64_t {
  kSignalInventoryWaste = 0,
  kSignalTransportWaste = 1,
  kSignalDemand = 2,
  kSignalInitialState = 3,
  kSignalFailures = 4,
};

Disturbances generate_disturbances(const DisturbanceModel& dm, int T, std::uint64_t seed,
                                   std::uint64_t realization = 0);

// x_s = alpha raw_s + (1 - alpha) x_{s-1}, x_0 = raw_0.
VectorXd exponential_smoothing(const VectorXd& raw, double alpha);

enum class FailureKind { TransportLink, Inventory };

const char* to_string(FailureKind k);

struct FailureEvent {
  int time = 1;  // 1-based step
  FailureKind kind = FailureKind::TransportLink;
  int targets = 1;
};

enum class InitMode { Random, Equilibrium };

struct SimConfig {
  int T = 720;
  std::uint64_t seed = 1;
  std::uint64_t realization = 0;
  InitMode init = InitMode::Random;
  int init_lo = 100, init_hi = 900;
  std::vector<FailureEvent> failures{{240, FailureKind::TransportLink, 2},
                                     {480, FailureKind::Inventory, 4}};
  double xbar_norm = 500.0;
  bool clamp = false;
  bool deterministic = false;  // disturbances fixed at their means

  void check() const;
};

struct FailureSite {
  int time = 1;
  FailureKind kind = FailureKind::TransportLink;
  int chain = 0, index = 0;  // index = link or inventory k
};

// Everything random in one realization, shared by all strategies.
struct Scenario {
  Disturbances dist;
  std::vector<VectorXd> inventory0, pipeline0;
  std::vector<FailureSite> failures;
};

Scenario draw_scenario(const NetworkSpec& net, const SimConfig& sc, const DisturbanceModel& dm);

struct SimResult {
  int N = 0, n = 0, T = 0;
  std::vector<std::vector<int>> tau;  // link delays, for naming pipeline columns
  MatrixXd inventory;  // T x nN, state at the start of each step
  MatrixXd pipeline;   // T x (total delay)
  MatrixXd orders;     // T x nN
  MatrixXd y, z, r;    // T x nN
  MatrixXd demand;     // T x N
  MatrixXd w_inv, w_tr;
  VectorXd pmae, cpmae;
  std::vector<FailureSite> events;
  double xbar_norm = 500.0;
};

SimResult simulate(const NetworkSpec& net, const ControllerSet& cs, const SimConfig& sc,
                   const Scenario& scenario);
SimResult simulate(const NetworkSpec& net, const ControllerSet& cs, const SimConfig& sc,
                   const DisturbanceModel& dm);

// PMAE(t) = |z(t)|_1 / (nN) * 100 / Xbar for every row of z.
VectorXd pmae(const MatrixXd& z, double xbar_norm);
VectorXd cumulative_mean(const VectorXd& v);

// sum |z|^2 / sum |r|^2; throws when r carries no energy.
double empirical_gain(const SimResult& sr);

struct StrategySeries {
  StrategyKind kind = StrategyKind::LSSC;
  VectorXd apmae, capmae;
  double final_capmae = 0.0;
};

struct MonteCarloResult {
  int R = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<StrategySeries> series;
  std::vector<std::vector<double>> final_cpmae;  // [strategy][realization]
};

// Realization r uses seed base_seed + r with draws shared by all strategies.
MonteCarloResult monte_carlo(const NetworkSpec& net, const std::vector<ControllerSet>& strategies,
                             const SimConfig& sc, const DisturbanceModel& dm, int R,
                             std::uint64_t base_seed, int jobs = 1);

}  // namespace scn
