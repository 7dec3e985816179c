// The shared environment: UAV fleet, ground users and the per-step physics
// that ties channel, energy, telemetry and rewards together.
#pragma once

#include "uavee/config.hpp"
#include "uavee/coordination.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace uavee {

/// One logged environment step.
struct MetricsRow {
  std::size_t episode = 0;
  std::size_t step = 0;  // 1-based within the episode

  std::vector<Position> positions;
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::vector<std::size_t> scores;
  std::vector<double> step_energy;
  std::vector<double> throughput;  // bits/s delivered by each UAV
  std::vector<bool> alive;
  std::vector<std::uint64_t> overhead_bits;

  double connected_pct = 0.0;
  double total_energy = 0.0;  // this step, all UAVs
  double fairness = 1.0;
  double system_ee = 0.0;     // grand-total ratio over the episode so far
  std::uint64_t step_overhead_bits = 0;
  std::uint64_t cumulative_overhead_bits = 0;
};

struct StepResult {
  /// Full 23-entry observation for every UAV after the step.
  std::vector<StateVector> observations;
  std::vector<double> rewards;
  /// UAV was alive when the step began (its action was applied).
  std::vector<bool> acted;
  /// UAV ran out of energy during this step.
  std::vector<bool> died;
  std::size_t ignored_actions = 0;
  MetricsRow row;
};

class World {
 public:
  /// `layout_seed` fixes the initial user layout; `episode_seed` drives UAV
  /// spawns and user motion.
  World(const ScenarioConfig& config, std::uint64_t layout_seed);

  /// Starts an episode and returns the initial observations.
  std::vector<StateVector> reset(std::uint64_t episode_seed, std::size_t episode_index = 0);

  /// Advances one step. `actions` holds one entry per UAV; entries for dead
  /// UAVs are ignored.
  StepResult step(std::span<const Action> actions);

  /// Which UAVs transmit telemetry (and pay for it in the overhead ledger).
  void set_communicating(std::vector<bool> flags);

  const ScenarioConfig& config() const { return config_; }
  const std::vector<UavState>& uavs() const { return uavs_; }
  std::vector<Position> user_positions() const;
  const std::vector<UserPopulation>& populations() const { return populations_; }
  const std::vector<std::size_t>& scores() const { return scores_; }
  const OverheadLedger& ledger() const { return ledger_; }
  const StateNorms& norms() const { return norms_; }
  const std::vector<NeighborTable>& neighbor_tables() const { return tables_; }
  std::size_t step_index() const { return step_; }
  std::size_t num_users() const;
  bool any_alive() const;

  /// Physical move for `action` from `from`: scaled by the step distances
  /// and clamped to the area.
  Position propose_move(const Position& from, Action action) const;

 private:
  void associate();
  void exchange_telemetry();
  std::size_t neighborhood_total(std::size_t uav) const;
  StateVector observe(std::size_t uav) const;

  ScenarioConfig config_;
  StateNorms norms_;
  std::vector<UserPopulation> initial_populations_;
  std::vector<UserPopulation> populations_;
  std::vector<UavState> uavs_;
  std::vector<EnergyBudget> budgets_;
  std::vector<std::size_t> scores_;
  std::vector<double> throughput_;
  std::vector<NeighborTable> tables_;
  std::vector<std::size_t> prev_scores_;
  std::vector<double> prev_energy_;
  std::vector<std::size_t> prev_neighborhood_;
  std::vector<bool> communicating_;
  OverheadLedger ledger_;
  Rng rng_;
  std::size_t episode_ = 0;
  std::size_t step_ = 0;
  double episode_rate_sum_ = 0.0;
  double episode_energy_sum_ = 0.0;
};

}  // namespace uavee
