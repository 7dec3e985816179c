// Episode loop, training, evaluation and sweeps.
#pragma once

#include "uavee/checkpoint.hpp"
#include "uavee/metrics.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace uavee {

/// Independent 64-bit seed for (stream, index) under a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

namespace seed_stream {
inline constexpr std::uint64_t kTrainEpisode = 1;
inline constexpr std::uint64_t kEvalEpisode = 2;
inline constexpr std::uint64_t kAgent = 3;
inline constexpr std::uint64_t kRandomPolicy = 4;
inline constexpr std::uint64_t kEvalRandomPolicy = 5;
}  // namespace seed_stream

/// Uniform over the seven actions.
Action baseline_random(Rng& rng);

/// State size seen by an agent kind: 23 with telemetry, 5 without.
int state_size_for(AgentKind kind);

/// A UAV controller: a DDQN learner (with or without neighbour telemetry) or
/// the random baseline.
class Agent {
 public:
  static Agent learner(AgentKind kind, const ScenarioConfig& config, std::uint64_t seed,
                       std::uint64_t epsilon_decay_steps);
  static Agent random(std::uint64_t seed);
  static Agent from_checkpoint(AgentCheckpoint ckpt);

  AgentKind kind() const { return kind_; }
  bool learns() const { return learner_.has_value(); }
  DdqnAgent& ddqn() { return *learner_; }
  const DdqnAgent& ddqn() const { return *learner_; }

  /// The part of the full observation this agent is allowed to see.
  StateVector view(const StateVector& full_state) const;
  Action act(const StateVector& full_state, bool explore);
  /// Stores and learns from a transition expressed in full observations.
  void learn(const StateVector& s, Action a, double r, const StateVector& next, bool terminal);

 private:
  Agent(AgentKind kind, std::optional<DdqnAgent> learner, std::uint64_t seed);

  AgentKind kind_;
  std::optional<DdqnAgent> learner_;
  Rng rng_;
};

std::vector<Agent> make_agents(const ScenarioConfig& config, std::uint64_t seed);

/// Runs until max_steps or until every UAV is dead. With `train`, every
/// acting learner stores its transition and updates; otherwise learners act
/// greedily.
EpisodeLog run_episode(World& world, std::vector<Agent>& agents, bool train, std::uint64_t episode_seed,
                       std::size_t episode_index);

struct TrainOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;                 // overrides config.seed
  std::optional<std::filesystem::path> resume_from;  // a checkpoint directory
  std::ostream* progress = nullptr;
};

struct TrainResult {
  std::vector<EpisodeSummary> episodes;
  std::vector<Agent> agents;
  std::uint64_t scenario_seed = 0;
  std::size_t episodes_completed = 0;  // including any resumed ones
};

/// In-memory training; `steps_csv` / `episodes_csv` receive logs when given.
TrainResult train_agents(const ScenarioConfig& config, std::uint64_t seed, std::vector<Agent> agents,
                         std::size_t first_episode, std::ostream* steps_csv, std::ostream* episodes_csv,
                         std::ostream* progress = nullptr,
                         const std::function<void(const TrainResult&)>& on_episode = {});

/// Trains and writes metadata.json, steps.csv, episodes.csv and
/// checkpoints/ under out_dir.
TrainResult train(const ScenarioConfig& config, const TrainOptions& options);

struct EvaluationSummary {
  std::size_t runs = 0;
  Stats system_ee;
  Stats connected_pct;
  Stats total_energy;
  Stats fairness;
  Stats overhead_bits;
  std::optional<double> reference_ee_mean;
  std::optional<Stats> normalized_ee;
  std::vector<EpisodeSummary> per_run;
};

/// Greedy runs over evaluation seeds on the scenario laid out by `layout_seed`.
/// `step_log_dir`, when set, receives one step CSV per run.
EvaluationSummary evaluate_agents(const ScenarioConfig& config, std::vector<Agent>& agents, std::size_t runs,
                                  std::uint64_t layout_seed, std::optional<double> reference_ee_mean = {},
                                  const std::optional<std::filesystem::path>& step_log_dir = {});

struct EvaluateOptions {
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> checkpoints;  // required unless every agent is random
  std::size_t runs = 20;
  std::optional<std::uint64_t> seed;
  std::optional<double> reference_ee_mean;
};

/// Loads checkpoints (validated against the config), evaluates and writes
/// summary.json, summary.csv and eval_runs.csv under out_dir.
EvaluationSummary evaluate(const ScenarioConfig& config, const EvaluateOptions& options);

/// Reads `system_ee.mean` from a summary.json written by `evaluate`.
double read_reference_ee(const std::filesystem::path& summary_json);

struct SweepOptions {
  std::filesystem::path out_dir;
  std::vector<std::size_t> uav_counts{2, 4, 6, 8, 10, 12};
  std::vector<AgentKind> agents{AgentKind::Cmad, AgentKind::Mad, AgentKind::Random};
  std::size_t runs = 20;
  std::optional<std::uint64_t> seed;
  std::ostream* progress = nullptr;
};

/// Train-then-evaluate for each (UAV count, agent kind); writes sweep.csv.
void sweep(const ScenarioConfig& config, const SweepOptions& options);

/// Thrown when checkpoints do not fit the scenario.
class CheckpointMismatch : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace uavee
