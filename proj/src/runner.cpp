#include "uavee/runner.hpp"

#include "json.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

namespace uavee {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 over a mix of the three inputs.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1) + 0xBF58476D1CE4E5B9ULL * (index + 1);
  for (int round = 0; round < 2; ++round) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
  }
  return z;
}

Action baseline_random(Rng& rng) {
  return action_from_index(std::uniform_int_distribution<int>(0, kNumActions - 1)(rng));
}

int state_size_for(AgentKind kind) { return kind == AgentKind::Cmad ? kCmadStateSize : kMadStateSize; }

// ---------------------------------------------------------------------------
// Agents

Agent::Agent(AgentKind kind, std::optional<DdqnAgent> learner, std::uint64_t seed)
    : kind_(kind), learner_(std::move(learner)), rng_(seed) {}

Agent Agent::learner(AgentKind kind, const ScenarioConfig& config, std::uint64_t seed,
                     std::uint64_t epsilon_decay_steps) {
  if (kind == AgentKind::Random) throw std::invalid_argument("Agent::learner: random agents do not learn");
  const auto& l = config.learning;
  EpsilonSchedule schedule{l.epsilon_start, l.epsilon_end, epsilon_decay_steps};
  return Agent(kind,
               DdqnAgent(l.network(state_size_for(kind)), l.replay_capacity, l.batch_size, schedule, seed),
               seed);
}

Agent Agent::random(std::uint64_t seed) { return Agent(AgentKind::Random, std::nullopt, seed); }

Agent Agent::from_checkpoint(AgentCheckpoint ckpt) {
  const AgentKind kind = parse_agent_kind(ckpt.agent_kind);
  if (kind == AgentKind::Random) throw CheckpointMismatch("checkpoint claims a random agent");
  return Agent(kind, std::move(ckpt.agent), 0);
}

StateVector Agent::view(const StateVector& full_state) const {
  if (kind_ == AgentKind::Cmad) return full_state;
  return full_state.head(kMadStateSize);
}

Action Agent::act(const StateVector& full_state, bool explore) {
  if (!learner_) return baseline_random(rng_);
  return learner_->act(view(full_state), explore);
}

void Agent::learn(const StateVector& s, Action a, double r, const StateVector& next, bool terminal) {
  if (!learner_) return;
  learner_->observe(Transition{view(s), a, r, view(next), terminal});
}

std::vector<Agent> make_agents(const ScenarioConfig& config, std::uint64_t seed) {
  const auto decay = static_cast<std::uint64_t>(config.learning.epsilon_decay_fraction *
                                                static_cast<double>(config.episodes * config.max_steps));
  std::vector<Agent> agents;
  for (std::size_t j = 0; j < config.num_uavs; ++j) {
    const AgentKind kind = config.agent_for(j);
    if (kind == AgentKind::Random)
      agents.push_back(Agent::random(derive_seed(seed, seed_stream::kRandomPolicy, j)));
    else
      agents.push_back(Agent::learner(kind, config, derive_seed(seed, seed_stream::kAgent, j), decay));
  }
  return agents;
}

// ---------------------------------------------------------------------------
// Episodes

EpisodeLog run_episode(World& world, std::vector<Agent>& agents, bool train, std::uint64_t episode_seed,
                       std::size_t episode_index) {
  const std::size_t n = world.config().num_uavs;
  if (agents.size() != n) throw std::invalid_argument("run_episode: one agent per UAV required");
  const std::size_t max_steps = world.config().max_steps;

  EpisodeLog log;
  auto obs = world.reset(episode_seed, episode_index);
  std::vector<Action> actions(n, Action::Hover);
  for (std::size_t t = 0; t < max_steps && world.any_alive(); ++t) {
    for (std::size_t j = 0; j < n; ++j)
      actions[j] = world.uavs()[j].alive ? agents[j].act(obs[j], train) : Action::Hover;
    StepResult res = world.step(actions);
    const bool timeout = t + 1 == max_steps;
    if (train) {
      for (std::size_t j = 0; j < n; ++j)
        if (res.acted[j] && agents[j].learns())
          agents[j].learn(obs[j], actions[j], res.rewards[j], res.observations[j], res.died[j] || timeout);
    }
    log.rows.push_back(std::move(res.row));
    obs = std::move(res.observations);
  }
  log.summary = summarize_episode(log.rows, episode_index, n);
  return log;
}

// ---------------------------------------------------------------------------
// Training

TrainResult train_agents(const ScenarioConfig& config, std::uint64_t seed, std::vector<Agent> agents,
                         std::size_t first_episode, std::ostream* steps_csv, std::ostream* episodes_csv,
                         std::ostream* progress, const std::function<void(const TrainResult&)>& on_episode) {
  World world(config, seed);
  TrainResult result;
  result.scenario_seed = seed;
  result.agents = std::move(agents);
  result.episodes_completed = first_episode;
  if (steps_csv) write_step_header(*steps_csv, config.num_uavs);
  if (episodes_csv) write_episode_header(*episodes_csv, config.num_uavs);

  for (std::size_t e = first_episode; e < first_episode + config.episodes; ++e) {
    EpisodeLog log = run_episode(world, result.agents, true, derive_seed(seed, seed_stream::kTrainEpisode, e), e);
    if (steps_csv)
      for (const auto& row : log.rows) write_step_row(*steps_csv, row);
    if (episodes_csv) write_episode_row(*episodes_csv, log.summary);
    if (progress) {
      double reward = 0.0;
      for (double r : log.summary.cumulative_reward) reward += r;
      *progress << "episode " << e << ": steps=" << log.summary.steps << " reward=" << reward
                << " ee=" << log.summary.system_ee << " connected%=" << log.summary.mean_connected_pct << '\n';
    }
    result.episodes.push_back(std::move(log.summary));
    result.episodes_completed = e + 1;
    if (on_episode) on_episode(result);
  }
  return result;
}

namespace {

void ensure_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok")) throw std::runtime_error("output directory is not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_run_manifest(const fs::path& dir, const ScenarioConfig& config, const TrainResult& result) {
  json kinds = json::array();
  for (const auto& a : result.agents) kinds.push_back(agent_kind_name(a.kind()));
  json j = {{"scenario_seed", result.scenario_seed},
            {"episodes_completed", result.episodes_completed},
            {"num_uavs", config.num_uavs},
            {"agents", kinds}};
  open_out(dir / "run.json") << j.dump(2) << '\n';
}

void write_checkpoints(const fs::path& dir, const ScenarioConfig& config, const TrainResult& result) {
  fs::create_directories(dir);
  for (std::size_t j = 0; j < result.agents.size(); ++j) {
    const Agent& a = result.agents[j];
    if (!a.learns()) continue;
    save_checkpoint(dir / ("agent_" + std::to_string(j) + ".json"), a.ddqn(), std::string(agent_kind_name(a.kind())),
                    static_cast<int>(j));
  }
  write_run_manifest(dir, config, result);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

struct LoadedRun {
  std::vector<Agent> agents;
  std::optional<std::uint64_t> scenario_seed;
  std::size_t episodes_completed = 0;
};

LoadedRun load_agents(const ScenarioConfig& config, const fs::path& dir, std::uint64_t random_seed,
                      std::uint64_t random_stream) {
  if (!fs::is_directory(dir)) throw CheckpointMismatch("checkpoint directory not found: " + dir.string());
  LoadedRun run;
  const fs::path manifest = dir / "run.json";
  if (fs::exists(manifest)) {
    const json m = read_json(manifest);
    if (m.at("num_uavs").get<std::size_t>() != config.num_uavs)
      throw CheckpointMismatch("checkpoints were trained with " + m.at("num_uavs").dump() + " UAVs, config has " +
                               std::to_string(config.num_uavs));
    run.scenario_seed = m.at("scenario_seed").get<std::uint64_t>();
    run.episodes_completed = m.at("episodes_completed").get<std::size_t>();
  }
  for (std::size_t j = 0; j < config.num_uavs; ++j) {
    const AgentKind kind = config.agent_for(j);
    if (kind == AgentKind::Random) {
      run.agents.push_back(Agent::random(derive_seed(random_seed, random_stream, j)));
      continue;
    }
    const fs::path file = dir / ("agent_" + std::to_string(j) + ".json");
    if (!fs::exists(file)) throw CheckpointMismatch("missing checkpoint " + file.string());
    AgentCheckpoint ckpt = load_checkpoint(file);
    if (ckpt.agent_kind != agent_kind_name(kind))
      throw CheckpointMismatch(file.string() + " holds a '" + ckpt.agent_kind + "' agent, config expects '" +
                               std::string(agent_kind_name(kind)) + "'");
    if (ckpt.agent.net.state_size() != state_size_for(kind) ||
        ckpt.agent.net.main().output_size() != kNumActions)
      throw CheckpointMismatch(file.string() + ": network shape does not match the state/action spaces");
    run.agents.push_back(Agent::from_checkpoint(std::move(ckpt)));
  }
  return run;
}

}  // namespace

TrainResult train(const ScenarioConfig& config, const TrainOptions& options) {
  ensure_writable_dir(options.out_dir);
  const std::uint64_t seed = options.seed.value_or(config.seed);

  std::vector<Agent> agents;
  std::size_t first_episode = 0;
  if (options.resume_from) {
    LoadedRun run = load_agents(config, *options.resume_from, seed, seed_stream::kRandomPolicy);
    if (run.scenario_seed && *run.scenario_seed != seed)
      throw CheckpointMismatch("resume: checkpoints belong to scenario seed " + std::to_string(*run.scenario_seed));
    agents = std::move(run.agents);
    first_episode = run.episodes_completed;
  } else {
    agents = make_agents(config, seed);
  }

  json meta = json::parse(config_to_json(config));
  meta["run"] = {{"scenario_seed", seed},
                 {"first_episode", first_episode},
                 {"rms_decay", config.learning.rms_decay},
                 {"rms_epsilon", config.learning.rms_epsilon},
                 {"bits_per_observation", config.bits_per_observation},
                 {"state_size_cmad", kCmadStateSize},
                 {"state_size_mad", kMadStateSize},
                 {"checkpoint_version", kCheckpointVersion}};
  open_out(options.out_dir / "metadata.json") << meta.dump(2) << '\n';

  std::optional<std::ofstream> steps;
  if (config.log_steps) steps.emplace(open_out(options.out_dir / "steps.csv"));
  std::ofstream episodes = open_out(options.out_dir / "episodes.csv");
  const fs::path ckpt_dir = options.out_dir / "checkpoints";

  auto on_episode = [&](const TrainResult& partial) {
    if (config.checkpoint_every == 0) return;
    const std::size_t done = partial.episodes_completed;
    if (done % config.checkpoint_every == 0 && done < first_episode + config.episodes)
      write_checkpoints(ckpt_dir / ("episode_" + std::to_string(done)), config, partial);
  };
  TrainResult result = train_agents(config, seed, std::move(agents), first_episode, steps ? &*steps : nullptr,
                                    &episodes, options.progress, on_episode);
  write_checkpoints(ckpt_dir, config, result);
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation

EvaluationSummary evaluate_agents(const ScenarioConfig& config, std::vector<Agent>& agents, std::size_t runs,
                                  std::uint64_t layout_seed, std::optional<double> reference_ee_mean,
                                  const std::optional<fs::path>& step_log_dir) {
  if (runs == 0) throw std::invalid_argument("evaluate: runs must be > 0");
  if (reference_ee_mean && !(*reference_ee_mean > 0)) throw std::invalid_argument("evaluate: reference EE must be > 0");
  World world(config, layout_seed);
  EvaluationSummary summary;
  summary.runs = runs;
  summary.reference_ee_mean = reference_ee_mean;
  if (step_log_dir) fs::create_directories(*step_log_dir);

  std::vector<double> ee, connected, energy, fairness, overhead, normalized;
  for (std::size_t k = 0; k < runs; ++k) {
    EpisodeLog log = run_episode(world, agents, false, derive_seed(layout_seed, seed_stream::kEvalEpisode, k), k);
    if (step_log_dir) {
      auto out = open_out(*step_log_dir / ("run_" + std::to_string(k) + ".csv"));
      write_step_header(out, config.num_uavs);
      for (const auto& row : log.rows) write_step_row(out, row);
    }
    const auto& s = log.summary;
    ee.push_back(s.system_ee);
    connected.push_back(s.mean_connected_pct);
    energy.push_back(s.total_energy);
    fairness.push_back(s.mean_fairness);
    overhead.push_back(static_cast<double>(s.overhead_bits));
    if (reference_ee_mean) normalized.push_back(s.system_ee / *reference_ee_mean);
    summary.per_run.push_back(s);
  }
  summary.system_ee = compute_stats(ee);
  summary.connected_pct = compute_stats(connected);
  summary.total_energy = compute_stats(energy);
  summary.fairness = compute_stats(fairness);
  summary.overhead_bits = compute_stats(overhead);
  if (reference_ee_mean) summary.normalized_ee = compute_stats(normalized);
  return summary;
}

namespace {

json stats_json(const Stats& s) {
  return {{"mean", s.mean}, {"std", s.stddev}, {"min", s.min}, {"p5", s.p5},
          {"p50", s.p50},   {"p95", s.p95},    {"max", s.max}};
}

void write_stats_row(std::ostream& out, const char* name, const Stats& s) {
  out << name << ',' << format_double(s.mean) << ',' << format_double(s.stddev) << ',' << format_double(s.min) << ','
      << format_double(s.p5) << ',' << format_double(s.p50) << ',' << format_double(s.p95) << ','
      << format_double(s.max) << '\n';
}

}  // namespace

EvaluationSummary evaluate(const ScenarioConfig& config, const EvaluateOptions& options) {
  ensure_writable_dir(options.out_dir);
  bool needs_checkpoints = false;
  for (std::size_t j = 0; j < config.num_uavs; ++j) needs_checkpoints |= config.agent_for(j) != AgentKind::Random;

  std::uint64_t seed = options.seed.value_or(config.seed);
  std::vector<Agent> agents;
  if (options.checkpoints && (needs_checkpoints || fs::exists(*options.checkpoints / "run.json"))) {
    LoadedRun run = load_agents(config, *options.checkpoints, seed, seed_stream::kEvalRandomPolicy);
    if (!options.seed && run.scenario_seed) seed = *run.scenario_seed;
    agents = std::move(run.agents);
    // Random agents follow the final evaluation seed.
    for (std::size_t j = 0; j < agents.size(); ++j)
      if (!agents[j].learns()) agents[j] = Agent::random(derive_seed(seed, seed_stream::kEvalRandomPolicy, j));
  } else if (needs_checkpoints) {
    throw CheckpointMismatch("evaluate: learning agents need --checkpoints");
  } else {
    for (std::size_t j = 0; j < config.num_uavs; ++j)
      agents.push_back(Agent::random(derive_seed(seed, seed_stream::kEvalRandomPolicy, j)));
  }

  std::optional<fs::path> step_dir;
  if (config.log_steps) step_dir = options.out_dir / "runs";
  EvaluationSummary summary = evaluate_agents(config, agents, options.runs, seed, options.reference_ee_mean, step_dir);

  json j = {{"runs", summary.runs},
            {"scenario_seed", seed},
            {"system_ee", stats_json(summary.system_ee)},
            {"connected_pct", stats_json(summary.connected_pct)},
            {"total_energy_j", stats_json(summary.total_energy)},
            {"fairness", stats_json(summary.fairness)},
            {"overhead_bits", stats_json(summary.overhead_bits)}};
  if (summary.normalized_ee) {
    j["reference_ee_mean"] = *summary.reference_ee_mean;
    j["normalized_ee"] = stats_json(*summary.normalized_ee);
  }
  open_out(options.out_dir / "summary.json") << j.dump(2) << '\n';

  auto csv = open_out(options.out_dir / "summary.csv");
  csv << "metric,mean,std,min,p5,p50,p95,max\n";
  write_stats_row(csv, "system_ee", summary.system_ee);
  write_stats_row(csv, "connected_pct", summary.connected_pct);
  write_stats_row(csv, "total_energy_j", summary.total_energy);
  write_stats_row(csv, "fairness", summary.fairness);
  write_stats_row(csv, "overhead_bits", summary.overhead_bits);
  if (summary.normalized_ee) write_stats_row(csv, "normalized_ee", *summary.normalized_ee);

  auto runs_csv = open_out(options.out_dir / "eval_runs.csv");
  write_episode_header(runs_csv, config.num_uavs);
  for (const auto& s : summary.per_run) write_episode_row(runs_csv, s);
  return summary;
}

double read_reference_ee(const fs::path& summary_json) {
  const json j = read_json(summary_json);
  try {
    const double mean = j.at("system_ee").at("mean").get<double>();
    if (!(mean > 0)) throw ConfigError("reference summary has a non-positive EE mean");
    return mean;
  } catch (const json::exception& e) {
    throw ConfigError(summary_json.string() + ": not an evaluation summary (" + e.what() + ")");
  }
}

// ---------------------------------------------------------------------------
// Sweeps

void sweep(const ScenarioConfig& config, const SweepOptions& options) {
  ensure_writable_dir(options.out_dir);
  const std::uint64_t seed = options.seed.value_or(config.seed);
  auto csv = open_out(options.out_dir / "sweep.csv");
  csv << "uavs,agent,runs,ee_mean,ee_std,connected_pct_mean,connected_pct_std,total_energy_mean,fairness_mean,"
         "overhead_bits_mean\n";

  for (std::size_t n : options.uav_counts) {
    for (AgentKind kind : options.agents) {
      ScenarioConfig cfg = config;
      cfg.num_uavs = n;
      cfg.agent = kind;
      cfg.agent_mix.clear();
      if (cfg.spawn_points.size() != n) cfg.spawn_points.clear();
      cfg.finalize();

      std::vector<Agent> agents;
      if (kind == AgentKind::Random) {
        for (std::size_t j = 0; j < n; ++j)
          agents.push_back(Agent::random(derive_seed(seed, seed_stream::kEvalRandomPolicy, j)));
      } else {
        TrainOptions topts;
        topts.out_dir = options.out_dir / ("uavs" + std::to_string(n) + "_" + std::string(agent_kind_name(kind)));
        topts.seed = seed;
        topts.progress = options.progress;
        agents = train(cfg, topts).agents;
      }
      const EvaluationSummary s = evaluate_agents(cfg, agents, options.runs, seed);
      csv << n << ',' << agent_kind_name(kind) << ',' << s.runs << ',' << format_double(s.system_ee.mean) << ','
          << format_double(s.system_ee.stddev) << ',' << format_double(s.connected_pct.mean) << ','
          << format_double(s.connected_pct.stddev) << ',' << format_double(s.total_energy.mean) << ','
          << format_double(s.fairness.mean) << ',' << format_double(s.overhead_bits.mean) << '\n';
      csv.flush();
      if (options.progress)
        *options.progress << "sweep uavs=" << n << " agent=" << agent_kind_name(kind) << " ee=" << s.system_ee.mean
                          << '\n';
    }
  }
}

}  // namespace uavee
