#include "uavee/world.hpp"

#include <algorithm>
#include <stdexcept>

namespace uavee {

namespace {

double max_step_energy(const ScenarioConfig& c) {
  const double max_step = std::max({c.step_x, c.step_y, c.step_z});
  const double v_max = std::min(max_step / c.step_duration, c.max_velocity);
  return c.step_duration * std::max(propulsion_power(0.0, c.power), propulsion_power(v_max, c.power));
}

std::vector<UserPopulation> build_populations(const ScenarioConfig& c, Rng& rng) {
  std::vector<UserPopulation> pops;
  if (c.users_csv) {
    LoadedUsers loaded = load_users_csv(c.users_csv->path, c.users_csv->origin, c.area);
    if (!loaded.static_positions.empty())
      pops.push_back(make_population(MobilityModel::Static, std::move(loaded.static_positions), c.area,
                                     c.mobility, rng));
    if (!loaded.mobile_positions.empty())
      pops.push_back(make_population(c.users_csv->mobile_model, std::move(loaded.mobile_positions), c.area,
                                     c.mobility, rng));
  }
  const std::pair<MobilityModel, std::size_t> synthetic[] = {
      {MobilityModel::Static, c.users.static_users},
      {MobilityModel::RandomWalk, c.users.random_walk},
      {MobilityModel::RandomWaypoint, c.users.random_waypoint},
      {MobilityModel::GaussMarkov, c.users.gauss_markov},
  };
  for (const auto& [model, count] : synthetic)
    if (count > 0) pops.push_back(spawn_population(model, count, c.area, c.mobility, rng));
  std::size_t total = 0;
  for (const auto& p : pops) total += p.size();
  if (total == 0) throw std::runtime_error("scenario has no ground users inside the area");
  return pops;
}

std::vector<Position> spawn_uavs(const ScenarioConfig& c, Rng& rng) {
  if (!c.spawn_points.empty()) return c.spawn_points;
  std::uniform_real_distribution<double> ux(c.area.x_min, c.area.x_max);
  std::uniform_real_distribution<double> uy(c.area.y_min, c.area.y_max);
  std::vector<Position> out;
  for (std::size_t attempt = 0; out.size() < c.num_uavs; ++attempt) {
    if (attempt > 100'000) throw std::runtime_error("cannot place UAVs at least d_col apart in the area");
    const Position p(ux(rng), uy(rng), c.area.h_min);
    const bool clear = std::all_of(out.begin(), out.end(), [&](const Position& q) { return distance3d(p, q) >= c.d_col; });
    if (clear) out.push_back(p);
  }
  return out;
}

}  // namespace

World::World(const ScenarioConfig& config, std::uint64_t layout_seed)
    : config_(config), ledger_(config.num_uavs, config.bits_per_observation), rng_(layout_seed) {
  initial_populations_ = build_populations(config_, rng_);
  norms_.area = config_.area;
  norms_.max_users = static_cast<double>(num_users());
  norms_.energy_scale = max_step_energy(config_);
  norms_.distance_scale = config_.area.diagonal();
  communicating_.assign(config_.num_uavs, false);
  for (std::size_t j = 0; j < config_.num_uavs; ++j) communicating_[j] = config_.agent_for(j) == AgentKind::Cmad;
}

std::size_t World::num_users() const {
  std::size_t n = 0;
  for (const auto& p : initial_populations_) n += p.size();
  return n;
}

bool World::any_alive() const {
  return std::any_of(uavs_.begin(), uavs_.end(), [](const UavState& u) { return u.alive; });
}

std::vector<Position> World::user_positions() const {
  std::vector<Position> out;
  for (const auto& pop : populations_) out.insert(out.end(), pop.positions.begin(), pop.positions.end());
  return out;
}

void World::set_communicating(std::vector<bool> flags) {
  if (flags.size() != config_.num_uavs) throw std::invalid_argument("set_communicating: one flag per UAV");
  communicating_ = std::move(flags);
}

std::vector<StateVector> World::reset(std::uint64_t episode_seed, std::size_t episode_index) {
  rng_.seed(episode_seed);
  episode_ = episode_index;
  step_ = 0;
  episode_rate_sum_ = 0.0;
  episode_energy_sum_ = 0.0;
  populations_ = initial_populations_;
  ledger_ = OverheadLedger(config_.num_uavs, config_.bits_per_observation);

  const auto spawns = spawn_uavs(config_, rng_);
  const double hover_energy = config_.step_duration * propulsion_power(0.0, config_.power);
  uavs_.assign(config_.num_uavs, UavState{});
  budgets_.assign(config_.num_uavs, EnergyBudget(config_.e_max(), config_.step_duration));
  for (std::size_t j = 0; j < config_.num_uavs; ++j) {
    uavs_[j].id = static_cast<int>(j);
    uavs_[j].position = spawns[j];
    uavs_[j].step_energy = hover_energy;
  }
  associate();
  exchange_telemetry();

  prev_scores_ = scores_;
  prev_energy_.assign(config_.num_uavs, hover_energy);
  prev_neighborhood_.resize(config_.num_uavs);
  std::vector<StateVector> obs;
  for (std::size_t j = 0; j < config_.num_uavs; ++j) {
    prev_neighborhood_[j] = neighborhood_total(j);
    obs.push_back(observe(j));
  }
  return obs;
}

Position World::propose_move(const Position& from, Action action) const {
  const auto dir = action_direction(action);
  Position to = from + Position(dir[0] * config_.step_x, dir[1] * config_.step_y, dir[2] * config_.step_z);
  const AreaBounds& a = config_.area;
  to.x() = std::clamp(to.x(), a.x_min, a.x_max);
  to.y() = std::clamp(to.y(), a.y_min, a.y_max);
  to.z() = std::clamp(to.z(), a.h_min, a.h_max);
  return to;
}

void World::associate() {
  std::vector<Position> positions;
  std::vector<bool> alive;
  for (const auto& u : uavs_) {
    positions.push_back(u.position);
    alive.push_back(u.alive);
  }
  const auto users = user_positions();
  const AssociationMap assoc = associate_users(users, positions, alive, config_.channel);
  scores_ = connectivity_scores(assoc);
  throughput_ = assoc.throughput_per_uav();
}

void World::exchange_telemetry() {
  // Publish phase: every alive UAV's report is fixed before anyone reads.
  std::vector<std::size_t> published(scores_);
  for (std::size_t j = 0; j < uavs_.size(); ++j)
    if (!uavs_[j].alive) published[j] = 0;
  tables_.assign(uavs_.size(), NeighborTable{});
  for (std::size_t j = 0; j < uavs_.size(); ++j)
    tables_[j] = nearest_neighbors(static_cast<int>(j), uavs_, published, config_.range());
}

std::size_t World::neighborhood_total(std::size_t uav) const {
  return scores_[uav] + tables_[uav].total_score();
}

StateVector World::observe(std::size_t uav) const {
  return assemble_state(uavs_[uav], scores_[uav], tables_[uav], norms_);
}

StepResult World::step(std::span<const Action> actions) {
  const std::size_t n = config_.num_uavs;
  if (actions.size() != n) throw std::invalid_argument("env step: expected one action per UAV");
  if (uavs_.empty()) throw std::logic_error("env step: reset() was not called");

  StepResult result;
  result.acted.assign(n, false);
  result.died.assign(n, false);
  ++step_;

  // (1) Moves in ascending id order; a move that would come within d_col of
  // another alive UAV becomes a hover.
  std::vector<double> speed(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    UavState& u = uavs_[j];
    if (!u.alive) {
      if (actions[j] != Action::Hover) ++result.ignored_actions;
      u.velocity.setZero();
      continue;
    }
    result.acted[j] = true;
    Position target = propose_move(u.position, actions[j]);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j || !uavs_[k].alive) continue;
      if (distance3d(target, uavs_[k].position) < config_.d_col) {
        target = u.position;
        break;
      }
    }
    const Position displacement = target - u.position;
    u.velocity = displacement / config_.step_duration;
    speed[j] = std::min(displacement.norm() / config_.step_duration, config_.max_velocity);
    u.position = target;
  }

  // (2) Ground users.
  for (auto& pop : populations_) pop = step_population(std::move(pop), config_.area, config_.mobility, rng_);

  // (3) Association and scores; only UAVs alive at this point serve.
  associate();

  // (4) Energy; over-budget UAVs die after serving this step.
  std::vector<double> energy(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!result.acted[j]) {
      uavs_[j].step_energy = 0.0;
      continue;
    }
    energy[j] = budgets_[j].step_energy(propulsion_power(speed[j], config_.power));
    uavs_[j].step_energy = energy[j];
    uavs_[j].consumed = budgets_[j].consumed();
    if (!budgets_[j].alive()) {
      uavs_[j].alive = false;
      result.died[j] = true;
    }
  }

  // (5) Telemetry among the survivors.
  exchange_telemetry();
  for (std::size_t j = 0; j < n; ++j)
    if (uavs_[j].alive && communicating_[j]) ledger_.record(j, tables_[j]);

  // (6) Rewards.
  result.rewards.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!result.acted[j]) continue;
    const std::size_t hood = neighborhood_total(j);
    const int coop = cooperative_factor(hood, prev_neighborhood_[j]);
    result.rewards[j] = compute_reward(scores_[j], prev_scores_[j], energy[j], prev_energy_[j], coop);
    prev_neighborhood_[j] = hood;
    prev_scores_[j] = scores_[j];
    prev_energy_[j] = energy[j];
  }

  // (7) Metrics.
  MetricsRow& row = result.row;
  row.episode = episode_;
  row.step = step_;
  row.actions.assign(actions.begin(), actions.end());
  row.rewards = result.rewards;
  row.scores.assign(n, 0);
  row.throughput.assign(n, 0.0);
  row.step_energy = energy;
  std::size_t connected = 0;
  double rate_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    row.positions.push_back(uavs_[j].position);
    row.alive.push_back(uavs_[j].alive);
    row.overhead_bits.push_back(ledger_.step_bits(j));
    if (result.acted[j]) {
      row.scores[j] = scores_[j];
      row.throughput[j] = throughput_[j];
    }
    connected += row.scores[j];
    rate_sum += row.throughput[j];
    row.total_energy += energy[j];
  }
  row.connected_pct = 100.0 * static_cast<double>(connected) / static_cast<double>(num_users());
  row.fairness = jain_fairness(row.scores);
  episode_rate_sum_ += rate_sum;
  episode_energy_sum_ += row.total_energy;
  row.system_ee = episode_energy_sum_ > 0 ? episode_rate_sum_ / episode_energy_sum_ : 0.0;
  row.step_overhead_bits = ledger_.end_step();
  row.cumulative_overhead_bits = ledger_.cumulative_total();

  // Scores of UAVs that died this step no longer count in later steps.
  for (std::size_t j = 0; j < n; ++j)
    if (!uavs_[j].alive) scores_[j] = 0;

  result.observations.reserve(n);
  for (std::size_t j = 0; j < n; ++j) result.observations.push_back(observe(j));
  return result;
}

}  // namespace uavee
