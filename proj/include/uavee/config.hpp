// Scenario configuration: every simulation parameter, JSON load/save and
// validation. Log-domain inputs (dBm, dB) are converted to linear once here.
#pragma once

#include "uavee/channel.hpp"
#include "uavee/ddqn.hpp"
#include "uavee/energy.hpp"
#include "uavee/mobility.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavee {

/// Raised for anything wrong with a configuration file or value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AgentKind { Cmad, Mad, Random };

std::string_view agent_kind_name(AgentKind kind);
AgentKind parse_agent_kind(std::string_view name);

struct UserCounts {
  std::size_t static_users = 200;
  std::size_t random_walk = 0;
  std::size_t random_waypoint = 0;
  std::size_t gauss_markov = 200;

  std::size_t total() const { return static_users + random_walk + random_waypoint + gauss_markov; }
};

struct ChannelUnits {
  double transmit_power_dbm = 20.0;
  double path_loss_exponent = 2.0;
  double attenuation_factor = 1.0;
  double noise_power_dbm = -130.0;
  double bandwidth_hz = 1e6;
  double sinr_threshold_db = 5.0;
};

struct LearningParams {
  std::vector<int> hidden_layers{128, 64};
  double discount = 0.95;
  double learning_rate = 1e-4;
  double rms_decay = 0.99;
  double rms_epsilon = 1e-8;
  std::size_t replay_capacity = 10'000;
  std::size_t batch_size = 1024;
  std::uint64_t target_sync_period = 100;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  /// Fraction of all planned training steps over which epsilon decays.
  double epsilon_decay_fraction = 0.8;
  std::optional<double> max_grad_norm;

  QNetworkConfig network(int state_size) const;
};

struct UsersCsvSource {
  std::string path;
  GeoOrigin origin;
  MobilityModel mobile_model = MobilityModel::GaussMarkov;
};

struct ScenarioConfig {
  std::size_t num_uavs = 8;
  UserCounts users;
  std::optional<UsersCsvSource> users_csv;

  ChannelUnits channel_units;
  ChannelParams channel;  // derived from channel_units

  PowerModelParams power;
  double battery_mah = 16'000.0;
  double battery_voltage = 22.2;
  std::optional<double> e_max_override;
  double step_duration = 1.0;

  AreaBounds area;
  double d_col = 20.0;
  double step_x = 20.0;
  double step_y = 20.0;
  double step_z = 20.0;
  double max_velocity = 20.0;
  std::optional<double> communication_range;  // area diagonal when empty
  std::vector<Position> spawn_points;         // uniform at h_min when empty

  MobilityParams mobility;
  LearningParams learning;
  std::uint64_t bits_per_observation = 96;

  std::size_t episodes = 250;
  std::size_t max_steps = 1500;
  std::uint64_t seed = 1;
  AgentKind agent = AgentKind::Cmad;
  /// Per-UAV agent kinds; overrides `agent` when non-empty.
  std::vector<AgentKind> agent_mix;
  std::size_t checkpoint_every = 0;  // episodes; 0 = only at the end
  std::size_t eval_runs = 20;
  bool log_steps = true;

  double e_max() const;
  double range() const { return communication_range.value_or(area.diagonal()); }
  AgentKind agent_for(std::size_t uav) const;
  /// Recomputes derived linear values and checks every field.
  void finalize();
};

ScenarioConfig default_config();
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ScenarioConfig& config);

}  // namespace uavee
