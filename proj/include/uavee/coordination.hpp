// Neighbour telemetry: discovery of the closest UAVs, state assembly,
// cooperative reward and control-overhead accounting.
#pragma once

#include "uavee/channel.hpp"
#include "uavee/ddqn.hpp"
#include "uavee/mobility.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace uavee {

inline constexpr std::size_t kMaxNeighbors = 6;
inline constexpr int kCmadStateSize = 5 + 3 * static_cast<int>(kMaxNeighbors);  // 23
inline constexpr int kMadStateSize = 5;

/// Physical state of one UAV.
struct UavState {
  int id = 0;
  Position position = Position::Zero();
  Position velocity = Position::Zero();
  double step_energy = 0.0;  // energy spent in the latest step, J
  double consumed = 0.0;     // cumulative, J
  bool alive = true;
};

struct TelemetryMessage {
  int sender = 0;
  double distance_to_receiver = 0.0;
  std::size_t connectivity_score = 0;
  double instantaneous_energy = 0.0;
};

/// At most six reports, nearest first.
class NeighborTable {
 public:
  void add(const TelemetryMessage& m);
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  std::span<const TelemetryMessage> entries() const { return {slots_.data(), count_}; }
  const TelemetryMessage& operator[](std::size_t i) const { return slots_.at(i); }
  /// Sum of the listed neighbours' connectivity scores.
  std::size_t total_score() const;

 private:
  std::array<TelemetryMessage, kMaxNeighbors> slots_{};
  std::size_t count_ = 0;
};

/// Up to six alive UAVs within `range` of `self`, by ascending 3D distance,
/// ties by lower id. Scores and energies are read from the matching entries.
NeighborTable nearest_neighbors(int self, std::span<const UavState> uavs,
                                std::span<const std::size_t> scores, double range);

/// Scales that map raw observations into [0, 1].
struct StateNorms {
  AreaBounds area;
  double max_users = 1.0;
  double energy_scale = 1.0;  // joules mapped to 1.0
  double distance_scale = 1.0;
};

/// Own part of the state: [x, y, h, C_j, e_j], normalised.
StateVector own_state(const UavState& self, std::size_t own_score, const StateNorms& norms);

/// Full 23-entry state: own part, then six distances, six scores, six
/// energies. Empty slots read distance 1, score 0, energy 0.
StateVector assemble_state(const UavState& self, std::size_t own_score, const NeighborTable& table,
                           const StateNorms& norms);

/// State for the no-communication baseline: just the own part.
StateVector baseline_mad_ddqn_state(const UavState& self, std::size_t own_score, const StateNorms& norms);

/// +1 when the neighbourhood's connected-user total grew, otherwise -1.
int cooperative_factor(std::size_t neighborhood_now, std::size_t neighborhood_prev);

/// Per-agent reward from own score and energy trends plus the cooperative
/// factor. Throws when both energies are zero.
double compute_reward(std::size_t c_now, std::size_t c_prev, double e_now, double e_prev, int coop);

/// Bits spent on neighbour reports, per UAV and in total.
class OverheadLedger {
 public:
  explicit OverheadLedger(std::size_t num_uavs = 0, std::uint64_t bits_per_observation = 96);

  /// Charges |table| * E bits to `uav` for the current step; returns them.
  std::uint64_t record(std::size_t uav, const NeighborTable& table);
  /// Closes the current step and returns the bits it accumulated.
  std::uint64_t end_step();

  std::uint64_t bits_per_observation() const { return bits_per_observation_; }
  std::uint64_t step_bits(std::size_t uav) const { return step_bits_.at(uav); }
  std::uint64_t step_total() const;
  std::uint64_t cumulative_bits(std::size_t uav) const { return cumulative_.at(uav); }
  std::uint64_t cumulative_total() const { return cumulative_total_; }
  const std::vector<std::uint64_t>& step_history() const { return history_; }

  /// (U_L - 1) * E: bound for an agent whose neighbourhood holds U_L UAVs.
  std::uint64_t local_bound(std::size_t neighborhood_size) const;
  /// (U_G - 1) * E: per-step bound of a scheme that shares with every UAV.
  std::uint64_t global_scheme_bound(std::size_t num_uavs) const;

 private:
  std::uint64_t bits_per_observation_;
  std::vector<std::uint64_t> step_bits_;
  std::vector<std::uint64_t> cumulative_;
  std::uint64_t cumulative_total_ = 0;
  std::vector<std::uint64_t> history_;
};

}  // namespace uavee
