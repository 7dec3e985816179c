#include "uavee/coordination.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavee {

void NeighborTable::add(const TelemetryMessage& m) {
  if (count_ == kMaxNeighbors) throw std::length_error("NeighborTable: more than six neighbours");
  slots_[count_++] = m;
}

std::size_t NeighborTable::total_score() const {
  std::size_t total = 0;
  for (const auto& m : entries()) total += m.connectivity_score;
  return total;
}

NeighborTable nearest_neighbors(int self, std::span<const UavState> uavs,
                                std::span<const std::size_t> scores, double range) {
  if (scores.size() != uavs.size()) throw std::invalid_argument("nearest_neighbors: score count mismatch");
  const auto self_it = std::find_if(uavs.begin(), uavs.end(), [self](const UavState& u) { return u.id == self; });
  if (self_it == uavs.end()) throw std::invalid_argument("nearest_neighbors: unknown UAV id");

  struct Candidate {
    double distance;
    int id;
    std::size_t index;
  };
  std::vector<Candidate> candidates;
  for (std::size_t k = 0; k < uavs.size(); ++k) {
    const UavState& other = uavs[k];
    if (other.id == self || !other.alive) continue;
    const double d = distance3d(self_it->position, other.position);
    if (d <= range) candidates.push_back({d, other.id, k});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });

  NeighborTable table;
  for (std::size_t k = 0; k < std::min(candidates.size(), kMaxNeighbors); ++k) {
    const auto& c = candidates[k];
    table.add({c.id, c.distance, scores[c.index], uavs[c.index].step_energy});
  }
  return table;
}

namespace {

double unit(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

StateVector own_state(const UavState& self, std::size_t own_score, const StateNorms& norms) {
  const AreaBounds& a = norms.area;
  StateVector s(kMadStateSize);
  s << unit((self.position.x() - a.x_min) / a.width()), unit((self.position.y() - a.y_min) / a.depth()),
      unit((self.position.z() - a.h_min) / a.height()),
      unit(static_cast<double>(own_score) / norms.max_users), unit(self.step_energy / norms.energy_scale);
  return s;
}

StateVector assemble_state(const UavState& self, std::size_t own_score, const NeighborTable& table,
                           const StateNorms& norms) {
  if (table.size() > kMaxNeighbors) throw std::length_error("assemble_state: table longer than six");
  StateVector s(kCmadStateSize);
  s.head(kMadStateSize) = own_state(self, own_score, norms);
  constexpr auto n = static_cast<Eigen::Index>(kMaxNeighbors);
  s.segment(kMadStateSize, n).setOnes();
  s.segment(kMadStateSize + n, 2 * n).setZero();
  for (std::size_t k = 0; k < table.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const TelemetryMessage& m = table[k];
    s(kMadStateSize + i) = unit(m.distance_to_receiver / norms.distance_scale);
    s(kMadStateSize + n + i) = unit(static_cast<double>(m.connectivity_score) / norms.max_users);
    s(kMadStateSize + 2 * n + i) = unit(m.instantaneous_energy / norms.energy_scale);
  }
  return s;
}

StateVector baseline_mad_ddqn_state(const UavState& self, std::size_t own_score, const StateNorms& norms) {
  return own_state(self, own_score, norms);
}

int cooperative_factor(std::size_t neighborhood_now, std::size_t neighborhood_prev) {
  return neighborhood_now > neighborhood_prev ? 1 : -1;
}

double compute_reward(std::size_t c_now, std::size_t c_prev, double e_now, double e_prev, int coop) {
  const double denom = e_now + e_prev;
  if (!(denom > 0)) throw std::domain_error("compute_reward: energy sum must be > 0");
  const double omega = (e_prev - e_now) / denom;
  const double base = static_cast<double>(coop) + omega;
  if (c_now > c_prev) return base + 1.0;
  if (c_now == c_prev) return base;
  return base - 1.0;
}

OverheadLedger::OverheadLedger(std::size_t num_uavs, std::uint64_t bits_per_observation)
    : bits_per_observation_(bits_per_observation), step_bits_(num_uavs, 0), cumulative_(num_uavs, 0) {}

std::uint64_t OverheadLedger::record(std::size_t uav, const NeighborTable& table) {
  const std::uint64_t bits = table.size() * bits_per_observation_;
  step_bits_.at(uav) += bits;
  cumulative_.at(uav) += bits;
  cumulative_total_ += bits;
  return bits;
}

std::uint64_t OverheadLedger::step_total() const {
  std::uint64_t total = 0;
  for (auto b : step_bits_) total += b;
  return total;
}

std::uint64_t OverheadLedger::end_step() {
  const std::uint64_t total = step_total();
  history_.push_back(total);
  std::fill(step_bits_.begin(), step_bits_.end(), 0);
  return total;
}

std::uint64_t OverheadLedger::local_bound(std::size_t neighborhood_size) const {
  return neighborhood_size == 0 ? 0 : (neighborhood_size - 1) * bits_per_observation_;
}

std::uint64_t OverheadLedger::global_scheme_bound(std::size_t num_uavs) const {
  return num_uavs == 0 ? 0 : (num_uavs - 1) * bits_per_observation_;
}

}  // namespace uavee
