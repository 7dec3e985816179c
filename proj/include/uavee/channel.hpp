// Downlink channel: distances, SINR, Shannon rate, user association,
// connectivity scores and Jain fairness.
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace uavee {

template <typename Scalar>
using Position3 = Eigen::Matrix<Scalar, 3, 1>;

using Position = Position3<double>;

/// Linear-domain channel constants. Build with `from_table_units` when the
/// inputs are in dBm / dB.
struct ChannelParams {
  double transmit_power_watts = 0.1;
  double path_loss_exponent = 2.0;
  double attenuation_factor = 1.0;
  double noise_power_watts = 1e-16;
  double bandwidth_hz = 1e6;
  double sinr_threshold_linear = 3.1622776601683795;

  static ChannelParams from_table_units(double transmit_power_dbm, double path_loss_exponent,
                                        double attenuation_factor, double noise_power_dbm,
                                        double bandwidth_hz, double sinr_threshold_db);
  void validate() const;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

template <typename Derived1, typename Derived2>
typename Derived1::Scalar distance3d(const Eigen::MatrixBase<Derived1>& a,
                                     const Eigen::MatrixBase<Derived2>& b) {
  return (a - b).norm();
}

/// Received power beta * P * d^-alpha at distance d.
template <typename Scalar>
Scalar received_power(Scalar distance, const ChannelParams& params) {
  return Scalar(params.attenuation_factor * params.transmit_power_watts) *
         std::pow(distance, -Scalar(params.path_loss_exponent));
}

/// SINR at `user` when served by `uavs[serving]`; every other entry of `uavs`
/// interferes. Throws on a bad index or a zero link distance.
template <typename Scalar>
Scalar sinr(const Position3<Scalar>& user, std::size_t serving,
            std::span<const Position3<Scalar>> uavs, const ChannelParams& params) {
  if (serving >= uavs.size()) throw std::out_of_range("sinr: serving UAV index out of range");
  Scalar signal{0};
  Scalar interference{0};
  for (std::size_t z = 0; z < uavs.size(); ++z) {
    const Scalar d = distance3d(user, uavs[z]);
    if (!(d > Scalar(0))) throw std::domain_error("sinr: zero distance between user and UAV");
    const Scalar p = received_power(d, params);
    if (z == serving)
      signal = p;
    else
      interference += p;
  }
  return signal / (interference + Scalar(params.noise_power_watts));
}

template <typename Scalar>
Scalar data_rate(Scalar sinr_linear, const ChannelParams& params, bool connected) {
  if (!connected) return Scalar(0);
  return Scalar(params.bandwidth_hz) * std::log2(Scalar(1) + sinr_linear);
}

struct UserLink {
  std::optional<std::size_t> serving_uav;
  double sinr = 0.0;
  double rate_bps = 0.0;
};

struct AssociationMap {
  std::vector<UserLink> users;
  std::size_t num_uavs = 0;

  std::size_t connected_count() const;
  /// Sum of connected users' rates grouped by serving UAV.
  std::vector<double> throughput_per_uav() const;
};

/// Strongest-SINR association. Dead UAVs (alive[j] == false) neither serve nor
/// interfere. A user connects only when the best SINR exceeds the threshold;
/// ties go to the lowest UAV id.
AssociationMap associate_users(std::span<const Position> users, std::span<const Position> uavs,
                               const std::vector<bool>& alive, const ChannelParams& params);

std::size_t connectivity_score(const AssociationMap& assoc, std::size_t uav);
std::vector<std::size_t> connectivity_scores(const AssociationMap& assoc);

/// (sum C)^2 / (N sum C^2); 1 when every score is zero.
double jain_fairness(std::span<const std::size_t> scores);

}  // namespace uavee
