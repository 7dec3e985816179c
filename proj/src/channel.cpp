#include "uavee/channel.hpp"

#include <algorithm>

namespace uavee {

ChannelParams ChannelParams::from_table_units(double transmit_power_dbm, double path_loss_exponent,
                                              double attenuation_factor, double noise_power_dbm,
                                              double bandwidth_hz, double sinr_threshold_db) {
  ChannelParams p;
  p.transmit_power_watts = dbm_to_watts(transmit_power_dbm);
  p.path_loss_exponent = path_loss_exponent;
  p.attenuation_factor = attenuation_factor;
  p.noise_power_watts = dbm_to_watts(noise_power_dbm);
  p.bandwidth_hz = bandwidth_hz;
  p.sinr_threshold_linear = db_to_linear(sinr_threshold_db);
  p.validate();
  return p;
}

void ChannelParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(std::isfinite(transmit_power_watts) && transmit_power_watts > 0,
          "channel: transmit power must be > 0");
  require(std::isfinite(path_loss_exponent) && path_loss_exponent >= 1,
          "channel: path loss exponent must be >= 1");
  require(std::isfinite(attenuation_factor) && attenuation_factor > 0,
          "channel: attenuation factor must be > 0");
  require(std::isfinite(noise_power_watts) && noise_power_watts > 0,
          "channel: noise power must be > 0");
  require(std::isfinite(bandwidth_hz) && bandwidth_hz > 0, "channel: bandwidth must be > 0");
  require(std::isfinite(sinr_threshold_linear) && sinr_threshold_linear > 0,
          "channel: SINR threshold must be > 0");
}

std::size_t AssociationMap::connected_count() const {
  return static_cast<std::size_t>(std::count_if(
      users.begin(), users.end(), [](const UserLink& l) { return l.serving_uav.has_value(); }));
}

std::vector<double> AssociationMap::throughput_per_uav() const {
  std::vector<double> out(num_uavs, 0.0);
  for (const auto& link : users)
    if (link.serving_uav) out[*link.serving_uav] += link.rate_bps;
  return out;
}

AssociationMap associate_users(std::span<const Position> users, std::span<const Position> uavs,
                               const std::vector<bool>& alive, const ChannelParams& params) {
  if (alive.size() != uavs.size())
    throw std::invalid_argument("associate_users: alive flags do not match UAV count");

  AssociationMap assoc;
  assoc.num_uavs = uavs.size();
  assoc.users.resize(users.size());

  std::vector<double> power(uavs.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    for (std::size_t j = 0; j < uavs.size(); ++j) {
      if (!alive[j]) continue;
      const double d = distance3d(users[i], uavs[j]);
      if (!(d > 0.0)) throw std::domain_error("associate_users: user co-located with UAV");
      power[j] = received_power(d, params);
    }

    std::optional<std::size_t> best;
    double best_sinr = 0.0;
    for (std::size_t j = 0; j < uavs.size(); ++j) {
      if (!alive[j]) continue;
      double interference = 0.0;
      for (std::size_t z = 0; z < uavs.size(); ++z)
        if (z != j && alive[z]) interference += power[z];
      const double s = power[j] / (interference + params.noise_power_watts);
      if (!best || s > best_sinr) {
        best = j;
        best_sinr = s;
      }
    }

    UserLink& link = assoc.users[i];
    if (best && best_sinr > params.sinr_threshold_linear) {
      link.serving_uav = best;
      link.sinr = best_sinr;
      link.rate_bps = data_rate(best_sinr, params, true);
    } else if (best) {
      link.sinr = best_sinr;
    }
  }
  return assoc;
}

std::size_t connectivity_score(const AssociationMap& assoc, std::size_t uav) {
  if (uav >= assoc.num_uavs) throw std::out_of_range("connectivity_score: UAV id out of range");
  return static_cast<std::size_t>(
      std::count_if(assoc.users.begin(), assoc.users.end(),
                    [uav](const UserLink& l) { return l.serving_uav == uav; }));
}

std::vector<std::size_t> connectivity_scores(const AssociationMap& assoc) {
  std::vector<std::size_t> out(assoc.num_uavs, 0);
  for (const auto& link : assoc.users)
    if (link.serving_uav) ++out[*link.serving_uav];
  return out;
}

double jain_fairness(std::span<const std::size_t> scores) {
  if (scores.empty()) throw std::invalid_argument("jain_fairness: empty score list");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (auto c : scores) {
    const auto v = static_cast<double>(c);
    sum += v;
    sum_sq += v * v;
  }
  if (sum_sq == 0.0) return 1.0;
  return sum * sum / (static_cast<double>(scores.size()) * sum_sq);
}

}  // namespace uavee
