#include "uavee/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace uavee {

EpisodeSummary summarize_episode(std::span<const MetricsRow> rows, std::size_t episode, std::size_t num_uavs) {
  EpisodeSummary s;
  s.episode = episode;
  s.steps = rows.size();
  s.cumulative_reward.assign(num_uavs, 0.0);
  s.energy.assign(num_uavs, 0.0);
  double rate_sum = 0.0;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < num_uavs; ++j) {
      s.cumulative_reward[j] += r.rewards[j];
      s.energy[j] += r.step_energy[j];
      rate_sum += r.throughput[j];
    }
    s.total_energy += r.total_energy;
    s.mean_connected_pct += r.connected_pct;
    s.mean_fairness += r.fairness;
    s.overhead_bits += r.step_overhead_bits;
  }
  if (!rows.empty()) {
    s.mean_connected_pct /= static_cast<double>(rows.size());
    s.mean_fairness /= static_cast<double>(rows.size());
    s.alive_at_end = static_cast<std::size_t>(std::count(rows.back().alive.begin(), rows.back().alive.end(), true));
  }
  s.system_ee = s.total_energy > 0 ? rate_sum / s.total_energy : 0.0;
  return s;
}

Stats compute_stats(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("compute_stats: no values");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  Stats s;
  for (double v : values) s.mean += v;
  s.mean /= n;
  for (double v : values) s.stddev += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(s.stddev / n);
  auto pct = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.max = values.back();
  s.p5 = pct(0.05);
  s.p50 = pct(0.5);
  s.p95 = pct(0.95);
  return s;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

void write_step_header(std::ostream& out, std::size_t num_uavs) {
  out << "episode,step";
  for (std::size_t j = 0; j < num_uavs; ++j) {
    const std::string p = "uav" + std::to_string(j) + "_";
    out << ',' << p << "x," << p << "y," << p << "h," << p << "action," << p << "reward," << p << "score," << p
        << "energy_j," << p << "rate_bps," << p << "alive," << p << "overhead_bits";
  }
  out << ",connected_pct,total_energy_j,fairness,system_ee,overhead_bits,cumulative_overhead_bits\n";
}

void write_step_row(std::ostream& out, const MetricsRow& r) {
  out << r.episode << ',' << r.step;
  for (std::size_t j = 0; j < r.positions.size(); ++j) {
    out << ',' << format_double(r.positions[j].x()) << ',' << format_double(r.positions[j].y()) << ','
        << format_double(r.positions[j].z()) << ',' << action_index(r.actions[j]) << ','
        << format_double(r.rewards[j]) << ',' << r.scores[j] << ',' << format_double(r.step_energy[j]) << ','
        << format_double(r.throughput[j]) << ',' << (r.alive[j] ? 1 : 0) << ',' << r.overhead_bits[j];
  }
  out << ',' << format_double(r.connected_pct) << ',' << format_double(r.total_energy) << ','
      << format_double(r.fairness) << ',' << format_double(r.system_ee) << ',' << r.step_overhead_bits << ','
      << r.cumulative_overhead_bits << '\n';
}

void write_episode_header(std::ostream& out, std::size_t num_uavs) {
  out << "episode,steps";
  for (std::size_t j = 0; j < num_uavs; ++j) out << ",uav" << j << "_cumulative_reward";
  for (std::size_t j = 0; j < num_uavs; ++j) out << ",uav" << j << "_energy_j";
  out << ",total_energy_j,mean_connected_pct,system_ee,mean_fairness,overhead_bits,alive_at_end\n";
}

void write_episode_row(std::ostream& out, const EpisodeSummary& s) {
  out << s.episode << ',' << s.steps;
  for (double r : s.cumulative_reward) out << ',' << format_double(r);
  for (double e : s.energy) out << ',' << format_double(e);
  out << ',' << format_double(s.total_energy) << ',' << format_double(s.mean_connected_pct) << ','
      << format_double(s.system_ee) << ',' << format_double(s.mean_fairness) << ',' << s.overhead_bits << ','
      << s.alive_at_end << '\n';
}

}  // namespace uavee
