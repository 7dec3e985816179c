// Episode aggregation, summary statistics and the CSV layouts for step logs,
// episode aggregates and evaluation runs.
#pragma once

#include "uavee/world.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace uavee {

struct EpisodeSummary {
  std::size_t episode = 0;
  std::size_t steps = 0;
  std::vector<double> cumulative_reward;  // per UAV
  std::vector<double> energy;             // per UAV, J
  double total_energy = 0.0;
  double mean_connected_pct = 0.0;
  double system_ee = 0.0;  // grand-total ratio over the episode
  double mean_fairness = 0.0;
  std::uint64_t overhead_bits = 0;
  std::size_t alive_at_end = 0;
};

struct EpisodeLog {
  std::vector<MetricsRow> rows;
  EpisodeSummary summary;
};

EpisodeSummary summarize_episode(std::span<const MetricsRow> rows, std::size_t episode, std::size_t num_uavs);

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double min = 0.0;
  double p5 = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

/// Percentiles use linear interpolation between order statistics.
Stats compute_stats(std::vector<double> values);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

void write_step_header(std::ostream& out, std::size_t num_uavs);
void write_step_row(std::ostream& out, const MetricsRow& row);

void write_episode_header(std::ostream& out, std::size_t num_uavs);
void write_episode_row(std::ostream& out, const EpisodeSummary& s);

}  // namespace uavee
