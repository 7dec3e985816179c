// Ground-user mobility: static, random walk, random waypoint, Gauss-Markov,
// plus a CSV loader for surveyed user positions.
#pragma once

#include "uavee/channel.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace uavee {

using Rng = std::mt19937_64;

/// Rectangular operating volume. Ground users live on its floor (h = 0).
struct AreaBounds {
  double x_min = 0.0;
  double x_max = 1000.0;
  double y_min = 0.0;
  double y_max = 1000.0;
  double h_min = 50.0;
  double h_max = 300.0;

  void validate() const;
  bool contains(const Position& p) const;
  bool contains_ground(const Position& p) const;
  double width() const { return x_max - x_min; }
  double depth() const { return y_max - y_min; }
  double height() const { return h_max - h_min; }
  /// Largest possible distance between two UAVs inside the bounds.
  double diagonal() const;
};

enum class MobilityModel { Static, RandomWalk, RandomWaypoint, GaussMarkov };

struct GmmParams {
  double memory_alpha = 0.75;
  double mean_speed = 1.0;
  /// Mean heading in radians. Negative means "draw one per user".
  double mean_direction = -1.0;
  double speed_sigma = 0.5;
  double direction_sigma = 0.3;

  void validate() const;
};

struct MobilityParams {
  double speed_max = 2.0;  // pedestrian speeds live in [0, speed_max]
  double pause_max = 5.0;  // random waypoint pause, seconds
  double step_duration = 1.0;
  GmmParams gmm;

  void validate() const;
};

/// Per-user dynamic state. Fields not used by a model stay at their defaults.
struct UserMotion {
  double speed = 0.0;
  double direction = 0.0;
  double mean_direction = 0.0;  // GMM
  Position waypoint = Position::Zero();  // RWP
  double pause_remaining = 0.0;          // RWP
};

struct UserPopulation {
  MobilityModel model = MobilityModel::Static;
  std::vector<Position> positions;
  std::vector<UserMotion> motion;

  std::size_t size() const { return positions.size(); }
};

/// Uniformly scatters `count` users on the area floor and initialises the
/// model state (headings, waypoints, GMM means).
UserPopulation spawn_population(MobilityModel model, std::size_t count, const AreaBounds& area,
                                const MobilityParams& params, Rng& rng);

/// Gives an existing set of positions a model and fresh motion state.
UserPopulation make_population(MobilityModel model, std::vector<Position> positions,
                               const AreaBounds& area, const MobilityParams& params, Rng& rng);

UserPopulation step_static(UserPopulation pop);
UserPopulation step_rw(UserPopulation pop, const AreaBounds& area, const MobilityParams& params,
                       Rng& rng);
UserPopulation step_rwp(UserPopulation pop, const AreaBounds& area, const MobilityParams& params,
                        Rng& rng);
UserPopulation step_gmm(UserPopulation pop, const AreaBounds& area, const MobilityParams& params,
                        Rng& rng);

/// Dispatches on pop.model.
UserPopulation step_population(UserPopulation pop, const AreaBounds& area,
                               const MobilityParams& params, Rng& rng);

/// Specular reflection of a coordinate into [lo, hi]. Returns true when the
/// heading component along this axis must flip.
bool reflect_into(double& coord, double lo, double hi);

struct GeoOrigin {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

struct LoadedUsers {
  std::vector<Position> static_positions;
  std::vector<Position> mobile_positions;
  std::size_t rejected = 0;  // rows projected outside the area
};

inline constexpr double kEarthRadiusM = 6'371'000.0;

/// Equirectangular projection of (lat, lon) to local metres around `origin`.
Position project_to_local(double lat_deg, double lon_deg, const GeoOrigin& origin);

/// Reads `lat,lon[,static]` rows. Rows without a static column, or with
/// static = 1, are static users; static = 0 rows are mobile.
LoadedUsers load_users_csv(const std::filesystem::path& path, const GeoOrigin& origin,
                           const AreaBounds& area);

}  // namespace uavee
