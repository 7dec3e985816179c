#include "uavee/mobility.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace uavee {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Position random_ground_point(const AreaBounds& area, Rng& rng) {
  return {uniform(rng, area.x_min, area.x_max), uniform(rng, area.y_min, area.y_max), 0.0};
}

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0 ? a + kTwoPi : a;
}

// Advances along (speed, heading); reflects off walls and mirrors both the
// heading and, for GMM, the mean heading so users do not pin to a wall.
// Headings stay unwrapped so the GMM recurrence blends them continuously.
void advance_with_reflection(Position& p, UserMotion& m, double dt, const AreaBounds& area) {
  p.x() += m.speed * dt * std::cos(m.direction);
  p.y() += m.speed * dt * std::sin(m.direction);
  if (reflect_into(p.x(), area.x_min, area.x_max)) {
    m.direction = std::numbers::pi - m.direction;
    m.mean_direction = std::numbers::pi - m.mean_direction;
  }
  if (reflect_into(p.y(), area.y_min, area.y_max)) {
    m.direction = -m.direction;
    m.mean_direction = -m.mean_direction;
  }
}

void init_motion(MobilityModel model, UserMotion& m, const AreaBounds& area,
                 const MobilityParams& params, Rng& rng) {
  switch (model) {
    case MobilityModel::Static:
      break;
    case MobilityModel::RandomWalk:
      m.direction = uniform(rng, 0.0, kTwoPi);
      m.speed = uniform(rng, 0.0, params.speed_max);
      break;
    case MobilityModel::RandomWaypoint:
      m.waypoint = random_ground_point(area, rng);
      m.speed = params.speed_max - uniform(rng, 0.0, params.speed_max);
      m.pause_remaining = 0.0;
      break;
    case MobilityModel::GaussMarkov:
      m.mean_direction = params.gmm.mean_direction >= 0 ? params.gmm.mean_direction
                                                        : uniform(rng, 0.0, kTwoPi);
      m.direction = m.mean_direction;
      m.speed = std::clamp(params.gmm.mean_speed, 0.0, params.speed_max);
      break;
  }
}

}  // namespace

void AreaBounds::validate() const {
  if (!(x_min < x_max && y_min < y_max && h_min < h_max))
    throw std::invalid_argument("area: each axis needs min < max");
  if (!(h_min > 0)) throw std::invalid_argument("area: h_min must be > 0");
}

bool AreaBounds::contains(const Position& p) const {
  return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max &&
         p.z() >= h_min && p.z() <= h_max;
}

bool AreaBounds::contains_ground(const Position& p) const {
  return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
}

double AreaBounds::diagonal() const {
  return std::sqrt(width() * width() + depth() * depth() + height() * height());
}

void GmmParams::validate() const {
  if (!(memory_alpha >= 0 && memory_alpha <= 1))
    throw std::invalid_argument("gmm: memory_alpha must lie in [0, 1]");
  if (!(speed_sigma >= 0 && direction_sigma >= 0))
    throw std::invalid_argument("gmm: sigmas must be >= 0");
  if (!(mean_speed >= 0)) throw std::invalid_argument("gmm: mean speed must be >= 0");
}

void MobilityParams::validate() const {
  if (!(speed_max > 0)) throw std::invalid_argument("mobility: speed_max must be > 0");
  if (!(pause_max >= 0)) throw std::invalid_argument("mobility: pause_max must be >= 0");
  if (!(step_duration > 0)) throw std::invalid_argument("mobility: step duration must be > 0");
  gmm.validate();
}

bool reflect_into(double& coord, double lo, double hi) {
  if (coord >= lo && coord <= hi) return false;
  // Unfold onto a period of two widths; the second half is the mirror image,
  // i.e. an odd number of wall hits.
  const double width = hi - lo;
  const double period = 2.0 * width;
  double offset = std::fmod(coord - lo, period);
  if (offset < 0) offset += period;
  const bool mirrored = offset > width;
  coord = lo + (mirrored ? period - offset : offset);
  return mirrored;
}

UserPopulation spawn_population(MobilityModel model, std::size_t count, const AreaBounds& area,
                                const MobilityParams& params, Rng& rng) {
  std::vector<Position> positions;
  positions.reserve(count);
  for (std::size_t i = 0; i < count; ++i) positions.push_back(random_ground_point(area, rng));
  return make_population(model, std::move(positions), area, params, rng);
}

UserPopulation make_population(MobilityModel model, std::vector<Position> positions,
                               const AreaBounds& area, const MobilityParams& params, Rng& rng) {
  UserPopulation pop;
  pop.model = model;
  pop.positions = std::move(positions);
  pop.motion.resize(pop.positions.size());
  for (std::size_t i = 0; i < pop.positions.size(); ++i)
    init_motion(model, pop.motion[i], area, params, rng);
  return pop;
}

UserPopulation step_static(UserPopulation pop) { return pop; }

UserPopulation step_rw(UserPopulation pop, const AreaBounds& area, const MobilityParams& params,
                       Rng& rng) {
  for (std::size_t i = 0; i < pop.size(); ++i) {
    UserMotion& m = pop.motion[i];
    m.direction = uniform(rng, 0.0, kTwoPi);
    m.speed = uniform(rng, 0.0, params.speed_max);
    advance_with_reflection(pop.positions[i], m, params.step_duration, area);
  }
  return pop;
}

UserPopulation step_rwp(UserPopulation pop, const AreaBounds& area, const MobilityParams& params,
                        Rng& rng) {
  for (std::size_t i = 0; i < pop.size(); ++i) {
    UserMotion& m = pop.motion[i];
    Position& p = pop.positions[i];
    if (m.pause_remaining > 0) {
      m.pause_remaining = std::max(0.0, m.pause_remaining - params.step_duration);
      continue;
    }
    const Position to_target = m.waypoint - p;
    const double remaining = to_target.norm();
    const double reach = m.speed * params.step_duration;
    if (remaining <= reach) {
      p = m.waypoint;
      m.waypoint = random_ground_point(area, rng);
      m.speed = params.speed_max - uniform(rng, 0.0, params.speed_max);  // (0, speed_max]
      m.pause_remaining = uniform(rng, 0.0, params.pause_max);
    } else {
      p += to_target * (reach / remaining);
    }
    m.direction = wrap_angle(std::atan2(to_target.y(), to_target.x()));
  }
  return pop;
}

UserPopulation step_gmm(UserPopulation pop, const AreaBounds& area, const MobilityParams& params,
                        Rng& rng) {
  const GmmParams& g = params.gmm;
  const double a = g.memory_alpha;
  const double innovation = std::sqrt(1.0 - a * a);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    UserMotion& m = pop.motion[i];
    const double speed_noise = unit(rng) * g.speed_sigma;
    const double dir_noise = unit(rng) * g.direction_sigma;
    m.speed = a * m.speed + (1.0 - a) * g.mean_speed + innovation * speed_noise;
    m.direction = a * m.direction + (1.0 - a) * m.mean_direction + innovation * dir_noise;
    m.speed = std::clamp(m.speed, 0.0, params.speed_max);
    advance_with_reflection(pop.positions[i], m, params.step_duration, area);
  }
  return pop;
}

UserPopulation step_population(UserPopulation pop, const AreaBounds& area,
                               const MobilityParams& params, Rng& rng) {
  switch (pop.model) {
    case MobilityModel::Static:
      return step_static(std::move(pop));
    case MobilityModel::RandomWalk:
      return step_rw(std::move(pop), area, params, rng);
    case MobilityModel::RandomWaypoint:
      return step_rwp(std::move(pop), area, params, rng);
    case MobilityModel::GaussMarkov:
      return step_gmm(std::move(pop), area, params, rng);
  }
  return pop;
}

Position project_to_local(double lat_deg, double lon_deg, const GeoOrigin& origin) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double x = kEarthRadiusM * (lon_deg - origin.lon_deg) * deg * std::cos(origin.lat_deg * deg);
  const double y = kEarthRadiusM * (lat_deg - origin.lat_deg) * deg;
  return {x, y, 0.0};
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t line_no, const char* field) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v))
    throw std::runtime_error("users csv line " + std::to_string(line_no) + ": bad " + field +
                             " value '" + cell + "'");
  return v;
}

}  // namespace

LoadedUsers load_users_csv(const std::filesystem::path& path, const GeoOrigin& origin,
                           const AreaBounds& area) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("users csv: cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  bool has_static_column = false;
  bool header_seen = false;
  LoadedUsers out;
  std::size_t rows = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (cells.size() < 2 || cells[0] != "lat" || cells[1] != "lon" ||
          (cells.size() == 3 && cells[2] != "static") || cells.size() > 3)
        throw std::runtime_error("users csv line " + std::to_string(line_no) +
                                 ": expected header 'lat,lon[,static]'");
      has_static_column = cells.size() == 3;
      continue;
    }
    const std::size_t expected = has_static_column ? 3 : 2;
    if (cells.size() != expected)
      throw std::runtime_error("users csv line " + std::to_string(line_no) + ": expected " +
                               std::to_string(expected) + " fields, got " +
                               std::to_string(cells.size()));
    const double lat = parse_number(cells[0], line_no, "lat");
    const double lon = parse_number(cells[1], line_no, "lon");
    bool is_static = true;
    if (has_static_column) {
      if (cells[2] == "1" || cells[2] == "true")
        is_static = true;
      else if (cells[2] == "0" || cells[2] == "false")
        is_static = false;
      else
        throw std::runtime_error("users csv line " + std::to_string(line_no) +
                                 ": bad static value '" + cells[2] + "'");
    }
    ++rows;
    const Position p = project_to_local(lat, lon, origin);
    if (!area.contains_ground(p)) {
      ++out.rejected;
      continue;
    }
    (is_static ? out.static_positions : out.mobile_positions).push_back(p);
  }
  if (!header_seen || rows == 0) throw std::runtime_error("users csv: no user rows in " + path.string());
  return out;
}

}  // namespace uavee
