#include "uavee/config.hpp"

#include "json.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace uavee {

using nlohmann::json;

std::string_view agent_kind_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::Cmad: return "cmad";
    case AgentKind::Mad: return "mad";
    case AgentKind::Random: return "random";
  }
  return "?";
}

AgentKind parse_agent_kind(std::string_view name) {
  if (name == "cmad") return AgentKind::Cmad;
  if (name == "mad") return AgentKind::Mad;
  if (name == "random") return AgentKind::Random;
  throw ConfigError("unknown agent kind '" + std::string(name) + "' (expected cmad, mad or random)");
}

namespace {

std::string_view mobility_name(MobilityModel m) {
  switch (m) {
    case MobilityModel::Static: return "static";
    case MobilityModel::RandomWalk: return "rw";
    case MobilityModel::RandomWaypoint: return "rwp";
    case MobilityModel::GaussMarkov: return "gmm";
  }
  return "?";
}

MobilityModel parse_mobility(const std::string& name) {
  if (name == "static") return MobilityModel::Static;
  if (name == "rw") return MobilityModel::RandomWalk;
  if (name == "rwp") return MobilityModel::RandomWaypoint;
  if (name == "gmm") return MobilityModel::GaussMarkov;
  throw ConfigError("unknown mobility model '" + name + "'");
}

// Reads fields out of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    known_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type (" + it->dump() + ")");
    }
  }

  template <typename T>
  void read_optional(const char* key, std::optional<T>& out) {
    known_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    T value{};
    read(key, value);
    out = value;
  }

  const json* child(const char* key) {
    known_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string sub(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!known_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> known_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0; }

}  // namespace

QNetworkConfig LearningParams::network(int state_size) const {
  QNetworkConfig cfg;
  cfg.layer_sizes.clear();
  cfg.layer_sizes.push_back(state_size);
  for (int h : hidden_layers) cfg.layer_sizes.push_back(h);
  cfg.layer_sizes.push_back(kNumActions);
  cfg.discount = discount;
  cfg.learning_rate = learning_rate;
  cfg.rms_decay = rms_decay;
  cfg.rms_epsilon = rms_epsilon;
  cfg.target_sync_period = target_sync_period;
  cfg.max_grad_norm = max_grad_norm;
  return cfg;
}

double ScenarioConfig::e_max() const {
  return e_max_override.value_or(battery_energy_joules(battery_mah, battery_voltage));
}

AgentKind ScenarioConfig::agent_for(std::size_t uav) const {
  return agent_mix.empty() ? agent : agent_mix.at(uav);
}

void ScenarioConfig::finalize() {
  try {
    const auto& c = channel_units;
    channel = ChannelParams::from_table_units(c.transmit_power_dbm, c.path_loss_exponent, c.attenuation_factor,
                                              c.noise_power_dbm, c.bandwidth_hz, c.sinr_threshold_db);
    power.validate();
    area.validate();
    mobility.step_duration = step_duration;
    mobility.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(num_uavs >= 2 && num_uavs <= 12, "num_uavs must lie in [2, 12]");
  require(users_csv || users.total() > 0, "at least one ground user is required");
  require(finite_positive(battery_mah) && finite_positive(battery_voltage), "battery capacity and voltage must be > 0");
  require(!e_max_override || finite_positive(*e_max_override), "energy.e_max_j must be > 0");
  require(finite_positive(step_duration), "energy.step_duration_s must be > 0");
  require(finite_positive(d_col), "uav.d_col must be > 0");
  for (double s : {step_x, step_y, step_z}) require(finite_positive(s) && s <= 20.0, "uav step distances must lie in (0, 20] m");
  require(finite_positive(max_velocity), "uav.max_velocity must be > 0");
  require(!communication_range || finite_positive(*communication_range), "uav.communication_range must be > 0");
  require(spawn_points.empty() || spawn_points.size() == num_uavs, "uav.spawn must list one point per UAV");
  for (const auto& p : spawn_points) require(area.contains(p), "uav.spawn point outside the area");
  for (std::size_t a = 0; a < spawn_points.size(); ++a)
    for (std::size_t b = a + 1; b < spawn_points.size(); ++b)
      require(distance3d(spawn_points[a], spawn_points[b]) >= d_col, "uav.spawn points closer than d_col");
  require(agent_mix.empty() || agent_mix.size() == num_uavs, "agent_mix must list one kind per UAV");

  const auto& l = learning;
  require(!l.hidden_layers.empty(), "learning.hidden_layers must not be empty");
  for (int h : l.hidden_layers) require(h > 0, "learning.hidden_layers entries must be > 0");
  require(l.discount >= 0 && l.discount <= 1, "learning.discount must lie in [0, 1]");
  require(finite_positive(l.learning_rate), "learning.learning_rate must be > 0");
  require(l.rms_decay >= 0 && l.rms_decay < 1, "learning.rms_decay must lie in [0, 1)");
  require(finite_positive(l.rms_epsilon), "learning.rms_epsilon must be > 0");
  require(l.replay_capacity > 0 && l.batch_size > 0 && l.batch_size <= l.replay_capacity,
          "learning: need 0 < batch_size <= replay_capacity");
  require(l.target_sync_period > 0, "learning.target_sync_period must be > 0");
  require(l.epsilon_start >= 0 && l.epsilon_start <= 1 && l.epsilon_end >= 0 && l.epsilon_end <= 1,
          "learning: epsilon endpoints must lie in [0, 1]");
  require(l.epsilon_decay_fraction > 0 && l.epsilon_decay_fraction <= 1,
          "learning.epsilon_decay_fraction must lie in (0, 1]");
  require(!l.max_grad_norm || finite_positive(*l.max_grad_norm), "learning.max_grad_norm must be > 0");
  require(bits_per_observation > 0, "telemetry.bits_per_observation must be > 0");
  require(episodes > 0, "episodes must be > 0");
  require(max_steps > 0, "max_steps must be > 0");
  require(eval_runs > 0, "eval_runs must be > 0");
}

ScenarioConfig default_config() {
  ScenarioConfig c;
  c.finalize();
  return c;
}

ScenarioConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  ScenarioConfig c;
  ObjectReader r(root, "config");
  r.read("num_uavs", c.num_uavs);
  r.read("episodes", c.episodes);
  r.read("max_steps", c.max_steps);
  r.read("seed", c.seed);
  r.read("checkpoint_every", c.checkpoint_every);
  r.read("eval_runs", c.eval_runs);
  r.read("log_steps", c.log_steps);
  std::string agent{agent_kind_name(c.agent)};
  r.read("agent", agent);
  c.agent = parse_agent_kind(agent);
  std::vector<std::string> mix;
  r.read("agent_mix", mix);
  for (const auto& m : mix) c.agent_mix.push_back(parse_agent_kind(m));

  if (const json* j = r.child("users")) {
    ObjectReader u(*j, r.sub("users"));
    u.read("static", c.users.static_users);
    u.read("rw", c.users.random_walk);
    u.read("rwp", c.users.random_waypoint);
    u.read("gmm", c.users.gauss_markov);
    if (const json* csv = u.child("csv")) {
      ObjectReader cr(*csv, u.sub("csv"));
      UsersCsvSource src;
      cr.read("path", src.path);
      cr.read("origin_lat", src.origin.lat_deg);
      cr.read("origin_lon", src.origin.lon_deg);
      std::string model{mobility_name(src.mobile_model)};
      cr.read("mobile_model", model);
      src.mobile_model = parse_mobility(model);
      cr.finish();
      require(!src.path.empty(), "users.csv.path must not be empty");
      c.users_csv = src;
    }
    u.finish();
  }
  if (const json* j = r.child("channel")) {
    ObjectReader ch(*j, r.sub("channel"));
    ch.read("transmit_power_dbm", c.channel_units.transmit_power_dbm);
    ch.read("path_loss_exponent", c.channel_units.path_loss_exponent);
    ch.read("attenuation_factor", c.channel_units.attenuation_factor);
    ch.read("noise_power_dbm", c.channel_units.noise_power_dbm);
    ch.read("bandwidth_hz", c.channel_units.bandwidth_hz);
    ch.read("sinr_threshold_db", c.channel_units.sinr_threshold_db);
    ch.finish();
  }
  if (const json* j = r.child("power_model")) {
    ObjectReader p(*j, r.sub("power_model"));
    p.read("kappa0", c.power.kappa0);
    p.read("kappa1", c.power.kappa1);
    p.read("kappa2", c.power.kappa2);
    p.read("u_tip", c.power.u_tip);
    p.read("v0", c.power.v0);
    std::string sign = "as_printed";
    p.read("induced_sign", sign);
    if (sign == "as_printed")
      c.power.induced_sign = InducedSign::AsPrinted;
    else if (sign == "standard")
      c.power.induced_sign = InducedSign::Standard;
    else
      throw ConfigError("power_model.induced_sign must be 'as_printed' or 'standard'");
    p.finish();
  }
  if (const json* j = r.child("energy")) {
    ObjectReader e(*j, r.sub("energy"));
    e.read("battery_mah", c.battery_mah);
    e.read("battery_voltage", c.battery_voltage);
    e.read_optional("e_max_j", c.e_max_override);
    e.read("step_duration_s", c.step_duration);
    e.finish();
  }
  if (const json* j = r.child("area")) {
    ObjectReader a(*j, r.sub("area"));
    a.read("x_min", c.area.x_min);
    a.read("x_max", c.area.x_max);
    a.read("y_min", c.area.y_min);
    a.read("y_max", c.area.y_max);
    a.read("h_min", c.area.h_min);
    a.read("h_max", c.area.h_max);
    a.finish();
  }
  if (const json* j = r.child("uav")) {
    ObjectReader u(*j, r.sub("uav"));
    u.read("d_col", c.d_col);
    u.read("step_x", c.step_x);
    u.read("step_y", c.step_y);
    u.read("step_z", c.step_z);
    u.read("max_velocity", c.max_velocity);
    u.read_optional("communication_range", c.communication_range);
    std::vector<std::array<double, 3>> spawn;
    u.read("spawn", spawn);
    for (const auto& p : spawn) c.spawn_points.emplace_back(p[0], p[1], p[2]);
    u.finish();
  }
  if (const json* j = r.child("mobility")) {
    ObjectReader m(*j, r.sub("mobility"));
    m.read("speed_max", c.mobility.speed_max);
    m.read("pause_max_s", c.mobility.pause_max);
    if (const json* g = m.child("gmm")) {
      ObjectReader gr(*g, m.sub("gmm"));
      gr.read("memory_alpha", c.mobility.gmm.memory_alpha);
      gr.read("mean_speed", c.mobility.gmm.mean_speed);
      gr.read("mean_direction", c.mobility.gmm.mean_direction);
      gr.read("speed_sigma", c.mobility.gmm.speed_sigma);
      gr.read("direction_sigma", c.mobility.gmm.direction_sigma);
      gr.finish();
    }
    m.finish();
  }
  if (const json* j = r.child("learning")) {
    ObjectReader l(*j, r.sub("learning"));
    auto& p = c.learning;
    l.read("hidden_layers", p.hidden_layers);
    l.read("discount", p.discount);
    l.read("learning_rate", p.learning_rate);
    l.read("rms_decay", p.rms_decay);
    l.read("rms_epsilon", p.rms_epsilon);
    l.read("replay_capacity", p.replay_capacity);
    l.read("batch_size", p.batch_size);
    l.read("target_sync_period", p.target_sync_period);
    l.read("epsilon_start", p.epsilon_start);
    l.read("epsilon_end", p.epsilon_end);
    l.read("epsilon_decay_fraction", p.epsilon_decay_fraction);
    l.read_optional("max_grad_norm", p.max_grad_norm);
    l.finish();
  }
  if (const json* j = r.child("telemetry")) {
    ObjectReader t(*j, r.sub("telemetry"));
    t.read("bits_per_observation", c.bits_per_observation);
    t.finish();
  }
  r.finish();
  c.finalize();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const ScenarioConfig& c) {
  auto optional = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json users = {{"static", c.users.static_users},
                {"rw", c.users.random_walk},
                {"rwp", c.users.random_waypoint},
                {"gmm", c.users.gauss_markov}};
  if (c.users_csv)
    users["csv"] = {{"path", c.users_csv->path},
                    {"origin_lat", c.users_csv->origin.lat_deg},
                    {"origin_lon", c.users_csv->origin.lon_deg},
                    {"mobile_model", mobility_name(c.users_csv->mobile_model)}};
  json spawn = json::array();
  for (const auto& p : c.spawn_points) spawn.push_back({p.x(), p.y(), p.z()});
  json mix = json::array();
  for (auto k : c.agent_mix) mix.push_back(agent_kind_name(k));

  json j = {
      {"num_uavs", c.num_uavs},
      {"episodes", c.episodes},
      {"max_steps", c.max_steps},
      {"seed", c.seed},
      {"agent", agent_kind_name(c.agent)},
      {"agent_mix", mix},
      {"checkpoint_every", c.checkpoint_every},
      {"eval_runs", c.eval_runs},
      {"log_steps", c.log_steps},
      {"users", users},
      {"channel",
       {{"transmit_power_dbm", c.channel_units.transmit_power_dbm},
        {"path_loss_exponent", c.channel_units.path_loss_exponent},
        {"attenuation_factor", c.channel_units.attenuation_factor},
        {"noise_power_dbm", c.channel_units.noise_power_dbm},
        {"bandwidth_hz", c.channel_units.bandwidth_hz},
        {"sinr_threshold_db", c.channel_units.sinr_threshold_db}}},
      {"power_model",
       {{"kappa0", c.power.kappa0},
        {"kappa1", c.power.kappa1},
        {"kappa2", c.power.kappa2},
        {"u_tip", c.power.u_tip},
        {"v0", c.power.v0},
        {"induced_sign", c.power.induced_sign == InducedSign::AsPrinted ? "as_printed" : "standard"}}},
      {"energy",
       {{"battery_mah", c.battery_mah},
        {"battery_voltage", c.battery_voltage},
        {"e_max_j", optional(c.e_max_override)},
        {"step_duration_s", c.step_duration}}},
      {"area",
       {{"x_min", c.area.x_min},
        {"x_max", c.area.x_max},
        {"y_min", c.area.y_min},
        {"y_max", c.area.y_max},
        {"h_min", c.area.h_min},
        {"h_max", c.area.h_max}}},
      {"uav",
       {{"d_col", c.d_col},
        {"step_x", c.step_x},
        {"step_y", c.step_y},
        {"step_z", c.step_z},
        {"max_velocity", c.max_velocity},
        {"communication_range", optional(c.communication_range)},
        {"spawn", spawn}}},
      {"mobility",
       {{"speed_max", c.mobility.speed_max},
        {"pause_max_s", c.mobility.pause_max},
        {"gmm",
         {{"memory_alpha", c.mobility.gmm.memory_alpha},
          {"mean_speed", c.mobility.gmm.mean_speed},
          {"mean_direction", c.mobility.gmm.mean_direction},
          {"speed_sigma", c.mobility.gmm.speed_sigma},
          {"direction_sigma", c.mobility.gmm.direction_sigma}}}}},
      {"learning",
       {{"hidden_layers", c.learning.hidden_layers},
        {"discount", c.learning.discount},
        {"learning_rate", c.learning.learning_rate},
        {"rms_decay", c.learning.rms_decay},
        {"rms_epsilon", c.learning.rms_epsilon},
        {"replay_capacity", c.learning.replay_capacity},
        {"batch_size", c.learning.batch_size},
        {"target_sync_period", c.learning.target_sync_period},
        {"epsilon_start", c.learning.epsilon_start},
        {"epsilon_end", c.learning.epsilon_end},
        {"epsilon_decay_fraction", c.learning.epsilon_decay_fraction},
        {"max_grad_norm", optional(c.learning.max_grad_norm)}}},
      {"telemetry", {{"bits_per_observation", c.bits_per_observation}}},
  };
  return j.dump(2);
}

}  // namespace uavee
