#include "uavee/checkpoint.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uavee {

using nlohmann::json;

namespace {

json to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from(const json& j, Eigen::Index expected, const char* what) {
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != expected)
    throw std::runtime_error(std::string("checkpoint: ") + what + " has the wrong length");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), expected);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const DdqnAgent& agent,
                     const std::string& agent_kind, int uav_id) {
  const QNetwork& net = agent.net;
  const QNetworkConfig& cfg = net.config();
  std::ostringstream rng_state;
  rng_state << agent.rng;

  json j;
  j["format"] = "uavee-ddqn-checkpoint";
  j["version"] = kCheckpointVersion;
  j["agent_kind"] = agent_kind;
  j["uav_id"] = uav_id;
  j["layer_sizes"] = net.main().sizes();
  j["discount"] = cfg.discount;
  j["learning_rate"] = cfg.learning_rate;
  j["rms_decay"] = cfg.rms_decay;
  j["rms_epsilon"] = cfg.rms_epsilon;
  j["target_sync_period"] = cfg.target_sync_period;
  j["max_grad_norm"] = cfg.max_grad_norm ? json(*cfg.max_grad_norm) : json(nullptr);
  j["main"] = to_json(net.main().flat_parameters());
  j["target"] = to_json(net.target().flat_parameters());
  j["rms_square_avg"] = to_json(Mlp<double>::flatten(net.optimizer().square_avg()));
  j["global_step"] = agent.global_step;
  j["updates"] = agent.updates;
  j["epsilon"] = {{"start", agent.schedule.start},
                  {"end", agent.schedule.end},
                  {"decay_steps", agent.schedule.decay_steps}};
  j["batch_size"] = agent.batch_size;
  j["replay_capacity"] = agent.buffer.capacity();
  j["rng_state"] = rng_state.str();

  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path.string());
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

AgentCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint: " + path.string() + " is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format") != "uavee-ddqn-checkpoint") throw std::runtime_error("checkpoint: unknown format");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw std::runtime_error("checkpoint: unsupported version " + j.at("version").dump());

    QNetworkConfig cfg;
    cfg.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    cfg.discount = j.at("discount").get<double>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.rms_decay = j.at("rms_decay").get<double>();
    cfg.rms_epsilon = j.at("rms_epsilon").get<double>();
    cfg.target_sync_period = j.at("target_sync_period").get<std::uint64_t>();
    if (!j.at("max_grad_norm").is_null()) cfg.max_grad_norm = j.at("max_grad_norm").get<double>();

    EpsilonSchedule eps;
    eps.start = j.at("epsilon").at("start").get<double>();
    eps.end = j.at("epsilon").at("end").get<double>();
    eps.decay_steps = j.at("epsilon").at("decay_steps").get<std::uint64_t>();

    AgentCheckpoint ckpt{j.at("agent_kind").get<std::string>(), j.at("uav_id").get<int>(),
                         DdqnAgent(cfg, j.at("replay_capacity").get<std::size_t>(),
                                   j.at("batch_size").get<std::size_t>(), eps, 0)};
    DdqnAgent& agent = ckpt.agent;
    Mlp<double> main(cfg.layer_sizes);
    Mlp<double> target(cfg.layer_sizes);
    main.set_flat_parameters(vector_from(j.at("main"), main.parameter_count(), "main"));
    target.set_flat_parameters(vector_from(j.at("target"), target.parameter_count(), "target"));
    agent.net = QNetwork(cfg, std::move(main), std::move(target));

    // Accumulators share the parameter layout, so reuse the unflattening.
    Mlp<double> acc(cfg.layer_sizes);
    acc.set_flat_parameters(vector_from(j.at("rms_square_avg"), acc.parameter_count(), "rms_square_avg"));
    agent.net.optimizer().square_avg() = acc.layers();

    agent.global_step = j.at("global_step").get<std::uint64_t>();
    agent.updates = j.at("updates").get<std::uint64_t>();
    std::istringstream rng_state(j.at("rng_state").get<std::string>());
    rng_state >> agent.rng;
    if (!rng_state) throw std::runtime_error("checkpoint: corrupt rng state");
    return ckpt;
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint: " + path.string() + ": " + e.what());
  }
}

}  // namespace uavee
