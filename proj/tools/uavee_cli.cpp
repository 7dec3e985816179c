// Command-line front end: train, evaluate, sweep, validate-config.
#include "uavee/runner.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (item.empty() || pos != item.size()) throw uavee::ConfigError("--uavs: not a number: '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw uavee::ConfigError("--uavs: empty list");
  return out;
}

std::vector<uavee::AgentKind> parse_kinds(const std::string& text) {
  std::vector<uavee::AgentKind> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(uavee::parse_agent_kind(item));
  if (out.empty()) throw uavee::ConfigError("--agents: empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware multi-UAV placement with cooperative double deep Q-learning"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoints, resume, reference;
  std::optional<std::uint64_t> seed;
  std::size_t runs = 0;
  std::string uavs = "2,4,6,8,10,12", agents = "cmad,mad,random";
  bool quiet = false;

  auto* train = app.add_subcommand("train", "Train agents and write metrics and checkpoints");
  train->add_option("--config", config_path, "Scenario JSON")->required();
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--seed", seed, "Scenario seed (overrides the config)");
  train->add_option("--resume", resume, "Checkpoint directory to continue from");
  train->add_flag("--quiet", quiet, "No per-episode progress");

  auto* evaluate = app.add_subcommand("evaluate", "Greedy evaluation of trained agents");
  evaluate->add_option("--config", config_path, "Scenario JSON")->required();
  evaluate->add_option("--checkpoints", checkpoints, "Directory with agent_<j>.json files");
  evaluate->add_option("--runs", runs, "Evaluation runs (default: config eval_runs)");
  evaluate->add_option("--out", out_dir, "Output directory")->required();
  evaluate->add_option("--seed", seed, "Scenario seed (default: the training seed)");
  evaluate->add_option("--reference", reference, "summary.json whose mean EE normalises this one");

  auto* sweep = app.add_subcommand("sweep", "Train and evaluate over UAV counts and agent kinds");
  sweep->add_option("--config", config_path, "Scenario JSON")->required();
  sweep->add_option("--uavs", uavs, "Comma-separated UAV counts");
  sweep->add_option("--agents", agents, "Comma-separated agent kinds: cmad, mad, random");
  sweep->add_option("--runs", runs, "Evaluation runs per cell (default: config eval_runs)");
  sweep->add_option("--out", out_dir, "Output directory")->default_val("sweep");
  sweep->add_option("--seed", seed, "Scenario seed (overrides the config)");
  sweep->add_flag("--quiet", quiet, "No progress output");

  auto* validate = app.add_subcommand("validate-config", "Check a scenario file and print it normalised");
  validate->add_option("file", config_path, "Scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const uavee::ScenarioConfig config = uavee::load_config(config_path);
    std::ostream* progress = quiet ? nullptr : &std::cerr;

    if (*validate) {
      std::cout << uavee::config_to_json(config) << '\n';
    } else if (*train) {
      uavee::TrainOptions opts;
      opts.out_dir = out_dir;
      opts.seed = seed;
      if (!resume.empty()) opts.resume_from = resume;
      opts.progress = progress;
      const auto result = uavee::train(config, opts);
      std::cout << "trained " << result.episodes.size() << " episodes; checkpoints in " << out_dir
                << "/checkpoints\n";
    } else if (*evaluate) {
      uavee::EvaluateOptions opts;
      opts.out_dir = out_dir;
      if (!checkpoints.empty()) opts.checkpoints = checkpoints;
      opts.runs = runs > 0 ? runs : config.eval_runs;
      opts.seed = seed;
      if (!reference.empty()) opts.reference_ee_mean = uavee::read_reference_ee(reference);
      const auto s = uavee::evaluate(config, opts);
      std::cout << "system EE mean " << s.system_ee.mean << " bit/J, connected " << s.connected_pct.mean
                << "% over " << s.runs << " runs\n";
    } else if (*sweep) {
      uavee::SweepOptions opts;
      opts.out_dir = out_dir;
      opts.uav_counts = parse_counts(uavs);
      opts.agents = parse_kinds(agents);
      opts.runs = runs > 0 ? runs : config.eval_runs;
      opts.seed = seed;
      opts.progress = progress;
      uavee::sweep(config, opts);
      std::cout << "wrote " << out_dir << "/sweep.csv\n";
    }
  } catch (const uavee::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
