#include "doctest.h"
#include "uavee/checkpoint.hpp"

#include <filesystem>
#include <fstream>

using namespace uavee;

TEST_SUITE("checkpoint") {

TEST_CASE("round trip restores parameters, optimizer state and counters exactly") {
  QNetworkConfig cfg;
  cfg.layer_sizes = {5, 12, 9, kNumActions};
  cfg.max_grad_norm = 10.0;
  DdqnAgent agent(cfg, 64, 8, EpsilonSchedule{1.0, 0.05, 300}, 123);
  for (int i = 0; i < 40; ++i) {
    Transition t;
    t.state = Eigen::VectorXd::Random(5).cwiseAbs();
    t.next_state = Eigen::VectorXd::Random(5).cwiseAbs();
    t.action = action_from_index(i % kNumActions);
    t.reward = 0.37 * i - 3;
    t.terminal = i % 9 == 0;
    agent.observe(t);
  }
  const auto path = std::filesystem::temp_directory_path() / "uavee_ckpt_test.json";
  save_checkpoint(path, agent, "mad", 3);
  AgentCheckpoint back = load_checkpoint(path);

  CHECK(back.agent_kind == "mad");
  CHECK(back.uav_id == 3);
  CHECK(back.agent.net.main() == agent.net.main());
  CHECK(back.agent.net.target() == agent.net.target());
  CHECK(Mlp<double>::flatten(back.agent.net.optimizer().square_avg()) ==
        Mlp<double>::flatten(agent.net.optimizer().square_avg()));
  CHECK(back.agent.global_step == agent.global_step);
  CHECK(back.agent.updates == agent.updates);
  CHECK(back.agent.batch_size == agent.batch_size);
  CHECK(back.agent.buffer.capacity() == 64);
  CHECK(back.agent.buffer.size() == 0);
  CHECK(back.agent.schedule.decay_steps == 300);
  CHECK(back.agent.net.config().max_grad_norm == cfg.max_grad_norm);
  CHECK(back.agent.net.config().discount == cfg.discount);
  CHECK(back.agent.rng == agent.rng);

  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd s = Eigen::VectorXd::Random(5);
    const Eigen::VectorXd q0 = agent.net.forward(s, NetworkRole::Main);
    const Eigen::VectorXd q1 = back.agent.net.forward(s, NetworkRole::Main);
    CHECK(q0 == q1);
  }
}

TEST_CASE("corrupt and mismatched files are rejected") {
  const auto dir = std::filesystem::temp_directory_path();
  std::ofstream(dir / "uavee_ckpt_garbage.json") << "{not json";
  CHECK_THROWS(load_checkpoint(dir / "uavee_ckpt_garbage.json"));
  std::ofstream(dir / "uavee_ckpt_other.json") << R"({"format": "something-else", "version": 1})";
  CHECK_THROWS(load_checkpoint(dir / "uavee_ckpt_other.json"));
  CHECK_THROWS(load_checkpoint(dir / "uavee_ckpt_missing.json"));
}

}
