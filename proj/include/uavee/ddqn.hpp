// Double deep Q-learning: discrete 3D moves, replay memory, epsilon-greedy
// exploration, double-Q targets and minibatch updates.
#pragma once

#include "uavee/mlp.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace uavee {

using Rng = std::mt19937_64;

inline constexpr int kNumActions = 7;

/// The seven moves of a UAV: +-x, +-y, +-z by one step distance, or hover.
enum class Action : std::uint8_t { PosX = 0, NegX, PosY, NegY, Up, Down, Hover };

inline int action_index(Action a) { return static_cast<int>(a); }
Action action_from_index(int index);
std::string_view action_name(Action a);

/// Unit displacement of an action; scale per axis by the step distances.
std::array<int, 3> action_direction(Action a);

using StateVector = Eigen::VectorXd;

struct Transition {
  StateVector state;
  Action action = Action::Hover;
  double reward = 0.0;
  StateVector next_state;
  bool terminal = false;
};

/// Fixed-capacity FIFO replay memory.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10'000);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Age order: 0 is the oldest stored transition.
  const Transition& at(std::size_t age) const;

  /// `batch` distinct transitions drawn uniformly. Requires batch <= size().
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng);

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest item once full
  std::vector<Transition> items_;
  std::vector<std::size_t> scratch_;
};

/// Linear decay from `start` at step 0 to `end` at `decay_steps`, then flat.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.01;
  std::uint64_t decay_steps = 1;
};

double epsilon_at(std::uint64_t step, const EpsilonSchedule& schedule);

struct QNetworkConfig {
  std::vector<int> layer_sizes{23, 128, 64, kNumActions};
  double discount = 0.95;
  double learning_rate = 1e-4;
  double rms_decay = 0.99;
  double rms_epsilon = 1e-8;
  std::uint64_t target_sync_period = 100;
  std::optional<double> max_grad_norm;  // no clipping when empty
};

enum class NetworkRole { Main, Target };

/// Main parameters (trained) plus the periodically synced target copy.
class QNetwork {
 public:
  QNetwork() = default;
  /// Glorot-initialised main network; target starts as a copy.
  QNetwork(const QNetworkConfig& config, Rng& rng);
  QNetwork(const QNetworkConfig& config, Mlp<double> main, Mlp<double> target);

  Eigen::VectorXd forward(const Eigen::Ref<const StateVector>& s, NetworkRole which) const;
  Eigen::MatrixXd forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& states, NetworkRole which) const;

  const Mlp<double>& main() const { return main_; }
  const Mlp<double>& target() const { return target_; }
  Mlp<double>& main() { return main_; }
  Mlp<double>& target() { return target_; }
  RmsProp<double>& optimizer() { return optimizer_; }
  const RmsProp<double>& optimizer() const { return optimizer_; }
  const QNetworkConfig& config() const { return config_; }
  int state_size() const { return static_cast<int>(main_.input_size()); }

  /// One gradient step on the mean squared TD error of the given batch.
  /// Returns the loss evaluated before the update.
  double fit_batch(std::span<const Transition* const> batch);

  void copy_main_to_target() { target_ = main_; }

 private:
  QNetworkConfig config_;
  Mlp<double> main_;
  Mlp<double> target_;
  RmsProp<double> optimizer_;
};

/// Index of the largest entry; ties resolve to the lowest index.
int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Epsilon-greedy over the main network's Q-values.
Action select_action(const QNetwork& net, const Eigen::Ref<const StateVector>& s, double epsilon,
                     Rng& rng);

/// r if terminal, else r + discount * Q_target(s', argmax_a Q_main(s', a)).
double ddqn_target(const QNetwork& net, const Transition& t);

/// Samples `batch_size` transitions and fits them. Empty when the buffer
/// holds fewer than `batch_size` transitions (parameters untouched).
std::optional<double> train_step(QNetwork& net, ReplayBuffer& buffer, std::size_t batch_size,
                                 Rng& rng);

/// Copies main into target when global_step is a positive multiple of the
/// sync period. Returns whether a copy happened.
bool sync_target(QNetwork& net, std::uint64_t global_step);

/// Everything one learning UAV owns: network, memory, schedule and counters.
struct DdqnAgent {
  QNetwork net;
  ReplayBuffer buffer;
  EpsilonSchedule schedule;
  std::size_t batch_size = 1024;
  std::uint64_t global_step = 0;
  std::uint64_t updates = 0;
  Rng rng;

  DdqnAgent(const QNetworkConfig& config, std::size_t replay_capacity, std::size_t batch_size,
            EpsilonSchedule schedule, std::uint64_t seed);

  double epsilon() const { return epsilon_at(global_step, schedule); }
  Action act(const Eigen::Ref<const StateVector>& s, bool explore);
  /// Stores the transition, advances the step counter, trains once and
  /// syncs the target on schedule. Returns the loss when an update ran.
  std::optional<double> observe(Transition t);
};

}  // namespace uavee
