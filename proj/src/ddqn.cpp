#include "uavee/ddqn.hpp"

#include <algorithm>
#include <stdexcept>

namespace uavee {

Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions) throw std::out_of_range("action index out of range");
  return static_cast<Action>(index);
}

std::string_view action_name(Action a) {
  static constexpr std::array<std::string_view, kNumActions> names{"+x", "-x", "+y", "-y",
                                                                   "+z", "-z", "hover"};
  return names[static_cast<std::size_t>(a)];
}

std::array<int, 3> action_direction(Action a) {
  switch (a) {
    case Action::PosX: return {1, 0, 0};
    case Action::NegX: return {-1, 0, 0};
    case Action::PosY: return {0, 1, 0};
    case Action::NegY: return {0, -1, 0};
    case Action::Up: return {0, 0, 1};
    case Action::Down: return {0, 0, -1};
    case Action::Hover: return {0, 0, 0};
  }
  return {0, 0, 0};
}

// ---------------------------------------------------------------------------
// Replay memory

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    scratch_.push_back(scratch_.size());
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t age) const {
  if (age >= items_.size()) throw std::out_of_range("ReplayBuffer::at");
  return items_[(head_ + age) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, Rng& rng) {
  if (batch > items_.size()) throw std::invalid_argument("ReplayBuffer::sample: batch larger than buffer");
  // Partial Fisher-Yates over a persistent index permutation.
  std::vector<const Transition*> out;
  out.reserve(batch);
  const std::size_t n = scratch_.size();
  for (std::size_t k = 0; k < batch; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(scratch_[k], scratch_[pick(rng)]);
    out.push_back(&items_[scratch_[k]]);
  }
  return out;
}

// ---------------------------------------------------------------------------

double epsilon_at(std::uint64_t step, const EpsilonSchedule& schedule) {
  if (schedule.decay_steps == 0 || step >= schedule.decay_steps) return schedule.end;
  const double frac = static_cast<double>(step) / static_cast<double>(schedule.decay_steps);
  return schedule.start + (schedule.end - schedule.start) * frac;
}

// ---------------------------------------------------------------------------
// Q-network

QNetwork::QNetwork(const QNetworkConfig& config, Rng& rng)
    : config_(config), main_(Mlp<double>::glorot_uniform(config.layer_sizes, rng)), target_(main_),
      optimizer_(main_, config.learning_rate, config.rms_decay, config.rms_epsilon) {}

QNetwork::QNetwork(const QNetworkConfig& config, Mlp<double> main, Mlp<double> target)
    : config_(config), main_(std::move(main)), target_(std::move(target)),
      optimizer_(main_, config.learning_rate, config.rms_decay, config.rms_epsilon) {
  if (main_.sizes() != target_.sizes()) throw std::invalid_argument("QNetwork: main/target shapes differ");
}

Eigen::VectorXd QNetwork::forward(const Eigen::Ref<const StateVector>& s, NetworkRole which) const {
  return (which == NetworkRole::Main ? main_ : target_).forward_one(s);
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                        NetworkRole which) const {
  return (which == NetworkRole::Main ? main_ : target_).forward(states);
}

double QNetwork::fit_batch(std::span<const Transition* const> batch) {
  if (batch.empty()) throw std::invalid_argument("fit_batch: empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index dim = main_.input_size();

  Eigen::MatrixXd states(dim, n);
  Eigen::MatrixXd next_states(dim, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    states.col(k) = batch[k]->state;
    next_states.col(k) = batch[k]->next_state;
  }

  Mlp<double>::Tape tape;
  const Eigen::MatrixXd q = main_.forward(states, tape);
  const Eigen::MatrixXd q_next_main = main_.forward(next_states);
  const Eigen::MatrixXd q_next_target = target_.forward(next_states);

  Eigen::MatrixXd output_grad = Eigen::MatrixXd::Zero(q.rows(), n);
  double loss = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Transition& t = *batch[k];
    double y = t.reward;
    if (!t.terminal) y += config_.discount * q_next_target(argmax_lowest(q_next_main.col(k)), k);
    const int a = action_index(t.action);
    const double err = q(a, k) - y;
    loss += err * err;
    output_grad(a, k) = 2.0 * err / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);

  auto grads = main_.backward(tape, output_grad);
  if (config_.max_grad_norm) {
    const double norm = Mlp<double>::flatten(grads).norm();
    if (norm > *config_.max_grad_norm) {
      const double scale = *config_.max_grad_norm / norm;
      for (auto& g : grads) {
        g.weights *= scale;
        g.bias *= scale;
      }
    }
  }
  optimizer_.step(main_, grads);
  return loss;
}

int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values) {
  int best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values(i) > values(best)) best = static_cast<int>(i);
  return best;
}

Action select_action(const QNetwork& net, const Eigen::Ref<const StateVector>& s, double epsilon,
                     Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("select_action: epsilon outside [0, 1]");
  const double coin = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (coin < epsilon) return action_from_index(std::uniform_int_distribution<int>(0, kNumActions - 1)(rng));
  return action_from_index(argmax_lowest(net.forward(s, NetworkRole::Main)));
}

double ddqn_target(const QNetwork& net, const Transition& t) {
  if (t.terminal) return t.reward;
  const int best = argmax_lowest(net.forward(t.next_state, NetworkRole::Main));
  return t.reward + net.config().discount * net.forward(t.next_state, NetworkRole::Target)(best);
}

std::optional<double> train_step(QNetwork& net, ReplayBuffer& buffer, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0 || buffer.size() < batch_size) return std::nullopt;
  const auto batch = buffer.sample(batch_size, rng);
  return net.fit_batch(batch);
}

bool sync_target(QNetwork& net, std::uint64_t global_step) {
  const auto period = net.config().target_sync_period;
  if (period == 0 || global_step == 0 || global_step % period != 0) return false;
  net.copy_main_to_target();
  return true;
}

// ---------------------------------------------------------------------------

DdqnAgent::DdqnAgent(const QNetworkConfig& config, std::size_t replay_capacity, std::size_t batch,
                     EpsilonSchedule eps, std::uint64_t seed)
    : buffer(replay_capacity), schedule(eps), batch_size(batch), rng(seed) {
  net = QNetwork(config, rng);
}

Action DdqnAgent::act(const Eigen::Ref<const StateVector>& s, bool explore) {
  return select_action(net, s, explore ? epsilon() : 0.0, rng);
}

std::optional<double> DdqnAgent::observe(Transition t) {
  buffer.push(std::move(t));
  ++global_step;
  auto loss = train_step(net, buffer, batch_size, rng);
  if (loss) ++updates;
  sync_target(net, global_step);
  return loss;
}

}  // namespace uavee
