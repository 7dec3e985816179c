// Acceptance checks: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Optional arguments select criteria by
// number, e.g. `uavee_acceptance 1 4 11`.
#include "oracles.hpp"
#include "uavee/runner.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>

using namespace uavee;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("uavee_acceptance_" + name);
  fs::remove_all(dir);
  return dir;
}

// --- 1 ---------------------------------------------------------------------

Outcome hover_power() {
  const PowerModelParams p;
  const double hover = propulsion_power(0.0, p);
  EnergyBudget budget(battery_energy_joules(16000, 22.2), 1.0);
  const double e = budget.step_energy(hover);
  const double err = std::max(oracle::rel_err(hover, 168.48), oracle::rel_err(e, 168.48));
  return {err <= 1e-9, fmt("P(0) = %.12g W, step energy = %.12g J, rel err %.2e", hover, e, err)};
}

// --- 2 ---------------------------------------------------------------------

Outcome oracle_suite() {
  Rng rng(2024);
  std::uniform_real_distribution<double> xy(0, 400), h(50, 200), unit(0, 1), energy(100, 700);
  std::uniform_int_distribution<int> n_uavs(1, 5), n_users(1, 20), small(0, 30);
  const ChannelParams params;
  const oracle::Channel oc;
  double worst = 0;
  std::size_t mismatches = 0;
  const int instances = 200;

  for (int trial = 0; trial < instances; ++trial) {
    std::vector<Position> uavs, users;
    std::vector<oracle::P3> ou, ous;
    for (int j = n_uavs(rng); j > 0; --j) {
      uavs.emplace_back(xy(rng), xy(rng), h(rng));
      ou.push_back({uavs.back().x(), uavs.back().y(), uavs.back().z()});
    }
    for (int i = n_users(rng); i > 0; --i) {
      users.emplace_back(xy(rng), xy(rng), 0.0);
      ous.push_back({users.back().x(), users.back().y(), 0.0});
    }

    // SINR and rate for every user/UAV pair.
    for (std::size_t i = 0; i < users.size(); ++i)
      for (std::size_t j = 0; j < uavs.size(); ++j) {
        const double g = sinr<double>(users[i], j, uavs, params);
        worst = std::max(worst, oracle::rel_err(g, oracle::sinr(ous[i], j, ou, oc)));
        worst = std::max(worst, oracle::rel_err(data_rate(g, params, true), oracle::rate(g, oc)));
      }

    // Association, scores, fairness.
    const auto assoc = associate_users(users, uavs, std::vector<bool>(uavs.size(), true), params);
    const auto want = oracle::associate(ous, ou, oc);
    for (std::size_t i = 0; i < users.size(); ++i) {
      if (assoc.users[i].serving_uav != want.serving[i]) ++mismatches;
      if (want.serving[i]) worst = std::max(worst, oracle::rel_err(assoc.users[i].rate_bps, want.rate[i]));
    }
    const auto scores = connectivity_scores(assoc);
    if (scores != oracle::scores(want, uavs.size())) ++mismatches;
    worst = std::max(worst, oracle::rel_err(jain_fairness(scores), oracle::jain(scores)));

    // Per-UAV and system energy efficiency over a short random log.
    const auto throughput = assoc.throughput_per_uav();
    const int steps = 1 + small(rng) % 10;
    Eigen::MatrixXd rates(steps, uavs.size()), energies(steps, uavs.size());
    std::vector<std::vector<double>> orates(steps), oenergies(steps);
    for (int t = 0; t < steps; ++t)
      for (std::size_t j = 0; j < uavs.size(); ++j) {
        rates(t, j) = throughput[j] * unit(rng);
        energies(t, j) = energy(rng);
        orates[t].push_back(rates(t, j));
        oenergies[t].push_back(energies(t, j));
        if (rates(t, j) > 0)
          worst = std::max(worst, oracle::rel_err(uav_ee(rates(t, j), energies(t, j)), rates(t, j) / energies(t, j)));
      }
    const double sys = system_ee(rates, energies);
    if (sys > 0) worst = std::max(worst, oracle::rel_err(sys, oracle::system_ee(orates, oenergies)));

    // Reward and cooperative factor from random neighbourhood totals.
    for (int k = 0; k < 5; ++k) {
      const long c_now = small(rng), c_prev = small(rng), hood_now = c_now + small(rng), hood_prev = c_prev + small(rng);
      const double e_now = energy(rng), e_prev = energy(rng);
      const int coop = cooperative_factor(static_cast<std::size_t>(hood_now), static_cast<std::size_t>(hood_prev));
      const double r = compute_reward(c_now, c_prev, e_now, e_prev, coop);
      worst = std::max(worst, oracle::rel_err(r, oracle::reward(c_now, c_prev, e_now, e_prev, hood_now, hood_prev)));
    }
  }
  const bool pass = worst < 1e-9 && mismatches == 0;
  return {pass, fmt("%.0f instances, max rel err %.2e, association mismatches %.0f", instances, worst,
                    static_cast<double>(mismatches))};
}

// --- 3 ---------------------------------------------------------------------

// Mean squared TD error at the taken actions with targets held fixed.
double td_loss(const Mlp<double>& net, const Eigen::MatrixXd& states, const std::vector<int>& actions,
               const std::vector<double>& targets) {
  const Eigen::MatrixXd q = net.forward(states);
  double loss = 0;
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const double err = q(actions[k], k) - targets[k];
    loss += err * err;
  }
  return loss / static_cast<double>(q.cols());
}

double grad_rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale < 1e-10) return 0.0;
  return std::abs(a - b) / scale;
}

Outcome gradient_check() {
  QNetworkConfig cfg;
  cfg.layer_sizes = {23, 4, 4, kNumActions};
  cfg.discount = 0.95;
  Rng rng(77);
  QNetwork net(cfg, rng);
  for (auto& l : net.main().layers()) l.bias = Eigen::VectorXd::Random(l.bias.size()) * 0.5;
  net.target() = Mlp<double>::glorot_uniform(cfg.layer_sizes, rng);

  std::vector<Transition> data;
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 8; ++k) {
    Transition t;
    t.state = Eigen::VectorXd::NullaryExpr(23, [&] { return u(rng); });
    t.next_state = Eigen::VectorXd::NullaryExpr(23, [&] { return u(rng); });
    t.action = action_from_index(k % kNumActions);
    t.reward = 2 * u(rng) - 1;
    t.terminal = k == 5;
    data.push_back(t);
  }
  Eigen::MatrixXd states(23, data.size());
  std::vector<int> actions;
  std::vector<double> targets;
  for (std::size_t k = 0; k < data.size(); ++k) {
    states.col(k) = data[k].state;
    actions.push_back(action_index(data[k].action));
    targets.push_back(ddqn_target(net, data[k]));
  }

  // Backprop gradient of the TD loss.
  Mlp<double>::Tape tape;
  const Eigen::MatrixXd q = net.main().forward(states, tape);
  Eigen::MatrixXd out_grad = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  for (Eigen::Index k = 0; k < q.cols(); ++k)
    out_grad(actions[k], k) = 2.0 * (q(actions[k], k) - targets[k]) / static_cast<double>(q.cols());
  const Eigen::VectorXd analytic = Mlp<double>::flatten(net.main().backward(tape, out_grad));

  // Gradient actually applied by fit_batch, recovered from one RMSprop step:
  // v = (1 - rho) g^2 gives |g|, the parameter change gives its sign.
  QNetwork fitted = net;
  std::vector<const Transition*> batch;
  for (const auto& t : data) batch.push_back(&t);
  fitted.fit_batch(batch);
  const Eigen::VectorXd v = Mlp<double>::flatten(fitted.optimizer().square_avg());
  const Eigen::VectorXd delta = fitted.main().flat_parameters() - net.main().flat_parameters();
  const double rho = cfg.rms_decay;

  const Eigen::VectorXd theta = net.main().flat_parameters();
  const double h = 1e-6;
  double worst = 0, worst_fit = 0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Mlp<double> plus = net.main(), minus = net.main();
    Eigen::VectorXd tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    plus.set_flat_parameters(tp);
    minus.set_flat_parameters(tm);
    const double numeric = (td_loss(plus, states, actions, targets) - td_loss(minus, states, actions, targets)) / (2 * h);
    worst = std::max(worst, grad_rel_err(analytic(i), numeric));
    const double applied = delta(i) == 0 ? 0.0 : -std::copysign(std::sqrt(v(i) / (1.0 - rho)), delta(i));
    worst_fit = std::max(worst_fit, grad_rel_err(applied, numeric));
  }
  const bool pass = worst < 1e-4 && worst_fit < 1e-4;
  return {pass, fmt("%.0f parameters, max rel err backprop %.2e, training step %.2e",
                    static_cast<double>(theta.size()), worst, worst_fit)};
}

// --- 4 ---------------------------------------------------------------------

Mlp<double> bias_only(const std::array<double, kNumActions>& q) {
  Mlp<double> net({3, kNumActions});
  for (int a = 0; a < kNumActions; ++a) net.layers()[0].bias(a) = q[a];
  return net;
}

Outcome double_q() {
  QNetworkConfig cfg;
  cfg.layer_sizes = {3, kNumActions};
  cfg.discount = 0.95;
  bool pass = true;
  std::string detail;
  Rng rng(4);
  std::uniform_real_distribution<double> u(-5, 5);
  int cases = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, kNumActions> qm{}, qt{};
    for (int a = 0; a < kNumActions; ++a) {
      qm[a] = u(rng);
      qt[a] = u(rng);
    }
    const int am = static_cast<int>(std::max_element(qm.begin(), qm.end()) - qm.begin());
    const int at = static_cast<int>(std::max_element(qt.begin(), qt.end()) - qt.begin());
    if (am == at) continue;  // only divergent argmaxes
    ++cases;
    const QNetwork net(cfg, bias_only(qm), bias_only(qt));
    Transition t;
    t.state = Eigen::Vector3d(0.1, 0.2, 0.3);
    t.next_state = Eigen::Vector3d(0.4, 0.5, 0.6);
    t.reward = u(rng);
    t.action = action_from_index(trial % kNumActions);
    const double brute = t.reward + 0.95 * qt[am];
    const double got = ddqn_target(net, t);
    if (got != brute || got == t.reward + 0.95 * qt[at]) pass = false;

    // The training loss uses the same target.
    QNetwork fit = net;
    const Transition* batch[] = {&t};
    const double err = qm[action_index(t.action)] - brute;
    if (fit.fit_batch(batch) != err * err) pass = false;
  }
  detail = std::to_string(cases) + " crafted pairs, target = r + gamma * Q_target(s', argmax Q_main(s'))" +
           (pass ? "" : " violated");
  return {pass && cases >= 100, detail};
}

// --- 5 ---------------------------------------------------------------------

Outcome state_contract() {
  Rng rng(5);
  std::uniform_int_distribution<int> n_uavs(2, 12), n_users(1, 80), action(0, kNumActions - 1), steps(0, 30);
  std::size_t checked = 0, bad = 0;
  while (checked < 10'000) {
    ScenarioConfig c = default_config();
    c.num_uavs = static_cast<std::size_t>(n_uavs(rng));
    c.users = {static_cast<std::size_t>(n_users(rng)), static_cast<std::size_t>(n_users(rng) / 4),
               static_cast<std::size_t>(n_users(rng) / 4), static_cast<std::size_t>(n_users(rng))};
    c.communication_range = std::uniform_real_distribution<double>(50, 1500)(rng);
    c.finalize();
    World world(c, rng());
    auto obs = world.reset(rng());
    const int t_end = steps(rng);
    for (int t = 0; t < t_end; ++t) {
      std::vector<Action> acts;
      for (std::size_t j = 0; j < c.num_uavs; ++j) acts.push_back(action_from_index(action(rng)));
      obs = world.step(acts).observations;
    }
    for (std::size_t j = 0; j < obs.size(); ++j) {
      const auto& s = obs[j];
      if (s.size() != kCmadStateSize || !s.allFinite() || s.minCoeff() < 0 || s.maxCoeff() > 1) ++bad;
      const StateVector mad = baseline_mad_ddqn_state(world.uavs()[j], world.scores()[j], world.norms());
      if (mad.size() != kMadStateSize || mad != s.head(kMadStateSize)) ++bad;
      ++checked;
    }
  }
  return {bad == 0, fmt("%.0f states checked, %.0f violations (CMAD length 23 in [0,1], MAD length 5)",
                        static_cast<double>(checked), static_cast<double>(bad))};
}

// --- 6 ---------------------------------------------------------------------

Outcome reward_bound() {
  ScenarioConfig c = default_config();
  c.agent = AgentKind::Random;
  c.max_steps = 400;
  c.e_max_override = 150'000.0;  // some UAVs die mid-episode
  c.finalize();
  World world(c, 6);
  std::vector<Agent> agents;
  for (std::size_t j = 0; j < c.num_uavs; ++j) agents.push_back(Agent::random(derive_seed(6, 9, j)));
  double worst = 0;
  std::size_t logged = 0;
  for (std::size_t e = 0; e < 10; ++e) {
    const auto log = run_episode(world, agents, false, derive_seed(6, 1, e), e);
    for (const auto& row : log.rows)
      for (double r : row.rewards) {
        worst = std::max(worst, std::abs(r));
        ++logged;
      }
  }
  return {worst <= 3.0, fmt("max |r| = %.6f over %.0f logged rewards", worst, static_cast<double>(logged))};
}

// --- 7 ---------------------------------------------------------------------

Outcome overhead() {
  ScenarioConfig c = default_config();
  c.num_uavs = 12;
  c.agent = AgentKind::Cmad;
  c.max_steps = 300;
  c.finalize();
  const std::uint64_t E = c.bits_per_observation;
  World world(c, 7);
  Rng rng(7);
  std::size_t violations = 0, steps = 0;
  std::uint64_t max_per_uav = 0, max_step_total = 0;
  for (std::uint64_t e = 0; e < 3; ++e) {
    world.reset(derive_seed(7, 1, e), e);
    for (std::size_t t = 0; t < c.max_steps; ++t) {
      std::vector<Action> acts;
      for (std::size_t j = 0; j < 12; ++j) acts.push_back(baseline_random(rng));
      const auto r = world.step(acts);
      std::uint64_t total = 0;
      for (std::size_t j = 0; j < 12; ++j) {
        const std::uint64_t bits = r.row.overhead_bits[j];
        const std::uint64_t expect = world.uavs()[j].alive ? world.neighbor_tables()[j].size() * E : 0;
        if (bits != expect || bits > 6 * E || bits >= world.ledger().global_scheme_bound(12)) ++violations;
        max_per_uav = std::max(max_per_uav, bits);
        total += bits;
      }
      if (total != r.row.step_overhead_bits) ++violations;
      max_step_total = std::max(max_step_total, total);
      ++steps;
    }
  }
  std::ostringstream detail;
  detail << steps << " steps, max bits per UAV per step " << max_per_uav << " (6E = " << 6 * E
         << ", (U_G-1)E = " << world.ledger().global_scheme_bound(12) << "), max step total " << max_step_total
         << ", violations " << violations;
  return {violations == 0, detail.str()};
}

// --- 8 ---------------------------------------------------------------------

Outcome constraints() {
  ScenarioConfig c = default_config();
  c.num_uavs = 8;
  c.agent_mix = {AgentKind::Cmad, AgentKind::Mad, AgentKind::Random, AgentKind::Cmad,
                 AgentKind::Mad,  AgentKind::Random, AgentKind::Cmad, AgentKind::Mad};
  c.max_steps = 300;
  c.episodes = 20;
  c.e_max_override = 100'000.0;  // deaths happen inside the episode
  c.learning.batch_size = 32;
  c.learning.replay_capacity = 2000;
  c.finalize();

  World world(c, 8);
  auto agents = make_agents(c, 8);
  std::size_t violations = 0, rows = 0, deaths = 0;
  for (std::size_t e = 0; e < c.episodes; ++e) {
    const auto log = run_episode(world, agents, true, derive_seed(8, 1, e), e);
    std::vector<double> consumed(c.num_uavs, 0.0);
    for (const auto& row : log.rows) {
      ++rows;
      for (std::size_t j = 0; j < c.num_uavs; ++j) {
        consumed[j] += row.step_energy[j];
        if (!row.alive[j]) continue;
        if (!c.area.contains(row.positions[j])) ++violations;
        if (consumed[j] > c.e_max()) ++violations;
        for (std::size_t k = j + 1; k < c.num_uavs; ++k)
          if (row.alive[k] && distance3d(row.positions[j], row.positions[k]) < c.d_col) ++violations;
      }
    }
    deaths += c.num_uavs - log.summary.alive_at_end;
  }
  return {violations == 0, fmt("%.0f steps, %.0f deaths, %.0f violations", static_cast<double>(rows),
                               static_cast<double>(deaths), static_cast<double>(violations))};
}

// --- 9 ---------------------------------------------------------------------

Outcome desk_learning() {
  const ScenarioConfig c = load_config(UAVEE_SOURCE_DIR "/configs/desk.json");
  const auto start = std::chrono::steady_clock::now();
  TrainResult trained = train_agents(c, c.seed, make_agents(c, c.seed), 0, nullptr, nullptr);
  const EvaluationSummary learned = evaluate_agents(c, trained.agents, c.eval_runs, c.seed);

  std::vector<Agent> random;
  for (std::size_t j = 0; j < c.num_uavs; ++j)
    random.push_back(Agent::random(derive_seed(c.seed, seed_stream::kEvalRandomPolicy, j)));
  const EvaluationSummary baseline = evaluate_agents(c, random, c.eval_runs, c.seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const double ratio = learned.system_ee.mean / baseline.system_ee.mean;
  const double users_learned = learned.connected_pct.mean, users_random = baseline.connected_pct.mean;
  const bool pass = ratio >= 1.5 && users_learned >= users_random;
  return {pass, fmt("EE ratio %.3f (need >= 1.5), connected %.2f%% vs random %.2f%%", ratio, users_learned,
                    users_random) +
                    fmt(", %.0f s", secs)};
}

// --- 10 --------------------------------------------------------------------

Outcome determinism() {
  ScenarioConfig c = load_config(UAVEE_SOURCE_DIR "/configs/desk.json");
  c.episodes = 4;
  c.max_steps = 60;
  c.learning.batch_size = 32;
  c.agent_mix = {AgentKind::Cmad, AgentKind::Mad, AgentKind::Random};
  c.finalize();
  const auto a = scratch("det_a"), b = scratch("det_b");
  TrainOptions opts;
  opts.seed = 1234;
  opts.out_dir = a;
  const auto result = train(c, opts);
  opts.out_dir = b;
  train(c, opts);
  bool same = true;
  for (const char* f : {"steps.csv", "episodes.csv"}) {
    const std::string x = slurp(a / f);
    same = same && !x.empty() && x == slurp(b / f);
  }

  const DdqnAgent& agent = result.agents[0].ddqn();
  const fs::path ckpt = a / "roundtrip.json";
  save_checkpoint(ckpt, agent, "cmad", 0);
  const AgentCheckpoint back = load_checkpoint(ckpt);
  Rng rng(10);
  std::uniform_real_distribution<double> u(0, 1);
  std::size_t differing = 0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd s = Eigen::VectorXd::NullaryExpr(agent.net.state_size(), [&] { return u(rng); });
    for (auto role : {NetworkRole::Main, NetworkRole::Target}) {
      const Eigen::VectorXd q0 = agent.net.forward(s, role), q1 = back.agent.net.forward(s, role);
      if (std::memcmp(q0.data(), q1.data(), sizeof(double) * q0.size()) != 0) ++differing;
    }
  }
  const bool pass = same && differing == 0;
  return {pass, std::string("metrics CSVs ") + (same ? "byte-identical" : "DIFFER") +
                    ", checkpoint Q-values differing on " + std::to_string(differing) + " of 100 states"};
}

// --- 11 --------------------------------------------------------------------

Outcome jain_extremes() {
  bool pass = true;
  for (std::size_t n = 1; n <= 12; ++n)
    for (std::size_t v : {1u, 7u, 250u}) {
      const std::vector<std::size_t> equal(n, v);
      std::vector<std::size_t> single(n, 0);
      single[n / 2] = v;
      if (jain_fairness(equal) != 1.0) pass = false;
      if (jain_fairness(single) != 1.0 / static_cast<double>(n)) pass = false;
    }
  return {pass, "N = 1..12: all-equal == 1.0 and single-server == 1/N exactly"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, hover_power},   {2, oracle_suite}, {3, gradient_check}, {4, double_q},
      {5, state_contract}, {6, reward_bound}, {7, overhead},       {8, constraints},
      {9, desk_learning}, {10, determinism}, {11, jain_extremes},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& [id, check] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2d: %s - %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
