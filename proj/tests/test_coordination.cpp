#include "doctest.h"
#include "oracles.hpp"
#include "uavee/coordination.hpp"

using namespace uavee;

namespace {

std::vector<UavState> line_of_uavs(int n, double spacing) {
  std::vector<UavState> uavs(n);
  for (int j = 0; j < n; ++j) {
    uavs[j].id = j;
    uavs[j].position = Position(spacing * j, 0, 100);
    uavs[j].step_energy = 100.0 + j;
  }
  return uavs;
}

StateNorms norms() {
  StateNorms n;
  n.max_users = 100;
  n.energy_scale = 600;
  n.distance_scale = n.area.diagonal();
  return n;
}

}  // namespace

TEST_SUITE("coordination") {

TEST_CASE("neighbour table holds at most six, nearest first") {
  const auto uavs = line_of_uavs(10, 30);
  std::vector<std::size_t> scores(10);
  for (std::size_t j = 0; j < 10; ++j) scores[j] = j * 2;
  const auto table = nearest_neighbors(4, uavs, scores, 1e9);
  REQUIRE(table.size() == 6);
  // Distances 30 (ids 3, 5), 60 (2, 6), 90 (1, 7): ties by id.
  const int expect[] = {3, 5, 2, 6, 1, 7};
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(table[k].sender == expect[k]);
    CHECK(table[k].connectivity_score == scores[expect[k]]);
    CHECK(table[k].instantaneous_energy == 100.0 + expect[k]);
  }
  CHECK(table.total_score() == 2 * (3 + 5 + 2 + 6 + 1 + 7));
  NeighborTable full = table;
  CHECK_THROWS_AS(full.add({}), std::length_error);
}

TEST_CASE("range and death filter neighbours") {
  auto uavs = line_of_uavs(4, 30);
  uavs[1].alive = false;
  const std::vector<std::size_t> scores(4, 1);
  const auto table = nearest_neighbors(0, uavs, scores, 65);
  REQUIRE(table.size() == 1);
  CHECK(table[0].sender == 2);
  CHECK(nearest_neighbors(0, uavs, scores, 10).empty());
  CHECK_THROWS(nearest_neighbors(9, uavs, scores, 10));
}

TEST_CASE("state layout and padding") {
  const auto uavs = line_of_uavs(3, 100);
  const StateNorms n = norms();
  const std::vector<std::size_t> scores{10, 20, 30};
  const auto table = nearest_neighbors(0, uavs, scores, 1e9);
  const StateVector s = assemble_state(uavs[0], 10, table, n);
  REQUIRE(s.size() == 23);
  CHECK(s(0) == 0.0);
  CHECK(s(2) == doctest::Approx((100.0 - 50.0) / 250.0));
  CHECK(s(3) == doctest::Approx(0.1));
  CHECK(s(4) == doctest::Approx(100.0 / 600.0));
  CHECK(s(5) == doctest::Approx(100.0 / n.distance_scale));
  CHECK(s(6) == doctest::Approx(200.0 / n.distance_scale));
  for (int k = 7; k < 11; ++k) CHECK(s(k) == 1.0);
  CHECK(s(11) == doctest::Approx(0.2));
  CHECK(s(12) == doctest::Approx(0.3));
  for (int k = 13; k < 17; ++k) CHECK(s(k) == 0.0);
  CHECK(s(17) == doctest::Approx(101.0 / 600.0));
  for (int k = 19; k < 23; ++k) CHECK(s(k) == 0.0);

  const StateVector mad = baseline_mad_ddqn_state(uavs[0], 10, n);
  REQUIRE(mad.size() == 5);
  CHECK(mad == s.head(5));
}

TEST_CASE("state entries are clamped into [0, 1]") {
  UavState u;
  u.position = Position(5000, -20, 1000);
  u.step_energy = 1e6;
  const StateVector s = own_state(u, 1000, norms());
  CHECK(s.minCoeff() >= 0.0);
  CHECK(s.maxCoeff() <= 1.0);
}

TEST_CASE("reward structure") {
  CHECK(cooperative_factor(5, 4) == 1);
  CHECK(cooperative_factor(4, 4) == -1);
  CHECK(cooperative_factor(3, 4) == -1);
  // Unchanged score, no neighbourhood gain, energy up from 1 to 5: -1 - 2/3.
  CHECK(compute_reward(3, 3, 5.0, 1.0, -1) == doctest::Approx(-5.0 / 3.0));
  CHECK(compute_reward(4, 3, 1.0, 1.0, 1) == 2.0);
  CHECK(compute_reward(2, 3, 1.0, 1.0, -1) == -2.0);
  CHECK_THROWS(compute_reward(1, 1, 0.0, 0.0, 1));
  for (long now = 0; now < 4; ++now)
    for (long prev = 0; prev < 4; ++prev)
      for (int coop : {-1, 1}) {
        const double r = compute_reward(now, prev, 170.0 + now, 300.0 - prev, coop);
        CHECK(r == doctest::Approx(oracle::reward(now, prev, 170.0 + now, 300.0 - prev, coop > 0 ? 1 : 0, 0)));
        CHECK(std::abs(r) < 3.0);
      }
}

TEST_CASE("overhead ledger") {
  OverheadLedger ledger(3, 96);
  const auto uavs = line_of_uavs(8, 30);
  const std::vector<std::size_t> scores(8, 0);
  const auto table = nearest_neighbors(0, uavs, scores, 1e9);
  CHECK(ledger.record(0, table) == 576);
  CHECK(ledger.record(2, nearest_neighbors(0, uavs, scores, 45)) == 96);
  CHECK(ledger.step_bits(0) == 576);
  CHECK(ledger.step_total() == 672);
  CHECK(ledger.end_step() == 672);
  CHECK(ledger.step_total() == 0);
  CHECK(ledger.cumulative_total() == 672);
  CHECK(ledger.cumulative_bits(2) == 96);
  CHECK(ledger.step_history() == std::vector<std::uint64_t>{672});
  CHECK(ledger.global_scheme_bound(12) == 11 * 96);
  CHECK(ledger.local_bound(7) == 6 * 96);
}

}
