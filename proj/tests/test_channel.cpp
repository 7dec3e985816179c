#include "doctest.h"
#include "oracles.hpp"
#include "uavee/channel.hpp"

#include <random>

using namespace uavee;

namespace {

oracle::P3 to_p3(const Position& p) { return {p.x(), p.y(), p.z()}; }

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("single UAV at 100 m gives SINR 1e11 with the default constants") {
  const ChannelParams params;
  const std::vector<Position> uavs{Position(0, 0, 100)};
  const double g = sinr<double>(Position(0, 0, 0), 0, uavs, params);
  CHECK(g == doctest::Approx(1e11).epsilon(1e-12));
  CHECK(data_rate(g, params, true) == doctest::Approx(36541209.04377541).epsilon(1e-12));
  CHECK(data_rate(g, params, false) == 0.0);
}

TEST_CASE("table units convert to linear") {
  const auto p = ChannelParams::from_table_units(20, 2, 1, -130, 1e6, 5);
  CHECK(p.transmit_power_watts == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(p.noise_power_watts == doctest::Approx(1e-16).epsilon(1e-12));
  CHECK(p.sinr_threshold_linear == doctest::Approx(3.1622776601683795).epsilon(1e-12));
  CHECK_THROWS_AS(ChannelParams::from_table_units(20, 0.5, 1, -130, 1e6, 5), std::invalid_argument);
}

TEST_CASE("sinr rejects a bad index and a co-located user") {
  const ChannelParams params;
  const std::vector<Position> uavs{Position(0, 0, 100), Position(50, 0, 100)};
  CHECK_THROWS_AS(sinr<double>(Position(0, 0, 0), 2, uavs, params), std::out_of_range);
  CHECK_THROWS_AS(sinr<double>(Position(0, 0, 100), 0, uavs, params), std::domain_error);
}

TEST_CASE("sinr also works in single precision") {
  const ChannelParams params;
  const std::vector<Position3<float>> uavs{Position3<float>(0, 0, 100), Position3<float>(300, 0, 100)};
  const std::vector<Position> uavs_d{Position(0, 0, 100), Position(300, 0, 100)};
  const float g = sinr<float>(Position3<float>(10, 0, 0), 0, uavs, params);
  const double gd = sinr<double>(Position(10, 0, 0), 0, uavs_d, params);
  CHECK(static_cast<double>(g) == doctest::Approx(gd).epsilon(1e-5));
}

TEST_CASE("association matches the brute-force oracle on random instances") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> xy(0, 500), h(50, 300);
  std::uniform_int_distribution<int> nu(1, 5), nusers(1, 20);
  const ChannelParams params;
  const oracle::Channel oc;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Position> uavs, users;
    for (int j = nu(rng); j > 0; --j) uavs.emplace_back(xy(rng), xy(rng), h(rng));
    for (int i = nusers(rng); i > 0; --i) users.emplace_back(xy(rng), xy(rng), 0.0);
    std::vector<oracle::P3> ou, ous;
    for (auto& p : uavs) ou.push_back(to_p3(p));
    for (auto& p : users) ous.push_back(to_p3(p));

    const auto got = associate_users(users, uavs, std::vector<bool>(uavs.size(), true), params);
    const auto want = oracle::associate(ous, ou, oc);
    REQUIRE(got.users.size() == users.size());
    for (std::size_t i = 0; i < users.size(); ++i) {
      CHECK(got.users[i].serving_uav == want.serving[i]);
      if (want.serving[i]) CHECK(oracle::rel_err(got.users[i].rate_bps, want.rate[i]) < 1e-12);
    }
    CHECK(connectivity_scores(got) == oracle::scores(want, uavs.size()));
  }
}

TEST_CASE("dead UAVs neither serve nor interfere") {
  const ChannelParams params;
  const std::vector<Position> uavs{Position(0, 0, 100), Position(5, 0, 100)};
  const std::vector<Position> users{Position(0, 0, 0)};
  const auto both = associate_users(users, uavs, {true, true}, params);
  CHECK_FALSE(both.users[0].serving_uav.has_value());  // equal-strength interferer
  const auto one = associate_users(users, uavs, {true, false}, params);
  REQUIRE(one.users[0].serving_uav == std::optional<std::size_t>(0));
  CHECK(one.users[0].sinr == doctest::Approx(1e11).epsilon(1e-12));
  CHECK(one.throughput_per_uav()[1] == 0.0);
}

TEST_CASE("ties go to the lowest UAV id") {
  ChannelParams params;
  params.sinr_threshold_linear = 0.5;  // SINR of a perfect tie is just under 1
  const std::vector<Position> uavs{Position(-10, 0, 100), Position(10, 0, 100)};
  const auto a = associate_users(std::vector<Position>{Position(0, 0, 0)}, uavs, {true, true}, params);
  CHECK(a.users[0].serving_uav == std::optional<std::size_t>(0));
}

TEST_CASE("a user exactly at the threshold is not connected") {
  ChannelParams params;
  const std::vector<Position> uavs{Position(0, 0, 100)};
  params.sinr_threshold_linear = sinr<double>(Position(0, 0, 0), 0, uavs, params);
  const auto a = associate_users(std::vector<Position>{Position(0, 0, 0)}, uavs, {true}, params);
  CHECK(a.connected_count() == 0);
}

TEST_CASE("Jain fairness") {
  const std::vector<std::size_t> equal{4, 4, 4, 4}, single{0, 9, 0, 0, 0}, none{0, 0, 0};
  CHECK(jain_fairness(equal) == 1.0);
  CHECK(jain_fairness(single) == 1.0 / 5.0);
  CHECK(jain_fairness(none) == 1.0);
  const std::vector<std::size_t> mixed{1, 2, 3};
  CHECK(jain_fairness(mixed) == doctest::Approx(36.0 / 42.0));
  CHECK_THROWS(jain_fairness(std::span<const std::size_t>{}));
}

}
