#include <doctest.h>

#include <cmath>

#include "irsbf/scenario.hpp"

using namespace irsbf;

TEST_CASE("dbm conversion") {
  CHECK(dbm_to_linear(30.0) == doctest::Approx(1000.0));
  CHECK(dbm_to_linear(0.0) == doctest::Approx(1.0));
  CHECK(dbm_to_linear(-90.0) == doctest::Approx(1e-9).epsilon(1e-12));
  CHECK(db_to_linear(-20.0) == doctest::Approx(0.01));
}

TEST_CASE("reference deployment document") {
  const char* doc = R"({"M": 40, "N": 6, "K": 4})";
  const ScenarioConfig c = load_config(doc);
  CHECK(c.M == 40);
  CHECK(c.N == 6);
  REQUIRE(c.irs_positions.size() == 6);
  const Point2 expect[] = {{60, 40}, {60, -40}, {100, 40}, {100, -40}, {140, 40}, {140, -40}};
  for (int i = 0; i < 6; ++i) CHECK(c.irs_positions[i] == expect[i]);
  CHECK(c.P_max_dbm == 30.0);
  CHECK(c.sinr_min_db == -20.0);
  CHECK(c.noise_dbm == -90.0);
  CHECK(c.n_paths_bs_irs == 5);
  CHECK(c.n_paths_irs_user == 1);
  CHECK(c.user_region.center == Point2{100, 0});
  CHECK(c.user_region.radius == 10.0);
  CHECK(c == reference_config());
}

TEST_CASE("config validation") {
  CHECK_THROWS_WITH_AS(load_config(R"({"M": 40, "N": 6})"), doctest::Contains("missing field 'K'"), ConfigError);
  CHECK_THROWS_AS(load_config(R"({"M": 40, "N": 6, "K": 4, "user_region": {"radius": 0}})"), ConfigError);
  CHECK_THROWS_AS(load_config("not json"), ConfigError);
  CHECK_THROWS_AS(load_config(R"({"M": 0, "N": 6, "K": 4})"), ConfigError);
  CHECK_THROWS_AS(load_config(R"({"M": 4, "N": 7, "K": 4})"), ConfigError);
}

TEST_CASE("config round trip is exact") {
  ScenarioConfig c = reference_config();
  c.P_max_dbm = 0.1 + 0.2;  // not representable in short decimal
  c.user_region.radius = 1.0 / 3.0;
  c.noise_dbm = -123.456789012345678;
  const ScenarioConfig back = load_config(dump_config(c));
  CHECK(back == c);
  CHECK(config_hash(back) == config_hash(c));
  c.M = 41;
  CHECK(config_hash(back) != config_hash(c));
}

TEST_CASE("irs count and element count helpers") {
  const ScenarioConfig c = with_irs_count(reference_config(), 4);
  CHECK(c.N == 4);
  CHECK(c.irs_positions.back() == Point2{100, -40});
  const ScenarioConfig e = with_element_count(c, 36);
  CHECK(e.L_v == 6);
  CHECK(e.L_h == 6);
  CHECK(with_element_count(c, 100).L() == 100);
  CHECK(with_element_count(c, 7).L() == 7);
}

TEST_CASE("user placement") {
  const ScenarioConfig c = reference_config();
  auto s1 = make_stream(7, StreamId::placement);
  auto s2 = make_stream(7, StreamId::placement);
  const Layout a = place_users(c, s1);
  const Layout b = place_users(c, s2);
  REQUIRE(a.user_positions.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(a.user_positions[k] == b.user_positions[k]);
    CHECK(distance(a.user_positions[k], {100, 0}) <= 10.0);
    CHECK(a.dist_bs_user[k] == doctest::Approx(distance({0, 0}, a.user_positions[k])));
  }
  CHECK(a.dist_irs_user[2][1] == doctest::Approx(distance({100, 40}, a.user_positions[1])));
  CHECK(a.aod_bs_irs[0] == doctest::Approx(std::atan2(40.0, 60.0)));
  CHECK(a.aoa_bs_irs[0] == doctest::Approx(std::atan2(-40.0, -60.0)));
}

TEST_CASE("degenerate disc puts every user at the centre") {
  ScenarioConfig c = reference_config();
  c.user_region.radius = 1e-12;
  auto s = make_stream(3, StreamId::placement);
  const Layout l = place_users(c, s);
  for (int k = 0; k < c.K; ++k) CHECK(l.dist_bs_user[k] == doctest::Approx(100.0));
}

TEST_CASE("placement is uniform over the disc") {
  ScenarioConfig c = reference_config();
  c.K = 10000;
  auto s = make_stream(11, StreamId::placement);
  const Layout l = place_users(c, s);
  int inside = 0;
  for (const auto& p : l.user_positions) inside += distance(p, {100, 0}) <= 5.0;
  CHECK(inside / 10000.0 == doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("sub-streams are independent and reproducible") {
  auto a = make_stream(5, StreamId::path_gains);
  auto b = make_stream(5, StreamId::angles);
  auto c = make_stream(5, StreamId::path_gains);
  const auto x = a();
  CHECK(x != b());
  CHECK(x == c());
  CHECK(drop_seed(1, 0) != drop_seed(1, 1));
  CHECK(drop_seed(1, 3) == drop_seed(1, 3));
}
