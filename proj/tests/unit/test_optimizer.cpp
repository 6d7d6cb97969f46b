#include <doctest.h>

#include <cmath>

#include "irsbf/experiment.hpp"
#include "irsbf/optimizer.hpp"

using namespace irsbf;

namespace {

// Desk deployment with a noise floor low enough for SINR_min to be reachable.
ScenarioConfig reachable_config() {
  ScenarioConfig c = preset_config("desk");
  c.noise_dbm = -150.0;
  return c;
}

void check_result(const OptimResult& r, const ScenarioConfig& c, const ChannelSet& ch) {
  double prev = r.initial_sum_rate;
  for (const auto& t : r.trace) {
    if (r.status != OptimStatus::infeasible_drop) CHECK(t.sum_rate >= prev - 1e-5);
    prev = t.sum_rate;
  }
  CHECK(static_cast<int>(r.trace.size()) <= 50);
  CHECK(total_power(r.final_state.P) <= c.p_max_mw() * (1 + 1e-6));
  if (r.status == OptimStatus::converged) {
    const Eigen::VectorXd s = sinrs(r.final_state, ch, {c.noise_mw(), c.include_direct_link});
    CHECK(s.minCoeff() >= c.sinr_min() * (1 - 1e-4));
  }
  CHECK(r.sum_rate_projected >= 0.0);
  CHECK(r.per_user_rates.sum() == doctest::Approx(r.sum_rate_relaxed));
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_method("nis") == Method::nis);
  CHECK(to_string(Method::wis) == "wis");
  CHECK_THROWS_AS(parse_method("best"), std::invalid_argument);
  CHECK(to_string(OptimStatus::infeasible_drop) == "infeasible_drop");
}

TEST_CASE("geometric assignment rules") {
  ScenarioConfig c = with_irs_count(reference_config(), 4);
  c.K = 2;
  // both users closest to the IRS at (100, 40)
  const Layout l = make_layout(c, {{100, 9}, {101, 8}});
  const Assignment irs_side = geometric_assignment(l, 2, GeometricRule::irs_nearest_user);
  for (int n = 0; n < 4; ++n) {
    const auto& d = l.dist_irs_user[n];
    CHECK(irs_side[n] == (d[0] <= d[1] ? 0 : 1));
  }
  const Assignment user_side = geometric_assignment(l, 2, GeometricRule::user_nearest_free);
  // every user holds at least one IRS
  CHECK(std::count(user_side.begin(), user_side.end(), 0) >= 1);
  CHECK(std::count(user_side.begin(), user_side.end(), 1) >= 1);
  CHECK(user_side == geometric_assignment(l, 2, GeometricRule::user_nearest_free));
}

TEST_CASE("matched filter initialization") {
  const ScenarioConfig c = reachable_config();
  const Drop d = make_drop(c, 17);
  BeamformingState s;
  s.A = selection_from_assignment(geometric_assignment(d.layout, c.K, GeometricRule::user_nearest_free), c.K);
  auto st = make_stream(17, StreamId::init_phases);
  s.theta = random_phases(c.N, c.L(), st);
  s.P = Eigen::MatrixXcd::Zero(c.M, c.K);
  const Eigen::MatrixXcd P = matched_filter(s, d.channels, {c.noise_mw(), false}, c.p_max_mw());
  CHECK(total_power(P) == doctest::Approx(c.p_max_mw()).epsilon(1e-12));
  for (int k = 0; k < c.K; ++k) CHECK(P.col(k).squaredNorm() == doctest::Approx(c.p_max_mw() / c.K));
  for (const auto& t : s.theta)
    for (Eigen::Index l = 0; l < t.size(); ++l) CHECK(std::abs(t[l]) == doctest::Approx(1.0));
}

TEST_CASE("proposed method on reachable drops") {
  const ScenarioConfig c = reachable_config();
  int feasible = 0;
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const Drop d = make_drop(c, drop_seed(1, seed));
    const OptimResult r = optimize(c, d.layout, d.channels, d.seed);
    check_result(r, c, d.channels);
    feasible += r.status != OptimStatus::infeasible_drop;
    // determinism
    const OptimResult again = optimize(c, d.layout, d.channels, d.seed);
    CHECK(again.sum_rate_projected == r.sum_rate_projected);
  }
  CHECK(feasible >= 1);
}

TEST_CASE("baselines keep their frozen blocks") {
  const ScenarioConfig c = reachable_config();
  const Drop d = make_drop(c, drop_seed(1, 0));
  CHECK_THROWS_AS(run_baseline(Method::proposed, c, d.layout, d.channels, d.seed), std::invalid_argument);

  const OptimResult wis = run_baseline(Method::wis, c, d.layout, d.channels, d.seed);
  CHECK(wis.final_state.A == Selection::Ones(c.N, c.K));
  check_result(wis, c, d.channels);

  const OptimResult nis = run_baseline(Method::nis, c, d.layout, d.channels, d.seed);
  const Selection geo =
      selection_from_assignment(geometric_assignment(d.layout, c.K, GeometricRule::irs_nearest_user), c.K);
  CHECK(nis.final_state.A == geo);

  const OptimResult rps = run_baseline(Method::rps, c, d.layout, d.channels, d.seed);
  auto frozen = make_stream(d.seed, StreamId::baseline_phases);
  const auto expect = random_phases(c.N, c.L(), frozen);
  for (int n = 0; n < c.N; ++n) CHECK((rps.final_state.theta[n] - expect[n]).norm() == 0.0);
  CHECK(rps.sum_rate_projected == doctest::Approx(rps.sum_rate_relaxed).epsilon(1e-12));
}

TEST_CASE("the geometric rule of NIS is selectable") {
  const ScenarioConfig c = reachable_config();
  const Drop d = make_drop(c, drop_seed(1, 1));
  OptimOptions o;
  o.nis_rule = GeometricRule::user_nearest_free;
  o.max_iter = 2;
  const OptimResult r = run_method(Method::nis, c, d.layout, d.channels, d.seed, o);
  CHECK(r.final_state.A ==
        selection_from_assignment(geometric_assignment(d.layout, c.K, GeometricRule::user_nearest_free), c.K));
}
