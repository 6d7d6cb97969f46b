#include <doctest.h>

#include <cmath>
#include <numbers>

#include "irsbf/channel.hpp"

using namespace irsbf;
using std::numbers::pi;

TEST_CASE("ula response") {
  const Eigen::VectorXcd a = ula_response(0.0, 4);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(a[m] - cd(0.5, 0.0)) < 1e-15);
  const Eigen::VectorXcd b = ula_response(pi / 2, 2);
  CHECK(std::abs(b[0] - cd(1 / std::sqrt(2.0), 0)) < 1e-15);
  CHECK(std::abs(b[1] - cd(-1 / std::sqrt(2.0), 0)) < 1e-15);
  for (double phi : {-1.3, 0.2, 0.9, 3.0})
    for (int M : {1, 3, 40}) CHECK(ula_response(phi, M).norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("upa response") {
  CHECK(std::abs(upa_response(0.7, -0.3, 1, 1)[0] - cd(1, 0)) < 1e-15);
  const Eigen::VectorXcd a = upa_response(0.0, pi / 2, 2, 1);
  CHECK(std::abs(a[0] - cd(1 / std::sqrt(2.0), 0)) < 1e-15);
  CHECK(std::abs(a[1] - cd(1 / std::sqrt(2.0), 0)) < 1e-15);
  // vertical-major: index lv * L_h + lh
  const double az = 0.4, el = 0.3;
  const Eigen::VectorXcd u = upa_response(az, el, 3, 4);
  const cd expect = std::polar(1 / std::sqrt(12.0), pi * (2 * std::sin(az) * std::sin(el) + 1 * std::cos(el)));
  CHECK(std::abs(u[2 * 4 + 1] - expect) < 1e-14);
  CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("path gain variance") {
  const PathLossParams los{61.4, 2.0, 5.8};
  CHECK(path_gain_variance(100.0, los, 0.0) == doctest::Approx(std::pow(10.0, -10.14)).epsilon(1e-12));
  CHECK(path_gain_variance(1.0, {0.0, 7.0, 0.0}, 0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(path_gain_variance(0.0, los, 0.0), std::invalid_argument);
  // ten times the distance at b = 2 costs exactly 20 dB
  CHECK(path_gain_variance(500.0, los, 1.7) / path_gain_variance(50.0, los, 1.7) ==
        doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("sample variance of path gains") {
  RandomStream s(42);
  const PathLossParams p{20.0, 2.0, 0.0};
  const double target = path_gain_variance(3.0, p, 0.0);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += std::norm(sample_path_gain(3.0, p, s));
  CHECK(acc / n == doctest::Approx(target).epsilon(0.03));

  // with shadowing the mean is the lognormal mean
  const PathLossParams sh{20.0, 2.0, 3.0};
  const double c = 3.0 * std::log(10.0) / 10.0;
  const double mean = target * std::exp(0.5 * c * c);
  acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::norm(sample_path_gain(3.0, sh, s));
  CHECK(acc / n == doctest::Approx(mean).epsilon(0.03));
}

TEST_CASE("deterministic builders") {
  const int M = 6, Lv = 2, Lh = 3;
  const Eigen::RowVectorXcd h = build_direct_channel({{cd(1, 0), 0.3}}, M);
  CHECK(h.norm() == doctest::Approx(std::sqrt(6.0)));
  CHECK((h - std::sqrt(6.0) * ula_response(0.3, M).transpose()).norm() < 1e-13);

  const Eigen::MatrixXcd H = build_bs_irs_channel({{cd(1, 0), 0.2, 0.1, -0.4}}, M, Lv, Lh);
  CHECK(H.rows() == 6);
  CHECK(H.cols() == M);
  CHECK(H.norm() == doctest::Approx(std::sqrt(36.0)));

  std::vector<BsIrsPath> paths;
  for (int i = 0; i < 3; ++i) paths.push_back({cd(0.3 * i + 0.1, -0.2), 0.1 * i, 0.05 * i, -0.3 * i});
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(build_bs_irs_channel(paths, M, Lv, Lh));
  CHECK(svd.singularValues()[3] < 1e-10 * svd.singularValues()[0]);

  const Eigen::RowVectorXcd g = build_irs_user_channel({{cd(0, 2), 0.5, 0.2}}, Lv, Lh);
  CHECK(g.norm() == doctest::Approx(std::sqrt(6.0) * 2.0));
}

namespace {

ScenarioConfig small_config() {
  ScenarioConfig c = with_irs_count(reference_config(), 2);
  c.M = 4;
  c.L_v = 2;
  c.L_h = 2;
  c.K = 2;
  return c;
}

Layout fixed_layout(const ScenarioConfig& c) { return make_layout(c, {{95, 3}, {104, -6}}); }

}  // namespace

TEST_CASE("channel shapes and determinism") {
  const ScenarioConfig c = small_config();
  const Layout l = fixed_layout(c);
  const ChannelSet a = generate_channels(l, c, 9);
  const ChannelSet b = generate_channels(l, c, 9);
  const ChannelSet d = generate_channels(l, c, 10);
  CHECK(a.M() == 4);
  CHECK(a.L() == 4);
  CHECK(a.N() == 2);
  CHECK(a.K() == 2);
  for (int n = 0; n < 2; ++n) {
    CHECK(a.H_bs_irs[n] == b.H_bs_irs[n]);
    CHECK(a.H_bs_irs[n].allFinite());
    for (int k = 0; k < 2; ++k) CHECK(a.h_irs_user[n][k] == b.h_irs_user[n][k]);
  }
  CHECK(a.h_direct[0] == b.h_direct[0]);
  CHECK(a.H_bs_irs[0] != d.H_bs_irs[0]);
}

TEST_CASE("single irs-user path has norm sqrt(L) times its gain") {
  const ScenarioConfig c = small_config();
  const Layout l = fixed_layout(c);
  auto st = ChannelStreams::for_seed(3);
  auto ref = ChannelStreams::for_seed(3);
  const auto rows = gen_irs_user_channel(l, c, st);
  // the first gain drawn is the (0, 0) path gain
  const cd g = sample_path_gain(l.dist_irs_user[0][0], c.pathloss_los, ref.gains);
  CHECK(rows[0][0].norm() == doctest::Approx(2.0 * std::abs(g)).epsilon(1e-12));
}

TEST_CASE("channel power moments") {
  ScenarioConfig c = small_config();
  c.pathloss_los.sigma_xi = 0.0;
  c.pathloss_nlos.sigma_xi = 0.0;
  const Layout l = fixed_layout(c);
  const int draws = 10000;
  double direct = 0.0, bs = 0.0, iu = 0.0;
  for (int i = 0; i < draws; ++i) {
    const ChannelSet ch = generate_channels(l, c, 1000 + i);
    direct += ch.h_direct[0].squaredNorm();
    bs += ch.H_bs_irs[1].squaredNorm();
    iu += ch.h_irs_user[0][1].squaredNorm();
  }
  auto mean_var = [&](double d, int paths) {
    double v = path_gain_variance(d, c.pathloss_los, 0.0);
    for (int p = 1; p < paths; ++p) v += path_gain_variance(d, c.pathloss_nlos, 0.0);
    return v / paths;
  };
  CHECK(direct / draws == doctest::Approx(c.M * mean_var(l.dist_bs_user[0], c.n_paths_bs_user)).epsilon(0.05));
  CHECK(bs / draws == doctest::Approx(c.M * c.L() * mean_var(l.dist_bs_irs[1], c.n_paths_bs_irs)).epsilon(0.05));
  CHECK(iu / draws == doctest::Approx(c.L() * mean_var(l.dist_irs_user[0][1], 1)).epsilon(0.05));
}

TEST_CASE("ten times the geometry costs exactly 20 dB at b = 2") {
  ScenarioConfig c = small_config();
  c.pathloss_nlos.b = 2.0;
  ScenarioConfig far = c;
  for (auto& p : far.irs_positions) p = {p.x * 10, p.y * 10};
  far.user_region = {{1000, 0}, 100};
  const ChannelSet a = generate_channels(make_layout(c, {{95, 3}, {104, -6}}), c, 5);
  const ChannelSet b = generate_channels(make_layout(far, {{950, 30}, {1040, -60}}), far, 5);
  CHECK(b.H_bs_irs[0].squaredNorm() / a.H_bs_irs[0].squaredNorm() == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(b.h_irs_user[1][0].squaredNorm() / a.h_irs_user[1][0].squaredNorm() == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(b.h_direct[1].squaredNorm() / a.h_direct[1].squaredNorm() == doctest::Approx(0.01).epsilon(1e-9));
}
