#include "irsbf/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace irsbf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNlosAzimuthHalfWidth = kPi / 2.0;
constexpr double kElevationHalfWidth = kPi / 4.0;

double uniform(RandomStream& s, double half_width) {
  return std::uniform_real_distribution<double>(-half_width, half_width)(s);
}

}  // namespace

Eigen::VectorXcd ula_response(double phi, int M) {
  Eigen::VectorXcd a(M);
  const double scale = 1.0 / std::sqrt(static_cast<double>(M));
  const double s = std::sin(phi);
  for (int m = 0; m < M; ++m) a[m] = std::polar(scale, kPi * m * s);
  return a;
}

Eigen::VectorXcd upa_response(double theta_az, double theta_el, int L_v, int L_h) {
  const int L = L_v * L_h;
  Eigen::VectorXcd a(L);
  const double scale = 1.0 / std::sqrt(static_cast<double>(L));
  const double sv = std::sin(theta_az) * std::sin(theta_el);
  const double sh = std::cos(theta_el);
  for (int lv = 0; lv < L_v; ++lv)
    for (int lh = 0; lh < L_h; ++lh) a[lv * L_h + lh] = std::polar(scale, kPi * (lv * sv + lh * sh));
  return a;
}

double path_gain_variance(double d, const PathLossParams& p, double xi) {
  if (!(d > 0.0)) throw std::invalid_argument("path distance must be > 0");
  const double kappa = p.a + 10.0 * p.b * std::log10(d) + xi;
  return std::pow(10.0, -0.1 * kappa);
}

cd sample_cn(double variance, RandomStream& s) {
  std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
  const double re = g(s);
  const double im = g(s);
  return {re, im};
}

cd sample_path_gain(double d, const PathLossParams& p, RandomStream& s) {
  if (!(d > 0.0)) throw std::invalid_argument("path distance must be > 0");
  double xi = 0.0;
  if (p.sigma_xi > 0.0) xi = std::normal_distribution<double>(0.0, p.sigma_xi)(s);
  return sample_cn(path_gain_variance(d, p, xi), s);
}

Eigen::RowVectorXcd build_direct_channel(const std::vector<UlaPath>& paths, int M) {
  Eigen::RowVectorXcd h = Eigen::RowVectorXcd::Zero(M);
  for (const auto& p : paths) h += p.gain * ula_response(p.aod, M).transpose();
  return h * std::sqrt(static_cast<double>(M) / static_cast<double>(paths.size()));
}

Eigen::MatrixXcd build_bs_irs_channel(const std::vector<BsIrsPath>& paths, int M, int L_v, int L_h) {
  const int L = L_v * L_h;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(L, M);
  for (const auto& p : paths)
    H += p.gain * upa_response(p.aoa_az, p.aoa_el, L_v, L_h) * ula_response(p.aod, M).adjoint();
  return H * std::sqrt(static_cast<double>(M) * L / static_cast<double>(paths.size()));
}

Eigen::RowVectorXcd build_irs_user_channel(const std::vector<UpaPath>& paths, int L_v, int L_h) {
  const int L = L_v * L_h;
  Eigen::RowVectorXcd h = Eigen::RowVectorXcd::Zero(L);
  for (const auto& p : paths) h += p.gain * upa_response(p.az, p.el, L_v, L_h).transpose();
  return h * std::sqrt(static_cast<double>(L) / static_cast<double>(paths.size()));
}

ChannelStreams ChannelStreams::for_seed(std::uint64_t seed) {
  return {make_stream(seed, StreamId::path_gains), make_stream(seed, StreamId::angles)};
}

// Path 0 is the LOS path: geometric azimuth and LOS path loss. All others are NLOS with
// uniform azimuths. Elevations are not available from the planar geometry and are drawn.

std::vector<Eigen::RowVectorXcd> gen_direct_channel(const Layout& layout, const ScenarioConfig& c,
                                                    ChannelStreams& st) {
  std::vector<Eigen::RowVectorXcd> out;
  for (int k = 0; k < c.K; ++k) {
    const double d = layout.dist_bs_user[k];
    std::vector<UlaPath> paths;
    for (int l = 0; l < c.n_paths_bs_user; ++l) {
      const bool los = l == 0;
      const double aod = los ? layout.aod_bs_user[k] : uniform(st.angles, kNlosAzimuthHalfWidth);
      paths.push_back({sample_path_gain(d, los ? c.pathloss_los : c.pathloss_nlos, st.gains), aod});
    }
    out.push_back(build_direct_channel(paths, c.M));
  }
  return out;
}

std::vector<Eigen::MatrixXcd> gen_bs_irs_channel(const Layout& layout, const ScenarioConfig& c,
                                                 ChannelStreams& st) {
  std::vector<Eigen::MatrixXcd> out;
  for (int n = 0; n < c.N; ++n) {
    const double d = layout.dist_bs_irs[n];
    std::vector<BsIrsPath> paths;
    for (int l = 0; l < c.n_paths_bs_irs; ++l) {
      const bool los = l == 0;
      BsIrsPath p;
      p.aoa_az = los ? layout.aoa_bs_irs[n] : uniform(st.angles, kNlosAzimuthHalfWidth);
      p.aoa_el = uniform(st.angles, kElevationHalfWidth);
      p.aod = los ? layout.aod_bs_irs[n] : uniform(st.angles, kNlosAzimuthHalfWidth);
      p.gain = sample_path_gain(d, los ? c.pathloss_los : c.pathloss_nlos, st.gains);
      paths.push_back(p);
    }
    out.push_back(build_bs_irs_channel(paths, c.M, c.L_v, c.L_h));
  }
  return out;
}

std::vector<std::vector<Eigen::RowVectorXcd>> gen_irs_user_channel(const Layout& layout,
                                                                   const ScenarioConfig& c,
                                                                   ChannelStreams& st) {
  std::vector<std::vector<Eigen::RowVectorXcd>> out(c.N);
  for (int n = 0; n < c.N; ++n) {
    for (int k = 0; k < c.K; ++k) {
      const double d = layout.dist_irs_user[n][k];
      std::vector<UpaPath> paths;
      for (int l = 0; l < c.n_paths_irs_user; ++l) {
        const bool los = l == 0;
        UpaPath p;
        p.az = los ? layout.aod_irs_user[n][k] : uniform(st.angles, kNlosAzimuthHalfWidth);
        p.el = uniform(st.angles, kElevationHalfWidth);
        p.gain = sample_path_gain(d, los ? c.pathloss_los : c.pathloss_nlos, st.gains);
        paths.push_back(p);
      }
      out[n].push_back(build_irs_user_channel(paths, c.L_v, c.L_h));
    }
  }
  return out;
}

ChannelSet generate_channels(const Layout& layout, const ScenarioConfig& c, std::uint64_t seed) {
  auto st = ChannelStreams::for_seed(seed);
  ChannelSet ch;
  ch.H_bs_irs = gen_bs_irs_channel(layout, c, st);
  ch.h_irs_user = gen_irs_user_channel(layout, c, st);
  ch.h_direct = gen_direct_channel(layout, c, st);
  return ch;
}

}  // namespace irsbf
