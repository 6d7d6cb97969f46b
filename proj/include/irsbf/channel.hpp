#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "irsbf/scenario.hpp"

namespace irsbf {

using cd = std::complex<double>;

/// Channel realization of one drop. Every link is stored in the conjugate-transposed
/// (row) form in which it enters the received signal.
struct ChannelSet {
  std::vector<Eigen::RowVectorXcd> h_direct;                 // K rows h_k^H, length M
  std::vector<Eigen::MatrixXcd> H_bs_irs;                    // N matrices H_n, L x M
  std::vector<std::vector<Eigen::RowVectorXcd>> h_irs_user;  // [n][k] rows h_{n,k}^H, length L

  int M() const { return H_bs_irs.empty() ? 0 : static_cast<int>(H_bs_irs.front().cols()); }
  int L() const { return H_bs_irs.empty() ? 0 : static_cast<int>(H_bs_irs.front().rows()); }
  int N() const { return static_cast<int>(H_bs_irs.size()); }
  int K() const { return static_cast<int>(h_direct.size()); }
};

/// ULA response, entry m = exp(j pi m sin(phi)) / sqrt(M).
Eigen::VectorXcd ula_response(double phi, int M);

/// UPA response over the (l_v, l_h) grid, vertical-major (index l_v * L_h + l_h):
/// exp(j pi (l_v sin(az) sin(el) + l_h cos(el))) / sqrt(L).
Eigen::VectorXcd upa_response(double theta_az, double theta_el, int L_v, int L_h);

/// Variance 10^(-kappa/10) of a path gain for a given shadowing realization xi (dB).
double path_gain_variance(double d, const PathLossParams& params, double xi);

/// Draws xi, then a CN(0, 10^(-kappa/10)) gain. Throws std::invalid_argument if d <= 0.
cd sample_path_gain(double d, const PathLossParams& params, RandomStream& stream);

/// Circularly-symmetric complex Gaussian sample with the given variance.
cd sample_cn(double variance, RandomStream& stream);

struct UlaPath {
  cd gain;
  double aod;
};

struct UpaPath {
  cd gain;
  double az;
  double el;
};

struct BsIrsPath {
  cd gain;
  double aoa_az;
  double aoa_el;
  double aod;
};

// Deterministic builders from explicit path lists.
Eigen::RowVectorXcd build_direct_channel(const std::vector<UlaPath>& paths, int M);
Eigen::MatrixXcd build_bs_irs_channel(const std::vector<BsIrsPath>& paths, int M, int L_v, int L_h);
Eigen::RowVectorXcd build_irs_user_channel(const std::vector<UpaPath>& paths, int L_v, int L_h);

/// Streams used by the three generators. Angles and gains come from separate streams.
struct ChannelStreams {
  RandomStream gains;
  RandomStream angles;

  static ChannelStreams for_seed(std::uint64_t seed);
};

std::vector<Eigen::RowVectorXcd> gen_direct_channel(const Layout& layout, const ScenarioConfig& config,
                                                    ChannelStreams& streams);
std::vector<Eigen::MatrixXcd> gen_bs_irs_channel(const Layout& layout, const ScenarioConfig& config,
                                                 ChannelStreams& streams);
std::vector<std::vector<Eigen::RowVectorXcd>> gen_irs_user_channel(const Layout& layout,
                                                                   const ScenarioConfig& config,
                                                                   ChannelStreams& streams);

/// All three links, drawn in a fixed order (mBS->IRS, IRS->user, direct).
ChannelSet generate_channels(const Layout& layout, const ScenarioConfig& config, std::uint64_t seed);

}  // namespace irsbf
