#pragma once

#include <vector>

#include <Eigen/Dense>

#include "irsbf/channel.hpp"

namespace irsbf {

/// IRS-to-user assignment matrix A (N x K, binary).
using Selection = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

struct BeamformingState {
  Eigen::MatrixXcd P;                  // M x K, column k = p_k
  std::vector<Eigen::VectorXcd> theta; // N vectors of length L
  Selection A;                         // N x K

  int M() const { return static_cast<int>(P.rows()); }
  int K() const { return static_cast<int>(P.cols()); }
  int N() const { return static_cast<int>(theta.size()); }
};

/// Options shared by every rate evaluation.
struct LinkModel {
  double noise = 1.0;        // sigma^2, linear
  bool include_direct = false;
};

/// theta^H diag(h^H) H, i.e. h^H Theta^H H. `h_row` holds the entries of h_{n,k}^H.
Eigen::RowVectorXcd cascaded_channel(const Eigen::RowVectorXcd& h_row, const Eigen::VectorXcd& theta,
                                     const Eigen::MatrixXcd& H);

/// H_k^H = sum_n a_{n,k} cascade_{n,k} (+ h_k^H when the direct link is on).
Eigen::RowVectorXcd effective_channel(const BeamformingState& state, const ChannelSet& ch, int k,
                                      bool include_direct = false);

/// G(k, i) = H_k^H p_i for every user pair.
Eigen::MatrixXcd gain_matrix(const BeamformingState& state, const ChannelSet& ch, bool include_direct);

/// SINR with interference over i != k.
double sinr(const BeamformingState& state, const ChannelSet& ch, const LinkModel& link, int k);
Eigen::VectorXd sinrs(const BeamformingState& state, const ChannelSet& ch, const LinkModel& link);
Eigen::VectorXd sinrs_from_gains(const Eigen::MatrixXcd& G, double noise);

Eigen::VectorXd user_rates(const BeamformingState& state, const ChannelSet& ch, const LinkModel& link);
double sum_rate(const BeamformingState& state, const ChannelSet& ch, const LinkModel& link);
double sum_rate_from_sinrs(const Eigen::VectorXd& s);

double total_power(const Eigen::MatrixXcd& P);

/// Row-one-hot selection from a per-IRS user index.
Selection selection_from_assignment(const std::vector<int>& serving_user, int K);

/// Throws std::invalid_argument when shapes disagree with the channels.
void check_shapes(const BeamformingState& state, const ChannelSet& ch);

}  // namespace irsbf
