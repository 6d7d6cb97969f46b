#include "irsbf/system.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace irsbf {

Eigen::RowVectorXcd cascaded_channel(const Eigen::RowVectorXcd& h_row, const Eigen::VectorXcd& theta,
                                     const Eigen::MatrixXcd& H) {
  if (h_row.size() != H.rows() || theta.size() != H.rows())
    throw std::invalid_argument("cascaded_channel: h, theta and H disagree on L");
  const Eigen::RowVectorXcd w = theta.adjoint().cwiseProduct(h_row);
  return w * H;
}

Eigen::RowVectorXcd effective_channel(const BeamformingState& s, const ChannelSet& ch, int k,
                                      bool include_direct) {
  Eigen::RowVectorXcd out = include_direct ? ch.h_direct[k] : Eigen::RowVectorXcd::Zero(ch.M());
  for (int n = 0; n < ch.N(); ++n)
    if (s.A(n, k) != 0) out += s.A(n, k) * cascaded_channel(ch.h_irs_user[n][k], s.theta[n], ch.H_bs_irs[n]);
  return out;
}

Eigen::MatrixXcd gain_matrix(const BeamformingState& s, const ChannelSet& ch, bool include_direct) {
  const int K = s.K();
  Eigen::MatrixXcd G(K, K);
  for (int k = 0; k < K; ++k) G.row(k) = effective_channel(s, ch, k, include_direct) * s.P;
  return G;
}

Eigen::VectorXd sinrs_from_gains(const Eigen::MatrixXcd& G, double noise) {
  const auto K = G.rows();
  Eigen::VectorXd out(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double signal = std::norm(G(k, k));
    const double interference = G.row(k).cwiseAbs2().sum() - signal;
    out[k] = signal / (std::max(interference, 0.0) + noise);
  }
  return out;
}

double sinr(const BeamformingState& s, const ChannelSet& ch, const LinkModel& link, int k) {
  const Eigen::RowVectorXcd g = effective_channel(s, ch, k, link.include_direct) * s.P;
  const double signal = std::norm(g[k]);
  double interference = 0.0;
  for (int i = 0; i < g.size(); ++i)
    if (i != k) interference += std::norm(g[i]);
  return signal / (interference + link.noise);
}

Eigen::VectorXd sinrs(const BeamformingState& s, const ChannelSet& ch, const LinkModel& link) {
  return sinrs_from_gains(gain_matrix(s, ch, link.include_direct), link.noise);
}

Eigen::VectorXd user_rates(const BeamformingState& s, const ChannelSet& ch, const LinkModel& link) {
  const Eigen::VectorXd v = sinrs(s, ch, link);
  return v.unaryExpr([](double x) { return std::log2(1.0 + x); });
}

double sum_rate_from_sinrs(const Eigen::VectorXd& v) {
  double r = 0.0;
  for (double x : v) r += std::log2(1.0 + x);
  return r;
}

double sum_rate(const BeamformingState& s, const ChannelSet& ch, const LinkModel& link) {
  return sum_rate_from_sinrs(sinrs(s, ch, link));
}

double total_power(const Eigen::MatrixXcd& P) { return P.squaredNorm(); }

Selection selection_from_assignment(const std::vector<int>& serving_user, int K) {
  Selection A = Selection::Zero(static_cast<Eigen::Index>(serving_user.size()), K);
  for (std::size_t n = 0; n < serving_user.size(); ++n) {
    if (serving_user[n] < 0 || serving_user[n] >= K)
      throw std::invalid_argument("assignment user index out of range");
    A(static_cast<Eigen::Index>(n), serving_user[n]) = 1;
  }
  return A;
}

void check_shapes(const BeamformingState& s, const ChannelSet& ch) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("shape mismatch: " + what); };
  if (s.P.rows() != ch.M()) fail("P rows != M");
  if (s.P.cols() != ch.K()) fail("P cols != K");
  if (s.N() != ch.N()) fail("theta count != N");
  for (const auto& t : s.theta)
    if (t.size() != ch.L()) fail("theta length != L");
  if (s.A.rows() != ch.N() || s.A.cols() != ch.K()) fail("A is not N x K");
}

}  // namespace irsbf
