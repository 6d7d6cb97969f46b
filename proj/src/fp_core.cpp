#include "irsbf/fp_core.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace irsbf {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double soc_gain(double sinr_min) { return std::sqrt(1.0 + 1.0 / sinr_min); }

}  // namespace

Eigen::VectorXd update_alpha(const Eigen::VectorXd& sinrs) {
  if ((sinrs.array() < 0.0).any()) throw std::invalid_argument("update_alpha: negative SINR");
  return sinrs;
}

double f1a_value(const Eigen::VectorXd& alpha, const Eigen::VectorXd& sinrs) {
  double f = 0.0;
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    const double a = alpha[k];
    const double s = sinrs[k];
    f += std::log2(1.0 + a) - a / kLn2 + (1.0 + a) * s / ((1.0 + s) * kLn2);
  }
  return f;
}

double f1a_value(const BeamformingState& state, const Eigen::VectorXd& alpha, const ChannelSet& ch,
                 const LinkModel& link) {
  return f1a_value(alpha, sinrs(state, ch, link));
}

double f2_value(const BeamformingState& state, const Eigen::VectorXd& alpha, const ChannelSet& ch,
                const LinkModel& link) {
  const Eigen::MatrixXcd G = gain_matrix(state, ch, link.include_direct);
  double f = 0.0;
  for (Eigen::Index k = 0; k < G.rows(); ++k)
    f += (1.0 + alpha[k]) * std::norm(G(k, k)) / (G.row(k).cwiseAbs2().sum() + link.noise);
  return f;
}

Eigen::VectorXcd update_epsilon(const BeamformingState& state, const Eigen::VectorXd& alpha,
                                const ChannelSet& ch, const LinkModel& link) {
  const Eigen::MatrixXcd G = gain_matrix(state, ch, link.include_direct);
  Eigen::VectorXcd eps(G.rows());
  for (Eigen::Index k = 0; k < G.rows(); ++k)
    eps[k] = std::sqrt(1.0 + alpha[k]) * G(k, k) / (G.row(k).cwiseAbs2().sum() + link.noise);
  return eps;
}

double f2a_value(const BeamformingState& state, const Eigen::VectorXd& alpha, const Eigen::VectorXcd& epsilon,
                 const ChannelSet& ch, const LinkModel& link) {
  const Eigen::MatrixXcd G = gain_matrix(state, ch, link.include_direct);
  double f = 0.0;
  for (Eigen::Index k = 0; k < G.rows(); ++k) {
    f += 2.0 * std::sqrt(1.0 + alpha[k]) * (std::conj(epsilon[k]) * G(k, k)).real();
    f -= std::norm(epsilon[k]) * (G.row(k).cwiseAbs2().sum() + link.noise);
  }
  return f;
}

Eigen::VectorXcd stack_precoder(const Eigen::MatrixXcd& P) {
  return Eigen::Map<const Eigen::VectorXcd>(P.data(), P.size());
}

Eigen::MatrixXcd unstack_precoder(const Eigen::VectorXcd& x, int M, int K) {
  if (x.size() != static_cast<Eigen::Index>(M) * K) throw std::invalid_argument("unstack_precoder: size");
  return Eigen::Map<const Eigen::MatrixXcd>(x.data(), M, K);
}

ConeProblem assemble_p_subproblem(const BeamformingState& state, const FpState& fp, const ChannelSet& ch,
                                  const LinkModel& link, double p_max, double sinr_min) {
  const int M = state.M();
  const int K = state.K();
  const int n = M * K;
  // Column k of Hk holds H_k (the conjugate of the row H_k^H).
  Eigen::MatrixXcd Hk(M, K);
  for (int k = 0; k < K; ++k) Hk.col(k) = effective_channel(state, ch, k, link.include_direct).adjoint();

  Eigen::MatrixXcd F(M, K);
  for (int k = 0; k < K; ++k) F.col(k) = std::abs(fp.epsilon[k]) * Hk.col(k);
  const Eigen::MatrixXcd z = F * F.adjoint();

  ConeProblem prob;
  prob.Q = Eigen::MatrixXcd::Zero(n, n);
  prob.Q_factor = Eigen::MatrixXcd::Zero(n, K * K);
  prob.v.resize(n);
  prob.offset = 0.0;
  for (int k = 0; k < K; ++k) {
    prob.Q.block(k * M, k * M, M, M) = z;
    prob.Q_factor.block(k * M, k * K, M, K) = F;
    prob.v.segment(k * M, M) = std::sqrt(1.0 + fp.alpha[k]) * fp.epsilon[k] * Hk.col(k);
    prob.offset += std::norm(fp.epsilon[k]) * link.noise;
  }
  BallConstraint ball;
  ball.radius = std::sqrt(p_max);
  for (int j = 0; j < n; ++j) ball.selector.push_back(j);
  prob.balls.push_back(std::move(ball));

  if (sinr_min > 0.0) {
    for (int k = 0; k < K; ++k) {
      const Eigen::RowVectorXcd hrow = Hk.col(k).adjoint();
      SocConstraint s;
      s.gain = soc_gain(sinr_min);
      s.lhs = Eigen::RowVectorXcd::Zero(n);
      s.lhs.segment(k * M, M) = hrow;
      s.rhs = Eigen::MatrixXcd::Zero(K, n);
      for (int i = 0; i < K; ++i) s.rhs.block(i, i * M, 1, M) = hrow;
      s.sigma = std::sqrt(link.noise);
      prob.socs.push_back(std::move(s));
    }
  }
  return prob;
}

ThetaForms theta_forms(const BeamformingState& state, const ChannelSet& ch, bool include_direct) {
  const int N = ch.N();
  const int L = ch.L();
  const int K = state.K();
  ThetaForms f;
  f.B.assign(static_cast<std::size_t>(K), std::vector<Eigen::VectorXcd>(static_cast<std::size_t>(K)));
  f.direct = Eigen::MatrixXcd::Zero(K, K);
  std::vector<Eigen::MatrixXcd> HP(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) HP[static_cast<std::size_t>(n)] = ch.H_bs_irs[static_cast<std::size_t>(n)] * state.P;
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < K; ++i) {
      Eigen::VectorXcd b = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(N) * L);
      for (int n = 0; n < N; ++n)
        if (state.A(n, k) != 0)
          b.segment(n * L, L) = static_cast<double>(state.A(n, k)) *
                                ch.h_irs_user[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)]
                                    .transpose()
                                    .cwiseProduct(HP[static_cast<std::size_t>(n)].col(i));
      f.B[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = std::move(b);
      if (include_direct) f.direct(k, i) = (ch.h_direct[static_cast<std::size_t>(k)] * state.P.col(i))(0);
    }
  return f;
}

Eigen::VectorXcd stack_theta(const std::vector<Eigen::VectorXcd>& theta) {
  Eigen::Index total = 0;
  for (const auto& t : theta) total += t.size();
  Eigen::VectorXcd x(total);
  Eigen::Index off = 0;
  for (const auto& t : theta) {
    x.segment(off, t.size()) = t;
    off += t.size();
  }
  return x;
}

std::vector<Eigen::VectorXcd> unstack_theta(const Eigen::VectorXcd& x, int N, int L) {
  if (x.size() != static_cast<Eigen::Index>(N) * L) throw std::invalid_argument("unstack_theta: size");
  std::vector<Eigen::VectorXcd> out;
  for (int n = 0; n < N; ++n) out.emplace_back(x.segment(n * L, L));
  return out;
}

namespace {

// Theta^H B_ki + c_ki for every pair.
Eigen::MatrixXcd theta_gains(const Eigen::VectorXcd& Theta, const ThetaForms& forms) {
  const auto K = static_cast<Eigen::Index>(forms.B.size());
  Eigen::MatrixXcd G(K, K);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index i = 0; i < K; ++i)
      G(k, i) = Theta.dot(forms.B[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]) + forms.direct(k, i);
  return G;
}

}  // namespace

double f3a_value(const Eigen::VectorXcd& Theta, const ThetaForms& forms, const Eigen::VectorXd& alpha,
                 double noise) {
  const Eigen::MatrixXcd G = theta_gains(Theta, forms);
  double f = 0.0;
  for (Eigen::Index k = 0; k < G.rows(); ++k)
    f += (1.0 + alpha[k]) * std::norm(G(k, k)) / (G.row(k).cwiseAbs2().sum() + noise);
  return f;
}

Eigen::VectorXcd update_beta(const Eigen::VectorXcd& Theta, const ThetaForms& forms, const Eigen::VectorXd& alpha,
                             double noise) {
  const Eigen::MatrixXcd G = theta_gains(Theta, forms);
  Eigen::VectorXcd beta(G.rows());
  for (Eigen::Index k = 0; k < G.rows(); ++k)
    beta[k] = std::sqrt(1.0 + alpha[k]) * G(k, k) / (G.row(k).cwiseAbs2().sum() + noise);
  return beta;
}

Eigen::VectorXcd update_beta(const BeamformingState& state, const Eigen::VectorXd& alpha, const ChannelSet& ch,
                             const LinkModel& link) {
  return update_beta(stack_theta(state.theta), theta_forms(state, ch, link.include_direct), alpha, link.noise);
}

double f3b_value(const Eigen::VectorXcd& Theta, const ThetaForms& forms, const Eigen::VectorXd& alpha,
                 const Eigen::VectorXcd& beta, double noise) {
  const Eigen::MatrixXcd G = theta_gains(Theta, forms);
  double f = 0.0;
  for (Eigen::Index k = 0; k < G.rows(); ++k) {
    f += 2.0 * std::sqrt(1.0 + alpha[k]) * (std::conj(beta[k]) * G(k, k)).real();
    f -= std::norm(beta[k]) * (G.row(k).cwiseAbs2().sum() + noise);
  }
  return f;
}

ConeProblem assemble_theta_subproblem(const BeamformingState& state, const FpState& fp, const ChannelSet& ch,
                                      const LinkModel& link, double sinr_min) {
  const ThetaForms forms = theta_forms(state, ch, link.include_direct);
  const int K = state.K();
  const auto n = static_cast<Eigen::Index>(ch.N()) * ch.L();

  ConeProblem prob;
  prob.Q_factor = Eigen::MatrixXcd::Zero(n, static_cast<Eigen::Index>(K) * K);
  prob.v = Eigen::VectorXcd::Zero(n);
  prob.offset = 0.0;
  for (int k = 0; k < K; ++k) {
    const double bk = std::abs(fp.beta[k]);
    const double wk = std::sqrt(1.0 + fp.alpha[k]);
    const auto& Bk = forms.B[static_cast<std::size_t>(k)];
    prob.v += wk * std::conj(fp.beta[k]) * Bk[static_cast<std::size_t>(k)];
    prob.offset += bk * bk * link.noise;
    for (int i = 0; i < K; ++i) {
      prob.Q_factor.col(k * K + i) = bk * Bk[static_cast<std::size_t>(i)];
      // |Theta^H B + c|^2 = Theta^H B B^H Theta + 2 Re{Theta^H B c*} + |c|^2
      const cd c = forms.direct(k, i);
      prob.v -= bk * bk * std::conj(c) * Bk[static_cast<std::size_t>(i)];
      prob.offset += bk * bk * std::norm(c);
    }
    prob.offset -= 2.0 * wk * (std::conj(fp.beta[k]) * forms.direct(k, k)).real();
  }
  prob.Q = prob.Q_factor * prob.Q_factor.adjoint();
  prob.box.assign(static_cast<std::size_t>(n), true);

  if (sinr_min > 0.0) {
    // Theta^H B + c = conj(B^H Theta + conj(c)): same real part, negated imaginary part.
    for (int k = 0; k < K; ++k) {
      const auto& Bk = forms.B[static_cast<std::size_t>(k)];
      SocConstraint s;
      s.gain = soc_gain(sinr_min);
      s.lhs = Bk[static_cast<std::size_t>(k)].adjoint();
      s.lhs_offset = std::conj(forms.direct(k, k));
      s.rhs.resize(K, n);
      s.rhs_offset.resize(K);
      for (int i = 0; i < K; ++i) {
        s.rhs.row(i) = Bk[static_cast<std::size_t>(i)].adjoint();
        s.rhs_offset[i] = std::conj(forms.direct(k, i));
      }
      s.sigma = std::sqrt(link.noise);
      prob.socs.push_back(std::move(s));
    }
  }
  return prob;
}

Eigen::VectorXcd project_unit_modulus(const Eigen::VectorXcd& theta) {
  Eigen::VectorXcd out(theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double a = std::abs(theta[j]);
    out[j] = a > 0.0 ? theta[j] / a : cd{1.0, 0.0};
  }
  return out;
}

std::vector<Eigen::VectorXcd> project_unit_modulus(const std::vector<Eigen::VectorXcd>& theta) {
  std::vector<Eigen::VectorXcd> out;
  out.reserve(theta.size());
  for (const auto& t : theta) out.push_back(project_unit_modulus(t));
  return out;
}

}  // namespace irsbf
