#pragma once

#include <vector>

#include <Eigen/Dense>

#include "irsbf/channel.hpp"
#include "irsbf/cone_problem.hpp"
#include "irsbf/system.hpp"

namespace irsbf {

/// Auxiliary variables of the fractional-programming transforms.
struct FpState {
  Eigen::VectorXd alpha;     // K, >= 0
  Eigen::VectorXcd epsilon;  // K
  Eigen::VectorXcd beta;     // K
};

/// alpha_k = SINR_k.
Eigen::VectorXd update_alpha(const Eigen::VectorXd& sinrs);

/// sum log2(1+a) - sum a/ln2 + sum (1+a) SINR / ((1+SINR) ln2).
double f1a_value(const Eigen::VectorXd& alpha, const Eigen::VectorXd& sinrs);
double f1a_value(const BeamformingState& state, const Eigen::VectorXd& alpha, const ChannelSet& ch,
                 const LinkModel& link);

/// Sum-of-ratios objective sum (1+a_k)|H_k^H p_k|^2 / (sum_i |H_k^H p_i|^2 + sigma^2).
double f2_value(const BeamformingState& state, const Eigen::VectorXd& alpha, const ChannelSet& ch,
                const LinkModel& link);

/// eps_k = sqrt(1+a_k) H_k^H p_k / (sum_i |H_k^H p_i|^2 + sigma^2).
Eigen::VectorXcd update_epsilon(const BeamformingState& state, const Eigen::VectorXd& alpha,
                                const ChannelSet& ch, const LinkModel& link);

/// Quadratic-transform surrogate of f2 for a given epsilon.
double f2a_value(const BeamformingState& state, const Eigen::VectorXd& alpha, const Eigen::VectorXcd& epsilon,
                 const ChannelSet& ch, const LinkModel& link);

/// P stacked column by column (p_1; ...; p_K) and back.
Eigen::VectorXcd stack_precoder(const Eigen::MatrixXcd& P);
Eigen::MatrixXcd unstack_precoder(const Eigen::VectorXcd& x, int M, int K);

/// Concave QP over vec(P): Q = blockdiag(z, ..., z), v = (v_1; ...; v_K), offset g, the
/// power ball and, when sinr_min > 0, one SOC per user.
ConeProblem assemble_p_subproblem(const BeamformingState& state, const FpState& fp, const ChannelSet& ch,
                                  const LinkModel& link, double p_max, double sinr_min);

/// Linear forms of the IRS subproblem: Theta^H B_{k,i} (+ c_{k,i} when the direct
/// link is on) equals H_k^H p_i.
struct ThetaForms {
  std::vector<std::vector<Eigen::VectorXcd>> B;  // [k][i], length N*L
  Eigen::MatrixXcd direct;                       // c(k, i) = h_k^H p_i, zero without direct link
};

ThetaForms theta_forms(const BeamformingState& state, const ChannelSet& ch, bool include_direct);

Eigen::VectorXcd stack_theta(const std::vector<Eigen::VectorXcd>& theta);
std::vector<Eigen::VectorXcd> unstack_theta(const Eigen::VectorXcd& x, int N, int L);

/// f3a(Theta) = sum (1+a_k)|Theta^H B_kk|^2 / (sum_i |Theta^H B_ki|^2 + sigma^2).
double f3a_value(const Eigen::VectorXcd& Theta, const ThetaForms& forms, const Eigen::VectorXd& alpha,
                 double noise);

/// beta_k = sqrt(1+a_k) Theta^H B_kk / (sum_i |Theta^H B_ki|^2 + sigma^2).
Eigen::VectorXcd update_beta(const BeamformingState& state, const Eigen::VectorXd& alpha, const ChannelSet& ch,
                             const LinkModel& link);
Eigen::VectorXcd update_beta(const Eigen::VectorXcd& Theta, const ThetaForms& forms, const Eigen::VectorXd& alpha,
                             double noise);

double f3b_value(const Eigen::VectorXcd& Theta, const ThetaForms& forms, const Eigen::VectorXd& alpha,
                 const Eigen::VectorXcd& beta, double noise);

/// Concave QP over the stacked Theta: Q = U, v = D, offset c, |theta| <= 1 boxes and,
/// when sinr_min > 0, one SOC per user.
ConeProblem assemble_theta_subproblem(const BeamformingState& state, const FpState& fp, const ChannelSet& ch,
                                      const LinkModel& link, double sinr_min);

/// theta / |theta| entrywise, with 0 mapped to 1.
Eigen::VectorXcd project_unit_modulus(const Eigen::VectorXcd& theta);
std::vector<Eigen::VectorXcd> project_unit_modulus(const std::vector<Eigen::VectorXcd>& theta);

}  // namespace irsbf
