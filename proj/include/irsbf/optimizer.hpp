#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "irsbf/channel.hpp"
#include "irsbf/cone_solver.hpp"
#include "irsbf/scenario.hpp"
#include "irsbf/selection.hpp"
#include "irsbf/system.hpp"

namespace irsbf {

enum class Method { proposed, wis, rps, nis };

std::string to_string(Method m);
/// Throws std::invalid_argument for unknown names.
Method parse_method(const std::string& name);

enum class OptimStatus { converged, max_iter, infeasible_drop };

std::string to_string(OptimStatus s);

/// Geometric assignment rules.
enum class GeometricRule {
  user_nearest_free,  // users claim their nearest free IRS in order of distance; leftovers go to the nearest user
  irs_nearest_user,   // every IRS serves its nearest user
};

struct OptimOptions {
  int max_iter = 50;
  double tol = 1e-4;  // relative sum-rate change
  SolveOptions solver;
  SelectionOptions selection;
  GeometricRule init_rule = GeometricRule::user_nearest_free;  // proposed and RPS starting A
  GeometricRule nis_rule = GeometricRule::irs_nearest_user;    // fixed A of NIS
  // Restrict the assignment step to candidates that meet SINR_min at the current P, Theta.
  bool selection_keeps_sinr = true;
};

struct TracePoint {
  double sum_rate = 0.0;
  double f1a = 0.0;
};

struct OptimResult {
  std::vector<TracePoint> trace;  // one entry per iteration
  double initial_sum_rate = 0.0;
  BeamformingState final_state;   // relaxed phases
  Eigen::VectorXd per_user_rates;            // relaxed
  Eigen::VectorXd per_user_rates_projected;  // unit-modulus phases
  OptimStatus status = OptimStatus::max_iter;
  int iterations = 0;
  double sum_rate_relaxed = 0.0;
  double sum_rate_projected = 0.0;
  int solver_failures = 0;
};

/// Geometric assignment from IRS-user distances.
Assignment geometric_assignment(const Layout& layout, int K, GeometricRule rule);

/// Matched filter to the effective channels with power P_max / K per user.
Eigen::MatrixXcd matched_filter(const BeamformingState& state, const ChannelSet& ch, const LinkModel& link,
                                double p_max);

/// Uniformly random unit-modulus phases for every IRS.
std::vector<Eigen::VectorXcd> random_phases(int N, int L, RandomStream& stream);

/// Alternating optimization of alpha, (eps, P), (beta, Theta) and A. `seed` drives the
/// random initial phases.
OptimResult optimize(const ScenarioConfig& config, const Layout& layout, const ChannelSet& ch, std::uint64_t seed,
                     const OptimOptions& opts = {});

/// WIS (A = all ones), RPS (frozen random phases) or NIS (geometric A).
OptimResult run_baseline(Method method, const ScenarioConfig& config, const Layout& layout, const ChannelSet& ch,
                         std::uint64_t seed, const OptimOptions& opts = {});

/// Dispatches to optimize() or run_baseline().
OptimResult run_method(Method method, const ScenarioConfig& config, const Layout& layout, const ChannelSet& ch,
                       std::uint64_t seed, const OptimOptions& opts = {});

}  // namespace irsbf
