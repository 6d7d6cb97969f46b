#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "irsbf/cone_problem.hpp"

namespace irsbf {

enum class SolveStatus { optimal, max_iter, infeasible };

std::string to_string(SolveStatus s);

struct SolveOptions {
  double feas_tol = 1e-8;   // primal feasibility
  double dual_tol = 1e-6;   // KKT residual required for `optimal`
  double gap_tol = 1e-5;    // relative duality gap
  int max_iter = 500;       // Newton steps, phase one included
  double mu = 20.0;         // barrier parameter growth per outer step
  bool force_dense = false; // skip the diagonal-plus-low-rank factorization
};

/// Dual variables of the internally normalized real problem. Cone order is: balls,
/// boxed coordinates (ascending), second-order cones. `eq` holds one entry per SOC
/// phase equality that was kept (all-zero lhs forms are dropped).
struct Multipliers {
  std::vector<Eigen::VectorXd> cones;
  Eigen::VectorXd eq;
};

struct SolveReport {
  Eigen::VectorXcd x;
  double objective = 0.0;
  SolveStatus status = SolveStatus::max_iter;
  double kkt_residual = 0.0;
  int iterations = 0;
  Multipliers multipliers;
  std::vector<double> objective_trace;  // after every outer barrier step
  std::vector<double> kkt_trace;
};

/// Log-barrier interior-point method on the real lifting of the problem (each complex
/// coordinate becomes two reals). A strictly feasible start is found by a phase-one
/// problem; `infeasible` is reported when the SOC constraints have no interior point.
SolveReport solve(const ConeProblem& problem, const std::optional<Eigen::VectorXcd>& warm_start = {},
                  const SolveOptions& opts = {});

/// max(stationarity, primal infeasibility, dual infeasibility, complementarity) of the
/// normalized real problem, for multipliers in the layout produced by solve().
double kkt_residual(const ConeProblem& problem, const Eigen::VectorXcd& x, const Multipliers& multipliers);

}  // namespace irsbf
