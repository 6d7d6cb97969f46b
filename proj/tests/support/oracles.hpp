#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "irsbf/channel.hpp"
#include "irsbf/cone_problem.hpp"
#include "irsbf/system.hpp"

namespace oracle {

using cd = std::complex<double>;
using Rng = std::mt19937_64;

cd cn(Rng& rng, double var = 1.0);

// i.i.d. CN(0, scale^2) links of the requested sizes.
irsbf::ChannelSet random_channels(Rng& rng, int M, int N, int K, int L, double scale = 1.0);

// Random precoder with total power p_total, phases inside the unit disc and a random
// row-one-hot A.
irsbf::BeamformingState random_state(Rng& rng, const irsbf::ChannelSet& ch, double p_total, bool unit_modulus);

// Straight loops over the raw link definitions, no shared code with the library.
std::vector<double> sinrs(const irsbf::ChannelSet& ch, const irsbf::BeamformingState& s, double noise,
                          bool direct);
double sum_rate(const std::vector<double>& sinr);

// Every row-one-hot assignment, as per-IRS user indices.
std::vector<std::vector<int>> all_assignments(int N, int K);

// Feasible random cone problem with an interior point. `dim` complex coordinates,
// `socs` cones, a ball over everything and optionally per-coordinate boxes.
irsbf::ConeProblem random_cone_problem(Rng& rng, int dim, int socs, bool boxes, int q_rank);

struct AdmmResult {
  Eigen::VectorXcd x;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
};

// Operator splitting on the real lifting: every constraint becomes y_i = A_i x + b_i in
// a cone with an explicit projection. Run long enough, this is an accuracy reference.
AdmmResult admm_solve(const irsbf::ConeProblem& p, int max_iter = 200000, double tol = 1e-11);

}  // namespace oracle
