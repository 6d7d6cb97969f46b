#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "irsbf/channel.hpp"
#include "irsbf/system.hpp"

namespace irsbf {

/// Serving user (0-based) of every IRS.
using Assignment = std::vector<int>;

class SelectionBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SelectionOptions {
  std::uint64_t budget = 10'000'000;  // max K^N candidates
  bool greedy_fallback = false;       // coordinate ascent when the budget is exceeded
  // Optional admissibility test on the candidate's SINRs. When set, the best admissible
  // candidate wins; if none is admissible the unrestricted best is returned.
  std::function<bool(const Eigen::VectorXd&)> admissible;
};

struct SelectionResult {
  Assignment assignment;
  double sum_rate = 0.0;
  std::uint64_t candidates = 0;
  bool admissible_found = true;
  bool used_fallback = false;
};

/// Per-(n, k, i) scalars cascade_{n,k} p_i plus the direct terms; every candidate's gain
/// matrix is a sum of these.
struct CascadeGains {
  std::vector<Eigen::MatrixXcd> per_irs;  // [n](k, i)
  Eigen::MatrixXcd direct;                // (k, i)

  Eigen::MatrixXcd gains(const Assignment& a) const;
};

CascadeGains cascade_gains(const BeamformingState& state, const ChannelSet& ch, bool include_direct);

/// Exhaustive search over all K^N assignments in lexicographic order; ties keep the
/// lexicographically smallest. Throws SelectionBudgetExceeded when K^N > budget and the
/// greedy fallback is off.
SelectionResult enumerate_best_assignment(const BeamformingState& state, const ChannelSet& ch,
                                          const LinkModel& link, const SelectionOptions& opts = {});

/// Coordinate ascent from the assignment in `state.A` (not exhaustive).
SelectionResult greedy_assignment(const BeamformingState& state, const ChannelSet& ch, const LinkModel& link,
                                  const SelectionOptions& opts = {});

/// Serving user of each IRS from a row-one-hot A; -1 for an empty row.
Assignment assignment_from_selection(const Selection& A);

}  // namespace irsbf
