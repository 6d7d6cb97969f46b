#include "irsbf/selection.hpp"

#include <limits>

namespace irsbf {

Eigen::MatrixXcd CascadeGains::gains(const Assignment& a) const {
  Eigen::MatrixXcd G = direct;
  for (std::size_t n = 0; n < a.size(); ++n) G.row(a[n]) += per_irs[n].row(a[n]);
  return G;
}

CascadeGains cascade_gains(const BeamformingState& state, const ChannelSet& ch, bool include_direct) {
  const int K = state.K();
  CascadeGains cg;
  cg.direct = Eigen::MatrixXcd::Zero(K, K);
  for (int n = 0; n < ch.N(); ++n) {
    Eigen::MatrixXcd g(K, K);
    for (int k = 0; k < K; ++k)
      g.row(k) = cascaded_channel(ch.h_irs_user[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)],
                                  state.theta[static_cast<std::size_t>(n)], ch.H_bs_irs[static_cast<std::size_t>(n)]) *
                 state.P;
    cg.per_irs.push_back(std::move(g));
  }
  if (include_direct)
    for (int k = 0; k < K; ++k) cg.direct.row(k) = ch.h_direct[static_cast<std::size_t>(k)] * state.P;
  return cg;
}

Assignment assignment_from_selection(const Selection& A) {
  Assignment a(static_cast<std::size_t>(A.rows()), -1);
  for (Eigen::Index n = 0; n < A.rows(); ++n)
    for (Eigen::Index k = 0; k < A.cols(); ++k)
      if (A(n, k) != 0) {
        a[static_cast<std::size_t>(n)] = static_cast<int>(k);
        break;
      }
  return a;
}

namespace {

struct Scored {
  double rate;
  bool admissible;
};

Scored score(const CascadeGains& cg, const Assignment& a, const LinkModel& link, const SelectionOptions& opts) {
  const Eigen::VectorXd s = sinrs_from_gains(cg.gains(a), link.noise);
  return {sum_rate_from_sinrs(s), !opts.admissible || opts.admissible(s)};
}

// Candidate c beats the incumbent: admissibility first, then strictly higher rate.
bool better(const Scored& c, const Scored& best, bool have) {
  if (!have) return true;
  if (c.admissible != best.admissible) return c.admissible;
  return c.rate > best.rate;
}

}  // namespace

SelectionResult greedy_assignment(const BeamformingState& state, const ChannelSet& ch, const LinkModel& link,
                                  const SelectionOptions& opts) {
  const int N = ch.N();
  const int K = state.K();
  const CascadeGains cg = cascade_gains(state, ch, link.include_direct);
  Assignment a = assignment_from_selection(state.A);
  for (auto& x : a)
    if (x < 0) x = 0;
  SelectionResult res;
  Scored cur = score(cg, a, link, opts);
  res.candidates = 1;
  for (bool changed = true; changed;) {
    changed = false;
    for (int n = 0; n < N; ++n) {
      const int keep = a[static_cast<std::size_t>(n)];
      for (int k = 0; k < K; ++k) {
        if (k == keep) continue;
        a[static_cast<std::size_t>(n)] = k;
        const Scored c = score(cg, a, link, opts);
        ++res.candidates;
        if (better(c, cur, true)) {
          cur = c;
          changed = true;
        } else {
          a[static_cast<std::size_t>(n)] = keep;
        }
        if (a[static_cast<std::size_t>(n)] != keep) break;
      }
    }
  }
  res.assignment = a;
  res.sum_rate = cur.rate;
  res.admissible_found = cur.admissible;
  res.used_fallback = true;
  return res;
}

SelectionResult enumerate_best_assignment(const BeamformingState& state, const ChannelSet& ch,
                                          const LinkModel& link, const SelectionOptions& opts) {
  const int N = ch.N();
  const int K = state.K();
  std::uint64_t total = 1;
  for (int n = 0; n < N; ++n) {
    if (total > opts.budget / static_cast<std::uint64_t>(K)) {
      total = std::numeric_limits<std::uint64_t>::max();
      break;
    }
    total *= static_cast<std::uint64_t>(K);
  }
  if (total > opts.budget) {
    if (opts.greedy_fallback) return greedy_assignment(state, ch, link, opts);
    throw SelectionBudgetExceeded("assignment enumeration needs K^N = " + std::to_string(K) + "^" +
                                  std::to_string(N) + " candidates, over the budget of " +
                                  std::to_string(opts.budget));
  }

  const CascadeGains cg = cascade_gains(state, ch, link.include_direct);
  SelectionResult res;
  Assignment a(static_cast<std::size_t>(N), 0);
  Scored best{0.0, false};
  bool have = false;
  for (std::uint64_t c = 0; c < total; ++c) {
    const Scored s = score(cg, a, link, opts);
    if (better(s, best, have)) {
      best = s;
      res.assignment = a;
      have = true;
    }
    ++res.candidates;
    // Odometer with the last IRS fastest, so candidates are visited in lexicographic order.
    for (int n = N - 1; n >= 0; --n) {
      if (++a[static_cast<std::size_t>(n)] < K) break;
      a[static_cast<std::size_t>(n)] = 0;
    }
  }
  res.sum_rate = best.rate;
  res.admissible_found = best.admissible;
  return res;
}

}  // namespace irsbf
