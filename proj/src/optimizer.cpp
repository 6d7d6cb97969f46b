#include "irsbf/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <tuple>

#include "irsbf/fp_core.hpp"

namespace irsbf {

std::string to_string(Method m) {
  switch (m) {
    case Method::proposed: return "proposed";
    case Method::wis: return "wis";
    case Method::rps: return "rps";
    case Method::nis: return "nis";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::proposed, Method::wis, Method::rps, Method::nis})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown method '" + name + "' (expected proposed, wis, rps or nis)");
}

std::string to_string(OptimStatus s) {
  switch (s) {
    case OptimStatus::converged: return "converged";
    case OptimStatus::max_iter: return "max_iter";
    case OptimStatus::infeasible_drop: return "infeasible_drop";
  }
  return "unknown";
}

Assignment geometric_assignment(const Layout& layout, int K, GeometricRule rule) {
  const int N = static_cast<int>(layout.dist_irs_user.size());
  auto nearest_user = [&](int n) {
    const auto& d = layout.dist_irs_user[static_cast<std::size_t>(n)];
    return static_cast<int>(std::min_element(d.begin(), d.begin() + K) - d.begin());
  };
  Assignment a(static_cast<std::size_t>(N), -1);
  if (rule == GeometricRule::irs_nearest_user) {
    for (int n = 0; n < N; ++n) a[static_cast<std::size_t>(n)] = nearest_user(n);
    return a;
  }
  std::vector<std::tuple<double, int, int>> pairs;
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      pairs.emplace_back(layout.dist_irs_user[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)], n, k);
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> served(static_cast<std::size_t>(K), false);
  for (const auto& [d, n, k] : pairs)
    if (a[static_cast<std::size_t>(n)] < 0 && !served[static_cast<std::size_t>(k)]) {
      a[static_cast<std::size_t>(n)] = k;
      served[static_cast<std::size_t>(k)] = true;
    }
  for (int n = 0; n < N; ++n)
    if (a[static_cast<std::size_t>(n)] < 0) a[static_cast<std::size_t>(n)] = nearest_user(n);
  return a;
}

Eigen::MatrixXcd matched_filter(const BeamformingState& state, const ChannelSet& ch, const LinkModel& link,
                                double p_max) {
  const int K = state.K();
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(ch.M(), K);
  for (int k = 0; k < K; ++k) {
    const Eigen::RowVectorXcd h = effective_channel(state, ch, k, link.include_direct);
    const double nh = h.norm();
    if (nh > 0.0) P.col(k) = h.adjoint() * (std::sqrt(p_max / K) / nh);
  }
  const double total = total_power(P);
  if (total > p_max) P *= std::sqrt(p_max / total);
  return P;
}

std::vector<Eigen::VectorXcd> random_phases(int N, int L, RandomStream& stream) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<Eigen::VectorXcd> out;
  for (int n = 0; n < N; ++n) {
    Eigen::VectorXcd t(L);
    for (int l = 0; l < L; ++l) t[l] = std::polar(1.0, phase(stream));
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

struct Blocks {
  bool theta = true;
  bool assign = true;
};

bool meets_sinr(const Eigen::VectorXd& s, double sinr_min) {
  return (s.array() >= sinr_min * (1.0 - 1e-9)).all();
}

// Per-user phase rotation making H_k^H p_k real and nonnegative; changes no |H_k^H p_i|.
void rotate_precoder(BeamformingState& s, const ChannelSet& ch, const LinkModel& link) {
  for (int k = 0; k < s.K(); ++k) {
    const cd g = (effective_channel(s, ch, k, link.include_direct) * s.P.col(k))(0);
    const double a = std::abs(g);
    if (a > 0.0) s.P.col(k) *= std::conj(g) / a;
  }
}

class Loop {
 public:
  Loop(const ScenarioConfig& config, const ChannelSet& ch, const OptimOptions& opts)
      : ch_(ch),
        opts_(opts),
        link_{config.noise_mw(), config.include_direct_link},
        p_max_(config.p_max_mw()),
        sinr_min_(config.sinr_min()) {}

  OptimResult run(BeamformingState state, Blocks blocks) {
    OptimResult res;
    double rate = sum_rate(state, ch_, link_);
    res.initial_sum_rate = rate;
    int consecutive_failures = 0;
    bool aborted = false;

    // Solves one block and keeps the candidate when it is feasible and no worse, or
    // when it restores feasibility. Two failed solves in a row abort the drop.
    auto attempt = [&](const ConeProblem& prob, const Eigen::VectorXcd& warm, auto&& apply) {
      const SolveReport rep = solve(prob, warm, opts_.solver);
      if (rep.status == SolveStatus::infeasible || !rep.x.allFinite()) {
        ++res.solver_failures;
        if (++consecutive_failures >= 2) aborted = true;
        return;
      }
      consecutive_failures = 0;
      BeamformingState cand = state;
      apply(cand, rep.x);
      const Eigen::VectorXd s = sinrs(cand, ch_, link_);
      const double r = sum_rate_from_sinrs(s);
      const bool was_feasible = meets_sinr(sinrs(state, ch_, link_), sinr_min_);
      const bool now_feasible = meets_sinr(s, sinr_min_);
      if ((now_feasible && !was_feasible) || (r >= rate && (now_feasible || !was_feasible))) {
        state = std::move(cand);
        rate = r;
      }
    };

    for (int it = 0; it < opts_.max_iter && !aborted; ++it) {
      const Eigen::VectorXd alpha = update_alpha(sinrs(state, ch_, link_));
      FpState fp{alpha, {}, {}};

      rotate_precoder(state, ch_, link_);
      fp.epsilon = update_epsilon(state, alpha, ch_, link_);
      attempt(assemble_p_subproblem(state, fp, ch_, link_, p_max_, sinr_min_), stack_precoder(state.P),
              [&](BeamformingState& c, const Eigen::VectorXcd& x) { c.P = unstack_precoder(x, c.M(), c.K()); });
      if (aborted) break;

      if (blocks.theta) {
        rotate_precoder(state, ch_, link_);
        fp.beta = update_beta(state, alpha, ch_, link_);
        attempt(assemble_theta_subproblem(state, fp, ch_, link_, sinr_min_), stack_theta(state.theta),
                [&](BeamformingState& c, const Eigen::VectorXcd& x) {
                  c.theta = unstack_theta(x, ch_.N(), ch_.L());
                });
        if (aborted) break;
      }

      if (blocks.assign) {
        SelectionOptions sel = opts_.selection;
        if (opts_.selection_keeps_sinr && meets_sinr(sinrs(state, ch_, link_), sinr_min_)) {
          const double smin = sinr_min_;
          sel.admissible = [smin](const Eigen::VectorXd& s) { return meets_sinr(s, smin); };
        }
        const SelectionResult pick = enumerate_best_assignment(state, ch_, link_, sel);
        if (pick.sum_rate >= rate) {
          state.A = selection_from_assignment(pick.assignment, state.K());
          rate = sum_rate(state, ch_, link_);
        }
      }

      const double prev = res.trace.empty() ? res.initial_sum_rate : res.trace.back().sum_rate;
      res.trace.push_back({rate, f1a_value(alpha, sinrs(state, ch_, link_))});
      res.iterations = it + 1;
      if (std::abs(rate - prev) / std::max(1.0, rate) < opts_.tol) {
        res.status = OptimStatus::converged;
        break;
      }
    }
    // A run that never reached SINR_min for every user is an infeasible drop too.
    if (aborted || !meets_sinr(sinrs(state, ch_, link_), sinr_min_)) res.status = OptimStatus::infeasible_drop;

    res.final_state = state;
    res.per_user_rates = user_rates(state, ch_, link_);
    res.sum_rate_relaxed = res.per_user_rates.sum();
    BeamformingState projected = state;
    projected.theta = project_unit_modulus(state.theta);
    res.per_user_rates_projected = user_rates(projected, ch_, link_);
    res.sum_rate_projected = res.per_user_rates_projected.sum();
    return res;
  }

 private:
  const ChannelSet& ch_;
  const OptimOptions& opts_;
  LinkModel link_;
  double p_max_;
  double sinr_min_;
};

BeamformingState initial_state(const ScenarioConfig& config, const ChannelSet& ch, Selection A,
                               std::vector<Eigen::VectorXcd> theta) {
  BeamformingState s;
  s.A = std::move(A);
  s.theta = std::move(theta);
  s.P = Eigen::MatrixXcd::Zero(ch.M(), ch.K());
  const LinkModel link{config.noise_mw(), config.include_direct_link};
  s.P = matched_filter(s, ch, link, config.p_max_mw());
  check_shapes(s, ch);
  return s;
}

}  // namespace

OptimResult optimize(const ScenarioConfig& config, const Layout& layout, const ChannelSet& ch, std::uint64_t seed,
                     const OptimOptions& opts) {
  return run_method(Method::proposed, config, layout, ch, seed, opts);
}

OptimResult run_baseline(Method method, const ScenarioConfig& config, const Layout& layout, const ChannelSet& ch,
                         std::uint64_t seed, const OptimOptions& opts) {
  if (method == Method::proposed) throw std::invalid_argument("run_baseline: 'proposed' is not a baseline");
  return run_method(method, config, layout, ch, seed, opts);
}

OptimResult run_method(Method method, const ScenarioConfig& config, const Layout& layout, const ChannelSet& ch,
                       std::uint64_t seed, const OptimOptions& opts) {
  const int N = ch.N();
  const int K = ch.K();
  const Selection geo = selection_from_assignment(geometric_assignment(layout, K, opts.init_rule), K);
  auto init_stream = make_stream(seed, StreamId::init_phases);
  Loop loop(config, ch, opts);
  switch (method) {
    case Method::proposed:
      return loop.run(initial_state(config, ch, geo, random_phases(N, ch.L(), init_stream)), {true, true});
    case Method::wis:
      return loop.run(initial_state(config, ch, Selection::Ones(N, K), random_phases(N, ch.L(), init_stream)),
                      {true, false});
    case Method::rps: {
      auto frozen = make_stream(seed, StreamId::baseline_phases);
      return loop.run(initial_state(config, ch, geo, random_phases(N, ch.L(), frozen)), {false, true});
    }
    case Method::nis:
      return loop.run(initial_state(config, ch, selection_from_assignment(geometric_assignment(layout, K, opts.nis_rule), K),
                                    random_phases(N, ch.L(), init_stream)),
                      {true, false});
  }
  throw std::invalid_argument("run_method: unknown method");
}

}  // namespace irsbf
