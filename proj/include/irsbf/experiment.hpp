#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "irsbf/channel.hpp"
#include "irsbf/optimizer.hpp"
#include "irsbf/scenario.hpp"

namespace irsbf {

/// One Monte Carlo realization: user placement plus channels, both derived from `seed`.
struct Drop {
  std::uint64_t seed = 0;
  Layout layout;
  ChannelSet channels;
};

Drop make_drop(const ScenarioConfig& config, std::uint64_t seed);

enum class SweepAxis { none, pmax_dbm, elements_L, irs_count_N };

std::string to_string(SweepAxis a);
SweepAxis parse_axis(const std::string& name);

/// Copy of `config` with the swept field set to `value`.
ScenarioConfig apply_axis(const ScenarioConfig& config, SweepAxis axis, double value);

/// Named presets: "paper" (M=40, N=4, K=4, 8x8) and "desk" (M=8, N=4, K=4, 4x4).
ScenarioConfig preset_config(const std::string& name);
int preset_drops(const std::string& name);

struct ExperimentSpec {
  ScenarioConfig base = preset_config("desk");
  std::vector<Method> methods{Method::proposed, Method::wis, Method::rps, Method::nis};
  SweepAxis axis = SweepAxis::none;
  std::vector<double> values;                 // sweep values
  std::vector<std::pair<int, int>> nk{{4, 4}, {6, 4}};  // (N, K) pairs for convergence traces
  int drops = 30;
  std::uint64_t seed = 1;
  std::string out_path = "results.csv";
  int workers = 0;  // 0: hardware concurrency
  bool trace = false;
  OptimOptions optim;
};

struct DropRow {
  Method method = Method::proposed;
  int drop = 0;
  SweepAxis axis = SweepAxis::none;
  double axis_value = 0.0;
  int iterations = 0;
  OptimStatus status = OptimStatus::max_iter;
  double sum_rate_relaxed = 0.0;
  double sum_rate_projected = 0.0;
  double min_user_rate = 0.0;  // projected
  std::uint64_t seed = 0;
  std::vector<TracePoint> trace;
  double max_power_ratio = 0.0;  // sum |p_k|^2 / P_max
  double min_sinr_ratio = 0.0;   // min_k SINR_k / SINR_min at the relaxed solution
};

struct SummaryRow {
  Method method = Method::proposed;
  SweepAxis axis = SweepAxis::none;
  double axis_value = 0.0;
  int drops = 0;
  int feasible = 0;
  double mean = 0.0;  // projected sum rate over feasible drops
  double std = 0.0;   // sample standard deviation
  double ci95 = 0.0;  // half-width of the Student-t interval
};

/// Runs every (method, drop) for one configuration. Rows come back ordered by method,
/// then drop, regardless of the worker count.
std::vector<DropRow> run_drops(const ScenarioConfig& config, const std::vector<Method>& methods, int drops,
                               std::uint64_t master_seed, const OptimOptions& optim, int workers,
                               SweepAxis axis = SweepAxis::none, double axis_value = 0.0);

std::vector<SummaryRow> summarize(const std::vector<DropRow>& rows);

extern const char* const kCsvHeader;
std::string format_row(const DropRow& row);
std::string format_csv(const std::vector<DropRow>& rows);
std::string format_summary_csv(const std::vector<SummaryRow>& rows);
std::string format_trace_csv(const std::vector<DropRow>& rows);

/// Writes <out>, <out stem>.summary.csv, <out stem>.summary.json and, with `trace`,
/// <out stem>.trace.csv. Throws std::runtime_error on I/O failure.
void cmd_run(const ExperimentSpec& spec);
void cmd_sweep(const ExperimentSpec& spec);
/// Convergence traces of the proposed method for each (N, K) in spec.nk.
void cmd_convergence(const ExperimentSpec& spec);

}  // namespace irsbf
