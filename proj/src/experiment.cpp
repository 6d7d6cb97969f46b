#include "irsbf/experiment.hpp"

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

namespace irsbf {

using nlohmann::json;

Drop make_drop(const ScenarioConfig& config, std::uint64_t seed) {
  Drop d;
  d.seed = seed;
  auto placement = make_stream(seed, StreamId::placement);
  d.layout = place_users(config, placement);
  d.channels = generate_channels(d.layout, config, seed);
  return d;
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::none: return "none";
    case SweepAxis::pmax_dbm: return "pmax_dbm";
    case SweepAxis::elements_L: return "elements_L";
    case SweepAxis::irs_count_N: return "irs_count_N";
  }
  return "unknown";
}

SweepAxis parse_axis(const std::string& name) {
  for (SweepAxis a : {SweepAxis::none, SweepAxis::pmax_dbm, SweepAxis::elements_L, SweepAxis::irs_count_N})
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown sweep axis '" + name + "' (expected pmax_dbm, elements_L or irs_count_N)");
}

ScenarioConfig apply_axis(const ScenarioConfig& config, SweepAxis axis, double value) {
  ScenarioConfig c = config;
  switch (axis) {
    case SweepAxis::none: break;
    case SweepAxis::pmax_dbm: c.P_max_dbm = value; break;
    case SweepAxis::elements_L:
      if (value < 1 || value != std::floor(value)) throw std::invalid_argument("elements_L values must be positive integers");
      c = with_element_count(c, static_cast<int>(value));
      break;
    case SweepAxis::irs_count_N:
      if (value < 1 || value != std::floor(value)) throw std::invalid_argument("irs_count_N values must be positive integers");
      c = with_irs_count(c, static_cast<int>(value));
      break;
  }
  validate(c);
  return c;
}

ScenarioConfig preset_config(const std::string& name) {
  ScenarioConfig c = with_irs_count(reference_config(), 4);
  if (name == "paper") return c;
  if (name == "desk") {
    c.M = 8;
    c.L_v = 4;
    c.L_h = 4;
    return c;
  }
  throw std::invalid_argument("unknown preset '" + name + "' (expected paper or desk)");
}

int preset_drops(const std::string& name) { return name == "paper" ? 50 : 30; }

// ---------------------------------------------------------------------------

std::vector<DropRow> run_drops(const ScenarioConfig& config, const std::vector<Method>& methods, int drops,
                               std::uint64_t master_seed, const OptimOptions& optim, int workers, SweepAxis axis,
                               double axis_value) {
  if (drops < 1) throw std::invalid_argument("drops must be >= 1");
  validate(config);
  const std::size_t per_drop = methods.size();
  std::vector<DropRow> rows(per_drop * static_cast<std::size_t>(drops));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (int d = next++; d < drops; d = next++) {
      try {
        const std::uint64_t seed = drop_seed(master_seed, static_cast<std::uint64_t>(d));
        const Drop drop = make_drop(config, seed);
        for (std::size_t m = 0; m < per_drop; ++m) {
          const OptimResult r = run_method(methods[m], config, drop.layout, drop.channels, seed, optim);
          DropRow& row = rows[m * static_cast<std::size_t>(drops) + static_cast<std::size_t>(d)];
          row.method = methods[m];
          row.drop = d;
          row.axis = axis;
          row.axis_value = axis_value;
          row.iterations = r.iterations;
          row.status = r.status;
          row.sum_rate_relaxed = r.sum_rate_relaxed;
          row.sum_rate_projected = r.sum_rate_projected;
          row.min_user_rate = r.per_user_rates_projected.size() ? r.per_user_rates_projected.minCoeff() : 0.0;
          row.seed = seed;
          row.trace = r.trace;
          row.max_power_ratio = total_power(r.final_state.P) / config.p_max_mw();
          const LinkModel link{config.noise_mw(), config.include_direct_link};
          row.min_sinr_ratio = sinrs(r.final_state, drop.channels, link).minCoeff() / config.sinr_min();
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = drops;
      }
    }
  };

  int n = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n = std::min(n, drops);
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<DropRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::tuple<double, int>, std::size_t> index;  // (axis value, method) in first-seen order
  std::vector<std::vector<double>> samples;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.axis_value, static_cast<int>(r.method));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      SummaryRow s;
      s.method = r.method;
      s.axis = r.axis;
      s.axis_value = r.axis_value;
      out.push_back(s);
      samples.emplace_back();
    }
    SummaryRow& s = out[it->second];
    ++s.drops;
    if (r.status != OptimStatus::infeasible_drop) {
      ++s.feasible;
      samples[it->second].push_back(r.sum_rate_projected);
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& x = samples[i];
    const auto n = static_cast<double>(x.size());
    if (x.empty()) {
      out[i].mean = out[i].std = out[i].ci95 = std::nan("");
      continue;
    }
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    out[i].mean = mean;
    if (x.size() < 2) {
      out[i].std = 0.0;
      out[i].ci95 = std::nan("");
      continue;
    }
    out[i].std = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t dist(n - 1.0);
    out[i].ci95 = boost::math::quantile(dist, 0.975) * out[i].std / std::sqrt(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Formatting

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string stem_of(const std::string& out_path) {
  const std::filesystem::path p(out_path);
  return (p.parent_path() / p.stem()).string();
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

json summary_json(const ExperimentSpec& spec, const std::string& command, const std::vector<DropRow>& rows,
                  const std::vector<SummaryRow>& summary) {
  json j;
  j["command"] = command;
  j["config"] = json::parse(dump_config(spec.base));
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, config_hash(spec.base));
  j["config_hash"] = hash;
  j["seed"] = spec.seed;
  j["drops"] = spec.drops;
  j["axis"] = to_string(spec.axis);
  j["axis_values"] = spec.values;
  json methods = json::array();
  for (Method m : spec.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  json s = json::array();
  for (const auto& r : summary) {
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    s.push_back({{"method", to_string(r.method)},
                 {"axis_value", r.axis_value},
                 {"drops", r.drops},
                 {"feasible_drops", r.feasible},
                 {"infeasible_drops", r.drops - r.feasible},
                 {"mean_sum_rate", finite_or_null(r.mean)},
                 {"std_sum_rate", finite_or_null(r.std)},
                 {"ci95_half_width", finite_or_null(r.ci95)}});
  }
  j["summary"] = s;
  j["rows"] = rows.size();
  return j;
}

void write_outputs(const ExperimentSpec& spec, const std::string& command, const std::vector<DropRow>& rows) {
  const auto summary = summarize(rows);
  const std::string stem = stem_of(spec.out_path);
  write_file(spec.out_path, format_csv(rows));
  write_file(stem + ".summary.csv", format_summary_csv(summary));
  write_file(stem + ".summary.json", summary_json(spec, command, rows, summary).dump(2) + "\n");
  if (spec.trace) write_file(stem + ".trace.csv", format_trace_csv(rows));
}

}  // namespace

const char* const kCsvHeader =
    "method,drop,axis,axis_value,iterations,status,sum_rate_relaxed,sum_rate_projected,min_user_rate,seed";

std::string format_row(const DropRow& r) {
  std::ostringstream os;
  os << to_string(r.method) << ',' << r.drop << ',' << to_string(r.axis) << ',' << num(r.axis_value) << ','
     << r.iterations << ',' << to_string(r.status) << ',' << num(r.sum_rate_relaxed) << ','
     << num(r.sum_rate_projected) << ',' << num(r.min_user_rate) << ',' << r.seed;
  return os.str();
}

std::string format_csv(const std::vector<DropRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) out += format_row(r) + "\n";
  return out;
}

std::string format_summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "method,axis,axis_value,drops,feasible_drops,mean_sum_rate,std_sum_rate,ci95_half_width\n";
  for (const auto& r : rows)
    out += to_string(r.method) + "," + to_string(r.axis) + "," + num(r.axis_value) + "," + std::to_string(r.drops) +
           "," + std::to_string(r.feasible) + "," + num(r.mean) + "," + num(r.std) + "," + num(r.ci95) + "\n";
  return out;
}

std::string format_trace_csv(const std::vector<DropRow>& rows) {
  std::string out = "method,drop,axis,axis_value,iter,sum_rate,f1a\n";
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.trace.size(); ++i)
      out += to_string(r.method) + "," + std::to_string(r.drop) + "," + to_string(r.axis) + "," + num(r.axis_value) +
             "," + std::to_string(i + 1) + "," + num(r.trace[i].sum_rate) + "," + num(r.trace[i].f1a) + "\n";
  return out;
}

void cmd_run(const ExperimentSpec& spec) {
  const auto rows = run_drops(spec.base, spec.methods, spec.drops, spec.seed, spec.optim, spec.workers);
  write_outputs(spec, "run", rows);
}

void cmd_sweep(const ExperimentSpec& spec) {
  if (spec.axis == SweepAxis::none || spec.values.empty())
    throw std::invalid_argument("sweep needs an axis and at least one value");
  std::vector<DropRow> rows;
  for (double v : spec.values) {
    const auto part = run_drops(apply_axis(spec.base, spec.axis, v), spec.methods, spec.drops, spec.seed, spec.optim,
                                spec.workers, spec.axis, v);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  write_outputs(spec, "sweep", rows);
}

void cmd_convergence(const ExperimentSpec& spec) {
  if (spec.nk.empty()) throw std::invalid_argument("convergence needs at least one (N, K) pair");
  std::string traces = "N,K,drop,iter,sum_rate,f1a\n";
  json j;
  j["command"] = "convergence";
  j["seed"] = spec.seed;
  j["drops"] = spec.drops;
  json cases = json::array();
  for (const auto& [N, K] : spec.nk) {
    ScenarioConfig c = with_irs_count(spec.base, N);
    c.K = K;
    validate(c);
    const auto rows = run_drops(c, {Method::proposed}, spec.drops, spec.seed, spec.optim, spec.workers);
    for (const auto& r : rows)
      for (std::size_t i = 0; i < r.trace.size(); ++i)
        traces += std::to_string(N) + "," + std::to_string(K) + "," + std::to_string(r.drop) + "," +
                  std::to_string(i + 1) + "," + num(r.trace[i].sum_rate) + "," + num(r.trace[i].f1a) + "\n";
    const auto s = summarize(rows);
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, config_hash(c));
    int converged = 0;
    for (const auto& r : rows) converged += r.status == OptimStatus::converged;
    cases.push_back({{"N", N},
                     {"K", K},
                     {"config_hash", hash},
                     {"feasible_drops", s.front().feasible},
                     {"converged_drops", converged},
                     {"mean_sum_rate", std::isfinite(s.front().mean) ? json(s.front().mean) : json(nullptr)}});
  }
  j["cases"] = cases;
  write_file(spec.out_path, traces);
  write_file(stem_of(spec.out_path) + ".summary.json", j.dump(2) + "\n");
}

}  // namespace irsbf
