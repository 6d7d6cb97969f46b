// Experiment driver: single runs, parameter sweeps and convergence traces.
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "irsbf/experiment.hpp"

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

struct Flags {
  std::string config;
  std::string preset = "desk";
  std::string methods = "proposed,wis,rps,nis";
  std::optional<int> drops;
  std::uint64_t seed = 1;
  std::string sweep;
  std::string out = "results.csv";
  int workers = 0;
  bool trace = false;
  std::string nk = "4x4,6x4";
  std::optional<double> noise_dbm;
  std::optional<double> pmax_dbm;
  std::optional<int> max_iter;
};

irsbf::ExperimentSpec build_spec(const Flags& f) {
  irsbf::ExperimentSpec spec;
  spec.base = f.config.empty() ? irsbf::preset_config(f.preset) : irsbf::load_config_file(f.config);
  if (f.noise_dbm) spec.base.noise_dbm = *f.noise_dbm;
  if (f.pmax_dbm) spec.base.P_max_dbm = *f.pmax_dbm;
  irsbf::validate(spec.base);
  spec.methods.clear();
  for (const auto& m : split(f.methods, ',')) spec.methods.push_back(irsbf::parse_method(m));
  if (spec.methods.empty()) throw std::invalid_argument("--methods is empty");
  spec.drops = f.drops.value_or(irsbf::preset_drops(f.preset));
  if (spec.drops < 1) throw std::invalid_argument("--drops must be at least 1");
  spec.seed = f.seed;
  spec.out_path = f.out;
  spec.workers = f.workers;
  spec.trace = f.trace;
  if (f.max_iter) spec.optim.max_iter = *f.max_iter;
  if (!f.sweep.empty()) {
    const auto eq = f.sweep.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--sweep expects axis=v1,v2,...");
    spec.axis = irsbf::parse_axis(f.sweep.substr(0, eq));
    for (const auto& v : split(f.sweep.substr(eq + 1), ',')) spec.values.push_back(parse_double(v));
  }
  spec.nk.clear();
  for (const auto& pair : split(f.nk, ',')) {
    const auto parts = split(pair, 'x');
    if (parts.size() != 2) throw std::invalid_argument("--nk expects NxK pairs, got '" + pair + "'");
    spec.nk.emplace_back(std::stoi(parts[0]), std::stoi(parts[1]));
  }
  return spec;
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON scenario file (overrides --preset)");
  cmd->add_option("--preset", f.preset, "paper or desk")->check(CLI::IsMember({"paper", "desk"}));
  cmd->add_option("--methods", f.methods, "comma separated subset of proposed,wis,rps,nis");
  cmd->add_option("--drops", f.drops, "Monte Carlo drops (preset default when omitted)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output CSV path");
  cmd->add_option("--workers", f.workers, "worker threads, 0 = available parallelism")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--trace", f.trace, "also write per-iteration traces");
  cmd->add_option("--noise-dbm", f.noise_dbm, "override the noise power");
  cmd->add_option("--pmax-dbm", f.pmax_dbm, "override the transmit power budget");
  cmd->add_option("--max-iter", f.max_iter, "outer iteration cap");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-IRS joint beamforming and selection simulator"};
  app.require_subcommand(1);
  Flags f;

  auto* run = app.add_subcommand("run", "independent drops for each method");
  add_common(run, f);
  auto* sweep = app.add_subcommand("sweep", "drops for each value of one swept parameter");
  add_common(sweep, f);
  sweep->add_option("--sweep", f.sweep, "axis=v1,v2,... with axis pmax_dbm, elements_L or irs_count_N")->required();
  auto* conv = app.add_subcommand("convergence", "per-iteration traces of the proposed method");
  add_common(conv, f);
  conv->add_option("--nk", f.nk, "comma separated NxK pairs");

  CLI11_PARSE(app, argc, argv);

  try {
    const irsbf::ExperimentSpec spec = build_spec(f);
    if (run->parsed()) irsbf::cmd_run(spec);
    else if (sweep->parsed()) irsbf::cmd_sweep(spec);
    else irsbf::cmd_convergence(spec);
  } catch (const std::exception& e) {
    std::cerr << "irsbf: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
