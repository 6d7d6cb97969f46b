#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace irsbf {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b);

/// Azimuth (radians, measured from +x) of the direction pointing from `from` to `to`.
double azimuth(Point2 from, Point2 to);

/// Log-distance path loss with log-normal shadowing: kappa = a + 10 b log10(d) + xi, xi ~ N(0, sigma_xi^2).
struct PathLossParams {
  double a = 0.0;
  double b = 0.0;
  double sigma_xi = 0.0;

  friend bool operator==(const PathLossParams&, const PathLossParams&) = default;
};

struct UserRegion {
  Point2 center;
  double radius = 0.0;

  friend bool operator==(const UserRegion&, const UserRegion&) = default;
};

/// Every quantity that defines one simulated deployment. Power levels are kept in the
/// dB units they are configured in; use the linear accessors for any arithmetic.
struct ScenarioConfig {
  int M = 40;
  int N = 6;
  int K = 4;
  int L_v = 8;
  int L_h = 8;
  Point2 mbs_position{0.0, 0.0};
  std::vector<Point2> irs_positions;
  UserRegion user_region{{100.0, 0.0}, 10.0};
  double P_max_dbm = 30.0;
  double sinr_min_db = -20.0;
  double noise_dbm = -90.0;
  int n_paths_bs_irs = 5;
  int n_paths_irs_user = 1;
  int n_paths_bs_user = 3;
  PathLossParams pathloss_los{61.4, 2.0, 5.8};
  PathLossParams pathloss_nlos{72.0, 2.92, 8.7};
  std::uint64_t seed = 1;
  // Adds the direct mBS->user channel to every effective channel. Off by default:
  // the direct links are modelled as blocked.
  bool include_direct_link = false;

  int L() const { return L_v * L_h; }
  double p_max_mw() const;
  double noise_mw() const;
  double sinr_min() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double dbm_to_linear(double dbm);
double db_to_linear(double db);

/// The six IRS sites of the reference deployment, in order.
const std::vector<Point2>& reference_irs_sites();

/// Reference deployment: M=40, N=6 at the six reference sites, K=4, 8x8 IRS.
ScenarioConfig reference_config();

/// Throws ConfigError naming the offending field.
void validate(const ScenarioConfig& config);

/// Parses a JSON document. M, N and K are required; every other key falls back to
/// reference_config(). When irs_positions is omitted the first N reference sites are used.
ScenarioConfig load_config(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);
std::string dump_config(const ScenarioConfig& config);

/// Changes N, reusing existing sites and borrowing further ones from the reference list.
ScenarioConfig with_irs_count(ScenarioConfig config, int n);

/// Sets L_v x L_h = L with L_v the largest divisor of L not exceeding sqrt(L).
ScenarioConfig with_element_count(ScenarioConfig config, int L);

std::uint64_t config_hash(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Randomness

using RandomStream = std::mt19937_64;

enum class StreamId : std::uint64_t {
  placement = 1,
  path_gains = 2,
  angles = 3,
  baseline_phases = 4,
  init_phases = 5,
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of Monte Carlo drop `drop` under a master seed.
std::uint64_t drop_seed(std::uint64_t master, std::uint64_t drop);

/// Independent generator for one purpose inside a drop.
RandomStream make_stream(std::uint64_t seed, StreamId id);

// ---------------------------------------------------------------------------
// Geometry

struct Layout {
  std::vector<Point2> user_positions;
  std::vector<double> dist_bs_irs;                  // N
  std::vector<std::vector<double>> dist_irs_user;   // N x K
  std::vector<double> dist_bs_user;                 // K
  std::vector<double> aod_bs_irs;                   // azimuth at the mBS towards IRS n
  std::vector<double> aoa_bs_irs;                   // azimuth at IRS n towards the mBS
  std::vector<std::vector<double>> aod_irs_user;    // azimuth at IRS n towards user k
  std::vector<double> aod_bs_user;                  // azimuth at the mBS towards user k
};

/// Geometry for given user positions.
Layout make_layout(const ScenarioConfig& config, std::vector<Point2> users);

/// Draws K users uniformly over the configured disc.
Layout place_users(const ScenarioConfig& config, RandomStream& stream);

}  // namespace irsbf
