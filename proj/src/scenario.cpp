#include "irsbf/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace irsbf {

using nlohmann::json;

double distance(Point2 a, Point2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

double azimuth(Point2 from, Point2 to) { return std::atan2(to.y - from.y, to.x - from.x); }

double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double ScenarioConfig::p_max_mw() const { return dbm_to_linear(P_max_dbm); }
double ScenarioConfig::noise_mw() const { return dbm_to_linear(noise_dbm); }
double ScenarioConfig::sinr_min() const { return db_to_linear(sinr_min_db); }

const std::vector<Point2>& reference_irs_sites() {
  static const std::vector<Point2> sites{{60.0, 40.0},  {60.0, -40.0},  {100.0, 40.0},
                                         {100.0, -40.0}, {140.0, 40.0}, {140.0, -40.0}};
  return sites;
}

ScenarioConfig reference_config() {
  ScenarioConfig c;
  c.irs_positions = reference_irs_sites();
  return c;
}

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("invalid field '" + field + "': " + what);
}

bool finite(double v) { return std::isfinite(v); }

void validate_pathloss(const PathLossParams& p, const std::string& name) {
  require(finite(p.a) && finite(p.b), name, "a and b must be finite");
  require(finite(p.sigma_xi) && p.sigma_xi >= 0.0, name + ".sigma_xi", "must be >= 0");
}

}  // namespace

void validate(const ScenarioConfig& c) {
  require(c.M >= 1, "M", "must be >= 1");
  require(c.N >= 1, "N", "must be >= 1");
  require(c.K >= 1, "K", "must be >= 1");
  require(c.L_v >= 1, "L_v", "must be >= 1");
  require(c.L_h >= 1, "L_h", "must be >= 1");
  require(static_cast<int>(c.irs_positions.size()) == c.N, "irs_positions",
          "must list exactly N points");
  require(finite(c.user_region.radius) && c.user_region.radius > 0.0, "user_region.radius",
          "must be > 0");
  require(finite(c.P_max_dbm), "P_max_dbm", "must be finite");
  require(finite(c.sinr_min_db), "sinr_min_db", "must be finite");
  require(finite(c.noise_dbm) && c.noise_mw() > 0.0, "noise_dbm",
          "linear noise power must be > 0");
  require(c.n_paths_bs_irs >= 1, "n_paths_bs_irs", "must be >= 1");
  require(c.n_paths_irs_user >= 1, "n_paths_irs_user", "must be >= 1");
  require(c.n_paths_bs_user >= 1, "n_paths_bs_user", "must be >= 1");
  validate_pathloss(c.pathloss_los, "pathloss_los");
  validate_pathloss(c.pathloss_nlos, "pathloss_nlos");

  // Distances feed log10(d); co-located endpoints are rejected up front.
  for (std::size_t n = 0; n < c.irs_positions.size(); ++n) {
    require(distance(c.mbs_position, c.irs_positions[n]) > 0.0, "irs_positions",
            "IRS " + std::to_string(n) + " coincides with the mBS");
    require(distance(c.irs_positions[n], c.user_region.center) > c.user_region.radius,
            "irs_positions", "IRS " + std::to_string(n) + " lies inside the user region");
  }
  require(distance(c.mbs_position, c.user_region.center) > c.user_region.radius, "user_region",
          "the mBS lies inside the user region");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json point_json(Point2 p) { return json::array({p.x, p.y}); }

Point2 point_from(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("invalid field '" + field + "': expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json pathloss_json(const PathLossParams& p) {
  return json{{"a", p.a}, {"b", p.b}, {"sigma_xi", p.sigma_xi}};
}

PathLossParams pathloss_from(const json& j, PathLossParams fallback, const std::string& field) {
  if (!j.is_object()) throw ConfigError("invalid field '" + field + "': expected an object");
  PathLossParams p = fallback;
  if (j.contains("a")) p.a = j.at("a").get<double>();
  if (j.contains("b")) p.b = j.at("b").get<double>();
  if (j.contains("sigma_xi")) p.sigma_xi = j.at("sigma_xi").get<double>();
  return p;
}

template <typename T>
void read_opt(const json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid field '") + key + "': " + e.what());
  }
}

int read_required_int(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string("invalid field '") + key + "'");
  return v.get<int>();
}

}  // namespace

ScenarioConfig load_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("parse error: top level must be an object");

  ScenarioConfig c = reference_config();
  c.M = read_required_int(doc, "M");
  c.N = read_required_int(doc, "N");
  c.K = read_required_int(doc, "K");
  read_opt(doc, "L_v", c.L_v);
  read_opt(doc, "L_h", c.L_h);
  if (doc.contains("mbs_position")) c.mbs_position = point_from(doc["mbs_position"], "mbs_position");

  if (doc.contains("irs_positions")) {
    const auto& arr = doc["irs_positions"];
    if (!arr.is_array()) throw ConfigError("invalid field 'irs_positions': expected a list");
    c.irs_positions.clear();
    for (const auto& p : arr) c.irs_positions.push_back(point_from(p, "irs_positions"));
  } else {
    const auto& sites = reference_irs_sites();
    if (c.N < 1 || c.N > static_cast<int>(sites.size()))
      throw ConfigError("invalid field 'irs_positions': required when N exceeds the " +
                        std::to_string(sites.size()) + " reference sites");
    c.irs_positions.assign(sites.begin(), sites.begin() + c.N);
  }

  if (doc.contains("user_region")) {
    const auto& r = doc["user_region"];
    if (!r.is_object()) throw ConfigError("invalid field 'user_region': expected an object");
    if (r.contains("center")) c.user_region.center = point_from(r["center"], "user_region.center");
    if (r.contains("radius")) c.user_region.radius = r["radius"].get<double>();
  }
  read_opt(doc, "P_max_dbm", c.P_max_dbm);
  read_opt(doc, "sinr_min_db", c.sinr_min_db);
  read_opt(doc, "noise_dbm", c.noise_dbm);
  read_opt(doc, "n_paths_bs_irs", c.n_paths_bs_irs);
  read_opt(doc, "n_paths_irs_user", c.n_paths_irs_user);
  read_opt(doc, "n_paths_bs_user", c.n_paths_bs_user);
  if (doc.contains("pathloss_los"))
    c.pathloss_los = pathloss_from(doc["pathloss_los"], c.pathloss_los, "pathloss_los");
  if (doc.contains("pathloss_nlos"))
    c.pathloss_nlos = pathloss_from(doc["pathloss_nlos"], c.pathloss_nlos, "pathloss_nlos");
  read_opt(doc, "seed", c.seed);
  read_opt(doc, "include_direct_link", c.include_direct_link);

  validate(c);
  return c;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

std::string dump_config(const ScenarioConfig& c) {
  json irs = json::array();
  for (const auto& p : c.irs_positions) irs.push_back(point_json(p));
  json doc{
      {"M", c.M},
      {"N", c.N},
      {"K", c.K},
      {"L_v", c.L_v},
      {"L_h", c.L_h},
      {"mbs_position", point_json(c.mbs_position)},
      {"irs_positions", irs},
      {"user_region", {{"center", point_json(c.user_region.center)}, {"radius", c.user_region.radius}}},
      {"P_max_dbm", c.P_max_dbm},
      {"sinr_min_db", c.sinr_min_db},
      {"noise_dbm", c.noise_dbm},
      {"n_paths_bs_irs", c.n_paths_bs_irs},
      {"n_paths_irs_user", c.n_paths_irs_user},
      {"n_paths_bs_user", c.n_paths_bs_user},
      {"pathloss_los", pathloss_json(c.pathloss_los)},
      {"pathloss_nlos", pathloss_json(c.pathloss_nlos)},
      {"seed", c.seed},
      {"include_direct_link", c.include_direct_link},
  };
  return doc.dump(2);
}

ScenarioConfig with_irs_count(ScenarioConfig c, int n) {
  if (n < 1) throw ConfigError("invalid field 'N': must be >= 1");
  const auto& sites = reference_irs_sites();
  while (static_cast<int>(c.irs_positions.size()) < n) {
    const auto next = c.irs_positions.size();
    if (next >= sites.size())
      throw ConfigError("invalid field 'N': no reference site left for IRS " + std::to_string(next));
    c.irs_positions.push_back(sites[next]);
  }
  c.irs_positions.resize(n);
  c.N = n;
  return c;
}

ScenarioConfig with_element_count(ScenarioConfig c, int L) {
  if (L < 1) throw ConfigError("invalid field 'L': must be >= 1");
  int lv = static_cast<int>(std::sqrt(static_cast<double>(L)));
  while (lv > 1 && L % lv != 0) --lv;
  c.L_v = lv;
  c.L_h = L / lv;
  return c;
}

std::uint64_t config_hash(const ScenarioConfig& c) {
  // FNV-1a over the canonical dump.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : json::parse(dump_config(c)).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t drop_seed(std::uint64_t master, std::uint64_t drop) {
  return mix64(mix64(master) ^ (drop * 0xd1b54a32d192ed03ULL));
}

RandomStream make_stream(std::uint64_t seed, StreamId id) {
  const auto s = mix64(seed ^ mix64(static_cast<std::uint64_t>(id)));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return RandomStream(seq);
}

// ---------------------------------------------------------------------------

Layout make_layout(const ScenarioConfig& c, std::vector<Point2> users) {
  Layout out;
  out.user_positions = std::move(users);
  const auto K = out.user_positions.size();
  const auto N = c.irs_positions.size();
  out.dist_irs_user.assign(N, std::vector<double>(K));
  out.aod_irs_user.assign(N, std::vector<double>(K));
  for (std::size_t n = 0; n < N; ++n) {
    const auto irs = c.irs_positions[n];
    out.dist_bs_irs.push_back(distance(c.mbs_position, irs));
    out.aod_bs_irs.push_back(azimuth(c.mbs_position, irs));
    out.aoa_bs_irs.push_back(azimuth(irs, c.mbs_position));
    for (std::size_t k = 0; k < K; ++k) {
      out.dist_irs_user[n][k] = distance(irs, out.user_positions[k]);
      out.aod_irs_user[n][k] = azimuth(irs, out.user_positions[k]);
    }
  }
  for (const auto& u : out.user_positions) {
    out.dist_bs_user.push_back(distance(c.mbs_position, u));
    out.aod_bs_user.push_back(azimuth(c.mbs_position, u));
  }
  return out;
}

Layout place_users(const ScenarioConfig& c, RandomStream& stream) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point2> users;
  users.reserve(c.K);
  for (int k = 0; k < c.K; ++k) {
    const double r = c.user_region.radius * std::sqrt(unit(stream));
    const double phi = 2.0 * std::numbers::pi * unit(stream);
    users.push_back({c.user_region.center.x + r * std::cos(phi),
                     c.user_region.center.y + r * std::sin(phi)});
  }
  return make_layout(c, std::move(users));
}

}  // namespace irsbf
