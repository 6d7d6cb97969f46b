#include "irsbf/serialization.hpp"

#include <cinttypes>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace irsbf {

using nlohmann::json;

namespace {

json cplx(cd z) { return json::array({z.real(), z.imag()}); }

cd cplx_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::runtime_error("complex value must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class Derived>
json matrix_json(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(cplx(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXcd matrix_from(const json& j) {
  if (!j.is_array()) throw std::runtime_error("matrix must be a list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) throw std::runtime_error("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = cplx_from(j[r][c]);
  }
  return m;
}

json vector_json(const Eigen::VectorXcd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(cplx(v[i]));
  return out;
}

Eigen::VectorXcd vector_from(const json& j) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx_from(j[i]);
  return v;
}

Eigen::RowVectorXcd row_from(const json& j) { return vector_from(j).transpose(); }

}  // namespace

std::string dump_channels(const ChannelSet& ch, const ScenarioConfig& config, std::uint64_t seed) {
  json j;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, config_hash(config));
  j["config_hash"] = hash;
  j["seed"] = seed;
  j["M"] = ch.M();
  j["L"] = ch.L();
  j["N"] = ch.N();
  j["K"] = ch.K();
  json direct = json::array();
  for (const auto& h : ch.h_direct) direct.push_back(vector_json(h.transpose()));
  j["h_direct"] = direct;
  json bs = json::array();
  for (const auto& H : ch.H_bs_irs) bs.push_back(matrix_json(H));
  j["H_bs_irs"] = bs;
  json iu = json::array();
  for (const auto& per_irs : ch.h_irs_user) {
    json row = json::array();
    for (const auto& h : per_irs) row.push_back(vector_json(h.transpose()));
    iu.push_back(row);
  }
  j["h_irs_user"] = iu;
  return j.dump();
}

ChannelDump load_channels(const std::string& text) {
  try {
    const json j = json::parse(text);
    ChannelDump d;
    d.config_hash = j.at("config_hash").get<std::string>();
    d.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& h : j.at("h_direct")) d.channels.h_direct.push_back(row_from(h));
    for (const auto& H : j.at("H_bs_irs")) d.channels.H_bs_irs.push_back(matrix_from(H));
    for (const auto& per_irs : j.at("h_irs_user")) {
      std::vector<Eigen::RowVectorXcd> row;
      for (const auto& h : per_irs) row.push_back(row_from(h));
      d.channels.h_irs_user.push_back(std::move(row));
    }
    return d;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed channel dump: ") + e.what());
  }
}

std::string dump_cone_problem(const ConeProblem& p) {
  json j;
  j["Q"] = matrix_json(p.Q);
  j["v"] = vector_json(p.v);
  j["offset"] = p.offset;
  json balls = json::array();
  for (const auto& b : p.balls) balls.push_back({{"selector", b.selector}, {"radius", b.radius}});
  j["balls"] = balls;
  j["box"] = p.box;
  json socs = json::array();
  for (const auto& s : p.socs) {
    socs.push_back({{"gain", s.gain},
                    {"lhs", vector_json(s.lhs.transpose())},
                    {"lhs_offset", cplx(s.lhs_offset)},
                    {"rhs", matrix_json(s.rhs)},
                    {"rhs_offset", vector_json(s.rhs_offset)},
                    {"sigma", s.sigma}});
  }
  j["socs"] = socs;
  return j.dump();
}

ConeProblem load_cone_problem(const std::string& text) {
  try {
    const json j = json::parse(text);
    ConeProblem p;
    p.Q = matrix_from(j.at("Q"));
    p.v = vector_from(j.at("v"));
    if (p.Q.size() == 0) p.Q = Eigen::MatrixXcd::Zero(p.v.size(), p.v.size());
    p.offset = j.at("offset").get<double>();
    for (const auto& b : j.at("balls")) p.balls.push_back({b.at("selector").get<std::vector<int>>(), b.at("radius").get<double>()});
    p.box = j.at("box").get<std::vector<bool>>();
    for (const auto& s : j.at("socs")) {
      SocConstraint c;
      c.gain = s.at("gain").get<double>();
      c.lhs = row_from(s.at("lhs"));
      c.lhs_offset = cplx_from(s.at("lhs_offset"));
      c.rhs = matrix_from(s.at("rhs"));
      if (c.rhs.size() == 0) c.rhs.resize(0, p.v.size());
      c.rhs_offset = vector_from(s.at("rhs_offset"));
      c.sigma = s.at("sigma").get<double>();
      p.socs.push_back(std::move(c));
    }
    check_problem(p);
    return p;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed cone problem: ") + e.what());
  }
}

}  // namespace irsbf
