#include "roughstep/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <openssl/sha.h>

namespace roughstep::io {

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ContractError("expected a number, got " + j.dump());
}

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

json mat_to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

Vec vec_from_json(const json& j) {
  if (!j.is_array()) throw ContractError("expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from_json(j[i]);
  return v;
}

Mat mat_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ContractError("expected a nested array");
  const std::size_t cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ContractError("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number_from_json(j[r][c]);
    }
  }
  return m;
}

json path_to_json(const DriverPath& path, const AreaProcess* area, std::optional<std::uint64_t> seed) {
  json out;
  out["d"] = path.dim();
  out["times"] = path.grid().times();
  json values = json::array();
  for (const auto& v : path.values()) values.push_back(vec_to_json(v));
  out["values"] = std::move(values);
  json areas = json::array();
  if (area) {
    for (const auto& a : area->fine_areas()) areas.push_back(mat_to_json(a));
  }
  out["areas"] = std::move(areas);
  out["kind"] = area ? json(to_string(area->kind())) : json(nullptr);
  out["seed"] = seed ? json(*seed) : json(nullptr);
  return out;
}

LoadedPath path_from_json(const json& j) {
  for (const char* key : {"d", "times", "values", "areas", "kind", "seed"}) {
    if (!j.contains(key)) throw ContractError(std::string("path json: missing key ") + key);
  }
  const auto d = j.at("d").get<std::size_t>();
  Partition grid(j.at("times").get<std::vector<double>>());
  std::vector<Vec> values;
  for (const auto& v : j.at("values")) {
    values.push_back(vec_from_json(v));
    if (static_cast<std::size_t>(values.back().size()) != d) throw ContractError("path json: value dimension");
  }
  DriverPath path(std::move(grid), std::move(values));
  std::optional<AreaProcess> area;
  if (!j.at("areas").empty()) {
    std::vector<Mat> fine;
    for (const auto& a : j.at("areas")) fine.push_back(mat_from_json(a));
    area.emplace(path, std::move(fine), area_kind_from_string(j.at("kind").get<std::string>()));
  }
  std::optional<std::uint64_t> seed;
  if (!j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
  return LoadedPath{std::move(path), std::move(area), seed};
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  const std::size_t n = traj.states.empty() ? 0 : static_cast<std::size_t>(traj.states.front().size());
  for (std::size_t i = 1; i <= n; ++i) out += ",y_" + std::to_string(i);
  out += '\n';
  char buf[32];
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.time(k));
    out += buf;
    for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", traj.states[k][i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

json rate_to_json(const RateReport& rep) {
  json errors = json::array();
  for (double e : rep.errors) errors.push_back(number(e));
  return json{{"K", rep.K},
              {"errors", std::move(errors)},
              {"slope", number(rep.slope)},
              {"intercept", number(rep.intercept)},
              {"dropped", rep.dropped},
              {"exact", rep.exact},
              {"oracle", rep.oracle},
              {"notes", rep.notes}};
}

json defect_to_json(const DefectReport& rep, bool include_rows) {
  json out{{"fitted_M", number(rep.fitted_M)},
           {"gamma", rep.gamma},
           {"p", rep.p},
           {"with_area", rep.with_area},
           {"pairs", rep.intervals.size()}};
  if (include_rows) {
    json rows = json::array();
    for (std::size_t q = 0; q < rep.intervals.size(); ++q) {
      rows.push_back(json{{"k", rep.intervals[q].first},
                          {"l", rep.intervals[q].second},
                          {"defect", vec_to_json(rep.defect[q])},
                          {"omega_pow", number(rep.omega_pow[q])}});
    }
    out["rows"] = std::move(rows);
  }
  return out;
}

json condition_to_json(const ConditionStat& st) {
  json per = json::array();
  for (double v : st.per_level) per.push_back(number(v));
  return json{{"alpha", st.alpha},
              {"beta", st.beta},
              {"value", number(st.value)},
              {"argmax", {{"level", st.level}, {"k", st.k}, {"m", st.m}, {"i", st.i}, {"j", st.j}}},
              {"levels", st.levels},
              {"per_level", std::move(per)},
              {"window_cap", st.window_cap}};
}

json criterion_to_json(const CriterionReport& rep) {
  json partial = json::array();
  for (double v : rep.partial) partial.push_back(number(v));
  return json{{"converges", rep.converges},
              {"tail_slope", number(rep.tail_slope)},
              {"edges", rep.edges},
              {"partial", std::move(partial)}};
}

std::string content_hash(const std::string& bytes) {
  const std::string blob = "blob " + std::to_string(bytes.size()) + std::string(1, '\0') + bytes;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : digest) {
    out += hex[c >> 4];
    out += hex[c & 15];
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << bytes;
  if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace roughstep::io
