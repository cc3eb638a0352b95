/**
 * @file io.hpp
 * @brief JSON and CSV serialisation of paths, areas, trajectories and
 * reports, plus the content hash embedded in every report.
 *
 * Path layout: {"d", "times", "values", "areas", "kind", "seed"}, with areas
 * holding one d×d nested array per grid interval (empty when absent).
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "roughstep/analysis.hpp"
#include "roughstep/core.hpp"

namespace roughstep::io {

using json = nlohmann::json;

/// Finite doubles as numbers; ±inf and nan as the strings "inf", "-inf", "nan".
json number(double x);
double number_from_json(const json& j);

json vec_to_json(const Vec& v);
json mat_to_json(const Mat& m);
Vec vec_from_json(const json& j);
Mat mat_from_json(const json& j);

json path_to_json(const DriverPath& path, const AreaProcess* area = nullptr,
                  std::optional<std::uint64_t> seed = std::nullopt);

struct LoadedPath {
  DriverPath path;
  std::optional<AreaProcess> area;
  std::optional<std::uint64_t> seed;
};
LoadedPath path_from_json(const json& j);

/// Header `t,y_1,...,y_n`, one row per state, 17 significant digits.
std::string trajectory_csv(const Trajectory& traj);

json rate_to_json(const RateReport& rep);
json defect_to_json(const DefectReport& rep, bool include_rows = false);
json condition_to_json(const ConditionStat& st);
json criterion_to_json(const CriterionReport& rep);

/// SHA-1 of "blob <size>\0<bytes>", lowercase hex, as `git hash-object` prints.
std::string content_hash(const std::string& bytes);

/// Canonical text used for hashing and writing: two-space indent, sorted keys,
/// trailing newline.
std::string dump(const json& j);

void write_file(const std::string& path, const std::string& bytes);

}  // namespace roughstep::io
