/**********
 *   Copyright 2026 The polakit Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
\**********/

#pragma once

#include "polakit/calib.hpp"
#include "polakit/viz.hpp"

#include <json.hpp>

#include <filesystem>

namespace polakit {

inline constexpr std::string_view kCalibrationSchema = "polakit.calibration/1";

// Writes `path` (JSON header) and `path` with ".bin" appended (little-endian
// float64 planes t, p, theta, d, residual_rms in row-major order).
void save_calibration(const CalibrationMaps& maps, const std::filesystem::path& path);
CalibrationMaps load_calibration(const std::filesystem::path& path);

nlohmann::json to_json(const CalibrationMetadata& meta);
CalibrationMetadata metadata_from_json(const nlohmann::json& j);

nlohmann::json to_json(const HistogramSeries& h);
HistogramSeries histogram_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RowProfile& p);
RowProfile row_profile_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ParameterStats& s);
ParameterStats parameter_stats_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CalibrationReport& r);
CalibrationReport report_from_json(const nlohmann::json& j);

} // namespace polakit
