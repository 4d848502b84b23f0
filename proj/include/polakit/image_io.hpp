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

#include "polakit/plane.hpp"
#include "polakit/sensor_model.hpp"
#include "polakit/viz.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace polakit {

inline constexpr std::string_view kSidecarSchema = "polakit.raw/1";

// Single-channel grayscale containers. 8-bit inputs are widened to 16 bits.
Plane<std::uint16_t> decode_png_gray(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png_gray16(const Plane<std::uint16_t>& plane);
Plane<std::uint16_t> decode_pgm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_pgm16(const Plane<std::uint16_t>& plane);
// Dispatches on the magic bytes (PNG signature or "P5").
Plane<std::uint16_t> decode_gray(const std::vector<std::uint8_t>& bytes);

// 8-bit RGB PNG of a display image.
std::vector<std::uint8_t> encode_png_rgb(const DisplayImage& image);
DisplayImage decode_png_rgb(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

// Mosaic plus the sidecar fields that are not part of the mosaic itself.
struct RawImageFile {
    RawMosaic mosaic;
    std::optional<std::string> calibration_fingerprint;
    nlohmann::json extra = nlohmann::json::object();  // unknown sidecar keys, preserved
};

// The sidecar of "x.png" is "x.png.json".
std::filesystem::path sidecar_path(const std::filesystem::path& image);

nlohmann::json sidecar_json(const RawImageFile& file);
// Validates the sidecar against a decoded container.
RawImageFile raw_from_parts(const Plane<std::uint16_t>& counts, const nlohmann::json& sidecar);

struct ReadOptions {
    // Missing sidecar: fall back to default_layout() instead of failing.
    bool assume_layout = false;
    std::function<void(const std::string&)> warn;
};

RawImageFile read_raw(const std::filesystem::path& path, const ReadOptions& options = {});
// Container type follows the extension (.pgm, otherwise PNG).
void write_raw(const std::filesystem::path& path, const RawImageFile& file);
void write_raw(const std::filesystem::path& path, const RawMosaic& mosaic);

} // namespace polakit
