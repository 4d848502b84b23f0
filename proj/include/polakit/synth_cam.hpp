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
#include "polakit/sensor_model.hpp"
#include "polakit/stokes.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace polakit {

// Ground-truth light of one color channel: S0 in counts, DoLP, AoLP in radians.
struct LightSpec {
    double s0 = 0.0;
    double dolp = 0.0;
    double aolp = 0.0;

    bool operator==(const LightSpec&) const = default;
};

using ColorLights = std::array<LightSpec, 4>;  // indexed by index(Color)

ColorLights uniform_lights(const LightSpec& light);

enum class RegionKind : std::uint8_t { Rect, Gradient };
enum class Axis : std::uint8_t { X, Y };

// Rectangles are given in super-pixels, [x, x + w) x [y, y + h). Gradients
// cover the whole frame and interpolate linearly from `value` at the first
// column (row) to `end` at the last one.
struct RegionSpec {
    RegionKind kind = RegionKind::Rect;
    std::size_t x = 0, y = 0, w = 0, h = 0;
    Axis axis = Axis::X;
    ColorLights value{};
    ColorLights end{};

    bool operator==(const RegionSpec&) const = default;
};

// Scene on the super-pixel grid; later regions overwrite earlier ones and
// uncovered super-pixels are dark.
struct SceneSpec {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<RegionSpec> regions;
    // Radial S0 falloff: S0 * (1 - vignetting * (r / r_max)^2).
    double vignetting = 0.0;

    void validate() const;
    LightSpec light_at(std::size_t sx, std::size_t sy, Color c) const;

    bool operator==(const SceneSpec&) const = default;
};

SceneSpec uniform_scene(std::size_t width, std::size_t height, const LightSpec& light);

// Road band with strong horizontal glare, matte buildings, windshields with
// rho close to 1 at 45 degrees and a partially polarized sky gradient.
SceneSpec urban_demo_scene(std::size_t width, std::size_t height, double full_scale);

enum class PixelSourceKind : std::uint8_t { Ideal, Randomized, Explicit };

struct PixelSource {
    PixelSourceKind kind = PixelSourceKind::Ideal;
    double t_min = 0.45, t_max = 0.55;
    double p_min = 0.9, p_max = 1.0;
    double theta_jitter = 0.0;  // radians; uniform in [-jitter, +jitter]
    std::uint64_t seed = 0;
    std::vector<PixelModel> pixels;  // Explicit only

    bool operator==(const PixelSource&) const = default;
};

struct SensorSpec {
    std::size_t width = 0;   // pixels
    std::size_t height = 0;
    SensorLayout layout;
    PixelSource source;
    double dark = 0.0;          // counts added to every pixel
    double gain_falloff = 0.0;  // radial t falloff: t * (1 - f * (r / r_max)^2)
    double noise = 0.0;         // Gaussian sigma as a fraction of full-scale
    bool shot_noise = false;    // sigma scales with sqrt(I / full-scale)
    bool quantize = true;
    unsigned threads = 1;

    void validate() const;

    bool operator==(const SensorSpec&) const = default;
};

// Effective per-pixel models, including gain falloff and dark offset.
std::vector<PixelModel> realize_pixels(const SensorSpec& sensor);

struct Rendering {
    RawMosaic mosaic;      // clipped and rounded counts
    SignalMosaic signal;   // clipped counts, rounded only when sensor.quantize
    StokesMap truth;
    PolarParamsMap truth_params;
};

// Scene dimensions must be half the sensor's.
Rendering render(const SceneSpec& scene, const SensorSpec& sensor, std::uint64_t seed);

// One uniform rendering per angle. When record_angles is false the reference
// angles are left unknown.
FlatFieldSet flat_field_series(const SensorSpec& sensor, std::span<const double> aolps, double s0,
                               std::uint64_t seed, double dolp = 1.0, bool record_angles = true);

// Evenly spaced angles k * pi / count.
std::vector<double> even_angles(std::size_t count);

// Counter-based generator: the value depends only on (seed, stream, index).
double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
double gaussian_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

nlohmann::json to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const nlohmann::json& j);
// Explicit pixel sources refer to a calibration file relative to base_dir.
nlohmann::json to_json(const SensorSpec& sensor);
SensorSpec sensor_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

} // namespace polakit
