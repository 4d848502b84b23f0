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

#include "polakit/chroma.hpp"
#include "polakit/stokes.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace polakit {

struct Rgb8 {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb8&) const = default;
};

enum class Palette : std::uint8_t { Gray, HsvAngle, Jet, FakeColor, Rgb };

// 8-bit display image, interleaved RGB.
struct DisplayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    Palette palette = Palette::Gray;
    std::vector<std::uint8_t> rgb;

    DisplayImage() = default;
    DisplayImage(std::size_t w, std::size_t h, Palette p) : width(w), height(h), palette(p), rgb(3 * w * h) {}

    Rgb8 at(std::size_t x, std::size_t y) const {
        const std::size_t i = 3 * (y * width + x);
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
    void set(std::size_t x, std::size_t y, Rgb8 c) {
        const std::size_t i = 3 * (y * width + x);
        rgb[i] = c.r;
        rgb[i + 1] = c.g;
        rgb[i + 2] = c.b;
    }
};

// (v - lo) / (hi - lo) scaled to [0, 255]; NaN maps to 0.
std::uint8_t to_display(double v, double lo, double hi);

// h in degrees, s and v in [0, 1].
Rgb8 hsv_to_rgb(double hue_deg, double sat, double val);

// Hue index on the 0..179 half-degree wheel: round(179 x / 255).
int hsv_angle_hue(std::uint8_t x);
Rgb8 hsv_angle_palette(std::uint8_t x);
// Classic four-segment piecewise-linear jet ramp.
Rgb8 jet_palette(std::uint8_t x);

DisplayImage gray_image(const Plane<double>& plane, double lo, double hi);
DisplayImage color_display(const ColorImage& image, double gain = 1.0);

struct ParamImages {
    DisplayImage intensity;
    DisplayImage aolp;
    DisplayImage dolp;
};

// Gray-scale I, rho, phi (the raw variant).
ParamImages raw_param_images(const PolarParamsMap& params, Color channel);
// I in gray, phi through the HSV angle palette, rho through jet.
ParamImages colorize_params(const PolarParamsMap& params, Color channel);

// Hue = AoLP, saturation = DoLP, value = normalized intensity.
DisplayImage fake_colors(const PolarParamsMap& params, Color channel);

enum class ParamTag : std::uint8_t { Intensity, Dolp, Aolp };
std::string_view name(ParamTag t);
ParamTag parse_param_tag(std::string_view text);

struct CircularStats {
    double mean = 0.0;  // radians, [0, pi)
    double stddev = 0.0;  // radians
};

// Statistics of axial data with period pi (angle doubling).
CircularStats circular_stats(std::span<const double> angles);

struct HistogramSeries {
    ParamTag parameter = ParamTag::Intensity;
    std::vector<double> edges;   // bins + 1 entries
    std::vector<std::size_t> counts;
    std::size_t total = 0;
    double mean = 0.0;
    double stddev = 0.0;         // circular for AoLP

    bool operator==(const HistogramSeries&) const = default;
};

inline constexpr std::size_t kDefaultLinearBins = 256;
inline constexpr std::size_t kDefaultAolpBins = 180;

// Intensity counts every pixel, DoLP every pixel with s0 > 0, AoLP only
// pixels flagged valid. AoLP bins are centered on k*pi/bins and wrap.
HistogramSeries histogram(const PolarParamsMap& params, Color channel, ParamTag tag,
                          std::size_t bins);
HistogramSeries histogram(const PolarParamsMap& params, Color channel, ParamTag tag);

struct RowProfile {
    std::size_t row = 0;
    Color channel = Color::R;
    std::vector<double> intensity;
    std::vector<double> dolp;
    std::vector<double> aolp;

    bool operator==(const RowProfile&) const = default;
};

RowProfile row_profile(const PolarParamsMap& params, std::size_t row, Color channel);

} // namespace polakit
