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

#include "polakit/viz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace polakit {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint8_t unit_to_byte(double u) {
    if (!(u > 0.0)) return 0;
    if (u >= 1.0) return 255;
    return static_cast<std::uint8_t>(std::lround(u * 255.0));
}

double intensity_unit(double intensity, double full_scale) {
    // S0 reaches twice the pixel full-scale.
    return intensity / (2.0 * full_scale);
}

} // namespace

std::uint8_t to_display(double v, double lo, double hi) {
    if (!std::isfinite(v) || !(hi > lo)) return 0;
    return unit_to_byte((v - lo) / (hi - lo));
}

Rgb8 hsv_to_rgb(double hue_deg, double sat, double val) {
    sat = std::clamp(std::isfinite(sat) ? sat : 0.0, 0.0, 1.0);
    val = std::clamp(std::isfinite(val) ? val : 0.0, 0.0, 1.0);
    double h = std::fmod(std::isfinite(hue_deg) ? hue_deg : 0.0, 360.0);
    if (h < 0.0) h += 360.0;
    const double c = val * sat;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hp)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
    }
    const double m = val - c;
    return {unit_to_byte(r + m), unit_to_byte(g + m), unit_to_byte(b + m)};
}

int hsv_angle_hue(std::uint8_t x) {
    return static_cast<int>(std::lround(179.0 * x / 255.0));
}

Rgb8 hsv_angle_palette(std::uint8_t x) {
    // Hue is on the half-degree wheel (0..179), saturation and value full.
    return hsv_to_rgb(2.0 * hsv_angle_hue(x), 1.0, 1.0);
}

Rgb8 jet_palette(std::uint8_t x) {
    const double t = x / 255.0;
    auto ramp = [t](double center) { return std::clamp(1.5 - std::abs(4.0 * t - center), 0.0, 1.0); };
    return {unit_to_byte(ramp(3.0)), unit_to_byte(ramp(2.0)), unit_to_byte(ramp(1.0))};
}

DisplayImage gray_image(const Plane<double>& plane, double lo, double hi) {
    DisplayImage img(plane.width(), plane.height(), Palette::Gray);
    for (std::size_t y = 0; y < plane.height(); ++y)
        for (std::size_t x = 0; x < plane.width(); ++x) {
            const std::uint8_t v = to_display(plane(x, y), lo, hi);
            img.set(x, y, {v, v, v});
        }
    return img;
}

DisplayImage color_display(const ColorImage& image, double gain) {
    DisplayImage img(image.width, image.height, Palette::Rgb);
    const double hi = image.full_scale;
    for (std::size_t y = 0; y < image.height; ++y)
        for (std::size_t x = 0; x < image.width; ++x)
            img.set(x, y, {to_display(gain * image.planes[0](x, y), 0.0, hi),
                           to_display(gain * image.planes[1](x, y), 0.0, hi),
                           to_display(gain * image.planes[2](x, y), 0.0, hi)});
    return img;
}

ParamImages raw_param_images(const PolarParamsMap& params, Color channel) {
    const auto& ch = params.channel(channel);
    return {gray_image(ch.intensity, 0.0, 2.0 * params.full_scale()),
            gray_image(ch.aolp, 0.0, kPi),
            gray_image(ch.dolp, 0.0, 1.0)};
}

ParamImages colorize_params(const PolarParamsMap& params, Color channel) {
    const auto& ch = params.channel(channel);
    ParamImages out;
    out.intensity = gray_image(ch.intensity, 0.0, 2.0 * params.full_scale());
    out.aolp = DisplayImage(params.width, params.height, Palette::HsvAngle);
    out.dolp = DisplayImage(params.width, params.height, Palette::Jet);
    for (std::size_t y = 0; y < params.height; ++y)
        for (std::size_t x = 0; x < params.width; ++x) {
            out.aolp.set(x, y, hsv_angle_palette(to_display(ch.aolp(x, y), 0.0, kPi)));
            out.dolp.set(x, y, jet_palette(to_display(ch.dolp(x, y), 0.0, 1.0)));
        }
    return out;
}

DisplayImage fake_colors(const PolarParamsMap& params, Color channel) {
    const auto& ch = params.channel(channel);
    DisplayImage img(params.width, params.height, Palette::FakeColor);
    for (std::size_t y = 0; y < params.height; ++y)
        for (std::size_t x = 0; x < params.width; ++x) {
            const double hue = ch.aolp(x, y) / kPi * 360.0;
            img.set(x, y, hsv_to_rgb(hue, ch.dolp(x, y),
                                     intensity_unit(ch.intensity(x, y), params.full_scale())));
        }
    return img;
}

std::string_view name(ParamTag t) {
    switch (t) {
    case ParamTag::Intensity: return "intensity";
    case ParamTag::Dolp: return "dolp";
    case ParamTag::Aolp: return "aolp";
    }
    return "?";
}

ParamTag parse_param_tag(std::string_view text) {
    for (ParamTag t : {ParamTag::Intensity, ParamTag::Dolp, ParamTag::Aolp})
        if (text == name(t)) return t;
    fail(ErrorCode::Argument, "unknown parameter '" + std::string(text) + "'");
}

CircularStats circular_stats(std::span<const double> angles) {
    if (angles.empty()) return {};
    double c = 0.0, s = 0.0;
    for (double a : angles) {
        c += std::cos(2.0 * a);
        s += std::sin(2.0 * a);
    }
    c /= static_cast<double>(angles.size());
    s /= static_cast<double>(angles.size());
    const double r = std::min(1.0, std::hypot(c, s));
    CircularStats out;
    out.mean = fold_half_turn(0.5 * std::atan2(s, c));
    out.stddev = r > 0.0 ? 0.5 * std::sqrt(std::max(0.0, -2.0 * std::log(r)))
                      : std::numeric_limits<double>::infinity();
    return out;
}

HistogramSeries histogram(const PolarParamsMap& params, Color channel, ParamTag tag,
                          std::size_t bins) {
    if (bins < 2) fail(ErrorCode::Argument, "a histogram needs at least 2 bins");
    const auto& ch = params.channel(channel);

    std::vector<double> values;
    values.reserve(params.width * params.height);
    for (std::size_t y = 0; y < params.height; ++y)
        for (std::size_t x = 0; x < params.width; ++x) {
            switch (tag) {
            case ParamTag::Intensity: values.push_back(ch.intensity(x, y)); break;
            case ParamTag::Dolp:
                if (ch.intensity(x, y) > 0.0) values.push_back(ch.dolp(x, y));
                break;
            case ParamTag::Aolp:
                if (ch.valid(x, y)) values.push_back(ch.aolp(x, y));
                break;
            }
        }
    if (values.empty())
        fail(ErrorCode::EmptyHistogram, "no valid pixels for " + std::string(name(tag)) + " histogram");

    HistogramSeries h;
    h.parameter = tag;
    h.counts.assign(bins, 0);
    h.edges.resize(bins + 1);
    h.total = values.size();

    if (tag == ParamTag::Aolp) {
        const double width = kPi / static_cast<double>(bins);
        for (std::size_t k = 0; k <= bins; ++k) h.edges[k] = (static_cast<double>(k) - 0.5) * width;
        for (double v : values) {
            const auto k = static_cast<std::size_t>(std::floor(v / width + 0.5)) % bins;
            ++h.counts[k];
        }
        const CircularStats cs = circular_stats(values);
        h.mean = cs.mean;
        h.stddev = cs.stddev;
        return h;
    }

    const double lo = 0.0;
    const double hi = tag == ParamTag::Intensity ? 2.0 * params.full_scale() : 1.0;
    for (std::size_t k = 0; k <= bins; ++k)
        h.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    double sum = 0.0;
    for (double v : values) {
        const double u = (v - lo) / (hi - lo) * static_cast<double>(bins);
        const auto k = static_cast<std::size_t>(std::clamp(u, 0.0, static_cast<double>(bins - 1)));
        ++h.counts[k];
        sum += v;
    }
    h.mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - h.mean) * (v - h.mean);
    h.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return h;
}

HistogramSeries histogram(const PolarParamsMap& params, Color channel, ParamTag tag) {
    return histogram(params, channel, tag, tag == ParamTag::Aolp ? kDefaultAolpBins : kDefaultLinearBins);
}

RowProfile row_profile(const PolarParamsMap& params, std::size_t row, Color channel) {
    if (row >= params.height)
        fail(ErrorCode::Argument, "row " + std::to_string(row) + " outside the map (height " +
                                      std::to_string(params.height) + ")");
    const auto& ch = params.channel(channel);
    RowProfile p;
    p.row = row;
    p.channel = channel;
    for (std::size_t x = 0; x < params.width; ++x) {
        p.intensity.push_back(ch.intensity(x, row));
        p.dolp.push_back(ch.dolp(x, row));
        p.aolp.push_back(ch.aolp(x, row));
    }
    return p;
}

} // namespace polakit
