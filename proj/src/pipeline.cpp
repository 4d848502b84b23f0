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

#include "polakit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace polakit {

namespace {

std::string angle_tag(PolAngle a) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%03d", degrees(a));
    return buf;
}

Plane<double> to_double(const Plane<std::uint16_t>& p) {
    Plane<double> out(p.width(), p.height());
    std::transform(p.data().begin(), p.data().end(), out.data().begin(),
                   [](std::uint16_t v) { return static_cast<double>(v); });
    return out;
}

Plane<double> absolute(const Plane<double>& p) {
    Plane<double> out = p;
    for (double& v : out.data()) v = std::abs(v);
    return out;
}

ColorImage balanced(const ColorImage& img, const std::optional<WhiteBalanceGains>& gains) {
    return gains ? apply_gains(img, *gains) : img;
}

} // namespace

std::string_view name(Mode m) {
    switch (m) {
    case Mode::RawSplit: return "raw-split";
    case Mode::PolColor: return "pol-color";
    case Mode::Original: return "original";
    case Mode::Stokes: return "stokes";
    case Mode::RawIrp: return "raw-irp";
    case Mode::Irp: return "irp";
    case Mode::Fake: return "fake";
    }
    return "?";
}

Mode parse_mode(std::string_view text) {
    for (Mode m : kModes)
        if (text == name(m)) return m;
    fail(ErrorCode::UnknownMode, "unknown mode '" + std::string(text) +
                                     "' (expected raw-split, pol-color, original, stokes, raw-irp, irp or fake)");
}

std::optional<WhiteBalanceGains> resolve_gains(const RawMosaic& mosaic, const ProcessOptions& options) {
    if (!options.white_balance) return std::nullopt;
    if (options.gains) return options.gains;
    const auto images = polarized_color_images(mosaic);
    return auto_white_balance_gains(images[index(options.wb_angle)], options.saturation_fraction);
}

std::vector<NamedImage> render_stokes_images(const StokesMap& stokes) {
    const double hi = 2.0 * stokes.full_scale();
    std::vector<NamedImage> out;
    for (int k = 0; k < 3; ++k)
        for (Color c : kColors) {
            const ChannelStokes& ch = stokes.channel(c);
            const Plane<double> plane = k == 0 ? ch.s0 : absolute(k == 1 ? ch.s1 : ch.s2);
            out.push_back({"stokes_s" + std::to_string(k) + "_" + std::string(name(c)), gray_image(plane, 0.0, hi)});
        }
    return out;
}

std::vector<NamedImage> render_param_images(const PolarParamsMap& params, bool colorized) {
    const std::string prefix = colorized ? "irp_" : "irp_raw_";
    std::vector<NamedImage> out;
    std::array<ParamImages, 4> images;
    for (Color c : kColors)
        images[index(c)] = colorized ? colorize_params(params, c) : raw_param_images(params, c);
    for (ParamTag tag : {ParamTag::Intensity, ParamTag::Dolp, ParamTag::Aolp})
        for (Color c : kColors) {
            const ParamImages& im = images[index(c)];
            const DisplayImage& d = tag == ParamTag::Intensity ? im.intensity : tag == ParamTag::Dolp ? im.dolp : im.aolp;
            out.push_back({prefix + std::string(name(tag)) + "_" + std::string(name(c)), d});
        }
    return out;
}

std::vector<NamedImage> render_fake_images(const PolarParamsMap& params) {
    std::vector<NamedImage> out;
    for (Color c : kColors) out.push_back({"fake_" + std::string(name(c)), fake_colors(params, c)});
    return out;
}

std::vector<NamedImage> render_mode(const RawMosaic& mosaic, Mode mode, const ProcessOptions& options) {
    std::vector<NamedImage> out;
    switch (mode) {
    case Mode::RawSplit: {
        const auto stack = split_by_angle(mosaic);
        for (PolAngle a : kAngles)
            out.push_back({"raw_" + angle_tag(a),
                           gray_image(to_double(stack.at(a)), 0.0, mosaic.layout().full_scale())});
        break;
    }
    case Mode::PolColor: {
        const auto gains = resolve_gains(mosaic, options);
        const auto images = polarized_color_images(mosaic);
        for (PolAngle a : kAngles)
            out.push_back({"polcolor_" + angle_tag(a), color_display(balanced(images[index(a)], gains))});
        break;
    }
    case Mode::Original:
        out.push_back({"original", color_display(balanced(original_color(mosaic), resolve_gains(mosaic, options)))});
        break;
    case Mode::Stokes: out = render_stokes_images(compute_stokes_map(mosaic)); break;
    case Mode::RawIrp:
    case Mode::Irp:
        out = render_param_images(compute_polar_params(compute_stokes_map(mosaic), options.dolp_threshold),
                                  mode == Mode::Irp);
        break;
    case Mode::Fake:
        out = render_fake_images(compute_polar_params(compute_stokes_map(mosaic), options.dolp_threshold));
        break;
    }
    return out;
}

std::vector<FloatPlaneOut> float_planes(const RawMosaic& mosaic, Mode mode, double dolp_threshold) {
    std::vector<FloatPlaneOut> out;
    if (mode == Mode::Stokes) {
        const StokesMap s = compute_stokes_map(mosaic);
        for (int k = 0; k < 3; ++k)
            for (Color c : kColors) {
                const ChannelStokes& ch = s.channel(c);
                out.push_back({"stokes_s" + std::to_string(k) + "_" + std::string(name(c)),
                               k == 0 ? ch.s0 : k == 1 ? ch.s1 : ch.s2});
            }
    } else if (mode == Mode::RawIrp || mode == Mode::Irp) {
        const PolarParamsMap p = compute_polar_params(compute_stokes_map(mosaic), dolp_threshold);
        for (ParamTag tag : {ParamTag::Intensity, ParamTag::Dolp, ParamTag::Aolp})
            for (Color c : kColors) {
                const ChannelParams& ch = p.channel(c);
                out.push_back({"param_" + std::string(name(tag)) + "_" + std::string(name(c)),
                               tag == ParamTag::Intensity ? ch.intensity : tag == ParamTag::Dolp ? ch.dolp : ch.aolp});
            }
    }
    return out;
}

} // namespace polakit
