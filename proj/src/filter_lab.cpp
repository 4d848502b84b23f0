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

#include "polakit/filter_lab.hpp"

#include <cmath>
#include <numbers>

namespace polakit {

FilterSpec FilterSpec::normalized() const {
    if (!std::isfinite(theta)) fail(ErrorCode::Argument, "filter angle must be finite");
    if (!(q >= 0.0 && q <= 1.0 && r >= 0.0 && r <= 1.0))
        fail(ErrorCode::Argument, "filter transmittances must lie in [0, 1]");
    if (q < r) fail(ErrorCode::Argument, "filter major transmittance q must be >= r");
    return {fold_half_turn(theta), q, r};
}

std::array<Plane<double>, 4> filter_intensity(const StokesMap& stokes, const FilterSpec& spec) {
    const FilterSpec f = spec.normalized();
    std::array<Plane<double>, 4> out;
    for (Color c : kColors) {
        Plane<double> plane(stokes.width, stokes.height);
        for (std::size_t y = 0; y < stokes.height; ++y)
            for (std::size_t x = 0; x < stokes.width; ++x)
                plane(x, y) = std::max(0.0, simulate_measurement(stokes.at(c, x, y), f.theta, f.q, f.r));
        out[index(c)] = std::move(plane);
    }
    return out;
}

FilterResult simulate_filter(const StokesMap& stokes, const FilterSpec& spec) {
    FilterResult r;
    r.original = original_color(stokes);
    r.filtered = color_from_channels(filter_intensity(stokes, spec), stokes.layout,
                                     2.0 * stokes.full_scale(), stokes.provenance);
    return r;
}

FilterResult simulate_filter(const RawMosaic& mosaic, const FilterSpec& spec) {
    return simulate_filter(compute_stokes_map(mosaic), spec);
}

DisplayImage filtered_display(const FilterResult& result) {
    return color_display(result.filtered, kFilterDisplayGain);
}

StokesMap unpolarized_component(const StokesMap& stokes) {
    StokesMap out = make_stokes_map(stokes.width, stokes.height, stokes.layout, stokes.provenance);
    for (Color c : kColors)
        for (std::size_t y = 0; y < stokes.height; ++y)
            for (std::size_t x = 0; x < stokes.width; ++x) {
                const PolarParams p = polar_params(stokes.at(c, x, y));
                out.set(c, x, y, {(1.0 - p.dolp) * p.intensity, 0.0, 0.0});
            }
    return out;
}

SignalMosaic unpolarized_mosaic(const StokesMap& stokes) {
    const StokesMap u = unpolarized_component(stokes);
    const SensorLayout& layout = stokes.layout;
    const std::size_t width = 4 * stokes.width, height = 4 * stokes.height;
    std::vector<double> data(width * height);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const StokesPixel s = u.at(layout.color_at(x, y), x / 4, y / 4);
            data[y * width + x] = std::min(simulate_measurement(s, radians(layout.angle_at(x, y))),
                                           static_cast<double>(layout.full_scale()));
        }
    return SignalMosaic(width, height, layout, std::move(data), stokes.provenance);
}

FilterResult remove_specularity(const StokesMap& stokes) {
    const StokesMap u = unpolarized_component(stokes);
    std::array<Plane<double>, 4> s0;
    for (Color c : kColors) s0[index(c)] = u.channel(c).s0;
    FilterResult r;
    r.original = original_color(stokes);
    r.filtered = color_from_channels(s0, stokes.layout, 2.0 * stokes.full_scale(), stokes.provenance);
    return r;
}

FilterResult remove_specularity(const RawMosaic& mosaic) {
    return remove_specularity(compute_stokes_map(mosaic));
}

double extinction_angle(const PolarParams& params) {
    if (!params.valid) fail(ErrorCode::NoPolarization, "pixel is not polarized; no extinction angle");
    return fold_half_turn(params.aolp + std::numbers::pi / 2.0);
}

} // namespace polakit
