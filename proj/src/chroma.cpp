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

#include "polakit/chroma.hpp"

#include <algorithm>
#include <cmath>

namespace polakit {

WhiteBalanceGains WhiteBalanceGains::manual(double r, double g, double b) {
    const double lo = std::min({r, g, b});
    if (!(std::isfinite(r) && std::isfinite(g) && std::isfinite(b)) || lo != 1.0)
        fail(ErrorCode::Argument, "white-balance gains must be >= 1 with the smallest equal to 1");
    return {r, g, b};
}

ColorImage demosaic_bilinear(const Plane<double>& bayer, const CfaPattern& cfa, double full_scale) {
    const std::size_t w = bayer.width(), h = bayer.height();
    if (w < 2 || h < 2 || w % 2 != 0 || h % 2 != 0)
        fail(ErrorCode::Structural, "Bayer plane dimensions must be even and at least 2x2");

    ColorImage img;
    img.width = w;
    img.height = h;
    img.full_scale = full_scale;
    for (auto& p : img.planes) p = Plane<double>(w, h);

    auto channel_at = [&](long x, long y) {
        return display_channel(cfa[static_cast<std::size_t>(y) % 2][static_cast<std::size_t>(x) % 2]);
    };
    static constexpr std::array<std::array<int, 2>, 4> kOrtho{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
    static constexpr std::array<std::array<int, 2>, 4> kDiag{{{-1, -1}, {1, -1}, {-1, 1}, {1, 1}}};

    for (long y = 0; y < static_cast<long>(h); ++y) {
        for (long x = 0; x < static_cast<long>(w); ++x) {
            const std::size_t own = channel_at(x, y);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                double value;
                if (ch == own) {
                    value = bayer(x, y);
                } else {
                    auto average = [&](const auto& offsets, std::size_t& n) {
                        double sum = 0.0;
                        n = 0;
                        for (const auto& [dx, dy] : offsets) {
                            const long nx = x + dx, ny = y + dy;
                            if (channel_at(nx + 2, ny + 2) != ch) continue;
                            if (nx < 0 || ny < 0 || nx >= static_cast<long>(w) ||
                                ny >= static_cast<long>(h))
                                continue;
                            sum += bayer(nx, ny);
                            ++n;
                        }
                        return n ? sum / static_cast<double>(n) : 0.0;
                    };
                    std::size_t n = 0;
                    value = average(kOrtho, n);
                    if (n == 0) value = average(kDiag, n);
                }
                img.planes[ch](x, y) = value;
            }
        }
    }
    return img;
}

ColorImage color_from_channels(const std::array<Plane<double>, 4>& per_color,
                               const SensorLayout& layout, double full_scale,
                               Provenance provenance) {
    ColorImage img = demosaic_bilinear(assemble_bayer(per_color, layout.cfa_pattern),
                                       layout.cfa_pattern, full_scale);
    img.provenance = provenance;
    return img;
}

std::array<ColorImage, 4> polarized_color_images(const RawMosaic& mosaic) {
    const auto stack = split_by_angle(mosaic);
    std::array<ColorImage, 4> out;
    for (PolAngle a : kAngles) {
        const Plane<std::uint16_t>& raw = stack.at(a);
        Plane<double> bayer(raw.width(), raw.height());
        std::transform(raw.data().begin(), raw.data().end(), bayer.data().begin(),
                       [](std::uint16_t v) { return static_cast<double>(v); });
        out[index(a)] = demosaic_bilinear(bayer, mosaic.layout().cfa_pattern,
                                          mosaic.layout().full_scale());
        out[index(a)].provenance = mosaic.provenance();
    }
    return out;
}

ColorImage original_color(const StokesMap& stokes) {
    std::array<Plane<double>, 4> s0;
    for (Color c : kColors) s0[index(c)] = stokes.channel(c).s0;
    return color_from_channels(s0, stokes.layout, 2.0 * stokes.full_scale(), stokes.provenance);
}

ColorImage original_color(const RawMosaic& mosaic) {
    return original_color(compute_stokes_map(mosaic));
}

WhiteBalanceGains auto_white_balance_gains(const ColorImage& image, double saturation_fraction) {
    if (!(saturation_fraction > 0.0 && saturation_fraction <= 1.0))
        fail(ErrorCode::Argument, "saturation fraction must lie in (0, 1]");
    const double limit = saturation_fraction * image.full_scale;
    const std::size_t n = image.width * image.height;

    // Global search; the first pixel wins ties.
    std::size_t best = n;
    double best_mean = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = image.planes[0].data()[i];
        const double g = image.planes[1].data()[i];
        const double b = image.planes[2].data()[i];
        if (r >= limit || g >= limit || b >= limit) continue;
        const double mean = (r + g + b) / 3.0;
        if (mean > best_mean) {
            best_mean = mean;
            best = i;
        }
    }
    if (best == n) fail(ErrorCode::NoWhiteFound, "every pixel is saturated; no white reference");

    const std::array<double, 3> white{image.planes[0].data()[best], image.planes[1].data()[best],
                                      image.planes[2].data()[best]};
    if (std::any_of(white.begin(), white.end(), [](double v) { return !(v > 0.0); }))
        fail(ErrorCode::DegenerateWhite, "white reference has an empty channel");

    const std::size_t ref = static_cast<std::size_t>(
        std::max_element(white.begin(), white.end()) - white.begin());
    std::array<double, 3> gains{};
    for (std::size_t ch = 0; ch < 3; ++ch) gains[ch] = ch == ref ? 1.0 : white[ref] / white[ch];
    return {gains[0], gains[1], gains[2]};
}

ColorImage apply_gains(const ColorImage& image, const WhiteBalanceGains& gains) {
    ColorImage out = image;
    const auto g = gains.as_array();
    for (std::size_t ch = 0; ch < 3; ++ch)
        for (double& v : out.planes[ch].data()) v = std::min(v * g[ch], image.full_scale);
    out.white_balanced = true;
    return out;
}

} // namespace polakit
