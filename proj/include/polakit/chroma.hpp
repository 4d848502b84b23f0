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
#include "polakit/stokes.hpp"

#include <array>

namespace polakit {

// Three-plane RGB image in sensor counts. full_scale is the clipping level
// (pixel full-scale for polarized images, twice that for S0 images).
struct ColorImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::array<Plane<double>, 3> planes;
    double full_scale = 0.0;
    bool white_balanced = false;
    Provenance provenance = Provenance::Raw;

    const Plane<double>& red() const { return planes[0]; }
    const Plane<double>& green() const { return planes[1]; }
    const Plane<double>& blue() const { return planes[2]; }
};

// Manual gains must satisfy the same invariant as automatic ones:
// every gain >= 1 and the smallest equals 1.
struct WhiteBalanceGains {
    double r = 1.0;
    double g = 1.0;
    double b = 1.0;

    static WhiteBalanceGains manual(double r, double g, double b);
    std::array<double, 3> as_array() const { return {r, g, b}; }
};

inline constexpr double kDefaultSaturationFraction = 0.98;

// Bilinear demosaicing of a Bayer plane whose 2x2 period is tagged by cfa.
// Missing samples average the nearest same-color neighbors (orthogonal
// first, diagonal otherwise); out-of-frame neighbors are skipped, which
// replicates the nearest in-frame sample at the borders.
ColorImage demosaic_bilinear(const Plane<double>& bayer, const CfaPattern& cfa, double full_scale);

// One demosaiced image per orientation, indexed by index(PolAngle).
std::array<ColorImage, 4> polarized_color_images(const RawMosaic& mosaic);

ColorImage original_color(const RawMosaic& mosaic);
ColorImage original_color(const StokesMap& stokes);

// Demosaics one value per (color, super-pixel), e.g. a filtered intensity.
ColorImage color_from_channels(const std::array<Plane<double>, 4>& per_color,
                               const SensorLayout& layout, double full_scale,
                               Provenance provenance);

WhiteBalanceGains auto_white_balance_gains(const ColorImage& image,
                                           double saturation_fraction = kDefaultSaturationFraction);

ColorImage apply_gains(const ColorImage& image, const WhiteBalanceGains& gains);

} // namespace polakit
