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
#include "polakit/viz.hpp"

#include <array>

namespace polakit {

// Virtual linear polarizer. theta in radians; q, r major/minor transmittances.
struct FilterSpec {
    double theta = 0.0;
    double q = 1.0;
    double r = 0.0;

    // Checks q >= r within [0, 1] and folds theta into [0, pi).
    FilterSpec normalized() const;
};

// Both images are demosaiced S0-scale counts (full_scale = 2 x pixel full-scale).
struct FilterResult {
    ColorImage original;
    ColorImage filtered;
};

// Per color (index(Color)) intensity behind the filter at (w/4, h/4).
std::array<Plane<double>, 4> filter_intensity(const StokesMap& stokes, const FilterSpec& spec);

FilterResult simulate_filter(const StokesMap& stokes, const FilterSpec& spec);
FilterResult simulate_filter(const RawMosaic& mosaic, const FilterSpec& spec);

// Display rendering of a filter result; the filtered image is doubled so an
// unpolarized scene keeps its brightness.
inline constexpr double kFilterDisplayGain = 2.0;
DisplayImage filtered_display(const FilterResult& result);

// Unpolarized component (1 - rho) * [S0, 0, 0] of every super-pixel.
StokesMap unpolarized_component(const StokesMap& stokes);

// Re-synthesizes the readings an ideal sensor would record for the
// unpolarized component.
SignalMosaic unpolarized_mosaic(const StokesMap& stokes);

FilterResult remove_specularity(const StokesMap& stokes);
FilterResult remove_specularity(const RawMosaic& mosaic);

// Polarizer orientation that nulls the polarized part: (aolp + pi/2) mod pi.
double extinction_angle(const PolarParams& params);

} // namespace polakit
