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

#include <Eigen/Core>

#include <array>
#include <span>

namespace polakit {

// Linear Stokes vector; the circular component is not modeled.
struct StokesPixel {
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;

    bool operator==(const StokesPixel&) const = default;
};

struct PolarParams {
    double intensity = 0.0;
    double dolp = 0.0;      // clamped to [0, 1]
    double aolp = 0.0;      // radians, [0, pi); 0 when !valid
    bool valid = false;     // dolp >= validity threshold
    bool overflow = false;  // unclamped dolp exceeded 1
};

inline constexpr double kDefaultDolpThreshold = 0.01;

using Mueller3 = Eigen::Matrix3d;
using Mat43 = Eigen::Matrix<double, 4, 3>;
using Mat34 = Eigen::Matrix<double, 3, 4>;

// Linear polarizer with major/minor transmittances q >= r at orientation theta.
Mueller3 polarizer_mueller(double theta, double q, double r);

StokesPixel apply_mueller(const Mueller3& m, const StokesPixel& s);

// First row of the polarizer Mueller matrix applied to s, plus the dark offset.
double simulate_measurement(const StokesPixel& s, double theta, double q = 1.0, double r = 0.0,
                            double d = 0.0);

// Stacked measurement rows and their left pseudo-inverse.
class PixelMatrix {
public:
    // Ideal rows 1/2 [1, cos 2theta, sin 2theta].
    static PixelMatrix from_angles(std::span<const double, 4> angles);
    // Arbitrary rows, e.g. a fitted per-pixel model.
    static PixelMatrix from_rows(const Mat43& rows);

    const Mat43& matrix() const { return a_; }
    const Mat34& pseudo_inverse() const { return pinv_; }

    StokesPixel solve(const std::array<double, 4>& intensities) const;

private:
    PixelMatrix(const Mat43& a, const Mat34& pinv) : a_(a), pinv_(pinv) {}
    Mat43 a_;
    Mat34 pinv_;
};

// Cached matrix for the nominal {0, 45, 90, 135} degree set.
const PixelMatrix& ideal_pixel_matrix();

// Closed-form pseudo-inverse solution for the nominal angle set.
inline StokesPixel stokes_from_intensities(double i0, double i45, double i90, double i135) {
    return {(i0 + i45 + i90 + i135) / 2.0, i0 - i90, i45 - i135};
}

PolarParams polar_params(const StokesPixel& s, double dolp_threshold = kDefaultDolpThreshold);
StokesPixel stokes_from_params(const PolarParams& p);

// Fold any angle into [0, pi).
double fold_half_turn(double angle);

struct ChannelStokes {
    Plane<double> s0, s1, s2;
};

// Per color channel (indexed by index(Color)) Stokes planes at (w/4, h/4).
struct StokesMap {
    std::size_t width = 0;
    std::size_t height = 0;
    SensorLayout layout;
    Provenance provenance = Provenance::Raw;
    std::array<ChannelStokes, 4> channels;

    const ChannelStokes& channel(Color c) const { return channels[index(c)]; }
    ChannelStokes& channel(Color c) { return channels[index(c)]; }
    StokesPixel at(Color c, std::size_t x, std::size_t y) const {
        const auto& ch = channel(c);
        return {ch.s0(x, y), ch.s1(x, y), ch.s2(x, y)};
    }
    void set(Color c, std::size_t x, std::size_t y, const StokesPixel& s) {
        auto& ch = channel(c);
        ch.s0(x, y) = s.s0;
        ch.s1(x, y) = s.s1;
        ch.s2(x, y) = s.s2;
    }
    double full_scale() const { return layout.full_scale(); }
};

// width and height are the map dimensions, i.e. a quarter of the mosaic.
StokesMap make_stokes_map(std::size_t width, std::size_t height, const SensorLayout& layout,
                          Provenance provenance = Provenance::Raw);

struct ChannelParams {
    Plane<double> intensity, dolp, aolp;
    Plane<std::uint8_t> valid;
    Plane<std::uint8_t> overflow;
};

struct PolarParamsMap {
    std::size_t width = 0;
    std::size_t height = 0;
    SensorLayout layout;
    Provenance provenance = Provenance::Raw;
    double dolp_threshold = kDefaultDolpThreshold;
    std::array<ChannelParams, 4> channels;
    // Pixels with s0 <= 0 but nonzero linear components; physically
    // impossible, reachable through noise.
    std::size_t inconsistent_pixels = 0;

    const ChannelParams& channel(Color c) const { return channels[index(c)]; }
    ChannelParams& channel(Color c) { return channels[index(c)]; }
    PolarParams at(Color c, std::size_t x, std::size_t y) const;
    double full_scale() const { return layout.full_scale(); }
};

StokesMap compute_stokes_map(const RawMosaic& mosaic);
StokesMap compute_stokes_map(const SignalMosaic& mosaic);

PolarParamsMap compute_polar_params(const StokesMap& stokes,
                                    double dolp_threshold = kDefaultDolpThreshold);

} // namespace polakit
