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

#include "polakit/stokes.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace polakit {

namespace {

constexpr double kPi = std::numbers::pi;

void check_transmittance(double q, double r) {
    if (!(q >= 0.0 && q <= 1.0 && r >= 0.0 && r <= 1.0))
        fail(ErrorCode::Argument, "transmittances must lie in [0, 1]");
    if (q < r) fail(ErrorCode::Argument, "major transmittance q must not be below minor r");
}

template <typename T>
StokesMap stokes_map_impl(const Mosaic<T>& mosaic) {
    const auto& layout = mosaic.layout();
    const std::size_t w = mosaic.width() / 4, h = mosaic.height() / 4;
    StokesMap map = make_stokes_map(w, h, layout, mosaic.provenance());
    std::array<Offset, 4> pol{};
    for (PolAngle a : kAngles) pol[index(a)] = layout.offset_of(a);

    for (Color c : kColors) {
        const Offset co = layout.offset_of(c);
        auto& ch = map.channel(c);
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const std::size_t bx = 4 * x + 2 * co.x, by = 4 * y + 2 * co.y;
                auto sample = [&](PolAngle a) {
                    const Offset o = pol[index(a)];
                    return static_cast<double>(mosaic(bx + o.x, by + o.y));
                };
                const StokesPixel s =
                    stokes_from_intensities(sample(PolAngle::Deg0), sample(PolAngle::Deg45),
                                            sample(PolAngle::Deg90), sample(PolAngle::Deg135));
                ch.s0(x, y) = s.s0;
                ch.s1(x, y) = s.s1;
                ch.s2(x, y) = s.s2;
            }
        }
    }
    return map;
}

} // namespace

Mueller3 polarizer_mueller(double theta, double q, double r) {
    check_transmittance(q, r);
    const double c = std::cos(2.0 * theta), s = std::sin(2.0 * theta);
    const double sum = q + r, diff = q - r, geo = 2.0 * std::sqrt(q * r);
    Mueller3 m;
    m << sum, diff * c, diff * s,
         diff * c, sum * c * c + geo * s * s, (sum - geo) * s * c,
         diff * s, (sum - geo) * s * c, sum * s * s + geo * c * c;
    return 0.5 * m;
}

StokesPixel apply_mueller(const Mueller3& m, const StokesPixel& s) {
    const Eigen::Vector3d out = m * Eigen::Vector3d(s.s0, s.s1, s.s2);
    return {out[0], out[1], out[2]};
}

double simulate_measurement(const StokesPixel& s, double theta, double q, double r, double d) {
    check_transmittance(q, r);
    if (d < 0.0) fail(ErrorCode::Argument, "dark offset must be non-negative");
    const double c = std::cos(2.0 * theta), sn = std::sin(2.0 * theta);
    return 0.5 * ((q + r) * s.s0 + (q - r) * (c * s.s1 + sn * s.s2)) + d;
}

PixelMatrix PixelMatrix::from_angles(std::span<const double, 4> angles) {
    Mat43 a;
    for (int k = 0; k < 4; ++k)
        a.row(k) << 0.5, 0.5 * std::cos(2.0 * angles[k]), 0.5 * std::sin(2.0 * angles[k]);
    return from_rows(a);
}

PixelMatrix PixelMatrix::from_rows(const Mat43& rows) {
    if (!rows.allFinite()) fail(ErrorCode::DegenerateConfiguration, "pixel matrix is not finite");
    Eigen::JacobiSVD<Mat43> svd(rows, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv[0] <= 0.0 || sv[2] / sv[0] < 1e-10)
        fail(ErrorCode::DegenerateConfiguration, "pixel matrix is rank deficient");
    Eigen::Matrix3d inv_sigma = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) inv_sigma(i, i) = 1.0 / sv[i];
    const Mat34 pinv = svd.matrixV() * inv_sigma * svd.matrixU().leftCols<3>().transpose();
    return PixelMatrix(rows, pinv);
}

StokesPixel PixelMatrix::solve(const std::array<double, 4>& intensities) const {
    const Eigen::Vector3d s = pinv_ * Eigen::Vector4d(intensities[0], intensities[1],
                                                      intensities[2], intensities[3]);
    return {s[0], s[1], s[2]};
}

const PixelMatrix& ideal_pixel_matrix() {
    static const PixelMatrix m = [] {
        const std::array<double, 4> angles{radians(PolAngle::Deg0), radians(PolAngle::Deg45),
                                           radians(PolAngle::Deg90), radians(PolAngle::Deg135)};
        return PixelMatrix::from_angles(angles);
    }();
    return m;
}

double fold_half_turn(double angle) {
    double a = std::fmod(angle, kPi);
    if (a < 0.0) a += kPi;
    if (a >= kPi) a -= kPi;
    return a;
}

PolarParams polar_params(const StokesPixel& s, double dolp_threshold) {
    PolarParams p;
    if (!(s.s0 > 0.0)) return p;
    p.intensity = s.s0;
    const double rho = std::hypot(s.s1, s.s2) / s.s0;
    p.overflow = rho > 1.0;
    p.dolp = std::min(rho, 1.0);
    p.valid = p.dolp >= dolp_threshold;
    p.aolp = p.valid ? fold_half_turn(0.5 * std::atan2(s.s2, s.s1)) : 0.0;
    return p;
}

StokesPixel stokes_from_params(const PolarParams& p) {
    if (!(p.dolp >= 0.0 && p.dolp <= 1.0)) fail(ErrorCode::Argument, "DoLP must lie in [0, 1]");
    return {p.intensity, p.intensity * p.dolp * std::cos(2.0 * p.aolp),
            p.intensity * p.dolp * std::sin(2.0 * p.aolp)};
}

StokesMap make_stokes_map(std::size_t width, std::size_t height, const SensorLayout& layout,
                          Provenance provenance) {
    StokesMap map;
    map.width = width;
    map.height = height;
    map.layout = layout;
    map.provenance = provenance;
    for (auto& ch : map.channels) {
        ch.s0 = Plane<double>(width, height);
        ch.s1 = Plane<double>(width, height);
        ch.s2 = Plane<double>(width, height);
    }
    return map;
}

PolarParams PolarParamsMap::at(Color c, std::size_t x, std::size_t y) const {
    const auto& ch = channel(c);
    return {ch.intensity(x, y), ch.dolp(x, y), ch.aolp(x, y), ch.valid(x, y) != 0,
            ch.overflow(x, y) != 0};
}

StokesMap compute_stokes_map(const RawMosaic& mosaic) { return stokes_map_impl(mosaic); }
StokesMap compute_stokes_map(const SignalMosaic& mosaic) { return stokes_map_impl(mosaic); }

PolarParamsMap compute_polar_params(const StokesMap& stokes, double dolp_threshold) {
    PolarParamsMap out;
    out.width = stokes.width;
    out.height = stokes.height;
    out.layout = stokes.layout;
    out.provenance = stokes.provenance;
    out.dolp_threshold = dolp_threshold;
    for (Color c : kColors) {
        auto& ch = out.channel(c);
        ch.intensity = Plane<double>(stokes.width, stokes.height);
        ch.dolp = Plane<double>(stokes.width, stokes.height);
        ch.aolp = Plane<double>(stokes.width, stokes.height);
        ch.valid = Plane<std::uint8_t>(stokes.width, stokes.height);
        ch.overflow = Plane<std::uint8_t>(stokes.width, stokes.height);
        for (std::size_t y = 0; y < stokes.height; ++y) {
            for (std::size_t x = 0; x < stokes.width; ++x) {
                const StokesPixel s = stokes.at(c, x, y);
                const PolarParams p = polar_params(s, dolp_threshold);
                if (!(s.s0 > 0.0) && (s.s1 != 0.0 || s.s2 != 0.0)) ++out.inconsistent_pixels;
                ch.intensity(x, y) = p.intensity;
                ch.dolp(x, y) = p.dolp;
                ch.aolp(x, y) = p.aolp;
                ch.valid(x, y) = p.valid;
                ch.overflow(x, y) = p.overflow;
            }
        }
    }
    return out;
}

} // namespace polakit
