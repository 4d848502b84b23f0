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

#include "polakit/calib.hpp"

#include "polakit/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace polakit {

namespace {

constexpr double kPi = std::numbers::pi;

// Angle difference folded into [-pi/2, pi/2].
double axial_difference(double a, double b) { return std::remainder(a - b, kPi); }

void check_compatible(std::size_t width, std::size_t height, const SensorLayout& layout,
                      const CalibrationMaps& maps) {
    if (width != maps.width() || height != maps.height())
        fail(ErrorCode::Structural, "mosaic " + std::to_string(width) + "x" + std::to_string(height) +
                                        " does not match calibration " + maps.fingerprint());
    if (!(layout == maps.layout()))
        fail(ErrorCode::FingerprintMismatch, "mosaic layout " + layout.to_string() +
                                                 " does not match calibration " + maps.fingerprint());
}

struct PixelFit {
    std::vector<PixelModel> pixels;
    std::vector<double> residual;
    std::array<double, 4> s0_reference{};
    std::size_t dead = 0;
};

PixelFit fit_pixels(const FlatFieldSet& set, const std::vector<double>& angles,
                    const std::vector<double>& dark, const FitOptions& options) {
    const RawMosaic& first = set.frames.front().mosaic;
    const SensorLayout& layout = first.layout();
    const std::size_t width = first.width(), height = first.height(), n = width * height;
    const auto frames = static_cast<Eigen::Index>(set.frames.size());

    Eigen::MatrixXd design(frames, 3);
    for (Eigen::Index j = 0; j < frames; ++j)
        design.row(j) << 1.0, std::cos(2.0 * angles[j]), std::sin(2.0 * angles[j]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv.size() < 3 || sv[2] / sv[0] < 1e-9)
        fail(ErrorCode::Configuration, "reference angles do not determine the pixel model");
    const Eigen::MatrixXd pinv =
        svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();

    std::vector<Eigen::Vector3d> coef(n);
    PixelFit fit;
    fit.residual.assign(n, 0.0);
    parallel_for(height, options.threads, [&](std::size_t y0, std::size_t y1) {
        Eigen::VectorXd samples(frames);
        for (std::size_t i = y0 * width; i < y1 * width; ++i) {
            for (Eigen::Index j = 0; j < frames; ++j)
                samples[j] = static_cast<double>(set.frames[j].mosaic.data()[i]) - dark[i];
            coef[i] = pinv * samples;
            fit.residual[i] = std::sqrt((samples - design * coef[i]).squaredNorm() /
                                        static_cast<double>(frames));
        }
    });

    // Absolute scale is unobservable: normalize so each color has mean t = 0.5.
    std::array<double, 4> sum{};
    std::array<std::size_t, 4> count{};
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const double a = coef[y * width + x][0];
            if (!(a > 0.0) || !std::isfinite(a)) continue;
            const std::size_t c = index(layout.color_at(x, y));
            sum[c] += a;
            ++count[c];
        }
    for (std::size_t c = 0; c < 4; ++c) {
        if (count[c] == 0) fail(ErrorCode::Configuration, "flat fields carry no signal for color " +
                                                              std::string(name(kColors[c])));
        fit.s0_reference[c] = 2.0 * sum[c] / static_cast<double>(count[c]);
    }

    fit.pixels.resize(n);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            const std::size_t i = y * width + x;
            const double nominal = radians(layout.angle_at(x, y));
            const double a = coef[i][0], b = coef[i][1], c = coef[i][2];
            PixelModel m;
            m.d = dark[i];
            m.t = a / fit.s0_reference[index(layout.color_at(x, y))];
            m.p = std::hypot(b, c) / (a * set.reference_dolp);
            m.theta = nominal + axial_difference(0.5 * std::atan2(c, b), nominal);
            const bool dead = !(a > 0.0) || !std::isfinite(m.t) || !std::isfinite(m.p) ||
                              !std::isfinite(m.theta) || m.p < options.min_effectiveness ||
                              std::abs(m.theta - nominal) > options.theta_sanity;
            if (dead) {
                m = ideal_pixel(layout.angle_at(x, y), dark[i]);
                ++fit.dead;
            }
            m.p = std::min(m.p, 1.0);
            fit.pixels[i] = m;
        }
    }
    return fit;
}

// Frame Stokes estimate with the nominal pixel matrix, averaged over the sensor.
double frame_angle_nominal(const RawMosaic& m) {
    const StokesMap s = compute_stokes_map(m);
    double s1 = 0.0, s2 = 0.0;
    for (Color c : kColors) {
        for (double v : s.channel(c).s1.data()) s1 += v;
        for (double v : s.channel(c).s2.data()) s2 += v;
    }
    return fold_half_turn(0.5 * std::atan2(s2, s1));
}

// Least-squares Stokes of one frame given per-pixel models, per color; the
// frame angle is the axial mean of the per-color angles.
double frame_angle_given_pixels(const RawMosaic& m, const std::vector<PixelModel>& pixels) {
    const SensorLayout& layout = m.layout();
    std::array<Eigen::Matrix3d, 4> normal;
    std::array<Eigen::Vector3d, 4> rhs;
    for (std::size_t c = 0; c < 4; ++c) {
        normal[c].setZero();
        rhs[c].setZero();
    }
    for (std::size_t y = 0; y < m.height(); ++y)
        for (std::size_t x = 0; x < m.width(); ++x) {
            const PixelModel& pm = pixels[y * m.width() + x];
            const Eigen::Vector3d row(pm.t, pm.t * pm.p * std::cos(2.0 * pm.theta),
                                      pm.t * pm.p * std::sin(2.0 * pm.theta));
            const std::size_t c = index(layout.color_at(x, y));
            normal[c] += row * row.transpose();
            rhs[c] += row * (static_cast<double>(m(x, y)) - pm.d);
        }
    double cs = 0.0, sn = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        const Eigen::Vector3d s = normal[c].ldlt().solve(rhs[c]);
        cs += s[1];
        sn += s[2];
    }
    return fold_half_turn(0.5 * std::atan2(sn, cs));
}

} // namespace

PixelModel ideal_pixel(PolAngle nominal, double dark) {
    return {0.5, 1.0, radians(nominal), dark};
}

std::string sensor_fingerprint(std::size_t width, std::size_t height, const SensorLayout& layout) {
    return std::to_string(width) + "x" + std::to_string(height) + ";" + layout.to_string();
}

CalibrationMaps::CalibrationMaps(std::size_t width, std::size_t height, SensorLayout layout,
                                 std::vector<PixelModel> pixels, CalibrationMetadata metadata,
                                 std::vector<double> residual_rms)
    : width_(width), height_(height), layout_(layout), pixels_(std::move(pixels)),
      metadata_(std::move(metadata)), residual_(std::move(residual_rms)) {
    layout_.validate();
    if (width_ == 0 || height_ == 0 || width_ % 4 != 0 || height_ % 4 != 0)
        fail(ErrorCode::Structural, "calibration dimensions must be multiples of 4");
    if (pixels_.size() != width_ * height_)
        fail(ErrorCode::Structural, "calibration holds the wrong number of pixel models");
    if (residual_.empty()) residual_.assign(width_ * height_, 0.0);
    if (residual_.size() != width_ * height_)
        fail(ErrorCode::Structural, "calibration residual plane has the wrong size");
    for (const PixelModel& m : pixels_)
        if (!(m.t > 0.0) || !(m.p > 0.0 && m.p <= 1.0) || !std::isfinite(m.theta) || !(m.d >= 0.0))
            fail(ErrorCode::Configuration, "pixel model outside physical bounds");

    const std::size_t sw = width_ / 2, sh = height_ / 2;
    fitted_.resize(sw * sh);
    ops_.resize(sw * sh);
    std::array<Offset, 4> offsets{};
    for (PolAngle a : kAngles) offsets[index(a)] = layout_.offset_of(a);
    for (std::size_t sy = 0; sy < sh; ++sy)
        for (std::size_t sx = 0; sx < sw; ++sx) {
            Mat43 rows;
            for (PolAngle a : kAngles) {
                const Offset o = offsets[index(a)];
                const PixelModel& m = pixel(2 * sx + o.x, 2 * sy + o.y);
                rows.row(static_cast<Eigen::Index>(index(a)))
                    << m.t, m.t * m.p * std::cos(2.0 * m.theta), m.t * m.p * std::sin(2.0 * m.theta);
            }
            const PixelMatrix pm = PixelMatrix::from_rows(rows);
            fitted_[sy * sw + sx] = pm.matrix();
            ops_[sy * sw + sx] = pm.pseudo_inverse();
        }
}

CalibrationMaps CalibrationMaps::ideal(std::size_t width, std::size_t height,
                                       const SensorLayout& layout) {
    std::vector<PixelModel> pixels(width * height);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) pixels[y * width + x] = ideal_pixel(layout.angle_at(x, y));
    CalibrationMetadata meta;
    meta.s0_reference.fill(0.0);
    return CalibrationMaps(width, height, layout, std::move(pixels), meta);
}

CalibrationMaps fit_calibration(const FlatFieldSet& set, const FitOptions& options) {
    if (set.frames.size() < 3)
        fail(ErrorCode::Configuration, "calibration needs at least 3 flat-field acquisitions");
    if (!(set.reference_dolp > 0.0 && set.reference_dolp <= 1.0))
        fail(ErrorCode::Configuration, "reference DoLP must lie in (0, 1]");
    const RawMosaic& first = set.frames.front().mosaic;
    for (const auto& f : set.frames)
        if (f.mosaic.width() != first.width() || f.mosaic.height() != first.height() ||
            !(f.mosaic.layout() == first.layout()))
            fail(ErrorCode::Structural, "flat-field frames differ in size or layout");

    const std::size_t n = first.width() * first.height();
    std::vector<double> dark(n, 0.0);
    if (set.dark) {
        if (set.dark->width() != first.width() || set.dark->height() != first.height())
            fail(ErrorCode::Structural, "dark frame does not match the flat fields");
        for (std::size_t i = 0; i < n; ++i) dark[i] = set.dark->data()[i];
    }

    const std::size_t known = static_cast<std::size_t>(std::count_if(
        set.frames.begin(), set.frames.end(), [](const auto& f) { return f.reference_aolp.has_value(); }));
    if (known != 0 && known != set.frames.size())
        fail(ErrorCode::Configuration, "reference angles must be given for all frames or for none");
    const bool estimate = known == 0;

    std::vector<double> angles(set.frames.size());
    for (std::size_t j = 0; j < set.frames.size(); ++j)
        angles[j] = estimate ? frame_angle_nominal(set.frames[j].mosaic)
                             : fold_half_turn(*set.frames[j].reference_aolp);

    std::vector<double> distinct;
    for (double a : angles)
        if (std::none_of(distinct.begin(), distinct.end(),
                         [a](double b) { return std::abs(axial_difference(a, b)) < 1e-9; }))
            distinct.push_back(a);
    if (distinct.size() < 3)
        fail(ErrorCode::Configuration, "calibration needs at least 3 distinct reference angles, got " +
                                           std::to_string(distinct.size()));

    PixelFit fit = fit_pixels(set, angles, dark, options);
    int iterations = 0;
    if (estimate) {
        // Alternate between frame angles and pixel models. The common rotation
        // is unobservable; anchor it so the mean orientation error is zero.
        for (iterations = 1; iterations <= options.max_iterations; ++iterations) {
            double offset = 0.0;
            for (std::size_t y = 0; y < first.height(); ++y)
                for (std::size_t x = 0; x < first.width(); ++x)
                    offset += axial_difference(fit.pixels[y * first.width() + x].theta,
                                               radians(first.layout().angle_at(x, y)));
            offset /= static_cast<double>(n);

            double delta = 0.0;
            for (std::size_t j = 0; j < set.frames.size(); ++j) {
                const double updated =
                    fold_half_turn(frame_angle_given_pixels(set.frames[j].mosaic, fit.pixels) - offset);
                delta = std::max(delta, std::abs(axial_difference(updated, angles[j])));
                angles[j] = updated;
            }
            fit = fit_pixels(set, angles, dark, options);
            if (delta < options.tolerance) break;
        }
        iterations = std::min(iterations, options.max_iterations);
    }

    CalibrationMetadata meta;
    meta.s0_reference = fit.s0_reference;
    meta.reference_dolp = set.reference_dolp;
    meta.reference_angles = angles;
    meta.angles_estimated = estimate;
    meta.iterations = iterations;
    meta.dead_pixels = fit.dead;
    meta.residual_rms_mean =
        std::accumulate(fit.residual.begin(), fit.residual.end(), 0.0) / static_cast<double>(n);
    meta.residual_rms_max = *std::max_element(fit.residual.begin(), fit.residual.end());
    return CalibrationMaps(first.width(), first.height(), first.layout(), std::move(fit.pixels), meta,
                           std::move(fit.residual));
}

namespace {

template <typename T>
std::vector<double> corrected_values(const Mosaic<T>& mosaic, const CalibrationMaps& maps) {
    check_compatible(mosaic.width(), mosaic.height(), mosaic.layout(), maps);
    const Mat43& ideal = ideal_pixel_matrix().matrix();
    std::array<Offset, 4> offsets{};
    for (PolAngle a : kAngles) offsets[index(a)] = mosaic.layout().offset_of(a);

    std::vector<double> out(mosaic.data().size());
    const std::size_t sw = mosaic.width() / 2, sh = mosaic.height() / 2;
    for (std::size_t sy = 0; sy < sh; ++sy)
        for (std::size_t sx = 0; sx < sw; ++sx) {
            Eigen::Vector4d meas;
            for (PolAngle a : kAngles) {
                const Offset o = offsets[index(a)];
                const std::size_t x = 2 * sx + o.x, y = 2 * sy + o.y;
                meas[static_cast<Eigen::Index>(index(a))] =
                    static_cast<double>(mosaic(x, y)) - maps.pixel(x, y).d;
            }
            const Eigen::Vector3d s = maps.correction(sx, sy) * meas;
            const Eigen::Vector4d fixed = meas + (ideal - maps.fitted_matrix(sx, sy)) * s;
            for (PolAngle a : kAngles) {
                const Offset o = offsets[index(a)];
                out[(2 * sy + o.y) * mosaic.width() + 2 * sx + o.x] =
                    fixed[static_cast<Eigen::Index>(index(a))];
            }
        }
    return out;
}

std::uint16_t quantize(double v, double full_scale) {
    // nearbyint honours the default round-half-to-even mode.
    return static_cast<std::uint16_t>(std::clamp(std::nearbyint(v), 0.0, full_scale));
}

} // namespace

RawMosaic correct_mosaic(const RawMosaic& mosaic, const CalibrationMaps& maps) {
    const std::vector<double> values = corrected_values(mosaic, maps);
    const double fs = mosaic.layout().full_scale();
    std::vector<std::uint16_t> data(values.size());
    std::transform(values.begin(), values.end(), data.begin(), [fs](double v) { return quantize(v, fs); });
    return RawMosaic(mosaic.width(), mosaic.height(), mosaic.layout(), std::move(data),
                     Provenance::Calibrated);
}

SignalMosaic correct_signal(const SignalMosaic& mosaic, const CalibrationMaps& maps) {
    std::vector<double> values = corrected_values(mosaic, maps);
    const double fs = mosaic.layout().full_scale();
    for (double& v : values) v = std::clamp(v, 0.0, fs);
    return SignalMosaic(mosaic.width(), mosaic.height(), mosaic.layout(), std::move(values),
                        Provenance::Calibrated);
}

RawMosaic gain_only_correction(const RawMosaic& mosaic, const CalibrationMaps& maps) {
    check_compatible(mosaic.width(), mosaic.height(), mosaic.layout(), maps);
    const double fs = mosaic.layout().full_scale();
    std::vector<std::uint16_t> data(mosaic.data().size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const PixelModel& m = maps.pixels()[i];
        data[i] = quantize((mosaic.data()[i] - m.d) * 0.5 / m.t, fs);
    }
    return RawMosaic(mosaic.width(), mosaic.height(), mosaic.layout(), std::move(data),
                     Provenance::Calibrated);
}

ParameterStats parameter_stats(const CalibrationMaps& maps) {
    const auto n = static_cast<double>(maps.pixels().size());
    ParameterStats s;
    std::vector<double> dev;
    dev.reserve(maps.pixels().size());
    for (std::size_t y = 0; y < maps.height(); ++y)
        for (std::size_t x = 0; x < maps.width(); ++x) {
            const PixelModel& m = maps.pixel(x, y);
            s.t_mean += m.t;
            s.p_mean += m.p;
            dev.push_back(axial_difference(m.theta, radians(maps.layout().angle_at(x, y))));
            s.theta_dev_mean += dev.back();
        }
    s.t_mean /= n;
    s.p_mean /= n;
    s.theta_dev_mean /= n;
    for (std::size_t i = 0; i < maps.pixels().size(); ++i) {
        const PixelModel& m = maps.pixels()[i];
        s.t_std += (m.t - s.t_mean) * (m.t - s.t_mean);
        s.p_std += (m.p - s.p_mean) * (m.p - s.p_mean);
        s.theta_dev_std += (dev[i] - s.theta_dev_mean) * (dev[i] - s.theta_dev_mean);
    }
    s.t_std = std::sqrt(s.t_std / n);
    s.p_std = std::sqrt(s.p_std / n);
    s.theta_dev_std = std::sqrt(s.theta_dev_std / n);
    return s;
}

CalibrationReport calibration_report(const CalibrationMaps& maps, const RawMosaic& before,
                                     const RawMosaic& after, double dolp_threshold) {
    if (!(before.layout() == after.layout()) || before.width() != after.width() ||
        before.height() != after.height())
        fail(ErrorCode::Structural, "report mosaics differ in size or layout");
    const PolarParamsMap pb = compute_polar_params(compute_stokes_map(before), dolp_threshold);
    const PolarParamsMap pa = compute_polar_params(compute_stokes_map(after), dolp_threshold);

    auto safe_histogram = [](const PolarParamsMap& m, Color c, ParamTag tag) {
        try {
            return histogram(m, c, tag);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyHistogram) throw;
            HistogramSeries empty;
            empty.parameter = tag;
            return empty;
        }
    };

    CalibrationReport report;
    report.fingerprint = maps.fingerprint();
    report.parameters = parameter_stats(maps);
    report.dead_pixels = maps.metadata().dead_pixels;
    const std::size_t row = pb.height / 2;
    for (Color c : kColors) {
        ChannelQuality q;
        q.channel = c;
        for (ParamTag tag : {ParamTag::Intensity, ParamTag::Dolp, ParamTag::Aolp}) {
            q.before[static_cast<std::size_t>(tag)] = safe_histogram(pb, c, tag);
            q.after[static_cast<std::size_t>(tag)] = safe_histogram(pa, c, tag);
        }
        q.before_row = row_profile(pb, row, c);
        q.after_row = row_profile(pa, row, c);
        report.channels.push_back(std::move(q));
    }
    return report;
}

} // namespace polakit
