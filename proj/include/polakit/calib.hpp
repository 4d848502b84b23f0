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

#include "polakit/sensor_model.hpp"
#include "polakit/stokes.hpp"
#include "polakit/viz.hpp"

#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace polakit {

// Per-pixel response: I = t * S0 * (1 + p * rho * cos 2(aolp - theta)) + d.
// Relation to the polarizer transmittances: t = (q + r) / 2, p = (q - r) / (q + r).
struct PixelModel {
    double t = 0.5;
    double p = 1.0;
    double theta = 0.0;  // radians
    double d = 0.0;      // counts

    double q() const { return t * (1.0 + p); }
    double r() const { return t * (1.0 - p); }

    bool operator==(const PixelModel&) const = default;
};

PixelModel ideal_pixel(PolAngle nominal, double dark = 0.0);

struct FlatFieldFrame {
    RawMosaic mosaic;
    // Angle of the calibration light in radians; empty when not recorded.
    std::optional<double> reference_aolp;
};

struct FlatFieldSet {
    std::vector<FlatFieldFrame> frames;
    double reference_dolp = 1.0;
    // Optional dark frame; supplies d per pixel, otherwise d = 0.
    std::optional<RawMosaic> dark;
};

struct FitOptions {
    double theta_sanity = 10.0 * std::numbers::pi / 180.0;
    // Fitted effectiveness below this marks the pixel dead.
    double min_effectiveness = 0.05;
    // Unknown reference angles: alternating estimation limits.
    int max_iterations = 50;
    double tolerance = 1e-8;
    unsigned threads = 1;
};

struct CalibrationMetadata {
    int version = 1;
    std::array<double, 4> s0_reference{};  // per color, normalizes mean t to 0.5
    double reference_dolp = 1.0;
    std::vector<double> reference_angles;  // radians, as used by the fit
    bool angles_estimated = false;
    int iterations = 0;
    std::size_t dead_pixels = 0;
    double residual_rms_mean = 0.0;
    double residual_rms_max = 0.0;

    bool operator==(const CalibrationMetadata&) const = default;
};

// "<width>x<height>;<layout>" identifies the sensor a calibration belongs to.
std::string sensor_fingerprint(std::size_t width, std::size_t height, const SensorLayout& layout);

// Fitted per-pixel parameters with the cached per-super-pixel correction
// operators (pseudo-inverse of the fitted 4x3 measurement matrix).
class CalibrationMaps {
public:
    CalibrationMaps(std::size_t width, std::size_t height, SensorLayout layout,
                    std::vector<PixelModel> pixels, CalibrationMetadata metadata = {},
                    std::vector<double> residual_rms = {});

    static CalibrationMaps ideal(std::size_t width, std::size_t height, const SensorLayout& layout);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    const SensorLayout& layout() const { return layout_; }
    const CalibrationMetadata& metadata() const { return metadata_; }
    const std::vector<PixelModel>& pixels() const { return pixels_; }
    const PixelModel& pixel(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
    const std::vector<double>& residual_rms() const { return residual_; }
    std::string fingerprint() const { return sensor_fingerprint(width_, height_, layout_); }

    // Super-pixel grid is (width/2) x (height/2); rows ordered 0, 45, 90, 135.
    const Mat43& fitted_matrix(std::size_t sx, std::size_t sy) const { return fitted_[sy * (width_ / 2) + sx]; }
    const Mat34& correction(std::size_t sx, std::size_t sy) const { return ops_[sy * (width_ / 2) + sx]; }

private:
    std::size_t width_, height_;
    SensorLayout layout_;
    std::vector<PixelModel> pixels_;
    CalibrationMetadata metadata_;
    std::vector<double> residual_;
    std::vector<Mat43> fitted_;
    std::vector<Mat34> ops_;
};

CalibrationMaps fit_calibration(const FlatFieldSet& acquisitions, const FitOptions& options = {});

// Solves each super-pixel with its fitted operator and re-synthesizes the
// readings of an ideal super-pixel. The part of the measurement the model
// cannot explain is carried over unchanged, so ideal maps are the identity.
// Output is re-quantized with round-half-to-even and clipped to full-scale.
RawMosaic correct_mosaic(const RawMosaic& mosaic, const CalibrationMaps& maps);
SignalMosaic correct_signal(const SignalMosaic& mosaic, const CalibrationMaps& maps);

// Baseline that only equalizes pixel gains: (I - d) * 0.5 / t.
RawMosaic gain_only_correction(const RawMosaic& mosaic, const CalibrationMaps& maps);

struct ParameterStats {
    double t_mean = 0, t_std = 0;
    double p_mean = 0, p_std = 0;
    double theta_dev_mean = 0, theta_dev_std = 0;  // radians, fitted minus nominal

    bool operator==(const ParameterStats&) const = default;
};

ParameterStats parameter_stats(const CalibrationMaps& maps);

struct ChannelQuality {
    Color channel = Color::R;
    std::array<HistogramSeries, 3> before;  // indexed by ParamTag
    std::array<HistogramSeries, 3> after;
    RowProfile before_row;
    RowProfile after_row;

    bool operator==(const ChannelQuality&) const = default;
};

struct CalibrationReport {
    std::string fingerprint;
    ParameterStats parameters;
    std::size_t dead_pixels = 0;
    std::vector<ChannelQuality> channels;

    bool operator==(const CalibrationReport&) const = default;
};

// Histograms and middle-row profiles of both mosaics plus fitted-parameter
// statistics. Parameters without valid pixels get an empty series.
CalibrationReport calibration_report(const CalibrationMaps& maps, const RawMosaic& before,
                                     const RawMosaic& after,
                                     double dolp_threshold = kDefaultDolpThreshold);

} // namespace polakit
