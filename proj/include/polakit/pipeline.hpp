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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polakit {

enum class Mode : std::uint8_t { RawSplit, PolColor, Original, Stokes, RawIrp, Irp, Fake };

inline constexpr std::array<Mode, 7> kModes{Mode::RawSplit, Mode::PolColor, Mode::Original, Mode::Stokes,
                                            Mode::RawIrp,   Mode::Irp,      Mode::Fake};

std::string_view name(Mode m);
Mode parse_mode(std::string_view text);

struct NamedImage {
    std::string name;  // file stem, e.g. "stokes_s1_G2"
    DisplayImage image;
};

struct FloatPlaneOut {
    std::string name;
    Plane<double> plane;
};

struct ProcessOptions {
    bool white_balance = false;
    // Manual gains replace the automatic search when set.
    std::optional<WhiteBalanceGains> gains;
    // Orientation whose demosaiced image drives the automatic search.
    PolAngle wb_angle = PolAngle::Deg0;
    double saturation_fraction = kDefaultSaturationFraction;
    double dolp_threshold = kDefaultDolpThreshold;
};

// Gains used for color outputs, or nullopt when white balance is off.
std::optional<WhiteBalanceGains> resolve_gains(const RawMosaic& mosaic, const ProcessOptions& options);

// Display images of one mode, in a fixed order:
//   raw-split  raw_{000,045,090,135}
//   pol-color  polcolor_{000,045,090,135}
//   original   original
//   stokes     stokes_{s0,s1,s2}_{R,G1,G2,B}   (|S1|, |S2| shown)
//   raw-irp    irp_raw_{intensity,dolp,aolp}_{R,G1,G2,B}
//   irp        irp_{intensity,dolp,aolp}_{R,G1,G2,B}
//   fake       fake_{R,G1,G2,B}
std::vector<NamedImage> render_mode(const RawMosaic& mosaic, Mode mode, const ProcessOptions& options = {});

// Numeric planes behind stokes, raw-irp and irp (empty for other modes).
std::vector<FloatPlaneOut> float_planes(const RawMosaic& mosaic, Mode mode,
                                        double dolp_threshold = kDefaultDolpThreshold);

// Same outputs from precomputed maps (used by the service caches).
std::vector<NamedImage> render_stokes_images(const StokesMap& stokes);
std::vector<NamedImage> render_param_images(const PolarParamsMap& params, bool colorized);
std::vector<NamedImage> render_fake_images(const PolarParamsMap& params);

} // namespace polakit
