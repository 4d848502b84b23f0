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

#include "polakit/synth_cam.hpp"

#include "polakit/calib_io.hpp"
#include "polakit/parallel.hpp"

#include <cmath>
#include <numbers>

namespace polakit {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

enum Stream : std::uint64_t { kNoise = 1, kGain = 2, kEffectiveness = 3, kOrientation = 4 };

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double radial_fraction(double x, double y, double cx, double cy) {
    const double r2max = cx * cx + cy * cy;
    if (r2max == 0.0) return 0.0;
    return ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / r2max;
}

void check_light(const LightSpec& l) {
    if (!(l.s0 >= 0.0) || !std::isfinite(l.s0))
        fail(ErrorCode::Configuration, "scene S0 must be finite and >= 0");
    if (!(l.dolp >= 0.0 && l.dolp <= 1.0)) fail(ErrorCode::Configuration, "scene DoLP must lie in [0, 1]");
    if (!(l.aolp >= 0.0 && l.aolp < kPi)) fail(ErrorCode::Configuration, "scene AoLP must lie in [0, pi)");
}

LightSpec lerp(const LightSpec& a, const LightSpec& b, double u) {
    return {a.s0 + (b.s0 - a.s0) * u, a.dolp + (b.dolp - a.dolp) * u, a.aolp + (b.aolp - a.aolp) * u};
}

} // namespace

double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t h = splitmix(splitmix(splitmix(seed) ^ stream) + index);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double gaussian_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const double u1 = uniform_at(seed, stream, 2 * index);
    const double u2 = uniform_at(seed, stream, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

ColorLights uniform_lights(const LightSpec& light) { return {light, light, light, light}; }

void SceneSpec::validate() const {
    if (width == 0 || height == 0 || width % 2 != 0 || height % 2 != 0)
        fail(ErrorCode::Configuration, "scene dimensions must be even and nonzero (super-pixels)");
    if (!(vignetting >= 0.0 && vignetting < 1.0))
        fail(ErrorCode::Configuration, "scene vignetting must lie in [0, 1)");
    for (const RegionSpec& r : regions) {
        for (const auto& l : r.value) check_light(l);
        if (r.kind == RegionKind::Gradient) {
            for (const auto& l : r.end) check_light(l);
        } else if (r.w == 0 || r.h == 0 || r.x + r.w > width || r.y + r.h > height) {
            fail(ErrorCode::Configuration, "scene rectangle is empty or leaves the frame");
        }
    }
}

LightSpec SceneSpec::light_at(std::size_t sx, std::size_t sy, Color c) const {
    LightSpec light;
    for (const RegionSpec& r : regions) {
        if (r.kind == RegionKind::Rect) {
            if (sx >= r.x && sx < r.x + r.w && sy >= r.y && sy < r.y + r.h) light = r.value[index(c)];
        } else {
            const std::size_t n = r.axis == Axis::X ? width : height;
            const std::size_t k = r.axis == Axis::X ? sx : sy;
            const double u = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
            light = lerp(r.value[index(c)], r.end[index(c)], u);
        }
    }
    if (vignetting > 0.0)
        light.s0 *= 1.0 - vignetting * radial_fraction(static_cast<double>(sx), static_cast<double>(sy),
                                                       (static_cast<double>(width) - 1.0) / 2.0,
                                                       (static_cast<double>(height) - 1.0) / 2.0);
    return light;
}

SceneSpec uniform_scene(std::size_t width, std::size_t height, const LightSpec& light) {
    SceneSpec s;
    s.width = width;
    s.height = height;
    RegionSpec r;
    r.w = width;
    r.h = height;
    r.value = uniform_lights(light);
    s.regions.push_back(r);
    return s;
}

SceneSpec urban_demo_scene(std::size_t width, std::size_t height, double fs) {
    const double deg = kPi / 180.0;
    auto colored = [](std::array<double, 3> rgb, double dolp, double aolp) {
        return ColorLights{LightSpec{rgb[0], dolp, aolp}, LightSpec{rgb[1], dolp, aolp},
                           LightSpec{rgb[1], dolp, aolp}, LightSpec{rgb[2], dolp, aolp}};
    };
    auto rect = [&](double x0, double y0, double x1, double y1, ColorLights v) {
        RegionSpec r;
        r.x = static_cast<std::size_t>(x0 * width);
        r.y = static_cast<std::size_t>(y0 * height);
        r.w = std::max<std::size_t>(1, static_cast<std::size_t>(x1 * width) - r.x);
        r.h = std::max<std::size_t>(1, static_cast<std::size_t>(y1 * height) - r.y);
        r.value = v;
        return r;
    };

    SceneSpec s;
    s.width = width;
    s.height = height;
    RegionSpec sky;
    sky.kind = RegionKind::Gradient;
    sky.axis = Axis::Y;
    sky.value = colored({0.75 * fs, 0.95 * fs, 1.25 * fs}, 0.35, 90 * deg);
    sky.end = colored({0.60 * fs, 0.75 * fs, 0.95 * fs}, 0.15, 90 * deg);
    s.regions.push_back(sky);
    // Matte buildings.
    s.regions.push_back(rect(0.00, 0.15, 0.30, 0.65, colored({0.55 * fs, 0.50 * fs, 0.45 * fs}, 0.02, 0)));
    s.regions.push_back(rect(0.62, 0.10, 1.00, 0.65, colored({0.45 * fs, 0.45 * fs, 0.50 * fs}, 0.02, 0)));
    // Road with horizontal glare.
    s.regions.push_back(rect(0.00, 0.65, 1.00, 1.00, colored({0.50 * fs, 0.50 * fs, 0.52 * fs}, 0.60, 0)));
    // Car bodies and their windshields.
    s.regions.push_back(rect(0.12, 0.55, 0.40, 0.80, colored({0.70 * fs, 0.20 * fs, 0.20 * fs}, 0.25, 120 * deg)));
    s.regions.push_back(rect(0.16, 0.57, 0.36, 0.64, colored({0.80 * fs, 0.85 * fs, 0.88 * fs}, 0.97, 45 * deg)));
    s.regions.push_back(rect(0.58, 0.60, 0.88, 0.85, colored({0.25 * fs, 0.30 * fs, 0.60 * fs}, 0.25, 120 * deg)));
    s.regions.push_back(rect(0.62, 0.62, 0.84, 0.69, colored({0.80 * fs, 0.85 * fs, 0.88 * fs}, 0.97, 45 * deg)));
    return s;
}

void SensorSpec::validate() const {
    layout.validate();
    if (width == 0 || height == 0 || width % 4 != 0 || height % 4 != 0)
        fail(ErrorCode::Configuration, "sensor dimensions must be nonzero multiples of 4");
    if (!(dark >= 0.0 && dark < layout.full_scale())) fail(ErrorCode::Configuration, "dark offset out of range");
    if (!(gain_falloff >= 0.0 && gain_falloff < 1.0))
        fail(ErrorCode::Configuration, "gain falloff must lie in [0, 1)");
    if (!(noise >= 0.0 && noise < 1.0)) fail(ErrorCode::Configuration, "noise must lie in [0, 1)");
    switch (source.kind) {
    case PixelSourceKind::Ideal: break;
    case PixelSourceKind::Randomized:
        if (!(source.t_min > 0.0 && source.t_min <= source.t_max))
            fail(ErrorCode::Configuration, "randomized gain range must satisfy 0 < t_min <= t_max");
        if (!(source.p_min > 0.0 && source.p_min <= source.p_max && source.p_max <= 1.0))
            fail(ErrorCode::Configuration, "randomized effectiveness range must lie in (0, 1]");
        if (!(source.theta_jitter >= 0.0 && source.theta_jitter < kPi / 4))
            fail(ErrorCode::Configuration, "orientation jitter must lie in [0, 45 degrees)");
        break;
    case PixelSourceKind::Explicit:
        if (source.pixels.size() != width * height)
            fail(ErrorCode::Configuration, "explicit pixel maps do not match the sensor size");
        for (const PixelModel& m : source.pixels)
            if (!(m.t > 0.0) || !(m.p > 0.0 && m.p <= 1.0) || !std::isfinite(m.theta) || !(m.d >= 0.0))
                fail(ErrorCode::Configuration, "explicit pixel model outside physical bounds");
        break;
    }
}

std::vector<PixelModel> realize_pixels(const SensorSpec& sensor) {
    sensor.validate();
    const std::size_t n = sensor.width * sensor.height;
    const auto& src = sensor.source;
    std::vector<PixelModel> pixels(n);
    const double cx = (static_cast<double>(sensor.width) - 1.0) / 2.0;
    const double cy = (static_cast<double>(sensor.height) - 1.0) / 2.0;
    for (std::size_t y = 0; y < sensor.height; ++y)
        for (std::size_t x = 0; x < sensor.width; ++x) {
            const std::size_t i = y * sensor.width + x;
            PixelModel m = ideal_pixel(sensor.layout.angle_at(x, y));
            if (src.kind == PixelSourceKind::Randomized) {
                m.t = src.t_min + (src.t_max - src.t_min) * uniform_at(src.seed, kGain, i);
                m.p = src.p_min + (src.p_max - src.p_min) * uniform_at(src.seed, kEffectiveness, i);
                m.theta += src.theta_jitter * (2.0 * uniform_at(src.seed, kOrientation, i) - 1.0);
            } else if (src.kind == PixelSourceKind::Explicit) {
                m = src.pixels[i];
            }
            m.t *= 1.0 - sensor.gain_falloff * radial_fraction(static_cast<double>(x),
                                                               static_cast<double>(y), cx, cy);
            m.d += sensor.dark;
            pixels[i] = m;
        }
    return pixels;
}

Rendering render(const SceneSpec& scene, const SensorSpec& sensor, std::uint64_t seed) {
    scene.validate();
    const std::vector<PixelModel> pixels = realize_pixels(sensor);
    if (scene.width * 2 != sensor.width || scene.height * 2 != sensor.height)
        fail(ErrorCode::Configuration, "scene must be half the sensor size (one entry per super-pixel)");

    const SensorLayout& layout = sensor.layout;
    const double fs = layout.full_scale();
    const std::size_t w = sensor.width, h = sensor.height;

    // Scene Stokes per super-pixel, evaluated once.
    const std::size_t sw = scene.width, sh = scene.height;
    std::vector<StokesPixel> stokes(sw * sh);
    for (std::size_t sy = 0; sy < sh; ++sy)
        for (std::size_t sx = 0; sx < sw; ++sx) {
            const LightSpec l = scene.light_at(sx, sy, layout.cfa_pattern[sy % 2][sx % 2]);
            stokes[sy * sw + sx] = {l.s0, l.s0 * l.dolp * std::cos(2.0 * l.aolp),
                                    l.s0 * l.dolp * std::sin(2.0 * l.aolp)};
        }

    std::vector<double> signal(w * h);
    parallel_for(h, sensor.threads, [&](std::size_t y0, std::size_t y1) {
        for (std::size_t y = y0; y < y1; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                const std::size_t i = y * w + x;
                const PixelModel& m = pixels[i];
                const StokesPixel& s = stokes[(y / 2) * sw + x / 2];
                double v = m.t * s.s0 + m.t * m.p * (std::cos(2.0 * m.theta) * s.s1 +
                                                     std::sin(2.0 * m.theta) * s.s2) + m.d;
                if (sensor.noise > 0.0) {
                    const double sigma =
                        sensor.noise * fs * (sensor.shot_noise ? std::sqrt(std::max(v, 0.0) / fs) : 1.0);
                    v += sigma * gaussian_at(seed, kNoise, i);
                }
                v = std::clamp(v, 0.0, fs);
                signal[i] = sensor.quantize ? std::nearbyint(v) : v;
            }
    });

    std::vector<std::uint16_t> counts(w * h);
    std::transform(signal.begin(), signal.end(), counts.begin(),
                   [](double v) { return static_cast<std::uint16_t>(std::nearbyint(v)); });

    StokesMap truth = make_stokes_map(w / 4, h / 4, layout);
    for (Color c : kColors) {
        const Offset co = layout.offset_of(c);
        for (std::size_t y = 0; y < h / 4; ++y)
            for (std::size_t x = 0; x < w / 4; ++x)
                truth.set(c, x, y, stokes[(2 * y + co.y) * sw + 2 * x + co.x]);
    }
    PolarParamsMap truth_params = compute_polar_params(truth);
    return {RawMosaic(w, h, layout, std::move(counts)), SignalMosaic(w, h, layout, std::move(signal)),
            std::move(truth), std::move(truth_params)};
}

std::vector<double> even_angles(std::size_t count) {
    std::vector<double> a(count);
    for (std::size_t k = 0; k < count; ++k) a[k] = kPi * static_cast<double>(k) / static_cast<double>(count);
    return a;
}

FlatFieldSet flat_field_series(const SensorSpec& sensor, std::span<const double> aolps, double s0,
                               std::uint64_t seed, double dolp, bool record_angles) {
    if (aolps.size() < 3) fail(ErrorCode::Configuration, "a flat-field series needs at least 3 angles");
    FlatFieldSet set;
    set.reference_dolp = dolp;
    for (std::size_t j = 0; j < aolps.size(); ++j) {
        const double a = fold_half_turn(aolps[j]);
        const SceneSpec scene = uniform_scene(sensor.width / 2, sensor.height / 2, {s0, dolp, a});
        Rendering r = render(scene, sensor, splitmix(seed + j));
        set.frames.push_back({std::move(r.mosaic), record_angles ? std::optional<double>(a) : std::nullopt});
    }
    return set;
}

namespace {

const char* kColorKeys[4] = {"R", "G1", "G2", "B"};

json light_json(const LightSpec& l) {
    return {{"s0", l.s0}, {"dolp", l.dolp}, {"aolp_deg", l.aolp * 180.0 / kPi}};
}

LightSpec light_from(const json& j) {
    return {j.at("s0").get<double>(), j.value("dolp", 0.0),
            fold_half_turn(j.value("aolp_deg", 0.0) * kPi / 180.0)};
}

json lights_json(const ColorLights& v) {
    if (v[0] == v[1] && v[0] == v[2] && v[0] == v[3]) return {{"all", light_json(v[0])}};
    json j;
    for (std::size_t c = 0; c < 4; ++c) j[kColorKeys[c]] = light_json(v[c]);
    return j;
}

ColorLights lights_from(const json& j) {
    if (j.contains("all")) return uniform_lights(light_from(j.at("all")));
    ColorLights v;
    for (std::size_t c = 0; c < 4; ++c) v[c] = light_from(j.at(kColorKeys[c]));
    return v;
}

template <typename Fn>
auto spec_guard(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        fail(ErrorCode::Configuration, std::string(what) + ": " + e.what());
    }
}

} // namespace

json to_json(const SceneSpec& scene) {
    json regions = json::array();
    for (const RegionSpec& r : scene.regions) {
        if (r.kind == RegionKind::Rect)
            regions.push_back({{"kind", "rect"}, {"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h},
                               {"value", lights_json(r.value)}});
        else
            regions.push_back({{"kind", "gradient"}, {"axis", r.axis == Axis::X ? "x" : "y"},
                               {"from", lights_json(r.value)}, {"to", lights_json(r.end)}});
    }
    return {{"width", scene.width}, {"height", scene.height}, {"vignetting", scene.vignetting},
            {"regions", regions}};
}

SceneSpec scene_from_json(const json& j) {
    SceneSpec s = spec_guard("scene", [&] {
        SceneSpec s;
        s.width = j.at("width").get<std::size_t>();
        s.height = j.at("height").get<std::size_t>();
        s.vignetting = j.value("vignetting", 0.0);
        for (const json& r : j.at("regions")) {
            RegionSpec region;
            const std::string kind = r.at("kind").get<std::string>();
            if (kind == "rect") {
                region.x = r.at("x").get<std::size_t>();
                region.y = r.at("y").get<std::size_t>();
                region.w = r.at("w").get<std::size_t>();
                region.h = r.at("h").get<std::size_t>();
                region.value = lights_from(r.at("value"));
            } else if (kind == "gradient") {
                region.kind = RegionKind::Gradient;
                const std::string axis = r.value("axis", "x");
                if (axis != "x" && axis != "y") fail(ErrorCode::Configuration, "gradient axis must be x or y");
                region.axis = axis == "x" ? Axis::X : Axis::Y;
                region.value = lights_from(r.at("from"));
                region.end = lights_from(r.at("to"));
            } else {
                fail(ErrorCode::Configuration, "unknown region kind '" + kind + "'");
            }
            s.regions.push_back(region);
        }
        return s;
    });
    s.validate();
    return s;
}

json to_json(const SensorSpec& s) {
    json pixels;
    switch (s.source.kind) {
    case PixelSourceKind::Ideal: pixels = {{"kind", "ideal"}}; break;
    case PixelSourceKind::Randomized:
        pixels = {{"kind", "randomized"},
                  {"t", {s.source.t_min, s.source.t_max}},
                  {"p", {s.source.p_min, s.source.p_max}},
                  {"theta_jitter_deg", s.source.theta_jitter * 180.0 / kPi},
                  {"seed", s.source.seed}};
        break;
    case PixelSourceKind::Explicit: {
        json rows = json::array();
        for (const PixelModel& m : s.source.pixels) rows.push_back({m.t, m.p, m.theta, m.d});
        pixels = {{"kind", "explicit"}, {"pixels", rows}};
        break;
    }
    }
    return {{"width", s.width}, {"height", s.height}, {"layout", s.layout.to_string()},
            {"pixels", pixels}, {"dark", s.dark}, {"gain_falloff", s.gain_falloff},
            {"noise", s.noise}, {"shot_noise", s.shot_noise}, {"quantize", s.quantize}};
}

SensorSpec sensor_from_json(const json& j, const std::filesystem::path& base_dir) {
    SensorSpec s = spec_guard("sensor", [&] {
        SensorSpec s;
        s.width = j.at("width").get<std::size_t>();
        s.height = j.at("height").get<std::size_t>();
        s.layout = j.contains("layout") ? SensorLayout::parse(j.at("layout").get<std::string>())
                                        : default_layout();
        s.dark = j.value("dark", 0.0);
        s.gain_falloff = j.value("gain_falloff", 0.0);
        s.noise = j.value("noise", 0.0);
        s.shot_noise = j.value("shot_noise", false);
        s.quantize = j.value("quantize", true);
        const json px = j.value("pixels", json{{"kind", "ideal"}});
        const std::string kind = px.at("kind").get<std::string>();
        if (kind == "randomized") {
            s.source.kind = PixelSourceKind::Randomized;
            const auto t = px.value("t", std::array<double, 2>{0.45, 0.55});
            const auto p = px.value("p", std::array<double, 2>{0.9, 1.0});
            s.source.t_min = t[0];
            s.source.t_max = t[1];
            s.source.p_min = p[0];
            s.source.p_max = p[1];
            s.source.theta_jitter = px.value("theta_jitter_deg", 0.0) * kPi / 180.0;
            s.source.seed = px.value("seed", std::uint64_t{0});
        } else if (kind == "explicit") {
            s.source.kind = PixelSourceKind::Explicit;
            if (px.contains("calibration")) {
                const CalibrationMaps maps = load_calibration(base_dir / px.at("calibration").get<std::string>());
                s.source.pixels = maps.pixels();
            } else {
                for (const auto& row : px.at("pixels")) {
                    const auto v = row.get<std::array<double, 4>>();
                    s.source.pixels.push_back({v[0], v[1], v[2], v[3]});
                }
            }
        } else if (kind != "ideal") {
            fail(ErrorCode::Configuration, "unknown pixel source '" + kind + "'");
        }
        return s;
    });
    s.validate();
    return s;
}

} // namespace polakit
