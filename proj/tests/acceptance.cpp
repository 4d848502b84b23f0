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

// Acceptance suite: one PASS/FAIL line per acceptance criterion.

#include "polakit/calib.hpp"
#include "polakit/filter_lab.hpp"
#include "polakit/image_io.hpp"
#include "polakit/pipeline.hpp"
#include "polakit/synth_cam.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace polakit;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double axial_diff(double a, double b) {
    double d = std::fmod(a - b + kPi / 2, kPi);
    if (d < 0) d += kPi;
    return d - kPi / 2;
}

SensorSpec sensor_of(std::size_t w, std::size_t h) {
    SensorSpec s;
    s.width = w;
    s.height = h;
    return s;
}

SceneSpec random_scene(std::size_t w, std::size_t h, std::mt19937_64& rng, double fs, double min_dolp,
                       double max_dolp = 1.0) {
    std::uniform_real_distribution<double> s0(0.05 * fs, 0.9 * fs), dolp(min_dolp, max_dolp), aolp(0.0, kPi);
    SceneSpec scene;
    scene.width = w;
    scene.height = h;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            RegionSpec r;
            r.x = x;
            r.y = y;
            r.w = r.h = 1;
            for (auto& l : r.value) l = {s0(rng), dolp(rng), aolp(rng)};
            scene.regions.push_back(r);
        }
    return scene;
}

SensorLayout random_layout(std::mt19937_64& rng) {
    std::array<PolAngle, 4> pol = kAngles;
    std::array<Color, 4> cfa = kColors;
    std::shuffle(pol.begin(), pol.end(), rng);
    std::shuffle(cfa.begin(), cfa.end(), rng);
    SensorLayout l;
    l.pol_pattern = {{{pol[0], pol[1]}, {pol[2], pol[3]}}};
    l.cfa_pattern = {{{cfa[0], cfa[1]}, {cfa[2], cfa[3]}}};
    return l;
}

// Circular std (degrees) of the valid AoLP samples of every color.
double aolp_spread_deg(const RawMosaic& m) {
    const PolarParamsMap p = compute_polar_params(compute_stokes_map(m));
    std::vector<double> angles;
    for (Color c : kColors)
        for (std::size_t i = 0; i < p.channel(c).aolp.size(); ++i)
            if (p.channel(c).valid.data()[i]) angles.push_back(p.channel(c).aolp.data()[i]);
    return circular_stats(angles).stddev / kDeg;
}

// ---------------------------------------------------------------------------

Outcome closed_form_vs_solver() {
    // Generic solver: SVD-based pseudo-inverse of the nominal pixel matrix.
    Eigen::Matrix<double, 4, 3> a;
    for (int k = 0; k < 4; ++k)
        a.row(k) << 0.5, 0.5 * std::cos(k * kPi / 2), 0.5 * std::sin(k * kPi / 2);
    const Eigen::Matrix<double, 3, 4> pinv = a.completeOrthogonalDecomposition().pseudoInverse();
    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0;
    for (int n = 0; n < 100000; ++n) {
        const Eigen::Vector4d i(u(rng), u(rng), u(rng), u(rng));
        const Eigen::Vector3d ref = pinv * i;
        const StokesPixel s = stokes_from_intensities(i[0], i[1], i[2], i[3]);
        const Eigen::Vector3d lib = ideal_pixel_matrix().pseudo_inverse() * i;
        worst = std::max({worst, std::abs(s.s0 - ref[0]), std::abs(s.s1 - ref[1]), std::abs(s.s2 - ref[2]),
                          (lib - ref).cwiseAbs().maxCoeff()});
    }
    return {worst <= 1e-12, fmt("1e5 quadruples in full-scale units, max |closed - pinv*I| = %.3g (tol 1e-12)", worst)};
}

Outcome model_round_trip() {
    std::mt19937_64 rng(77);
    double worst_i = 0, worst_rho = 0, worst_phi = 0;
    for (int s = 0; s < 100; ++s) {
        SensorSpec sensor = sensor_of(32, 24);
        sensor.quantize = false;
        if (s % 2) sensor.layout = random_layout(rng);
        const SceneSpec scene = random_scene(16, 12, rng, sensor.layout.full_scale(), 0.05);
        const Rendering r = render(scene, sensor, static_cast<std::uint64_t>(s));
        const PolarParamsMap p = compute_polar_params(compute_stokes_map(r.signal));
        for (Color c : kColors) {
            const Offset co = sensor.layout.offset_of(c);
            for (std::size_t y = 0; y < p.height; ++y)
                for (std::size_t x = 0; x < p.width; ++x) {
                    const LightSpec want = scene.light_at(2 * x + co.x, 2 * y + co.y, c);
                    const PolarParams got = p.at(c, x, y);
                    worst_i = std::max(worst_i, std::abs(got.intensity - want.s0) / sensor.layout.full_scale());
                    worst_rho = std::max(worst_rho, std::abs(got.dolp - want.dolp));
                    worst_phi = std::max(worst_phi, std::abs(axial_diff(got.aolp, want.aolp)));
                }
        }
    }
    const bool ok = worst_i <= 1e-10 && worst_rho <= 1e-10 && worst_phi <= 1e-10;
    return {ok, fmt("100 scenes, max err I/FS %.2g, rho %.2g, phi %.2g rad (tol 1e-10)", worst_i, worst_rho, worst_phi)};
}

Outcome malus_extinction() {
    std::mt19937_64 rng(5);
    const SensorSpec base = [] {
        SensorSpec s = sensor_of(48, 40);
        s.quantize = false;
        return s;
    }();
    const SceneSpec scene = random_scene(24, 20, rng, 4095.0, 1.0, 1.0);
    const Rendering r = render(scene, base, 0);
    const StokesMap stokes = compute_stokes_map(r.signal);
    std::vector<std::array<Plane<double>, 4>> sweep;
    for (int t = 0; t < 180; ++t) sweep.push_back(filter_intensity(stokes, {t * kDeg}));
    std::size_t pixels = 0, bad = 0;
    for (Color c : kColors)
        for (std::size_t y = 0; y < stokes.height; ++y)
            for (std::size_t x = 0; x < stokes.width; ++x) {
                int tmin = 0, tmax = 0;
                for (int t = 1; t < 180; ++t) {
                    const double v = sweep[t][index(c)](x, y);
                    if (v < sweep[tmin][index(c)](x, y)) tmin = t;
                    if (v > sweep[tmax][index(c)](x, y)) tmax = t;
                }
                const PolarParams p = polar_params(stokes.at(c, x, y));
                const double phi = p.aolp;
                const bool ok = std::abs(axial_diff(tmin * kDeg, phi + kPi / 2)) <= 0.5 * kDeg + 1e-12 &&
                                std::abs(axial_diff(tmax * kDeg, phi)) <= 0.5 * kDeg + 1e-12 &&
                                std::abs(axial_diff(tmin * kDeg, extinction_angle(p))) <= 0.5 * kDeg + 1e-12;
                ++pixels;
                bad += !ok;
            }
    return {bad == 0, fmt("%zu super-pixels, 1-degree sweep: %zu with argmin != phi+90 or argmax != phi", pixels, bad)};
}

Outcome specularity_removal() {
    std::mt19937_64 rng(13);
    double worst_dolp = 0, worst_excess = -1e300;
    for (int s = 0; s < 20; ++s) {
        SensorSpec sensor = sensor_of(32, 32);
        sensor.quantize = false;
        const SceneSpec scene = random_scene(16, 16, rng, 4095.0, 0.0);
        const Rendering r = render(scene, sensor, 0);
        const StokesMap stokes = compute_stokes_map(r.signal);
        const StokesMap again = compute_stokes_map(unpolarized_mosaic(stokes));
        const PolarParamsMap p = compute_polar_params(again);
        for (Color c : kColors)
            for (double v : p.channel(c).dolp.data()) worst_dolp = std::max(worst_dolp, v);
        const FilterResult d = remove_specularity(stokes);
        for (std::size_t ch = 0; ch < 3; ++ch)
            for (std::size_t i = 0; i < d.original.planes[ch].size(); ++i)
                worst_excess = std::max(worst_excess, d.filtered.planes[ch].data()[i] - d.original.planes[ch].data()[i]);
        // Quantized readings of the same scene.
        const FilterResult q = remove_specularity(r.mosaic);
        for (std::size_t ch = 0; ch < 3; ++ch)
            for (std::size_t i = 0; i < q.original.planes[ch].size(); ++i)
                worst_excess = std::max(worst_excess, q.filtered.planes[ch].data()[i] - q.original.planes[ch].data()[i]);
    }
    const bool ok = worst_dolp < 1e-10 && worst_excess <= 0.0;
    return {ok, fmt("20 scenes, max recomputed DoLP %.2g (tol 1e-10), max (output - input) %.3g counts", worst_dolp,
                    worst_excess)};
}

Outcome calibration_recovery() {
    const auto angles = even_angles(18);
    double worst_t = 0, worst_p = 0, worst_th = 0, max_t = 0, max_p = 0, max_th = 0;
    const int seeds = 10;
    for (int seed = 1; seed <= seeds; ++seed) {
        SensorSpec sensor = sensor_of(64, 64);
        sensor.source.kind = PixelSourceKind::Randomized;
        sensor.source.seed = 1000 + seed;
        sensor.source.theta_jitter = 3.0 * kDeg;
        sensor.noise = 0.005;
        const auto truth = realize_pixels(sensor);
        const CalibrationMaps maps =
            fit_calibration(flat_field_series(sensor, angles, 0.75 * sensor.layout.full_scale(), 500 + seed));
        std::array<double, 4> mean_t{}, n{};
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const std::size_t c = index(sensor.layout.color_at(i % 64, i / 64));
            mean_t[c] += truth[i].t;
            n[c] += 1;
        }
        for (std::size_t c = 0; c < 4; ++c) mean_t[c] /= n[c];
        double st = 0, sp = 0, sth = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const std::size_t c = index(sensor.layout.color_at(i % 64, i / 64));
            const double t_ref = truth[i].t * 0.5 / mean_t[c];
            const double et = (maps.pixels()[i].t - t_ref) / t_ref;
            const double ep = (maps.pixels()[i].p - truth[i].p) / truth[i].p;
            const double eth = axial_diff(maps.pixels()[i].theta, truth[i].theta) / kDeg;
            st += et * et;
            sp += ep * ep;
            sth += eth * eth;
            max_t = std::max(max_t, std::abs(et));
            max_p = std::max(max_p, std::abs(ep));
            max_th = std::max(max_th, std::abs(eth));
        }
        const double count = static_cast<double>(truth.size());
        worst_t = std::max(worst_t, std::sqrt(st / count));
        worst_p = std::max(worst_p, std::sqrt(sp / count));
        worst_th = std::max(worst_th, std::sqrt(sth / count));
    }
    const bool ok = worst_t <= 0.01 && worst_p <= 0.01 && worst_th <= 0.2;
    return {ok, fmt("%d seeds, worst per-seed RMS: t %.3f%%, p %.3f%%, theta %.3f deg (single-pixel max %.2f%%, "
                    "%.2f%%, %.2f deg)",
                    seeds, 100 * worst_t, 100 * worst_p, worst_th, 100 * max_t, 100 * max_p, max_th)};
}

Outcome calibration_effectiveness() {
    SensorSpec sensor = sensor_of(128, 128);
    sensor.source.kind = PixelSourceKind::Randomized;
    sensor.source.seed = 4242;
    sensor.source.theta_jitter = 3.0 * kDeg;
    sensor.gain_falloff = 0.15;
    SensorSpec flat_sensor = sensor;
    flat_sensor.noise = 0.005;
    const CalibrationMaps maps =
        fit_calibration(flat_field_series(flat_sensor, even_angles(18), 0.75 * sensor.layout.full_scale(), 9));

    const SceneSpec scene = uniform_scene(64, 64, {0.75 * sensor.layout.full_scale(), 1.0, 40 * kDeg});
    const RawMosaic raw = render(scene, sensor, 0).mosaic;
    const RawMosaic corrected = correct_mosaic(raw, maps);
    const RawMosaic gain_only = gain_only_correction(raw, maps);

    const double before = aolp_spread_deg(raw);
    const double after = aolp_spread_deg(corrected);
    const double baseline = aolp_spread_deg(gain_only);

    auto flatness = [](const RawMosaic& m) {
        const PolarParamsMap p = compute_polar_params(compute_stokes_map(m));
        double worst = 0;
        for (Color c : kColors) {
            const RowProfile row = row_profile(p, p.height / 2, c);
            double mean = 0;
            for (double v : row.intensity) mean += v;
            mean /= static_cast<double>(row.intensity.size());
            for (double v : row.intensity) worst = std::max(worst, std::abs(v - mean) / mean);
        }
        return worst;
    };
    const double flat_after = flatness(corrected);
    const double flat_before = flatness(raw);

    const bool corrected_ok = after <= 0.5;
    const bool uncorrected_ok = before >= 2.0;
    const bool flat_ok = flat_after <= 0.01;
    const bool baseline_fails = baseline > 0.5;
    return {corrected_ok && uncorrected_ok && flat_ok && baseline_fails,
            fmt("AoLP circular std: corrected %.3f deg (<= 0.5 %s), uncorrected %.3f deg (>= 2 %s), gain-only "
                "%.3f deg (> 0.5 %s); middle-row intensity deviation corrected %.2f%% (<= 1%% %s), uncorrected %.2f%%",
                after, corrected_ok ? "ok" : "NO", before, uncorrected_ok ? "ok" : "NO", baseline,
                baseline_fails ? "ok" : "NO", 100 * flat_after, flat_ok ? "ok" : "NO", 100 * flat_before)};
}

Outcome white_balance() {
    ColorImage img;
    img.width = 3;
    img.height = 3;
    img.full_scale = 4095;
    img.planes = {Plane<double>(3, 3, 5.0), Plane<double>(3, 3, 5.0), Plane<double>(3, 3, 5.0)};
    img.planes[0](1, 1) = 200;
    img.planes[1](1, 1) = 150;
    img.planes[2](1, 1) = 100;
    const WhiteBalanceGains g = auto_white_balance_gains(img);
    const double rule_err = std::max({std::abs(g.r - 1.0), std::abs(g.g - 4.0 / 3.0), std::abs(g.b - 2.0)});

    // Idempotence on random unclipped images whose white reference dominates.
    std::mt19937_64 rng(99);
    double worst = 0;
    for (int n = 0; n < 500; ++n) {
        std::uniform_real_distribution<double> w(500, 2000);
        const std::array<double, 3> white{w(rng), w(rng), w(rng)};
        ColorImage im;
        im.width = 16;
        im.height = 12;
        im.full_scale = 4095;
        for (std::size_t c = 0; c < 3; ++c) {
            im.planes[c] = Plane<double>(16, 12);
            std::uniform_real_distribution<double> u(0.0, white[c]);
            for (double& v : im.planes[c].data()) v = u(rng);
        }
        const std::size_t at = std::uniform_int_distribution<std::size_t>(0, 16 * 12 - 1)(rng);
        for (std::size_t c = 0; c < 3; ++c) im.planes[c].data()[at] = white[c];
        const ColorImage balanced = apply_gains(im, auto_white_balance_gains(im));
        const WhiteBalanceGains again = auto_white_balance_gains(balanced);
        worst = std::max({worst, std::abs(again.r - 1), std::abs(again.g - 1), std::abs(again.b - 1)});
    }
    return {rule_err <= 1e-12 && worst <= 1e-6,
            fmt("(200,150,100) -> (%.6f, %.6f, %.6f); 500 balanced images re-balance to unit gains within %.2g "
                "(tol 1e-6)",
                g.r, g.g, g.b, worst)};
}

// Runs the CLI; returns its exit status.
int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + POLAKIT_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

Outcome mode_cardinalities(const fs::path& work) {
    const RawMosaic m = render(urban_demo_scene(64, 48, 4095.0), sensor_of(128, 96), 3).mosaic;
    const std::vector<std::pair<Mode, std::size_t>> expected{
        {Mode::Stokes, 12}, {Mode::RawIrp, 12}, {Mode::Irp, 12}, {Mode::RawSplit, 4}, {Mode::PolColor, 4}, {Mode::Fake, 4}};
    const fs::path input = work / "modes.png";
    write_raw(input, m);
    bool ok = true;
    std::ostringstream os;
    for (auto [mode, n] : expected) {
        const std::size_t lib = render_mode(m, mode, {}).size();
        const fs::path out = work / ("modes-" + std::string(name(mode)));
        std::size_t files = 0;
        if (cli("process --mode " + std::string(name(mode)) + " " + q(input) + " " + q(out)) == 0)
            for (const auto& e : fs::directory_iterator(out)) files += e.path().extension() == ".png";
        ok = ok && lib == n && files == n;
        os << name(mode) << " " << lib << "/" << files << " ";
    }
    return {ok, "library/CLI image counts: " + os.str() + "(expected 12,12,12,4,4,4)"};
}

Outcome fake_colors_check() {
    // Every intensity level and many AoLP values with zero DoLP.
    StokesMap s = make_stokes_map(256, 8, SensorLayout{});
    PolarParamsMap p = compute_polar_params(s);
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 256; ++x) {
            auto& ch = p.channel(Color::G1);
            ch.intensity(x, y) = 2.0 * 4095.0 * static_cast<double>(x) / 255.0;
            ch.dolp(x, y) = 0.0;
            ch.aolp(x, y) = static_cast<double>(y) * kPi / 8;
        }
    const DisplayImage img = fake_colors(p, Color::G1);
    std::size_t tinted = 0;
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 256; ++x) {
            const Rgb8 c = img.at(x, y);
            tinted += !(c.r == c.g && c.g == c.b);
        }
    // Palette endpoints on the 180-entry hue wheel.
    const int first = hsv_angle_hue(0), last = hsv_angle_hue(255);
    const int gap = std::min((first - last + 180) % 180, (last - first + 180) % 180);
    const bool palette_ok = hsv_angle_palette(0) == hsv_to_rgb(2.0 * first, 1, 1) &&
                            hsv_angle_palette(255) == hsv_to_rgb(2.0 * last, 1, 1);
    // Fake-color hue at the two ends of the AoLP range.
    PolarParamsMap e = compute_polar_params(make_stokes_map(2, 1, SensorLayout{}));
    auto& ch = e.channel(Color::R);
    ch.intensity(0, 0) = ch.intensity(1, 0) = 2.0 * 4095.0;
    ch.dolp(0, 0) = ch.dolp(1, 0) = 1.0;
    ch.aolp(0, 0) = 0.0;
    ch.aolp(1, 0) = kPi - kPi / 180.0;
    const DisplayImage ends = fake_colors(e, Color::R);
    auto hue_index = [](Rgb8 c) {
        const double r = c.r, g = c.g, b = c.b, mx = std::max({r, g, b}), mn = std::min({r, g, b});
        double h = mx == mn ? 0 : mx == r ? std::fmod((g - b) / (mx - mn) + 6, 6.0) : mx == g ? (b - r) / (mx - mn) + 2 : (r - g) / (mx - mn) + 4;
        return static_cast<int>(std::lround(h * 30.0)) % 180;
    };
    const int h0 = hue_index(ends.at(0, 0)), h1 = hue_index(ends.at(1, 0));
    const int fake_gap = std::min((h0 - h1 + 180) % 180, (h1 - h0 + 180) % 180);
    const bool ok = tinted == 0 && gap <= 1 && palette_ok && fake_gap <= 1;
    return {ok, fmt("%zu of 2048 rho=0 pixels tinted; AoLP palette endpoint hues %d and %d (gap %d quantum); fake-color "
                    "hue at phi=0 and 179 deg: %d and %d (gap %d)",
                    tinted, first, last, gap, h0, h1, fake_gap)};
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
    std::vector<fs::path> names;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) names.push_back(fs::relative(e.path(), a));
    std::size_t count_b = 0;
    for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
    if (names.size() != count_b || names.empty()) return false;
    files = names.size();
    for (const auto& n : names) {
        if (!fs::exists(b / n) || read_file(a / n) != read_file(b / n)) return false;
    }
    return true;
}

Outcome determinism(const fs::path& work) {
    bool ok = true;
    std::string first_failure;
    auto need = [&](bool cond, const std::string& what) {
        if (!cond && first_failure.empty()) first_failure = what;
        ok = ok && cond;
    };
    std::size_t compared = 0;
    auto same_file = [&](const fs::path& a, const fs::path& b) {
        need(fs::exists(a) && fs::exists(b) && read_file(a) == read_file(b), "differs: " + b.filename().string());
        compared += 1;
    };
    // Synth renders: repeated, and across thread counts.
    const std::string sensor = R"({"width":128,"height":96,"noise":0.01,"shot_noise":true,
        "pixels":{"kind":"randomized","seed":8,"theta_jitter_deg":3},"gain_falloff":0.1})";
    write_text(work / "sensor.json", sensor);
    int run = 0;
    for (const char* jobs : {"1", "1", "3"}) {
        const fs::path out = work / ("render-" + std::to_string(run++) + "-j" + jobs + ".png");
        need(cli("synth render --demo --sensor " + q(work / "sensor.json") + " --seed 5 --jobs " + jobs + " " + q(out)) == 0, "cli failed");
    }
    std::vector<fs::path> renders;
    for (const auto& e : fs::directory_iterator(work))
        if (e.path().filename().string().rfind("render-", 0) == 0 && e.path().extension() == ".png") renders.push_back(e.path());
    std::sort(renders.begin(), renders.end());
    need(renders.size() == 3, "render count");
    for (std::size_t i = 1; i < renders.size(); ++i) {
        same_file(renders[0], renders[i]);
        same_file(sidecar_path(renders[0]), sidecar_path(renders[i]));
    }

    // Batch processing of several inputs, every mode, float planes.
    std::string inputs;
    for (int k = 0; k < 3; ++k) {
        const fs::path in = work / ("in" + std::to_string(k) + ".png");
        need(cli("synth render --demo --sensor " + q(work / "sensor.json") + " --seed " + std::to_string(k) + " " + q(in)) == 0, "cli failed");
        inputs += " " + q(in);
    }
    std::size_t files = 0;
    for (Mode mode : kModes) {
        const std::string m(name(mode));
        const fs::path a = work / ("a-" + m), b = work / ("b-" + m), c = work / ("c-" + m);
        need(cli("process --mode " + m + " --wb --float --jobs 1" + inputs + " " + q(a)) == 0, "cli failed");
        need(cli("process --mode " + m + " --wb --float --jobs 1" + inputs + " " + q(b)) == 0, "cli failed");
        need(cli("process --mode " + m + " --wb --float --jobs 3" + inputs + " " + q(c)) == 0, "cli failed");
        std::size_t n1 = 0, n2 = 0;
        need(same_tree(a, b, n1) && same_tree(a, c, n2), "process tree differs: " + m);
        files += n1 + n2;
    }

    // Calibration fitting across thread counts.
    need(cli("synth flatfields --sensor " + q(work / "sensor.json") + " --count 8 --seed 2 " + q(work / "ff")) == 0, "cli failed");
    std::string frames, angles;
    for (int k = 0; k < 8; ++k) {
        frames += " " + q(work / "ff" / fmt("frame_%03d.png", k));
        angles += (k ? "," : "") + fmt("%.17g", k * 180.0 / 8);
    }
    for (const char* jobs : {"1", "4"}) {
        fs::create_directories(work / (std::string("cal-j") + jobs));
        need(cli("calibrate fit --jobs " + std::string(jobs) + " --angles " + angles + " --out " +
                 q(work / (std::string("cal-j") + jobs) / "cal.json") + frames) == 0,
             "cli failed");
    }
    same_file(work / "cal-j1" / "cal.json", work / "cal-j4" / "cal.json");
    same_file(work / "cal-j1" / "cal.json.bin", work / "cal-j4" / "cal.json.bin");

    return {ok, fmt("%zu rendered/calibration files and %zu processed files byte-identical across repeats and --jobs",
                    compared, files) + (ok ? "" : " (" + first_failure + ")")};
}

} // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / ("polakit-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"stokes closed form vs generic solver", closed_form_vs_solver},
        {"model round-trip", model_round_trip},
        {"malus / extinction", malus_extinction},
        {"specularity removal", specularity_removal},
        {"calibration recovery", calibration_recovery},
        {"calibration effectiveness", calibration_effectiveness},
        {"white balance", white_balance},
        {"mode cardinalities", [&] { return mode_cardinalities(work); }},
        {"fake colors", fake_colors_check},
        {"determinism", [&] { return determinism(work); }},
    };
    int failed = 0;
    for (const auto& [label, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << label << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
    std::error_code ec;
    fs::remove_all(work, ec);
    return failed == 0 ? 0 : 1;
}
