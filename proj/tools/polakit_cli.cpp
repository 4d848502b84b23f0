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
#include "polakit/calib_io.hpp"
#include "polakit/filter_lab.hpp"
#include "polakit/image_io.hpp"
#include "polakit/pipeline.hpp"
#include "polakit/service.hpp"
#include "polakit/synth_cam.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <bit>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polakit;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void warn(const std::string& message) {
    static std::mutex m;
    std::lock_guard lock(m);
    std::cerr << "warning: " << message << '\n';
}

int report_error(std::string_view category, const std::string& message, int code) {
    std::cerr << json{{"error", {{"category", category}, {"message", message}}}}.dump() << '\n';
    return code;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) fail(ErrorCode::Argument, "'" + item + "' is not a number");
        out.push_back(v);
    }
    return out;
}

// Runs fn on a fresh staging directory and moves its contents into outdir
// only when fn succeeds.
template <typename Fn>
void staged(const fs::path& outdir, Fn&& fn) {
    const fs::path target = fs::absolute(outdir);
    const fs::path parent = target.parent_path();
    std::error_code ec;
    fs::create_directories(parent, ec);
    const fs::path tmp = parent / ("." + target.filename().string() + ".tmp-" + std::to_string(::getpid()));
    fs::remove_all(tmp, ec);
    if (!fs::create_directories(tmp, ec) || ec) fail(ErrorCode::Io, "cannot create " + tmp.string());
    try {
        fn(tmp);
    } catch (...) {
        fs::remove_all(tmp, ec);
        throw;
    }
    if (!fs::exists(target)) {
        fs::rename(tmp, target, ec);
        if (ec) fail(ErrorCode::Io, "cannot move output into " + target.string() + ": " + ec.message());
        return;
    }
    if (!fs::is_directory(target)) fail(ErrorCode::Io, target.string() + " exists and is not a directory");
    for (const auto& entry : fs::directory_iterator(tmp)) {
        const fs::path dest = target / entry.path().filename();
        fs::remove_all(dest, ec);
        fs::rename(entry.path(), dest, ec);
        if (ec) fail(ErrorCode::Io, "cannot move " + entry.path().string() + ": " + ec.message());
    }
    fs::remove_all(tmp, ec);
}

void write_png(const fs::path& path, const DisplayImage& image) { write_file(path, encode_png_rgb(image)); }

void write_float_planes(const fs::path& dir, const std::vector<FloatPlaneOut>& planes) {
    json manifest = {{"dtype", "float32-le"}, {"planes", json::array()}};
    for (const auto& p : planes) {
        std::vector<std::uint8_t> bytes;
        bytes.reserve(4 * p.plane.size());
        for (double v : p.plane.data()) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
            for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
        }
        write_file(dir / (p.name + ".f32"), bytes);
        manifest["planes"].push_back(
            {{"name", p.name}, {"file", p.name + ".f32"}, {"width", p.plane.width()}, {"height", p.plane.height()}});
    }
    write_text(dir / "planes.json", manifest.dump(2) + "\n");
}

struct InputOptions {
    bool assume_layout = false;
    std::string calibration;
};

RawMosaic load_input(const fs::path& path, const InputOptions& in) {
    ReadOptions ro;
    ro.assume_layout = in.assume_layout;
    ro.warn = warn;
    RawMosaic m = read_raw(path, ro).mosaic;
    if (!in.calibration.empty()) m = correct_mosaic(m, load_calibration(in.calibration));
    return m;
}

void add_input_flags(CLI::App* cmd, InputOptions& in) {
    cmd->add_flag("--assume-layout", in.assume_layout, "Use the default layout when the sidecar is missing");
    cmd->add_option("--calibration", in.calibration, "Correct inputs with this calibration first");
}

std::optional<WhiteBalanceGains> parse_gains(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const auto v = parse_list(text);
    if (v.size() != 3) fail(ErrorCode::Argument, "--gains needs three comma-separated values");
    return WhiteBalanceGains::manual(v[0], v[1], v[2]);
}

// Runs job(i) for every input on up to `jobs` threads; rethrows the error of
// the first failing input in input order.
void for_each_input(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& job) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < count;) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < std::max(1u, jobs); ++t) pool.emplace_back(worker);
        worker();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"polakit: DoFP RGB-polarization toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "polakit 1.0.0");

    // process
    auto* process = app.add_subcommand("process", "Render a processing mode");
    std::string mode_text;
    std::vector<std::string> process_args;
    bool wb = false, floats = false;
    std::string gains_text;
    unsigned jobs = 1;
    double dolp_threshold = kDefaultDolpThreshold;
    InputOptions process_in;
    process->add_option("--mode", mode_text, "raw-split|pol-color|original|stokes|raw-irp|irp|fake")->required();
    process->add_flag("--wb", wb, "White-balance color outputs");
    process->add_option("--gains", gains_text, "Manual white-balance gains r,g,b (implies --wb)");
    process->add_flag("--float", floats, "Also write float32 planes (stokes, raw-irp, irp)");
    process->add_option("--jobs", jobs, "Parallel input files")->check(CLI::Range(1u, 256u));
    process->add_option("--dolp-threshold", dolp_threshold, "AoLP validity threshold on DoLP");
    add_input_flags(process, process_in);
    process->add_option("paths", process_args, "Input images followed by the output directory")->required()->expected(2, -1);

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "Fit, apply or report a calibration");
    calibrate->require_subcommand(1);
    auto* cal_fit = calibrate->add_subcommand("fit", "Fit per-pixel models from flat-field frames");
    std::string fit_angles, fit_out, fit_dark;
    bool fit_unknown = false, fit_assume = false;
    double fit_dolp = 1.0;
    unsigned fit_threads = 1;
    std::vector<std::string> fit_frames;
    cal_fit->add_option("--angles", fit_angles, "Reference AoLP per frame in degrees, comma separated");
    cal_fit->add_flag("--unknown-angles", fit_unknown, "Estimate the reference angles (experimental)");
    cal_fit->add_option("--reference-dolp", fit_dolp, "DoLP of the calibration light");
    cal_fit->add_option("--dark", fit_dark, "Dark frame");
    cal_fit->add_option("--jobs", fit_threads, "Fitting threads")->check(CLI::Range(1u, 256u));
    cal_fit->add_flag("--assume-layout", fit_assume, "Use the default layout when sidecars are missing");
    cal_fit->add_option("--out", fit_out, "Calibration file (JSON; planes go to <out>.bin)")->required();
    cal_fit->add_option("frames", fit_frames, "Flat-field frames")->required();

    auto* cal_apply = calibrate->add_subcommand("apply", "Correct a raw mosaic");
    std::string apply_cal, apply_in, apply_out;
    bool apply_assume = false;
    cal_apply->add_option("--calibration", apply_cal, "Calibration file")->required();
    cal_apply->add_flag("--assume-layout", apply_assume, "Use the default layout when the sidecar is missing");
    cal_apply->add_option("input", apply_in, "Raw input")->required();
    cal_apply->add_option("output", apply_out, "Corrected raw output (.png or .pgm)")->required();

    auto* cal_report = calibrate->add_subcommand("report", "Quality report before and after correction");
    std::string report_cal, report_before, report_after, report_out;
    bool report_assume = false;
    cal_report->add_option("--calibration", report_cal, "Calibration file")->required();
    cal_report->add_flag("--assume-layout", report_assume, "Use the default layout when sidecars are missing");
    cal_report->add_option("--out", report_out, "Write the report here instead of stdout");
    cal_report->add_option("before", report_before, "Uncorrected raw image")->required();
    cal_report->add_option("after", report_after, "Corrected raw image (default: correct `before`)");

    // wb
    auto* wbcmd = app.add_subcommand("wb", "Compute automatic white-balance gains");
    std::string wb_in;
    int wb_angle = 0;
    double wb_sat = kDefaultSaturationFraction;
    InputOptions wb_opts;
    wbcmd->add_option("--angle", wb_angle, "Orientation driving the search (0, 45, 90, 135)");
    wbcmd->add_option("--saturation", wb_sat, "Saturation fraction of full-scale");
    add_input_flags(wbcmd, wb_opts);
    wbcmd->add_option("input", wb_in, "Raw input")->required();

    // filter / despec
    auto* filter = app.add_subcommand("filter", "Simulate a linear polarizer");
    double theta_deg = 0, filter_q = 1, filter_r = 0;
    bool filter_wb = false;
    std::string filter_in, filter_out;
    InputOptions filter_opts;
    filter->add_option("--theta", theta_deg, "Filter angle in degrees")->required();
    filter->add_option("--q", filter_q, "Major transmittance");
    filter->add_option("--r", filter_r, "Minor transmittance");
    filter->add_flag("--wb", filter_wb, "White-balance both images");
    add_input_flags(filter, filter_opts);
    filter->add_option("input", filter_in, "Raw input")->required();
    filter->add_option("outdir", filter_out, "Output directory")->required();

    auto* despec = app.add_subcommand("despec", "Remove polarized specular reflections");
    bool despec_wb = false;
    std::string despec_in, despec_out;
    InputOptions despec_opts;
    despec->add_flag("--wb", despec_wb, "White-balance both images");
    add_input_flags(despec, despec_opts);
    despec->add_option("input", despec_in, "Raw input")->required();
    despec->add_option("outdir", despec_out, "Output directory")->required();

    // synth
    auto* synth = app.add_subcommand("synth", "Synthetic DoFP camera");
    synth->require_subcommand(1);
    auto* synth_render = synth->add_subcommand("render", "Render a scene into a raw mosaic");
    std::string scene_path, sensor_path, render_out;
    bool demo = false;
    std::size_t demo_w = 256, demo_h = 192;
    std::uint64_t seed = 0;
    unsigned render_jobs = 1;
    synth_render->add_option("--scene", scene_path, "Scene JSON");
    synth_render->add_flag("--demo", demo, "Use the urban demo scene");
    synth_render->add_option("--sensor", sensor_path, "Sensor JSON (default: ideal sensor, default layout)");
    synth_render->add_option("--width", demo_w, "Sensor width without --sensor")->check(CLI::PositiveNumber);
    synth_render->add_option("--height", demo_h, "Sensor height without --sensor")->check(CLI::PositiveNumber);
    synth_render->add_option("--seed", seed, "Noise seed");
    synth_render->add_option("--jobs", render_jobs, "Rendering threads")->check(CLI::Range(1u, 256u));
    synth_render->add_option("output", render_out, "Raw output (.png or .pgm)")->required();

    auto* synth_ff = synth->add_subcommand("flatfields", "Render a flat-field series");
    std::string ff_sensor, ff_angles, ff_out;
    std::size_t ff_count = 18;
    double ff_s0 = -1, ff_dolp = 1.0;
    std::uint64_t ff_seed = 0;
    synth_ff->add_option("--sensor", ff_sensor, "Sensor JSON")->required();
    synth_ff->add_option("--angles", ff_angles, "AoLPs in degrees (default: --count evenly spaced)");
    synth_ff->add_option("--count", ff_count, "Number of evenly spaced angles")->check(CLI::Range(3, 3600));
    synth_ff->add_option("--s0", ff_s0, "Flat-field S0 in counts (default: 0.75 full-scale)");
    synth_ff->add_option("--dolp", ff_dolp, "DoLP of the light");
    synth_ff->add_option("--seed", ff_seed, "Noise seed");
    synth_ff->add_option("outdir", ff_out, "Output directory")->required();

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string host = "127.0.0.1";
    int port = 8080;
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("argument", e.what(), exit_code(ErrorCode::Argument));
    }

    try {
        if (*process) {
            const Mode mode = parse_mode(mode_text);
            const fs::path outdir = process_args.back();
            const std::vector<std::string> inputs(process_args.begin(), process_args.end() - 1);
            ProcessOptions po;
            po.gains = parse_gains(gains_text);
            po.white_balance = wb || po.gains.has_value();
            po.dolp_threshold = dolp_threshold;
            staged(outdir, [&](const fs::path& tmp) {
                for_each_input(inputs.size(), jobs, [&](std::size_t i) {
                    const RawMosaic m = load_input(inputs[i], process_in);
                    fs::path dir = tmp;
                    if (inputs.size() > 1) {
                        dir /= fs::path(inputs[i]).stem();
                        fs::create_directories(dir);
                    }
                    for (const auto& img : render_mode(m, mode, po)) write_png(dir / (img.name + ".png"), img.image);
                    if (floats) write_float_planes(dir, float_planes(m, mode, dolp_threshold));
                });
            });
        } else if (*cal_fit) {
            ReadOptions ro{fit_assume, warn};
            FlatFieldSet set;
            set.reference_dolp = fit_dolp;
            std::vector<double> angles;
            if (!fit_angles.empty()) angles = parse_list(fit_angles);
            if (fit_unknown && !angles.empty()) fail(ErrorCode::Argument, "--angles and --unknown-angles exclude each other");
            if (!fit_unknown && angles.empty()) fail(ErrorCode::Argument, "give --angles or --unknown-angles");
            if (!angles.empty() && angles.size() != fit_frames.size())
                fail(ErrorCode::Argument, std::to_string(angles.size()) + " angles for " +
                                              std::to_string(fit_frames.size()) + " frames");
            for (std::size_t k = 0; k < fit_frames.size(); ++k)
                set.frames.push_back({read_raw(fit_frames[k], ro).mosaic,
                                      angles.empty() ? std::nullopt : std::optional<double>(angles[k] * kDeg)});
            if (!fit_dark.empty()) set.dark = read_raw(fit_dark, ro).mosaic;
            FitOptions fo;
            fo.threads = fit_threads;
            const CalibrationMaps maps = fit_calibration(set, fo);
            save_calibration(maps, fit_out);
            std::cout << json{{"fingerprint", maps.fingerprint()}, {"metadata", to_json(maps.metadata())},
                              {"parameters", to_json(parameter_stats(maps))}}
                             .dump(2)
                      << '\n';
        } else if (*cal_apply) {
            const CalibrationMaps maps = load_calibration(apply_cal);
            RawImageFile file = read_raw(apply_in, {apply_assume, warn});
            file.mosaic = correct_mosaic(file.mosaic, maps);
            file.calibration_fingerprint = maps.fingerprint();
            const fs::path out = fs::absolute(apply_out);
            const fs::path tmp = out.parent_path() / ("." + out.filename().string() + ".tmp-" + std::to_string(::getpid()));
            write_raw(tmp, file);
            fs::rename(tmp, out);
            fs::rename(sidecar_path(tmp), sidecar_path(out));
        } else if (*cal_report) {
            const CalibrationMaps maps = load_calibration(report_cal);
            const RawMosaic before = read_raw(report_before, {report_assume, warn}).mosaic;
            const RawMosaic after = report_after.empty() ? correct_mosaic(before, maps)
                                                         : read_raw(report_after, {report_assume, warn}).mosaic;
            const std::string text = to_json(calibration_report(maps, before, after)).dump(2) + "\n";
            if (report_out.empty())
                std::cout << text;
            else
                write_text(report_out, text);
        } else if (*wbcmd) {
            const RawMosaic m = load_input(wb_in, wb_opts);
            ProcessOptions po;
            po.white_balance = true;
            po.wb_angle = angle_from_degrees(wb_angle);
            po.saturation_fraction = wb_sat;
            const WhiteBalanceGains g = *resolve_gains(m, po);
            std::cout << json{{"r", g.r}, {"g", g.g}, {"b", g.b}}.dump() << '\n';
        } else if (*filter || *despec) {
            const bool is_filter = filter->parsed();
            const RawMosaic m = load_input(is_filter ? filter_in : despec_in, is_filter ? filter_opts : despec_opts);
            const bool balance = is_filter ? filter_wb : despec_wb;
            ProcessOptions po;
            po.white_balance = balance;
            const auto gains = resolve_gains(m, po);
            FilterResult r = is_filter ? simulate_filter(m, FilterSpec{theta_deg * kDeg, filter_q, filter_r})
                                       : remove_specularity(m);
            if (gains) {
                r.original = apply_gains(r.original, *gains);
                r.filtered = apply_gains(r.filtered, *gains);
            }
            staged(is_filter ? filter_out : despec_out, [&](const fs::path& tmp) {
                write_png(tmp / "original.png", color_display(r.original));
                write_png(tmp / "filtered.png", is_filter ? filtered_display(r) : color_display(r.filtered));
            });
        } else if (*synth_render) {
            if (demo == !scene_path.empty()) fail(ErrorCode::Argument, "give exactly one of --scene and --demo");
            SensorSpec sensor;
            if (!sensor_path.empty()) {
                const auto bytes = read_file(sensor_path);
                sensor = sensor_from_json(json::parse(bytes.begin(), bytes.end()), fs::path(sensor_path).parent_path());
            } else {
                sensor.width = demo_w;
                sensor.height = demo_h;
                sensor.layout = default_layout();
            }
            sensor.threads = render_jobs;
            SceneSpec scene;
            if (demo) {
                scene = urban_demo_scene(sensor.width / 2, sensor.height / 2, sensor.layout.full_scale());
            } else {
                const auto bytes = read_file(scene_path);
                scene = scene_from_json(json::parse(bytes.begin(), bytes.end()));
            }
            const Rendering r = render(scene, sensor, seed);
            const fs::path out = fs::absolute(render_out);
            const fs::path tmp = out.parent_path() / ("." + out.filename().string() + ".tmp-" + std::to_string(::getpid()));
            write_raw(tmp, r.mosaic);
            fs::rename(tmp, out);
            fs::rename(sidecar_path(tmp), sidecar_path(out));
        } else if (*synth_ff) {
            const auto bytes = read_file(ff_sensor);
            const SensorSpec sensor = sensor_from_json(json::parse(bytes.begin(), bytes.end()), fs::path(ff_sensor).parent_path());
            std::vector<double> angles = ff_angles.empty() ? even_angles(ff_count) : parse_list(ff_angles);
            if (!ff_angles.empty())
                for (double& a : angles) a *= kDeg;
            const double s0 = ff_s0 >= 0 ? ff_s0 : 0.75 * sensor.layout.full_scale();
            const FlatFieldSet set = flat_field_series(sensor, angles, s0, ff_seed, ff_dolp);
            staged(ff_out, [&](const fs::path& tmp) {
                json index = {{"reference_dolp", ff_dolp}, {"s0", s0}, {"frames", json::array()}};
                for (std::size_t k = 0; k < set.frames.size(); ++k) {
                    char name[32];
                    std::snprintf(name, sizeof name, "frame_%03zu.png", k);
                    write_raw(tmp / name, set.frames[k].mosaic);
                    index["frames"].push_back({{"file", name}, {"aolp_deg", *set.frames[k].reference_aolp / kDeg}});
                }
                write_text(tmp / "angles.json", index.dump(2) + "\n");
            });
        } else if (*serve) {
            Service service;
            std::cerr << "polakit service on http://" << host << ":" << port << '\n';
            if (!run_server(service, host, port)) fail(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
        }
    } catch (const Error& e) {
        return report_error(e.category(), e.what(), exit_code(e.code()));
    } catch (const json::exception& e) {
        return report_error(category_name(ErrorCode::MalformedContainer), e.what(),
                            exit_code(ErrorCode::MalformedContainer));
    } catch (const fs::filesystem_error& e) {
        return report_error(category_name(ErrorCode::Io), e.what(), exit_code(ErrorCode::Io));
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 1);
    }
    return 0;
}
