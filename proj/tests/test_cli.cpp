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

#include "polakit/image_io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "test_support.hpp"

using namespace polakit;
using namespace polakit::testing;

namespace {

struct Run {
    int code = -1;
    std::string err;
};

Run run(const TempDir& dir, const std::string& args) {
    const auto err_path = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + POLAKIT_CLI_PATH + "\" " + args + " >/dev/null 2>\"" +
                            err_path.string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (std::filesystem::exists(err_path)) {
        const auto bytes = read_file(err_path);
        r.err.assign(bytes.begin(), bytes.end());
    }
    return r;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

nlohmann::json error_body(const Run& r) {
    const auto line = r.err.substr(r.err.rfind('{', r.err.find("\"error\"")));
    return nlohmann::json::parse(line.substr(0, line.find('\n')));
}

} // namespace

TEST_CASE("process writes every image of a mode") {
    TempDir dir("cli");
    REQUIRE(run(dir, "synth render --demo --width 64 --height 48 --seed 1 " + q(dir / "in.png")).code == 0);
    CHECK(std::filesystem::exists(dir / "in.png.json"));
    REQUIRE(run(dir, "process --mode stokes --float " + q(dir / "in.png") + " " + q(dir / "out")).code == 0);
    std::size_t png = 0, f32 = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir / "out")) {
        png += e.path().extension() == ".png";
        f32 += e.path().extension() == ".f32";
    }
    CHECK(png == 12);
    CHECK(f32 == 12);
    CHECK(std::filesystem::file_size(dir / "out" / "stokes_s0_R.f32") == 4 * 16 * 12);
    const auto manifest = nlohmann::json::parse(read_file(dir / "out" / "planes.json"));
    CHECK(manifest.at("planes").size() == 12);
}

TEST_CASE("exit codes and error bodies") {
    TempDir dir("clierr");
    REQUIRE(run(dir, "synth render --demo --width 32 --height 32 " + q(dir / "in.png")).code == 0);

    Run r = run(dir, "process --mode sepia " + q(dir / "in.png") + " " + q(dir / "o1"));
    CHECK(r.code == 2);
    CHECK(error_body(r).at("error").at("category") == "unknown_mode");
    CHECK_FALSE(std::filesystem::exists(dir / "o1"));

    r = run(dir, "process --mode irp " + q(dir / "missing.png") + " " + q(dir / "o2"));
    CHECK(r.code == 3);
    CHECK_FALSE(std::filesystem::exists(dir / "o2"));

    std::filesystem::copy_file(dir / "in.png", dir / "bare.png");
    r = run(dir, "process --mode irp " + q(dir / "bare.png") + " " + q(dir / "o3"));
    CHECK(r.code == 3);
    CHECK(error_body(r).at("error").at("category") == "missing_sidecar");
    r = run(dir, "process --mode irp --assume-layout " + q(dir / "bare.png") + " " + q(dir / "o3"));
    CHECK(r.code == 0);
    CHECK(r.err.find("warning:") != std::string::npos);

    r = run(dir, "process --bogus-flag");
    CHECK(r.code == 2);

    // A failing input in a batch leaves no output behind.
    r = run(dir, "process --mode fake --jobs 2 " + q(dir / "in.png") + " " + q(dir / "missing.png") + " " +
                     q(dir / "o4"));
    CHECK(r.code == 3);
    CHECK_FALSE(std::filesystem::exists(dir / "o4"));

    r = run(dir, "filter --theta 30 --q 0.2 --r 0.5 " + q(dir / "in.png") + " " + q(dir / "o5"));
    CHECK(r.code == 2);
}

TEST_CASE("calibration workflow and fingerprint checks") {
    TempDir dir("clical");
    const std::string sensor = R"({"width":32,"height":32,"noise":0.002,
        "pixels":{"kind":"randomized","seed":4,"theta_jitter_deg":3}})";
    write_text(dir / "sensor.json", sensor);
    REQUIRE(run(dir, "synth flatfields --sensor " + q(dir / "sensor.json") + " --count 12 " + q(dir / "ff")).code == 0);
    const auto index = nlohmann::json::parse(read_file(dir / "ff" / "angles.json"));
    std::string angles, frames;
    for (const auto& f : index.at("frames")) {
        angles += (angles.empty() ? "" : ",") + std::to_string(f.at("aolp_deg").get<double>());
        frames += " " + q(dir / "ff" / f.at("file").get<std::string>());
    }
    REQUIRE(run(dir, "calibrate fit --angles " + angles + " --out " + q(dir / "cal.json") + frames).code == 0);
    CHECK(std::filesystem::exists(dir / "cal.json.bin"));
    Run r = run(dir, "calibrate fit --angles 0,10 --out " + q(dir / "x.json") + frames);
    CHECK(r.code == 2);

    REQUIRE(run(dir, "synth render --demo --sensor " + q(dir / "sensor.json") + " " + q(dir / "scene.png")).code == 0);
    REQUIRE(run(dir, "calibrate apply --calibration " + q(dir / "cal.json") + " " + q(dir / "scene.png") + " " +
                         q(dir / "fixed.png")).code == 0);
    const RawImageFile fixed = read_raw(dir / "fixed.png");
    CHECK(fixed.mosaic.provenance() == Provenance::Calibrated);
    CHECK(fixed.calibration_fingerprint.has_value());
    REQUIRE(run(dir, "calibrate report --calibration " + q(dir / "cal.json") + " --out " + q(dir / "rep.json") + " " +
                         q(dir / "scene.png")).code == 0);
    CHECK(nlohmann::json::parse(read_file(dir / "rep.json")).at("channels").size() == 4);

    REQUIRE(run(dir, "synth render --demo --width 64 --height 32 " + q(dir / "other.png")).code == 0);
    r = run(dir, "process --mode irp --calibration " + q(dir / "cal.json") + " " + q(dir / "other.png") + " " +
                     q(dir / "o"));
    CHECK(r.code == 4);
    write_text(dir / "sensor10.json", R"({"width":32,"height":32,"layout":"pol=90,45,135,0;cfa=R,G1,G2,B;bits=10"})");
    REQUIRE(run(dir, "synth render --demo --sensor " + q(dir / "sensor10.json") + " " + q(dir / "ten.png")).code == 0);
    r = run(dir, "calibrate apply --calibration " + q(dir / "cal.json") + " " + q(dir / "ten.png") + " " +
                     q(dir / "t2.png"));
    CHECK(r.code == 6);
    CHECK(error_body(r).at("error").at("category") == "fingerprint_mismatch");
}

TEST_CASE("white balance, filter and despec commands") {
    TempDir dir("cliwb");
    REQUIRE(run(dir, "synth render --demo --width 64 --height 48 " + q(dir / "in.png")).code == 0);
    const std::string cmd = std::string("\"") + POLAKIT_CLI_PATH + "\" wb " + q(dir / "in.png") + " > " +
                            q(dir / "gains.json");
    REQUIRE(std::system(cmd.c_str()) == 0);
    const auto gains = nlohmann::json::parse(read_file(dir / "gains.json"));
    CHECK(std::min({gains.at("r").get<double>(), gains.at("g").get<double>(), gains.at("b").get<double>()}) == 1.0);
    CHECK(run(dir, "filter --theta 90 --wb " + q(dir / "in.png") + " " + q(dir / "f")).code == 0);
    CHECK(std::filesystem::exists(dir / "f" / "filtered.png"));
    CHECK(run(dir, "despec " + q(dir / "in.png") + " " + q(dir / "d")).code == 0);
    CHECK(std::filesystem::exists(dir / "d" / "original.png"));
}
