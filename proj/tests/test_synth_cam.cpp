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

#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace polakit;
using namespace polakit::testing;

TEST_CASE("counter-based generator") {
    CHECK(uniform_at(1, 2, 3) == uniform_at(1, 2, 3));
    CHECK(uniform_at(1, 2, 3) != uniform_at(1, 2, 4));
    CHECK(uniform_at(1, 2, 3) != uniform_at(2, 2, 3));
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = uniform_at(9, 0, i);
        CHECK_UNARY(u > 0.0);
        CHECK_UNARY(u < 1.0);
        const double g = gaussian_at(9, 1, i);
        sum += g;
        sq += g * g;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("ideal noise-free rendering matches the measurement model") {
    SensorSpec sensor = ideal_sensor(8, 8, false);
    sensor.dark = 7;
    const Rendering r = render(uniform_scene(4, 4, {2000, 0.5, 0.3}), sensor, 0);
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 8; ++x) {
            const double th = radians(sensor.layout.angle_at(x, y));
            const double want = 0.5 * (2000 + 1000 * std::cos(2 * (th - 0.3))) + 7;
            CHECK(r.signal(x, y) == doctest::Approx(want).epsilon(1e-12));
            CHECK(r.mosaic(x, y) == std::nearbyint(want));
        }
}

TEST_CASE("randomized pixels respect their ranges") {
    SensorSpec sensor = randomized_sensor(32, 32, 5);
    const auto px = realize_pixels(sensor);
    for (std::size_t i = 0; i < px.size(); ++i) {
        CHECK(px[i].t >= 0.45);
        CHECK(px[i].t <= 0.55);
        CHECK(px[i].p >= 0.9);
        CHECK(px[i].p <= 1.0);
        const double nominal = radians(sensor.layout.angle_at(i % 32, i / 32));
        CHECK(std::abs(axial_diff(px[i].theta, nominal)) <= 3 * kDeg + 1e-12);
    }
    CHECK(realize_pixels(sensor) == px);
    sensor.source.seed = 6;
    CHECK(realize_pixels(sensor) != px);
}

TEST_CASE("gain falloff and vignetting") {
    SensorSpec sensor = ideal_sensor(16, 16);
    sensor.gain_falloff = 0.2;
    const auto px = realize_pixels(sensor);
    CHECK(px[0].t == doctest::Approx(0.5 * 0.8));
    CHECK(px[7 * 16 + 7].t > 0.49);
    SceneSpec scene = uniform_scene(8, 8, {1000, 0, 0});
    scene.vignetting = 0.15;
    CHECK(scene.light_at(0, 0, Color::R).s0 == doctest::Approx(850));
    CHECK(scene.light_at(7, 7, Color::B).s0 == doctest::Approx(850));
}

TEST_CASE("noise statistics") {
    SensorSpec sensor = ideal_sensor(64, 64, false);
    sensor.noise = 0.01;
    const Rendering r = render(uniform_scene(32, 32, {2000, 0, 0}), sensor, 17);
    double sum = 0, sq = 0;
    for (double v : r.signal.data()) {
        sum += v - 1000;
        sq += (v - 1000) * (v - 1000);
    }
    const double n = static_cast<double>(r.signal.data().size());
    CHECK(std::abs(sum / n) < 2.0);
    CHECK(std::sqrt(sq / n) == doctest::Approx(0.01 * 4095).epsilon(0.05));
}

TEST_CASE("rendering is independent of the thread count") {
    SensorSpec sensor = randomized_sensor(64, 48, 3);
    sensor.noise = 0.01;
    sensor.shot_noise = true;
    const SceneSpec scene = urban_demo_scene(32, 24, 4095.0);
    const Rendering one = render(scene, sensor, 99);
    sensor.threads = 4;
    const Rendering four = render(scene, sensor, 99);
    CHECK(one.mosaic == four.mosaic);
    CHECK(one.signal == four.signal);
    CHECK(render(scene, sensor, 100).mosaic != one.mosaic);
}

TEST_CASE("spec validation") {
    SensorSpec sensor = ideal_sensor(16, 16);
    CHECK_THROWS_AS(render(uniform_scene(4, 8, {}), sensor, 0), Error);
    SensorSpec bad = sensor;
    bad.source.kind = PixelSourceKind::Randomized;
    bad.source.t_min = 0.7;
    bad.source.t_max = 0.6;
    try {
        bad.validate();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Configuration);
    }
    SceneSpec scene = uniform_scene(8, 8, {100, 1.5, 0});
    CHECK_THROWS_AS(scene.validate(), Error);
}

TEST_CASE("scene and sensor JSON round-trip") {
    const SceneSpec scene = urban_demo_scene(40, 30, 4095.0);
    CHECK(scene_from_json(nlohmann::json::parse(to_json(scene).dump())) == scene);
    SensorSpec sensor = randomized_sensor(80, 60, 4);
    sensor.noise = 0.003;
    sensor.dark = 12;
    sensor.gain_falloff = 0.1;
    SensorSpec back = sensor_from_json(nlohmann::json::parse(to_json(sensor).dump()));
    CHECK(back.source.theta_jitter == doctest::Approx(sensor.source.theta_jitter));
    back.source.theta_jitter = sensor.source.theta_jitter;
    CHECK(back == sensor);
    const auto j = nlohmann::json::parse(R"({"width":8,"height":8,"regions":[
        {"kind":"gradient","axis":"y","from":{"all":{"s0":100,"dolp":0,"aolp_deg":0}},
         "to":{"R":{"s0":300,"dolp":1,"aolp_deg":90},"G1":{"s0":300,"dolp":0,"aolp_deg":0},
               "G2":{"s0":300,"dolp":0,"aolp_deg":0},"B":{"s0":300,"dolp":0,"aolp_deg":0}}}]})");
    const SceneSpec g = scene_from_json(j);
    CHECK(g.light_at(0, 7, Color::R).s0 == doctest::Approx(300));
    CHECK(g.light_at(0, 7, Color::R).aolp == doctest::Approx(kPi / 2));
    CHECK(g.light_at(3, 0, Color::R).s0 == doctest::Approx(100));
    CHECK_THROWS_AS(scene_from_json(nlohmann::json::parse(R"({"width":8})")), Error);
}

TEST_CASE("flat-field series") {
    SensorSpec sensor = ideal_sensor(8, 8);
    const auto angles = even_angles(4);
    CHECK(angles[1] == doctest::Approx(kPi / 4));
    const FlatFieldSet set = flat_field_series(sensor, angles, 2000, 0);
    REQUIRE(set.frames.size() == 4);
    CHECK(*set.frames[2].reference_aolp == doctest::Approx(kPi / 2));
    const FlatFieldSet blind = flat_field_series(sensor, angles, 2000, 0, 1.0, false);
    CHECK_FALSE(blind.frames[0].reference_aolp.has_value());
    CHECK(blind.frames[0].mosaic == set.frames[0].mosaic);
}
