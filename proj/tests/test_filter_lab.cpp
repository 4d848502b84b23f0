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

#include "polakit/filter_lab.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace polakit;
using namespace polakit::testing;

TEST_CASE("filter intensity follows the polarizer model") {
    StokesMap s = make_stokes_map(2, 1, SensorLayout{});
    s.set(Color::R, 0, 0, {1000, 600, 0});
    s.set(Color::R, 1, 0, {1000, 0, 0});
    for (double theta : {0.0, 0.4, 1.2, 2.9}) {
        const auto f = filter_intensity(s, {theta});
        CHECK(f[index(Color::R)](0, 0) == doctest::Approx(0.5 * (1000 + 600 * std::cos(2 * theta))));
        CHECK(f[index(Color::R)](1, 0) == doctest::Approx(500));
    }
    const auto lossy = filter_intensity(s, {0.0, 0.8, 0.1});
    CHECK(lossy[index(Color::R)](1, 0) == doctest::Approx(0.5 * 0.9 * 1000));
    CHECK_THROWS_AS(filter_intensity(s, {0.0, 0.2, 0.5}), Error);
    CHECK(FilterSpec{-0.25}.normalized().theta == doctest::Approx(kPi - 0.25));
}

TEST_CASE("simulated filter on a mosaic") {
    const Rendering r = render(uniform_scene(8, 8, {3000, 1.0, 30 * kDeg}), ideal_sensor(16, 16, false), 0);
    const FilterResult at_phi = simulate_filter(r.mosaic, {30 * kDeg});
    const FilterResult crossed = simulate_filter(r.mosaic, {120 * kDeg});
    CHECK(at_phi.original.full_scale == 2 * 4095);
    CHECK(at_phi.filtered.planes[0](3, 3) == doctest::Approx(3000).epsilon(1e-3));
    CHECK(crossed.filtered.planes[0](3, 3) < 2.0);
    const DisplayImage d = filtered_display(at_phi);
    CHECK(d.width == 8);
}

TEST_CASE("unpolarized component and specularity removal") {
    std::mt19937_64 rng(4);
    const SceneSpec scene = random_scene(6, 4, rng, 4095.0);
    const Rendering r = render(scene, ideal_sensor(12, 8, false), 0);
    const StokesMap s = compute_stokes_map(r.signal);
    const StokesMap u = unpolarized_component(s);
    for (Color c : kColors)
        for (std::size_t y = 0; y < u.height; ++y)
            for (std::size_t x = 0; x < u.width; ++x) {
                const StokesPixel in = s.at(c, x, y), out = u.at(c, x, y);
                const double rho = std::hypot(in.s1, in.s2) / in.s0;
                CHECK(out.s0 == doctest::Approx((1 - rho) * in.s0));
                CHECK(out.s1 == 0);
                CHECK(out.s2 == 0);
            }
    const StokesMap again = compute_stokes_map(unpolarized_mosaic(s));
    for (Color c : kColors)
        for (std::size_t y = 0; y < again.height; ++y)
            for (std::size_t x = 0; x < again.width; ++x) {
                const StokesPixel p = again.at(c, x, y);
                CHECK(std::hypot(p.s1, p.s2) < 1e-10 * std::max(1.0, p.s0));
                CHECK(p.s0 <= s.at(c, x, y).s0 + 1e-9);
            }
    const FilterResult d = remove_specularity(s);
    for (std::size_t ch = 0; ch < 3; ++ch)
        for (std::size_t i = 0; i < d.original.planes[ch].size(); ++i)
            CHECK(d.filtered.planes[ch].data()[i] <= d.original.planes[ch].data()[i] + 1e-9);
}

TEST_CASE("extinction angle") {
    CHECK(extinction_angle(polar_params({100, 0, 100})) == doctest::Approx(3 * kPi / 4));
    CHECK(extinction_angle(polar_params({100, 100, 0})) == doctest::Approx(kPi / 2));
    CHECK(extinction_angle(polar_params({100, -100, 0})) == doctest::Approx(0.0));
    try {
        extinction_angle(polar_params({100, 0.1, 0}));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoPolarization);
    }
}
