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

#include "polakit/pipeline.hpp"

#include <doctest.h>

#include <set>

#include "test_support.hpp"

using namespace polakit;
using namespace polakit::testing;

namespace {

RawMosaic demo_mosaic() {
    return render(urban_demo_scene(32, 24, 4095.0), ideal_sensor(64, 48), 1).mosaic;
}

} // namespace

TEST_CASE("mode names") {
    for (Mode m : kModes) CHECK(parse_mode(name(m)) == m);
    try {
        parse_mode("sepia");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownMode);
    }
}

TEST_CASE("every mode emits the documented image set") {
    const RawMosaic m = demo_mosaic();
    const std::map<Mode, std::size_t> counts{{Mode::RawSplit, 4}, {Mode::PolColor, 4}, {Mode::Original, 1},
                                             {Mode::Stokes, 12},  {Mode::RawIrp, 12},  {Mode::Irp, 12},
                                             {Mode::Fake, 4}};
    ProcessOptions po;
    po.white_balance = true;
    for (auto [mode, n] : counts) {
        const auto images = render_mode(m, mode, po);
        CHECK(images.size() == n);
        std::set<std::string> names;
        for (const auto& img : images) {
            names.insert(img.name);
            CHECK(img.image.rgb.size() == 3 * img.image.width * img.image.height);
        }
        CHECK(names.size() == n);
    }
    const auto raw = render_mode(m, Mode::RawSplit, {});
    CHECK(raw[0].name == "raw_000");
    CHECK(raw[0].image.width == 32);
    const auto stokes = render_mode(m, Mode::Stokes, {});
    CHECK(stokes[0].name == "stokes_s0_R");
    CHECK(stokes[0].image.width == 16);
    CHECK(render_mode(m, Mode::Original, {})[0].image.width == 32);
}

TEST_CASE("white balance only changes color modes on request") {
    const RawMosaic m = demo_mosaic();
    ProcessOptions on;
    on.white_balance = true;
    CHECK(render_mode(m, Mode::Stokes, on)[3].image.rgb == render_mode(m, Mode::Stokes, {})[3].image.rgb);
    CHECK(resolve_gains(m, {}) == std::nullopt);
    ProcessOptions manual = on;
    manual.gains = WhiteBalanceGains::manual(1, 1, 1);
    CHECK(render_mode(m, Mode::Original, manual)[0].image.rgb == render_mode(m, Mode::Original, {})[0].image.rgb);
}

TEST_CASE("float planes") {
    const RawMosaic m = demo_mosaic();
    CHECK(float_planes(m, Mode::Stokes).size() == 12);
    const auto irp = float_planes(m, Mode::Irp);
    REQUIRE(irp.size() == 12);
    CHECK(irp[0].name == "param_intensity_R");
    CHECK(float_planes(m, Mode::Fake).empty());
}
