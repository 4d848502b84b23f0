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

#include "polakit/sensor_model.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace polakit;

namespace {

RawMosaic counting_mosaic(std::size_t w, std::size_t h, const SensorLayout& layout = {}) {
    std::vector<std::uint16_t> data(w * h);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::uint16_t>(i % 4096);
    return RawMosaic(w, h, layout, data);
}

} // namespace

TEST_CASE("default layout tags pixels like the reference sensor") {
    const SensorLayout l;
    CHECK(l.angle_at(0, 0) == PolAngle::Deg90);
    CHECK(l.angle_at(1, 0) == PolAngle::Deg45);
    CHECK(l.angle_at(0, 1) == PolAngle::Deg135);
    CHECK(l.angle_at(1, 1) == PolAngle::Deg0);
    CHECK(l.color_at(0, 0) == Color::R);
    CHECK(l.color_at(2, 0) == Color::G1);
    CHECK(l.color_at(0, 2) == Color::G2);
    CHECK(l.color_at(3, 3) == Color::B);
    CHECK(l.color_at(5, 6) == Color::G2);
    CHECK(l.color_at(5, 9) == Color::R);
    CHECK(l.full_scale() == 4095);
}

TEST_CASE("layout text form round-trips and rejects bad input") {
    SensorLayout l;
    l.pol_pattern = {{{PolAngle::Deg0, PolAngle::Deg45}, {PolAngle::Deg135, PolAngle::Deg90}}};
    l.cfa_pattern = {{{Color::B, Color::G1}, {Color::G2, Color::R}}};
    l.bit_depth = 10;
    CHECK(SensorLayout::parse(l.to_string()) == l);
    CHECK(SensorLayout{}.to_string() == "pol=90,45,135,0;cfa=R,G1,G2,B;bits=12");
    CHECK_THROWS_AS(SensorLayout::parse("pol=90,45,135,0;cfa=R,G1,G2,B;bits=20"), Error);
    CHECK_THROWS_AS(SensorLayout::parse("pol=90,90,135,0;cfa=R,G1,G2,B;bits=12"), Error);
    CHECK_THROWS_AS(SensorLayout::parse("pol=90,45,135,0;cfa=R,G1,G1,B;bits=12"), Error);
    CHECK_THROWS_AS(SensorLayout::parse("garbage"), Error);
}

TEST_CASE("layout override through the environment") {
    ::setenv("POLAKIT_LAYOUT", "pol=0,45,135,90;cfa=G1,R,B,G2;bits=10", 1);
    const SensorLayout l = default_layout();
    ::unsetenv("POLAKIT_LAYOUT");
    CHECK(l.angle_at(0, 0) == PolAngle::Deg0);
    CHECK(l.color_at(0, 0) == Color::G1);
    CHECK(l.bit_depth == 10);
    CHECK(default_layout() == SensorLayout{});
}

TEST_CASE("mosaic validation") {
    CHECK_THROWS_AS(RawMosaic(6, 8, SensorLayout{}), Error);
    CHECK_THROWS_AS(RawMosaic(8, 8, SensorLayout{}, std::vector<std::uint16_t>(63)), Error);
    try {
        RawMosaic(8, 8, SensorLayout{}, std::vector<std::uint16_t>(64, 4096));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Argument);
    }
}

TEST_CASE("split by angle picks the right pixels") {
    const RawMosaic m = counting_mosaic(8, 8);
    const auto stack = split_by_angle(m);
    REQUIRE(stack.channels.size() == 4);
    CHECK_FALSE(stack.color_resolved());
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 8; ++x)
            CHECK(stack.at(m.layout().angle_at(x, y))(x / 2, y / 2) == m(x, y));
}

TEST_CASE("split by color and angle picks the right pixels") {
    const RawMosaic m = counting_mosaic(16, 12);
    const auto stack = split_by_color_and_angle(m);
    REQUIRE(stack.channels.size() == 16);
    CHECK(stack.color_resolved());
    for (std::size_t y = 0; y < 12; ++y)
        for (std::size_t x = 0; x < 16; ++x) {
            const auto& plane = stack.at(m.layout().color_at(x, y), m.layout().angle_at(x, y));
            CHECK(plane.width() == 4);
            CHECK(plane(x / 4, y / 4) == m(x, y));
        }
}

TEST_CASE("merge inverts both splits for any layout") {
    SensorLayout l;
    l.pol_pattern = {{{PolAngle::Deg45, PolAngle::Deg0}, {PolAngle::Deg90, PolAngle::Deg135}}};
    l.cfa_pattern = {{{Color::G2, Color::B}, {Color::R, Color::G1}}};
    const RawMosaic m = counting_mosaic(12, 8, l);
    CHECK(merge_channels(split_by_angle(m), l) == m);
    CHECK(merge_channels(split_by_color_and_angle(m), l) == m);
}

TEST_CASE("merge rejects incomplete or inconsistent stacks") {
    const RawMosaic m = counting_mosaic(8, 8);
    auto stack = split_by_color_and_angle(m);
    stack.channels.erase(stack.channels.begin());
    CHECK_THROWS_AS(merge_channels(stack, m.layout()), Error);
    auto four = split_by_angle(m);
    four.channels.begin()->second = Plane<std::uint16_t>(3, 4);
    CHECK_THROWS_AS(merge_channels(four, m.layout()), Error);
}

TEST_CASE("names parse back") {
    for (Color c : kColors) CHECK(parse_color(name(c)) == c);
    for (Provenance p : {Provenance::Raw, Provenance::Calibrated}) CHECK(parse_provenance(name(p)) == p);
    for (PolAngle a : kAngles) CHECK(angle_from_degrees(degrees(a)) == a);
    CHECK_THROWS_AS(angle_from_degrees(30), Error);
    CHECK_THROWS_AS(parse_color("Y"), Error);
}
