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

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace polakit {

std::string_view name(Color c) {
    switch (c) {
    case Color::R: return "R";
    case Color::G1: return "G1";
    case Color::G2: return "G2";
    case Color::B: return "B";
    }
    return "?";
}

std::string_view name(Provenance p) {
    return p == Provenance::Raw ? "raw" : "calibrated";
}

Color parse_color(std::string_view text) {
    for (Color c : kColors)
        if (text == name(c)) return c;
    fail(ErrorCode::Argument, "unknown color channel '" + std::string(text) + "'");
}

PolAngle angle_from_degrees(int deg) {
    switch (deg) {
    case 0: return PolAngle::Deg0;
    case 45: return PolAngle::Deg45;
    case 90: return PolAngle::Deg90;
    case 135: return PolAngle::Deg135;
    default: fail(ErrorCode::Argument, "polarizer angle must be 0, 45, 90 or 135, got " +
                                           std::to_string(deg));
    }
}

Provenance parse_provenance(std::string_view text) {
    if (text == "raw") return Provenance::Raw;
    if (text == "calibrated") return Provenance::Calibrated;
    fail(ErrorCode::Argument, "unknown provenance '" + std::string(text) + "'");
}

void SensorLayout::validate() const {
    std::array<int, 4> angles{}, colors{};
    for (const auto& row : pol_pattern)
        for (PolAngle a : row) ++angles[index(a)];
    for (const auto& row : cfa_pattern)
        for (Color c : row) ++colors[index(c)];
    if (!std::all_of(angles.begin(), angles.end(), [](int n) { return n == 1; }))
        fail(ErrorCode::Configuration, "polarizer pattern must hold each orientation exactly once");
    // G1 and G2 together make the two green sites.
    if (colors[index(Color::R)] != 1 || colors[index(Color::B)] != 1 ||
        colors[index(Color::G1)] != 1 || colors[index(Color::G2)] != 1)
        fail(ErrorCode::Configuration, "CFA pattern must hold R, G1, G2 and B exactly once");
    if (bit_depth < 8 || bit_depth > 16)
        fail(ErrorCode::Configuration, "bit depth must lie in [8, 16]");
}

Offset SensorLayout::offset_of(PolAngle a) const {
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 2; ++x)
            if (pol_pattern[y][x] == a) return {x, y};
    fail(ErrorCode::Configuration, "orientation missing from polarizer pattern");
}

Offset SensorLayout::offset_of(Color c) const {
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 2; ++x)
            if (cfa_pattern[y][x] == c) return {x, y};
    fail(ErrorCode::Configuration, "color missing from CFA pattern");
}

std::string SensorLayout::to_string() const {
    std::ostringstream os;
    os << "pol=" << degrees(pol_pattern[0][0]) << ',' << degrees(pol_pattern[0][1]) << ','
       << degrees(pol_pattern[1][0]) << ',' << degrees(pol_pattern[1][1]) << ";cfa="
       << name(cfa_pattern[0][0]) << ',' << name(cfa_pattern[0][1]) << ','
       << name(cfa_pattern[1][0]) << ',' << name(cfa_pattern[1][1]) << ";bits=" << bit_depth;
    return os.str();
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(sep, start), text.size());
        out.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

} // namespace

SensorLayout SensorLayout::parse(std::string_view text) {
    SensorLayout layout;
    for (const std::string& field : split(text, ';')) {
        if (field.empty()) continue;
        const auto eq = field.find('=');
        if (eq == std::string::npos) fail(ErrorCode::Argument, "malformed layout field '" + field + "'");
        const std::string key = field.substr(0, eq);
        const auto values = split(std::string_view(field).substr(eq + 1), ',');
        try {
            if (key == "pol") {
                if (values.size() != 4) fail(ErrorCode::Argument, "pol needs 4 angles");
                for (std::size_t i = 0; i < 4; ++i)
                    layout.pol_pattern[i / 2][i % 2] = angle_from_degrees(std::stoi(values[i]));
            } else if (key == "cfa") {
                if (values.size() != 4) fail(ErrorCode::Argument, "cfa needs 4 tags");
                for (std::size_t i = 0; i < 4; ++i)
                    layout.cfa_pattern[i / 2][i % 2] = parse_color(values[i]);
            } else if (key == "bits") {
                layout.bit_depth = std::stoi(values.at(0));
            } else {
                fail(ErrorCode::Argument, "unknown layout key '" + key + "'");
            }
        } catch (const std::logic_error&) {
            fail(ErrorCode::Argument, "malformed layout field '" + field + "'");
        }
    }
    layout.validate();
    return layout;
}

SensorLayout default_layout() {
    if (const char* env = std::getenv("POLAKIT_LAYOUT"); env && *env) return SensorLayout::parse(env);
    return SensorLayout{};
}

} // namespace polakit
