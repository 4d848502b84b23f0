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

#include "polakit/error.hpp"
#include "polakit/plane.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace polakit {

// Bayer color tags at super-pixel granularity. G1 and G2 stay distinct so
// that Stokes maps keep four color channels.
enum class Color : std::uint8_t { R = 0, G1 = 1, G2 = 2, B = 3 };

// Micro-polarizer orientations. The enumerator value doubles as the row index
// of the measurement inside a super-pixel (0, 45, 90, 135 degrees).
enum class PolAngle : std::uint8_t { Deg0 = 0, Deg45 = 1, Deg90 = 2, Deg135 = 3 };

enum class Provenance : std::uint8_t { Raw, Calibrated };

inline constexpr std::array<Color, 4> kColors{Color::R, Color::G1, Color::G2, Color::B};
inline constexpr std::array<PolAngle, 4> kAngles{PolAngle::Deg0, PolAngle::Deg45,
                                                 PolAngle::Deg90, PolAngle::Deg135};

constexpr std::size_t index(Color c) { return static_cast<std::size_t>(c); }
constexpr std::size_t index(PolAngle a) { return static_cast<std::size_t>(a); }
constexpr int degrees(PolAngle a) { return 45 * static_cast<int>(a); }
constexpr double radians(PolAngle a) { return degrees(a) * std::numbers::pi / 180.0; }

// R -> 0, G1/G2 -> 1, B -> 2.
constexpr std::size_t display_channel(Color c) {
    switch (c) {
    case Color::R: return 0;
    case Color::G1:
    case Color::G2: return 1;
    case Color::B: return 2;
    }
    return 1;
}

std::string_view name(Color c);
std::string_view name(Provenance p);
Color parse_color(std::string_view text);
PolAngle angle_from_degrees(int deg);
Provenance parse_provenance(std::string_view text);

using PolPattern = std::array<std::array<PolAngle, 2>, 2>;
using CfaPattern = std::array<std::array<Color, 2>, 2>;

struct Offset {
    std::size_t x = 0;
    std::size_t y = 0;
};

// Polarizer grid x color filter array. pol_pattern[row][col] is the
// orientation of the pixel at (col, row) of every super-pixel; cfa_pattern
// tags the 2x2 arrangement of super-pixels inside one 4x4 period.
struct SensorLayout {
    PolPattern pol_pattern{{{PolAngle::Deg90, PolAngle::Deg45},
                            {PolAngle::Deg135, PolAngle::Deg0}}};
    CfaPattern cfa_pattern{{{Color::R, Color::G1}, {Color::G2, Color::B}}};
    int bit_depth = 12;

    void validate() const;
    std::uint16_t full_scale() const { return static_cast<std::uint16_t>((1u << bit_depth) - 1u); }

    PolAngle angle_at(std::size_t x, std::size_t y) const { return pol_pattern[y % 2][x % 2]; }
    Color color_at(std::size_t x, std::size_t y) const { return cfa_pattern[(y / 2) % 2][(x / 2) % 2]; }

    Offset offset_of(PolAngle a) const;
    Offset offset_of(Color c) const;

    // Compact text form, e.g. "pol=90,45,135,0;cfa=R,G1,G2,B;bits=12".
    std::string to_string() const;
    static SensorLayout parse(std::string_view text);

    bool operator==(const SensorLayout&) const = default;
};

// Default layout, overridable through the POLAKIT_LAYOUT environment variable
// (same syntax as SensorLayout::to_string).
SensorLayout default_layout();

// Raw DoFP frame. Counts are stored as T (uint16_t for sensor data, double
// for the synthetic camera's unquantized signal).
template <typename T>
class Mosaic {
public:
    Mosaic() = default;
    Mosaic(std::size_t width, std::size_t height, SensorLayout layout, std::vector<T> data,
           Provenance provenance = Provenance::Raw)
        : width_(width), height_(height), layout_(layout), data_(std::move(data)),
          provenance_(provenance) {
        validate();
    }
    Mosaic(std::size_t width, std::size_t height, SensorLayout layout, T fill = T{})
        : Mosaic(width, height, layout, std::vector<T>(width * height, fill)) {}

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    const SensorLayout& layout() const { return layout_; }
    Provenance provenance() const { return provenance_; }
    void set_provenance(Provenance p) { provenance_ = p; }

    T& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    const T& operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
    const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }

    bool operator==(const Mosaic&) const = default;

private:
    void validate() const {
        layout_.validate();
        if (width_ == 0 || height_ == 0 || width_ % 4 != 0 || height_ % 4 != 0)
            fail(ErrorCode::Structural, "mosaic dimensions " + std::to_string(width_) + "x" +
                                            std::to_string(height_) + " are not multiples of 4");
        if (data_.size() != width_ * height_)
            fail(ErrorCode::Structural, "mosaic buffer size does not match its dimensions");
        const double fs = layout_.full_scale();
        for (const T& v : data_) {
            if (!(v >= T{0}) || static_cast<double>(v) > fs)
                fail(ErrorCode::Argument, "mosaic count outside [0, full-scale]");
        }
    }

    std::size_t width_ = 0;
    std::size_t height_ = 0;
    SensorLayout layout_;
    std::vector<T> data_;
    Provenance provenance_ = Provenance::Raw;
};

using RawMosaic = Mosaic<std::uint16_t>;
using SignalMosaic = Mosaic<double>;

// Channel identifier; color is empty for color-agnostic (angle-only) splits.
struct ChannelKey {
    std::optional<Color> color;
    PolAngle angle = PolAngle::Deg0;

    friend bool operator<(const ChannelKey& a, const ChannelKey& b) {
        const int ca = a.color ? static_cast<int>(*a.color) : -1;
        const int cb = b.color ? static_cast<int>(*b.color) : -1;
        return std::pair(ca, index(a.angle)) < std::pair(cb, index(b.angle));
    }
    bool operator==(const ChannelKey&) const = default;
};

template <typename T>
struct ChannelStack {
    std::map<ChannelKey, Plane<T>> channels;
    Provenance origin = Provenance::Raw;

    bool color_resolved() const {
        return !channels.empty() && channels.begin()->first.color.has_value();
    }
    const Plane<T>& at(Color c, PolAngle a) const { return lookup(ChannelKey{c, a}); }
    const Plane<T>& at(PolAngle a) const { return lookup(ChannelKey{std::nullopt, a}); }

    bool operator==(const ChannelStack&) const = default;

private:
    const Plane<T>& lookup(const ChannelKey& key) const {
        auto it = channels.find(key);
        if (it == channels.end()) fail(ErrorCode::Structural, "channel missing from stack");
        return it->second;
    }
};

// Four (width/2)x(height/2) buffers, one per orientation. Each buffer is a
// Bayer mosaic at super-pixel resolution tagged by layout.cfa_pattern.
template <typename T>
ChannelStack<T> split_by_angle(const Mosaic<T>& mosaic) {
    const auto& layout = mosaic.layout();
    const std::size_t w = mosaic.width() / 2, h = mosaic.height() / 2;
    ChannelStack<T> stack;
    stack.origin = mosaic.provenance();
    for (PolAngle a : kAngles) {
        const Offset o = layout.offset_of(a);
        Plane<T> plane(w, h);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                plane(x, y) = mosaic(2 * x + o.x, 2 * y + o.y);
        stack.channels.emplace(ChannelKey{std::nullopt, a}, std::move(plane));
    }
    return stack;
}

// Sixteen (width/4)x(height/4) buffers indexed by (color, angle).
template <typename T>
ChannelStack<T> split_by_color_and_angle(const Mosaic<T>& mosaic) {
    const auto& layout = mosaic.layout();
    const std::size_t w = mosaic.width() / 4, h = mosaic.height() / 4;
    ChannelStack<T> stack;
    stack.origin = mosaic.provenance();
    for (Color c : kColors) {
        const Offset co = layout.offset_of(c);
        for (PolAngle a : kAngles) {
            const Offset po = layout.offset_of(a);
            Plane<T> plane(w, h);
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x)
                    plane(x, y) = mosaic(4 * x + 2 * co.x + po.x, 4 * y + 2 * co.y + po.y);
            stack.channels.emplace(ChannelKey{c, a}, std::move(plane));
        }
    }
    return stack;
}

// Inverse of either split. Accepts a complete 16-channel or 4-channel stack.
template <typename T>
Mosaic<T> merge_channels(const ChannelStack<T>& stack, const SensorLayout& layout) {
    layout.validate();
    if (stack.channels.size() != 16 && stack.channels.size() != 4)
        fail(ErrorCode::Structural, "channel stack must hold 4 or 16 buffers, got " +
                                        std::to_string(stack.channels.size()));
    const bool resolved = stack.color_resolved();
    if (resolved != (stack.channels.size() == 16))
        fail(ErrorCode::Structural, "channel stack mixes color-resolved and angle-only buffers");
    const Plane<T>& first = stack.channels.begin()->second;
    for (const auto& [key, plane] : stack.channels)
        if (!plane.same_shape(first))
            fail(ErrorCode::Structural, "channel buffers differ in size");

    const std::size_t period = resolved ? 4 : 2;
    const std::size_t width = first.width() * period, height = first.height() * period;
    std::vector<T> data(width * height);
    auto put = [&](std::size_t x, std::size_t y, T v) { data[y * width + x] = v; };

    if (resolved) {
        for (Color c : kColors) {
            const Offset co = layout.offset_of(c);
            for (PolAngle a : kAngles) {
                const Offset po = layout.offset_of(a);
                const Plane<T>& plane = stack.at(c, a);
                for (std::size_t y = 0; y < plane.height(); ++y)
                    for (std::size_t x = 0; x < plane.width(); ++x)
                        put(4 * x + 2 * co.x + po.x, 4 * y + 2 * co.y + po.y, plane(x, y));
            }
        }
    } else {
        for (PolAngle a : kAngles) {
            const Offset po = layout.offset_of(a);
            const Plane<T>& plane = stack.at(a);
            for (std::size_t y = 0; y < plane.height(); ++y)
                for (std::size_t x = 0; x < plane.width(); ++x)
                    put(2 * x + po.x, 2 * y + po.y, plane(x, y));
        }
    }
    return Mosaic<T>(width, height, layout, std::move(data), stack.origin);
}

// Per-color planes at (w/4, h/4) -> one Bayer plane at (w/2, h/2).
template <typename T>
Plane<T> assemble_bayer(const std::array<Plane<T>, 4>& per_color, const CfaPattern& cfa) {
    const std::size_t w = per_color[0].width(), h = per_color[0].height();
    Plane<T> bayer(2 * w, 2 * h);
    for (std::size_t cy = 0; cy < 2; ++cy)
        for (std::size_t cx = 0; cx < 2; ++cx) {
            const Plane<T>& src = per_color[index(cfa[cy][cx])];
            if (src.width() != w || src.height() != h)
                fail(ErrorCode::Structural, "per-color planes differ in size");
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x)
                    bayer(2 * x + cx, 2 * y + cy) = src(x, y);
        }
    return bayer;
}

} // namespace polakit
