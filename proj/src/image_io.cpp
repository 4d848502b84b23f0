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

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

namespace polakit {

using nlohmann::json;

namespace {

struct ReadCursor {
    const std::vector<std::uint8_t>* bytes;
    std::size_t pos;
};

void png_read_bytes(png_structp png, png_bytep out, png_size_t n) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + n > cur->bytes->size()) png_error(png, "truncated PNG stream");
    std::memcpy(out, cur->bytes->data() + cur->pos, n);
    cur->pos += n;
}

void png_write_bytes(png_structp png, png_bytep data, png_size_t n) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_error_handler(png_structp, png_const_charp msg) {
    throw Error(ErrorCode::MalformedContainer, std::string("PNG: ") + msg);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
        if (!png) fail(ErrorCode::Io, "cannot allocate PNG reader");
        info = png_create_info_struct(png);
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
        if (!png) fail(ErrorCode::Io, "cannot allocate PNG writer");
        info = png_create_info_struct(png);
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

bool is_png(const std::vector<std::uint8_t>& bytes) {
    return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

// Decodes into rows of samples; returns (width, height, channels, bit_depth).
struct DecodedPng {
    std::size_t width = 0, height = 0;
    int channels = 0, depth = 0;
    std::vector<std::uint8_t> raw;
};

DecodedPng decode_png(const std::vector<std::uint8_t>& bytes) {
    if (!is_png(bytes)) fail(ErrorCode::MalformedContainer, "not a PNG stream");
    PngReader r;
    ReadCursor cur{&bytes, 0};
    png_set_read_fn(r.png, &cur, png_read_bytes);
    png_read_info(r.png, r.info);
    const int color = png_get_color_type(r.png, r.info);
    const int depth = png_get_bit_depth(r.png, r.info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (depth < 8) png_set_expand(r.png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
    png_read_update_info(r.png, r.info);

    DecodedPng d;
    d.width = png_get_image_width(r.png, r.info);
    d.height = png_get_image_height(r.png, r.info);
    d.channels = png_get_channels(r.png, r.info);
    d.depth = png_get_bit_depth(r.png, r.info);
    const std::size_t stride = png_get_rowbytes(r.png, r.info);
    d.raw.resize(stride * d.height);
    std::vector<png_bytep> rows(d.height);
    for (std::size_t y = 0; y < d.height; ++y) rows[y] = d.raw.data() + y * stride;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return d;
}

std::vector<std::uint8_t> encode_png(std::size_t width, std::size_t height, int color_type, int depth,
                                     const std::vector<std::uint8_t>& raw) {
    if (width == 0 || height == 0) fail(ErrorCode::Argument, "cannot encode an empty image");
    PngWriter w;
    std::vector<std::uint8_t> out;
    png_set_write_fn(w.png, &out, png_write_bytes, png_flush_noop);
    png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    const std::size_t stride = raw.size() / height;
    for (std::size_t y = 0; y < height; ++y)
        png_write_row(w.png, const_cast<png_bytep>(raw.data() + y * stride));
    png_write_end(w.png, nullptr);
    return out;
}

} // namespace

Plane<std::uint16_t> decode_png_gray(const std::vector<std::uint8_t>& bytes) {
    const DecodedPng d = decode_png(bytes);
    if (d.channels != 1) fail(ErrorCode::MalformedContainer, "raw PNG must be single-channel grayscale");
    Plane<std::uint16_t> p(d.width, d.height);
    for (std::size_t i = 0; i < p.size(); ++i)
        p.data()[i] = d.depth == 16 ? static_cast<std::uint16_t>((d.raw[2 * i] << 8) | d.raw[2 * i + 1])
                                    : d.raw[i];
    return p;
}

std::vector<std::uint8_t> encode_png_gray16(const Plane<std::uint16_t>& plane) {
    std::vector<std::uint8_t> raw(2 * plane.size());
    for (std::size_t i = 0; i < plane.size(); ++i) {
        raw[2 * i] = static_cast<std::uint8_t>(plane.data()[i] >> 8);
        raw[2 * i + 1] = static_cast<std::uint8_t>(plane.data()[i] & 0xff);
    }
    return encode_png(plane.width(), plane.height(), PNG_COLOR_TYPE_GRAY, 16, raw);
}

std::vector<std::uint8_t> encode_png_rgb(const DisplayImage& image) {
    return encode_png(image.width, image.height, PNG_COLOR_TYPE_RGB, 8, image.rgb);
}

DisplayImage decode_png_rgb(const std::vector<std::uint8_t>& bytes) {
    const DecodedPng d = decode_png(bytes);
    DisplayImage img(d.width, d.height, Palette::Rgb);
    for (std::size_t i = 0; i < d.width * d.height; ++i)
        for (int c = 0; c < 3; ++c) {
            const std::size_t src = i * d.channels + (d.channels == 3 ? c : 0);
            img.rgb[3 * i + c] = d.depth == 16 ? d.raw[2 * src] : d.raw[src];
        }
    return img;
}

Plane<std::uint16_t> decode_pgm(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    auto token = [&]() {
        for (;;) {
            while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t += static_cast<char>(bytes[pos++]);
        return t;
    };
    auto number = [&]() {
        const std::string t = token();
        if (t.empty() || !std::all_of(t.begin(), t.end(), ::isdigit))
            fail(ErrorCode::MalformedContainer, "malformed PGM header");
        return std::stoul(t);
    };
    if (token() != "P5") fail(ErrorCode::MalformedContainer, "not a binary PGM (P5) stream");
    const std::size_t width = number(), height = number(), maxval = number();
    if (maxval == 0 || maxval > 65535) fail(ErrorCode::MalformedContainer, "PGM maxval out of range");
    ++pos;  // single whitespace before the raster
    const std::size_t sample = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + width * height * sample)
        fail(ErrorCode::MalformedContainer, "truncated PGM raster");
    Plane<std::uint16_t> p(width, height);
    for (std::size_t i = 0; i < p.size(); ++i)
        p.data()[i] = sample == 2 ? static_cast<std::uint16_t>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1])
                                  : bytes[pos + i];
    return p;
}

std::vector<std::uint8_t> encode_pgm16(const Plane<std::uint16_t>& plane) {
    const std::string header = "P5\n" + std::to_string(plane.width()) + " " +
                               std::to_string(plane.height()) + "\n65535\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    for (std::uint16_t v : plane.data()) {
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return out;
}

Plane<std::uint16_t> decode_gray(const std::vector<std::uint8_t>& bytes) {
    if (is_png(bytes)) return decode_png_gray(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
    fail(ErrorCode::MalformedContainer, "unrecognized image container");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) fail(ErrorCode::Io, "cannot write " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::filesystem::path sidecar_path(const std::filesystem::path& image) {
    auto p = image;
    p += ".json";
    return p;
}

json sidecar_json(const RawImageFile& file) {
    const RawMosaic& m = file.mosaic;
    const SensorLayout& l = m.layout();
    json j = file.extra.is_object() ? file.extra : json::object();
    j["schema"] = kSidecarSchema;
    j["width"] = m.width();
    j["height"] = m.height();
    j["bit_depth"] = l.bit_depth;
    j["pol_pattern"] = {{degrees(l.pol_pattern[0][0]), degrees(l.pol_pattern[0][1])},
                        {degrees(l.pol_pattern[1][0]), degrees(l.pol_pattern[1][1])}};
    j["cfa_pattern"] = json::array({json::array({name(l.cfa_pattern[0][0]), name(l.cfa_pattern[0][1])}),
                                    json::array({name(l.cfa_pattern[1][0]), name(l.cfa_pattern[1][1])})});
    j["provenance"] = name(m.provenance());
    if (file.calibration_fingerprint)
        j["calibration_fingerprint"] = *file.calibration_fingerprint;
    else
        j.erase("calibration_fingerprint");
    return j;
}

RawImageFile raw_from_parts(const Plane<std::uint16_t>& counts, const json& sidecar) {
    static const char* known[] = {"schema",      "width",       "height",     "bit_depth",
                                  "pol_pattern", "cfa_pattern", "provenance", "calibration_fingerprint"};
    RawImageFile file;
    SensorLayout layout;
    Provenance provenance = Provenance::Raw;
    try {
        if (!sidecar.is_object()) fail(ErrorCode::MalformedContainer, "sidecar must be a JSON object");
        if (sidecar.contains("schema") && sidecar.at("schema").get<std::string>() != kSidecarSchema)
            fail(ErrorCode::MalformedContainer, "unsupported sidecar schema " + sidecar.at("schema").dump());
        const auto width = sidecar.at("width").get<std::size_t>();
        const auto height = sidecar.at("height").get<std::size_t>();
        if (width != counts.width() || height != counts.height())
            fail(ErrorCode::DimensionMismatch,
                 "sidecar says " + std::to_string(width) + "x" + std::to_string(height) + ", container is " +
                     std::to_string(counts.width()) + "x" + std::to_string(counts.height()));
        layout.bit_depth = sidecar.at("bit_depth").get<int>();
        const auto pol = sidecar.at("pol_pattern").get<std::array<std::array<int, 2>, 2>>();
        const auto cfa = sidecar.at("cfa_pattern").get<std::array<std::array<std::string, 2>, 2>>();
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c) {
                layout.pol_pattern[r][c] = angle_from_degrees(pol[r][c]);
                layout.cfa_pattern[r][c] = parse_color(cfa[r][c]);
            }
        if (sidecar.contains("provenance"))
            provenance = parse_provenance(sidecar.at("provenance").get<std::string>());
        if (sidecar.contains("calibration_fingerprint"))
            file.calibration_fingerprint = sidecar.at("calibration_fingerprint").get<std::string>();
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedContainer, std::string("sidecar: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Argument) fail(ErrorCode::MalformedContainer, std::string("sidecar: ") + e.what());
        throw;
    }
    for (const auto& [key, value] : sidecar.items())
        if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
            file.extra[key] = value;
    try {
        file.mosaic = RawMosaic(counts.width(), counts.height(), layout, counts.data(), provenance);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Argument) fail(ErrorCode::MalformedContainer, e.what());
        throw;
    }
    return file;
}

RawImageFile read_raw(const std::filesystem::path& path, const ReadOptions& options) {
    const Plane<std::uint16_t> counts = decode_gray(read_file(path));
    const auto side = sidecar_path(path);
    if (!std::filesystem::exists(side)) {
        if (!options.assume_layout)
            fail(ErrorCode::MissingSidecar, "missing sidecar " + side.string() + " (pass --assume-layout to use " +
                                                "the default layout)");
        const SensorLayout layout = default_layout();
        if (options.warn)
            options.warn("no sidecar for " + path.string() + "; assuming layout " + layout.to_string());
        RawImageFile file;
        file.mosaic = RawMosaic(counts.width(), counts.height(), layout, counts.data());
        return file;
    }
    const auto bytes = read_file(side);
    json sidecar;
    try {
        sidecar = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedContainer, "sidecar " + side.string() + ": " + e.what());
    }
    return raw_from_parts(counts, sidecar);
}

void write_raw(const std::filesystem::path& path, const RawImageFile& file) {
    const RawMosaic& m = file.mosaic;
    const Plane<std::uint16_t> plane(m.width(), m.height(), m.data());
    const bool pgm = path.extension() == ".pgm";
    write_file(path, pgm ? encode_pgm16(plane) : encode_png_gray16(plane));
    write_text(sidecar_path(path), sidecar_json(file).dump(2) + "\n");
}

void write_raw(const std::filesystem::path& path, const RawMosaic& mosaic) {
    RawImageFile file;
    file.mosaic = mosaic;
    write_raw(path, file);
}

} // namespace polakit
