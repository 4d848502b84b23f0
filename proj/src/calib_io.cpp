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

#include "polakit/calib_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace polakit {

using nlohmann::json;

namespace {

constexpr std::size_t kPlaneCount = 5;

// Non-finite values (e.g. the std of a uniform angle spread) travel as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_from(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}
std::vector<double> numbers_from(const json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(number_from(x));
    return v;
}

void put_f64(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(bits >> (8 * k));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int k = 7; k >= 0; --k) bits = (bits << 8) | p[k];
    return std::bit_cast<double>(bits);
}

std::filesystem::path planes_path(const std::filesystem::path& path) {
    auto p = path;
    p += ".bin";
    return p;
}

template <typename Fn>
auto parse_guard(const std::string& what, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedContainer, what + ": " + e.what());
    }
}

} // namespace

json to_json(const CalibrationMetadata& m) {
    return {{"version", m.version},
            {"s0_reference", m.s0_reference},
            {"reference_dolp", m.reference_dolp},
            {"reference_angles", m.reference_angles},
            {"angles_estimated", m.angles_estimated},
            {"iterations", m.iterations},
            {"dead_pixels", m.dead_pixels},
            {"residual_rms_mean", m.residual_rms_mean},
            {"residual_rms_max", m.residual_rms_max}};
}

CalibrationMetadata metadata_from_json(const json& j) {
    return parse_guard("calibration metadata", [&] {
        CalibrationMetadata m;
        m.version = j.at("version").get<int>();
        m.s0_reference = j.at("s0_reference").get<std::array<double, 4>>();
        m.reference_dolp = j.at("reference_dolp").get<double>();
        m.reference_angles = j.at("reference_angles").get<std::vector<double>>();
        m.angles_estimated = j.at("angles_estimated").get<bool>();
        m.iterations = j.at("iterations").get<int>();
        m.dead_pixels = j.at("dead_pixels").get<std::size_t>();
        m.residual_rms_mean = j.at("residual_rms_mean").get<double>();
        m.residual_rms_max = j.at("residual_rms_max").get<double>();
        return m;
    });
}

void save_calibration(const CalibrationMaps& maps, const std::filesystem::path& path) {
    const auto bin = planes_path(path);
    json header = {{"schema", kCalibrationSchema},
                   {"fingerprint", maps.fingerprint()},
                   {"width", maps.width()},
                   {"height", maps.height()},
                   {"layout", maps.layout().to_string()},
                   {"planes",
                    {{"file", bin.filename().string()},
                     {"encoding", "float64-le"},
                     {"order", {"t", "p", "theta", "d", "residual_rms"}}}},
                   {"metadata", to_json(maps.metadata())}};

    std::ofstream planes(bin, std::ios::binary);
    if (!planes) fail(ErrorCode::Io, "cannot write " + bin.string());
    for (std::size_t k = 0; k < kPlaneCount; ++k)
        for (std::size_t i = 0; i < maps.pixels().size(); ++i) {
            const PixelModel& m = maps.pixels()[i];
            const double values[kPlaneCount] = {m.t, m.p, m.theta, m.d, maps.residual_rms()[i]};
            put_f64(planes, values[k]);
        }
    if (!planes.flush()) fail(ErrorCode::Io, "cannot write " + bin.string());

    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << header.dump(2) << '\n';
    if (!out.flush()) fail(ErrorCode::Io, "cannot write " + path.string());
}

CalibrationMaps load_calibration(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open calibration " + path.string());
    const json header = parse_guard("calibration header", [&] { return json::parse(in); });

    return parse_guard("calibration header", [&] {
        if (header.at("schema").get<std::string>() != kCalibrationSchema)
            fail(ErrorCode::MalformedContainer, "unsupported calibration schema " +
                                                    header.at("schema").get<std::string>());
        const auto width = header.at("width").get<std::size_t>();
        const auto height = header.at("height").get<std::size_t>();
        const SensorLayout layout = SensorLayout::parse(header.at("layout").get<std::string>());
        if (header.at("fingerprint").get<std::string>() != sensor_fingerprint(width, height, layout))
            fail(ErrorCode::FingerprintMismatch, "calibration fingerprint disagrees with its dimensions");

        const auto bin = path.parent_path() / header.at("planes").at("file").get<std::string>();
        std::ifstream planes(bin, std::ios::binary);
        if (!planes) fail(ErrorCode::Io, "cannot open calibration planes " + bin.string());
        const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(planes)),
                                               std::istreambuf_iterator<char>());
        const std::size_t n = width * height;
        if (bytes.size() != kPlaneCount * n * 8)
            fail(ErrorCode::MalformedContainer, "calibration planes have " + std::to_string(bytes.size()) +
                                                    " bytes, expected " + std::to_string(kPlaneCount * n * 8));

        auto value = [&](std::size_t plane, std::size_t i) { return get_f64(&bytes[(plane * n + i) * 8]); };
        std::vector<PixelModel> pixels(n);
        std::vector<double> residual(n);
        for (std::size_t i = 0; i < n; ++i) {
            pixels[i] = {value(0, i), value(1, i), value(2, i), value(3, i)};
            residual[i] = value(4, i);
        }
        return CalibrationMaps(width, height, layout, std::move(pixels),
                               metadata_from_json(header.at("metadata")), std::move(residual));
    });
}

json to_json(const HistogramSeries& h) {
    return {{"parameter", name(h.parameter)}, {"edges", numbers(h.edges)}, {"counts", h.counts},
            {"total", h.total}, {"mean", number(h.mean)}, {"std", number(h.stddev)}};
}

HistogramSeries histogram_from_json(const json& j) {
    return parse_guard("histogram", [&] {
        HistogramSeries h;
        h.parameter = parse_param_tag(j.at("parameter").get<std::string>());
        h.edges = numbers_from(j.at("edges"));
        h.counts = j.at("counts").get<std::vector<std::size_t>>();
        h.total = j.at("total").get<std::size_t>();
        h.mean = number_from(j.at("mean"));
        h.stddev = number_from(j.at("std"));
        return h;
    });
}

json to_json(const RowProfile& p) {
    return {{"row", p.row}, {"channel", name(p.channel)}, {"intensity", numbers(p.intensity)},
            {"dolp", numbers(p.dolp)}, {"aolp", numbers(p.aolp)}};
}

RowProfile row_profile_from_json(const json& j) {
    return parse_guard("row profile", [&] {
        RowProfile p;
        p.row = j.at("row").get<std::size_t>();
        p.channel = parse_color(j.at("channel").get<std::string>());
        p.intensity = numbers_from(j.at("intensity"));
        p.dolp = numbers_from(j.at("dolp"));
        p.aolp = numbers_from(j.at("aolp"));
        return p;
    });
}

json to_json(const ParameterStats& s) {
    return {{"t_mean", s.t_mean}, {"t_std", s.t_std}, {"p_mean", s.p_mean}, {"p_std", s.p_std},
            {"theta_dev_mean", s.theta_dev_mean}, {"theta_dev_std", s.theta_dev_std}};
}

ParameterStats parameter_stats_from_json(const json& j) {
    return parse_guard("parameter statistics", [&] {
        ParameterStats s;
        s.t_mean = j.at("t_mean").get<double>();
        s.t_std = j.at("t_std").get<double>();
        s.p_mean = j.at("p_mean").get<double>();
        s.p_std = j.at("p_std").get<double>();
        s.theta_dev_mean = j.at("theta_dev_mean").get<double>();
        s.theta_dev_std = j.at("theta_dev_std").get<double>();
        return s;
    });
}

json to_json(const CalibrationReport& r) {
    json channels = json::array();
    for (const ChannelQuality& q : r.channels) {
        json before = json::array(), after = json::array();
        for (const auto& h : q.before) before.push_back(to_json(h));
        for (const auto& h : q.after) after.push_back(to_json(h));
        channels.push_back({{"channel", name(q.channel)},
                            {"before", before},
                            {"after", after},
                            {"before_row", to_json(q.before_row)},
                            {"after_row", to_json(q.after_row)}});
    }
    return {{"fingerprint", r.fingerprint},
            {"parameters", to_json(r.parameters)},
            {"dead_pixels", r.dead_pixels},
            {"channels", channels}};
}

CalibrationReport report_from_json(const json& j) {
    return parse_guard("calibration report", [&] {
        CalibrationReport r;
        r.fingerprint = j.at("fingerprint").get<std::string>();
        r.parameters = parameter_stats_from_json(j.at("parameters"));
        r.dead_pixels = j.at("dead_pixels").get<std::size_t>();
        for (const auto& c : j.at("channels")) {
            ChannelQuality q;
            q.channel = parse_color(c.at("channel").get<std::string>());
            if (c.at("before").size() != 3 || c.at("after").size() != 3)
                fail(ErrorCode::MalformedContainer, "report channel needs three histograms per side");
            for (std::size_t k = 0; k < 3; ++k) {
                q.before[k] = histogram_from_json(c.at("before")[k]);
                q.after[k] = histogram_from_json(c.at("after")[k]);
            }
            q.before_row = row_profile_from_json(c.at("before_row"));
            q.after_row = row_profile_from_json(c.at("after_row"));
            r.channels.push_back(std::move(q));
        }
        return r;
    });
}

} // namespace polakit
