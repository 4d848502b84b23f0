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

#include "polakit/service.hpp"

#include "polakit/calib_io.hpp"
#include "polakit/filter_lab.hpp"
#include "polakit/openapi_doc.hpp"
#include "polakit/pipeline.hpp"

#include <httplib.h>

#include <cmath>
#include <numbers>
#include <sstream>

namespace polakit {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownMode: return 404;
    case ErrorCode::Io: return 500;
    default: return 400;
    }
}

void send_error(httplib::Response& res, int status, std::string_view category, const std::string& message) {
    res.status = status;
    res.set_content(json{{"error", {{"category", category}, {"message", message}}}}.dump(), "application/json");
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const Error& e) {
            send_error(res, http_status(e.code()), e.category(), e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    };
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_png(httplib::Response& res, const DisplayImage& image) {
    const auto bytes = encode_png_rgb(image);
    res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
}

bool flag(const httplib::Request& req, const std::string& key) {
    if (!req.has_param(key)) return false;
    const std::string v = req.get_param_value(key);
    if (v == "1" || v == "true" || v == "yes" || v.empty()) return true;
    if (v == "0" || v == "false" || v == "no") return false;
    fail(ErrorCode::Argument, "query parameter '" + key + "' must be true or false");
}

double number(const httplib::Request& req, const std::string& key) {
    if (!req.has_param(key)) fail(ErrorCode::Argument, "missing query parameter '" + key + "'");
    const std::string v = req.get_param_value(key);
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(out))
        fail(ErrorCode::Argument, "query parameter '" + key + "' is not a number: '" + v + "'");
    return out;
}

std::size_t index_param(const httplib::Request& req, const std::string& key, std::size_t fallback) {
    if (!req.has_param(key)) return fallback;
    const double v = number(req, key);
    if (v < 0 || v != std::floor(v)) fail(ErrorCode::Argument, "query parameter '" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

Color channel_param(const httplib::Request& req) {
    const std::string text = req.has_param("channel") ? req.get_param_value("channel") : "R";
    try {
        return parse_color(text);
    } catch (const Error&) {
        fail(ErrorCode::NotFound, "unknown channel '" + text + "' (expected R, G1, G2 or B)");
    }
}

std::string string_param(const httplib::Request& req, const std::string& key, const std::string& fallback) {
    return req.has_param(key) ? req.get_param_value(key) : fallback;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

json session_json(const std::string& id, const RawMosaic& m, const std::string& calibration) {
    json j = {{"id", id},
              {"width", m.width()},
              {"height", m.height()},
              {"layout", m.layout().to_string()},
              {"provenance", name(m.provenance())}};
    j["calibration"] = calibration.empty() ? json(nullptr) : json(calibration);
    return j;
}

} // namespace

struct Service::Derived {
    RawMosaic mosaic;
    StokesMap stokes;
    PolarParamsMap params;
    mutable std::once_flag gains_once;
    mutable std::optional<WhiteBalanceGains> gains;
};

struct Service::Calibration {
    CalibrationMaps maps;
    json report;
};

struct Service::Session {
    std::shared_mutex mutex;
    RawMosaic mosaic;
    std::string calibration_id;
    std::shared_ptr<const Calibration> calibration;
    std::mutex cache_mutex;
    std::map<bool, std::shared_ptr<const Derived>> cache;
};

Service::Service(ServiceOptions options) : options_(options) {}
Service::~Service() = default;

const json& Service::openapi() {
    static const json doc = json::parse(kOpenApiDocument);
    return doc;
}

std::string Service::create_session(RawImageFile file) {
    auto s = std::make_shared<Session>();
    s->mosaic = std::move(file.mosaic);
    std::unique_lock lock(mutex_);
    const std::string id = "s" + std::to_string(next_session_++);
    sessions_.emplace(id, std::move(s));
    return id;
}

std::string Service::add_calibration(CalibrationMaps maps, json report) {
    auto c = std::make_shared<Calibration>(Calibration{std::move(maps), std::move(report)});
    std::unique_lock lock(mutex_);
    const std::string id = "c" + std::to_string(next_calibration_++);
    calibrations_.emplace(id, std::move(c));
    return id;
}

std::shared_ptr<Service::Session> Service::session(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) fail(ErrorCode::NotFound, "unknown session '" + id + "'");
    return it->second;
}

std::shared_ptr<const Service::Calibration> Service::calibration(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = calibrations_.find(id);
    if (it == calibrations_.end()) fail(ErrorCode::NotFound, "unknown calibration '" + id + "'");
    return it->second;
}

void Service::attach_calibration(const std::string& sid, const std::string& cid) {
    auto s = session(sid);
    auto c = calibration(cid);
    std::unique_lock lock(s->mutex);
    if (s->mosaic.width() != c->maps.width() || s->mosaic.height() != c->maps.height() ||
        !(s->mosaic.layout() == c->maps.layout()))
        fail(ErrorCode::FingerprintMismatch,
             "calibration " + c->maps.fingerprint() + " does not fit session " +
                 sensor_fingerprint(s->mosaic.width(), s->mosaic.height(), s->mosaic.layout()));
    s->calibration = c;
    s->calibration_id = cid;
    std::lock_guard cache(s->cache_mutex);
    s->cache.clear();
}

void Service::detach_calibration(const std::string& sid) {
    auto s = session(sid);
    std::unique_lock lock(s->mutex);
    s->calibration.reset();
    s->calibration_id.clear();
    std::lock_guard cache(s->cache_mutex);
    s->cache.clear();
}

std::shared_ptr<const Service::Derived> Service::derived(Session& s, bool calibrated) const {
    std::shared_lock lock(s.mutex);
    if (calibrated && !s.calibration)
        fail(ErrorCode::Argument, "calibrated=true but the session has no calibration attached");
    std::lock_guard cache(s.cache_mutex);
    auto& slot = s.cache[calibrated];
    if (!slot) {
        auto d = std::make_shared<Derived>();
        d->mosaic = calibrated ? correct_mosaic(s.mosaic, s.calibration->maps) : s.mosaic;
        d->stokes = compute_stokes_map(d->mosaic);
        d->params = compute_polar_params(d->stokes, options_.dolp_threshold);
        slot = std::move(d);
    }
    return slot;
}

void Service::mount(httplib::Server& server) {
    auto gains_of = [this](const Derived& d) {
        std::call_once(d.gains_once, [&] {
            ProcessOptions o;
            o.white_balance = true;
            o.saturation_fraction = options_.saturation_fraction;
            d.gains = resolve_gains(d.mosaic, o);
        });
        return *d.gains;
    };

    server.Get("/openapi.json", guarded([](const httplib::Request&, httplib::Response& res) {
        send_json(res, openapi());
    }));

    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
        std::string image, sidecar;
        if (req.is_multipart_form_data()) {
            if (!req.has_file("image")) fail(ErrorCode::Argument, "multipart upload needs an 'image' part");
            image = req.get_file_value("image").content;
            if (req.has_file("sidecar")) sidecar = req.get_file_value("sidecar").content;
        } else {
            image = req.body;
        }
        if (image.empty()) fail(ErrorCode::Argument, "empty upload");
        const Plane<std::uint16_t> counts = decode_gray(bytes_of(image));
        json warnings = json::array();
        RawImageFile file;
        if (!sidecar.empty()) {
            json side;
            try {
                side = json::parse(sidecar);
            } catch (const json::exception& e) {
                fail(ErrorCode::MalformedContainer, std::string("sidecar: ") + e.what());
            }
            file = raw_from_parts(counts, side);
        } else {
            const SensorLayout layout = req.has_param("layout")
                                            ? SensorLayout::parse(req.get_param_value("layout"))
                                            : default_layout();
            if (!req.has_param("layout")) warnings.push_back("no sidecar; assuming layout " + layout.to_string());
            file.mosaic = RawMosaic(counts.width(), counts.height(), layout, counts.data());
        }
        const RawMosaic& m = file.mosaic;
        json body = session_json("", m, "");
        body["id"] = create_session(std::move(file));
        body["warnings"] = warnings;
        send_json(res, body, 201);
    }));

    server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        std::shared_lock lock(s->mutex);
        send_json(res, session_json(req.matches[1], s->mosaic, s->calibration_id));
    }));

    server.Get(R"(/sessions/([^/]+)/modes/([^/]+))",
               guarded([this, gains_of](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        const Mode mode = parse_mode(std::string(req.matches[2]));
        const auto d = derived(*s, flag(req, "calibrated"));
        const Color channel = channel_param(req);
        const std::string cname(name(channel));

        std::vector<NamedImage> images;
        std::string wanted;
        auto angle_tag = [&] {
            const std::string a = string_param(req, "angle", "0");
            for (PolAngle p : kAngles)
                if (a == std::to_string(degrees(p))) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "%03d", degrees(p));
                    return std::string(buf);
                }
            fail(ErrorCode::NotFound, "unknown angle '" + a + "' (expected 0, 45, 90 or 135)");
        };
        switch (mode) {
        case Mode::RawSplit:
        case Mode::PolColor:
        case Mode::Original: {
            ProcessOptions o;
            o.white_balance = flag(req, "wb");
            if (o.white_balance) o.gains = gains_of(*d);
            wanted = mode == Mode::RawSplit ? "raw_" + angle_tag()
                     : mode == Mode::PolColor ? "polcolor_" + angle_tag()
                                              : "original";
            images = render_mode(d->mosaic, mode, o);
            break;
        }
        case Mode::Stokes: {
            const std::string comp = string_param(req, "component", "s0");
            if (comp != "s0" && comp != "s1" && comp != "s2")
                fail(ErrorCode::NotFound, "unknown Stokes component '" + comp + "'");
            wanted = "stokes_" + comp + "_" + cname;
            images = render_stokes_images(d->stokes);
            break;
        }
        case Mode::RawIrp:
        case Mode::Irp: {
            const ParamTag tag = parse_param_tag(string_param(req, "param", "intensity"));
            wanted = std::string(mode == Mode::Irp ? "irp_" : "irp_raw_") + std::string(name(tag)) + "_" + cname;
            images = render_param_images(d->params, mode == Mode::Irp);
            break;
        }
        case Mode::Fake:
            wanted = "fake_" + cname;
            images = render_fake_images(d->params);
            break;
        }
        for (const auto& img : images)
            if (img.name == wanted) return send_png(res, img.image);
        fail(ErrorCode::NotFound, "no image '" + wanted + "' in mode " + std::string(name(mode)));
    }));

    server.Get(R"(/sessions/([^/]+)/filter)",
               guarded([this, gains_of](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        const double theta = number(req, "theta");
        if (!(theta >= 0.0 && theta < 180.0)) fail(ErrorCode::Argument, "theta must lie in [0, 180) degrees");
        const auto d = derived(*s, flag(req, "calibrated"));
        ColorImage filtered = color_from_channels(filter_intensity(d->stokes, {theta * kPi / 180.0}),
                                                  d->stokes.layout, 2.0 * d->stokes.full_scale(),
                                                  d->stokes.provenance);
        if (flag(req, "wb")) filtered = apply_gains(filtered, gains_of(*d));
        send_png(res, color_display(filtered, kFilterDisplayGain));
        res.set_header("X-Polakit-Theta", req.get_param_value("theta"));
    }));

    server.Get(R"(/sessions/([^/]+)/despec)",
               guarded([this, gains_of](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        const auto d = derived(*s, flag(req, "calibrated"));
        ColorImage out = remove_specularity(d->stokes).filtered;
        if (flag(req, "wb")) out = apply_gains(out, gains_of(*d));
        send_png(res, color_display(out));
    }));

    server.Get(R"(/sessions/([^/]+)/plots/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        const std::string kind = req.matches[2];
        const bool calibrated = flag(req, "calibrated");
        const auto d = derived(*s, calibrated);
        const Color channel = channel_param(req);
        json body;
        if (kind == "histogram") {
            const ParamTag tag = parse_param_tag(string_param(req, "param", "aolp"));
            const std::size_t bins =
                index_param(req, "bins", tag == ParamTag::Aolp ? kDefaultAolpBins : kDefaultLinearBins);
            body = to_json(histogram(d->params, channel, tag, bins));
        } else if (kind == "row") {
            body = to_json(row_profile(d->params, index_param(req, "row", d->params.height / 2), channel));
        } else {
            fail(ErrorCode::NotFound, "unknown plot '" + kind + "' (expected histogram or row)");
        }
        body["channel"] = name(channel);
        body["calibrated"] = calibrated;
        send_json(res, body);
    }));

    server.Get(R"(/sessions/([^/]+)/extinction)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        const auto d = derived(*s, flag(req, "calibrated"));
        const Color channel = channel_param(req);
        const std::size_t x = index_param(req, "x", 0), y = index_param(req, "y", 0);
        if (x >= d->params.width || y >= d->params.height)
            fail(ErrorCode::Argument, "pixel outside the " + std::to_string(d->params.width) + "x" +
                                          std::to_string(d->params.height) + " map");
        const PolarParams p = d->params.at(channel, x, y);
        const double ext = extinction_angle(p);
        send_json(res, {{"x", x}, {"y", y}, {"channel", name(channel)}, {"intensity", p.intensity},
                        {"dolp", p.dolp}, {"aolp_deg", p.aolp * 180.0 / kPi},
                        {"extinction_deg", ext * 180.0 / kPi}});
    }));

    server.Post("/calibrations", guarded([this](const httplib::Request& req, httplib::Response& res) {
        if (!req.is_multipart_form_data() || !req.has_file("frame"))
            fail(ErrorCode::Argument, "calibration upload needs multipart 'frame' parts");
        const SensorLayout layout = req.has_file("layout")
                                        ? SensorLayout::parse(req.get_file_value("layout").content)
                                        : default_layout();
        FlatFieldSet set;
        if (req.has_file("reference_dolp")) {
            const std::string v = req.get_file_value("reference_dolp").content;
            try {
                set.reference_dolp = std::stod(v);
            } catch (const std::exception&) {
                fail(ErrorCode::Argument, "reference_dolp is not a number: '" + v + "'");
            }
        }
        std::vector<double> angles;
        if (req.has_file("angles")) {
            std::stringstream ss(req.get_file_value("angles").content);
            std::string item;
            while (std::getline(ss, item, ',')) {
                try {
                    angles.push_back(std::stod(item) * kPi / 180.0);
                } catch (const std::exception&) {
                    fail(ErrorCode::Argument, "angle '" + item + "' is not a number");
                }
            }
        }
        const auto frame_parts = req.get_file_values("frame");
        const std::size_t frames = frame_parts.size();
        if (!angles.empty() && angles.size() != frames)
            fail(ErrorCode::Argument, std::to_string(angles.size()) + " angles for " + std::to_string(frames) + " frames");
        for (std::size_t k = 0; k < frames; ++k) {
            const Plane<std::uint16_t> counts = decode_gray(bytes_of(frame_parts[k].content));
            RawMosaic m(counts.width(), counts.height(), layout, counts.data());
            set.frames.push_back({std::move(m), angles.empty() ? std::nullopt : std::optional<double>(angles[k])});
        }
        if (req.has_file("dark")) {
            const Plane<std::uint16_t> counts = decode_gray(bytes_of(req.get_file_value("dark").content));
            set.dark = RawMosaic(counts.width(), counts.height(), layout, counts.data());
        }
        CalibrationMaps maps = fit_calibration(set);
        const RawMosaic& before = set.frames.front().mosaic;
        json report = to_json(calibration_report(maps, before, correct_mosaic(before, maps), options_.dolp_threshold));
        json body = {{"fingerprint", maps.fingerprint()}, {"metadata", to_json(maps.metadata())}, {"report", report}};
        body["id"] = add_calibration(std::move(maps), report);
        send_json(res, body, 201);
    }));

    server.Get(R"(/calibrations/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto c = calibration(req.matches[1]);
        send_json(res, {{"id", std::string(req.matches[1])}, {"fingerprint", c->maps.fingerprint()},
                        {"metadata", to_json(c->maps.metadata())}, {"report", c->report}});
    }));

    server.Put(R"(/sessions/([^/]+)/calibration/([^/]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
        attach_calibration(req.matches[1], req.matches[2]);
        auto s = session(req.matches[1]);
        std::shared_lock lock(s->mutex);
        send_json(res, session_json(req.matches[1], s->mosaic, s->calibration_id));
    }));

    server.Delete(R"(/sessions/([^/]+)/calibration)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        detach_calibration(req.matches[1]);
        auto s = session(req.matches[1]);
        std::shared_lock lock(s->mutex);
        send_json(res, session_json(req.matches[1], s->mosaic, s->calibration_id));
    }));

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "not_found" : "http", "no such endpoint");
    });
}

bool run_server(Service& service, const std::string& host, int port) {
    httplib::Server server;
    service.mount(server);
    return server.listen(host, port);
}

} // namespace polakit
