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

#include "polakit/calib.hpp"
#include "polakit/image_io.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

namespace httplib {
class Server;
}

namespace polakit {

struct ServiceOptions {
    double dolp_threshold = kDefaultDolpThreshold;
    double saturation_fraction = kDefaultSaturationFraction;
};

// Session state behind the HTTP endpoints. Derived maps are cached per
// calibrated flag and dropped whenever the attached calibration changes.
class Service {
public:
    explicit Service(ServiceOptions options = {});
    ~Service();

    std::string create_session(RawImageFile file);
    std::string add_calibration(CalibrationMaps maps, nlohmann::json report = nullptr);
    void attach_calibration(const std::string& session, const std::string& calibration);
    void detach_calibration(const std::string& session);

    // Registers every route on the server.
    void mount(httplib::Server& server);

    static const nlohmann::json& openapi();

private:
    struct Derived;
    struct Session;
    struct Calibration;

    std::shared_ptr<Session> session(const std::string& id) const;
    std::shared_ptr<const Calibration> calibration(const std::string& id) const;
    std::shared_ptr<const Derived> derived(Session& s, bool calibrated) const;

    ServiceOptions options_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::map<std::string, std::shared_ptr<const Calibration>> calibrations_;
    std::size_t next_session_ = 1;
    std::size_t next_calibration_ = 1;
};

// Blocks until the server stops. Returns false if the socket cannot be bound.
bool run_server(Service& service, const std::string& host, int port);

} // namespace polakit
