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

#include <stdexcept>
#include <string>
#include <string_view>

namespace polakit {

// Machine-readable failure categories. The CLI maps them to exit codes and
// the HTTP service maps them to status codes.
enum class ErrorCode {
    Structural,             // dimensions or channel sets that do not fit together
    Argument,               // out-of-range argument
    Configuration,          // invalid scene, sensor or calibration setup
    DegenerateConfiguration,// rank-deficient pixel matrix
    MalformedContainer,     // unreadable image file
    DimensionMismatch,      // sidecar and container disagree
    MissingSidecar,
    Io,
    NoWhiteFound,
    DegenerateWhite,
    NoPolarization,
    EmptyHistogram,
    FingerprintMismatch,
    NotFound,
    UnknownMode,
};

std::string_view category_name(ErrorCode code);
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view category() const { return category_name(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace polakit
