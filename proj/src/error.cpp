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

#include "polakit/error.hpp"

namespace polakit {

std::string_view category_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::Structural: return "structural";
    case ErrorCode::Argument: return "argument";
    case ErrorCode::Configuration: return "configuration";
    case ErrorCode::DegenerateConfiguration: return "degenerate_configuration";
    case ErrorCode::MalformedContainer: return "malformed_container";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::MissingSidecar: return "missing_sidecar";
    case ErrorCode::Io: return "io";
    case ErrorCode::NoWhiteFound: return "no_white_found";
    case ErrorCode::DegenerateWhite: return "degenerate_white";
    case ErrorCode::NoPolarization: return "no_polarization";
    case ErrorCode::EmptyHistogram: return "empty_histogram";
    case ErrorCode::FingerprintMismatch: return "fingerprint_mismatch";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::UnknownMode: return "unknown_mode";
    }
    return "unknown";
}

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::Argument:
    case ErrorCode::UnknownMode: return 2;
    case ErrorCode::Io:
    case ErrorCode::MalformedContainer:
    case ErrorCode::MissingSidecar:
    case ErrorCode::NotFound: return 3;
    case ErrorCode::Structural:
    case ErrorCode::DimensionMismatch: return 4;
    case ErrorCode::Configuration:
    case ErrorCode::DegenerateConfiguration: return 5;
    case ErrorCode::FingerprintMismatch: return 6;
    case ErrorCode::NoWhiteFound:
    case ErrorCode::DegenerateWhite:
    case ErrorCode::NoPolarization:
    case ErrorCode::EmptyHistogram: return 7;
    }
    return 1;
}

} // namespace polakit
