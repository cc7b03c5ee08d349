// SPDX-License-Identifier: Apache-2.0
#include "agc/error.hpp"

namespace agc {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::Validation: return "validation";
        case ErrorCode::OutOfDomain: return "out_of_domain";
        case ErrorCode::Nodata: return "nodata";
        case ErrorCode::Coverage: return "coverage";
        case ErrorCode::Geometry: return "geometry";
        case ErrorCode::Checksum: return "checksum";
        case ErrorCode::Io: return "io";
        case ErrorCode::Size: return "size";
        case ErrorCode::Fit: return "fit";
        case ErrorCode::UndefinedCorrelation: return "undefined_correlation";
        case ErrorCode::Runtime: return "runtime";
    }
    return "unknown";
}

}  // namespace agc
