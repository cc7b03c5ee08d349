// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace agc {

enum class ErrorCode {
    InvalidArgument = 1,
    Parse,
    Validation,
    OutOfDomain,
    Nodata,
    Coverage,
    Geometry,
    Checksum,
    Io,
    Size,
    Fit,
    UndefinedCorrelation,
    Runtime,
};

const char* error_code_name(ErrorCode code) noexcept;

/// Exception carrying a machine-readable category; the C API maps it onto
/// its status codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace agc
