#pragma once

#include <stdexcept>
#include <string>

namespace hybreg {

// Error taxonomy mirrored by the CLI exit codes: usage problems exit 1,
// data problems (files, schemas, parse failures) exit 2, numeric failures
// (divergence, degenerate geometry) exit 3.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hybreg
