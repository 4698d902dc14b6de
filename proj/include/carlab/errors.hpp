#pragma once

#include <stdexcept>
#include <string>

namespace carlab {

// Shape/dimension mismatches between containers that must agree.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Domain violations: bad labels, duplicate or empty classes, protocol misuse.
struct ValueError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed input files; messages carry the offending line where known.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid CLI flags or config-file entries.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Hard abort raised when a training step produces a non-finite loss.
struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace carlab
