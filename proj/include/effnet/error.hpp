#ifndef EFFNET_ERROR_HPP
#define EFFNET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace effnet {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape or precondition violation in an op or graph.
struct ShapeError : Error {
    using Error::Error;
};

// Model-spec parse or build failure (CLI exit code 2).
struct SpecError : Error {
    using Error::Error;
};

// Incompatible artifacts: checkpoint/spec hash or data/model shape (exit code 3).
struct CompatError : Error {
    using Error::Error;
};

// File I/O failure (exit code 1).
struct IoError : Error {
    using Error::Error;
};

} // namespace effnet

#endif // EFFNET_ERROR_HPP
