#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vne {

// Common base so the CLI can map library failures to one exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroRow : Error {
    std::size_t row;
    explicit ZeroRow(std::size_t r)
        : Error("row " + std::to_string(r) + " has (near-)zero norm; cannot normalize"), row(r) {}
};

struct ShapeError : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct NonSymmetric : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    using Error::Error;
};

struct NonFinite : Error {
    using Error::Error;
};

struct NonRectangular : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct DegenerateSpectrum : Error {
    using Error::Error;
};

struct NotPositiveDefinite : Error {
    using Error::Error;
};

struct TooFewColumns : Error {
    using Error::Error;
};

}  // namespace vne
