#pragma once

#include <stdexcept>
#include <string>

namespace rms {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct UnsupportedFormat : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct ArgumentError : Error { using Error::Error; };
struct BudgetTooSmall : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct TruncationError : Error { using Error::Error; };
struct NumericalUnderflow : Error { using Error::Error; };
struct EmptyMask : Error { using Error::Error; };

} // namespace rms
