#pragma once

#include <stdexcept>
#include <string>

namespace opkf {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : Error {
    using Error::Error;
};

struct SingularMatrixError : Error {
    using Error::Error;
};

struct RankDeficientError : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    using Error::Error;
};

struct IndexError : Error {
    using Error::Error;
};

struct LengthError : Error {
    using Error::Error;
};

struct ScheduleError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct NotFiniteError : Error {
    using Error::Error;
};

}  // namespace opkf
