#pragma once

#include <stdexcept>
#include <string>

namespace gkdv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad grid size, epsilon out of range, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Two fields that must share a grid do not.
class GridMismatch : public Error {
public:
    GridMismatch() : Error("fields live on different grids") {}
    using Error::Error;
};

/// An iterative procedure (Newton, eigensolve, shooting) failed to converge.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Time integration produced non-finite values or left its admissible regime.
/// The time of the last finite state is carried along.
class NumericAbort : public Error {
public:
    NumericAbort(const std::string& what, double last_time)
        : Error(what), last_time_(last_time) {}
    double last_time() const noexcept { return last_time_; }

private:
    double last_time_;
};

}  // namespace gkdv
