#pragma once

#include <stdexcept>
#include <string>

namespace higs {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (dimensions, non-finite entries, parameter ranges).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A linear solve hit a (numerically) singular matrix.
class SingularSystem : public Error {
public:
    SingularSystem(const std::string& what, double frequency = 0.0)
        : Error(what), frequency_(frequency) {}

    /// Angular frequency (rad/s) of the failing evaluation, 0 for DC solves.
    [[nodiscard]] double frequency() const noexcept { return frequency_; }

private:
    double frequency_;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

/// The realization is not minimal, so the NI lemma does not apply.
class NonMinimal : public Error {
public:
    using Error::Error;
};

class NoPoleNear : public Error {
public:
    using Error::Error;
};

/// State left the sector [0, k_h] beyond tolerance.
class SectorViolation : public Error {
public:
    using Error::Error;
};

/// Too many mode switches inside a single step; the step size must be reduced.
class EventResolutionError : public Error {
public:
    using Error::Error;
};

/// Total switch count exceeded the chattering guard.
class ChatteringAbort : public Error {
public:
    using Error::Error;
};

}  // namespace higs
