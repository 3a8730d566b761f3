#pragma once

// Fixed-step RK4 for systems coupled to a HIGS element, with mode switches
// located by bisection inside a step. The element state x_h is always the
// last component of the state vector.

#include "higs/higs.hpp"
#include "higs/lti.hpp"

#include <vector>

namespace higs {

/// Continuous part of a system in feedback with (or driven into) a HIGS.
class HybridModel {
public:
    virtual ~HybridModel() = default;

    /// HIGS input e at (t, z).
    [[nodiscard]] virtual double error(double t, const Vector& z) const = 0;
    /// Time derivative of e at (t, z) under the given mode.
    [[nodiscard]] virtual double error_rate(double t, const Vector& z, Mode mode) const = 0;
    /// Full state derivative under the given mode.
    [[nodiscard]] virtual Vector field(double t, const Vector& z, Mode mode) const = 0;

    [[nodiscard]] virtual const HigsParams& params() const = 0;
};

struct HybridPoint {
    double t = 0.0;
    Vector z;
    Mode mode = Mode::Integrator;
};

/// Advances `point` by dt. Switches are appended to `events`.
/// Throws EventResolutionError when a single step needs more than
/// `max_events_per_step` switches.
class HybridStepper {
public:
    explicit HybridStepper(const HybridModel& model, HigsTolerances tol = {}, int max_events_per_step = 64);

    void step(HybridPoint& point, double dt, std::vector<SwitchEvent>& events) const;

    /// Enforces x_h = k_h e in the gain mode.
    void project(HybridPoint& point) const;

    /// Initial mode per the selection rule; throws SectorViolation outside F.
    [[nodiscard]] Mode initial_mode(double t, const Vector& z) const;

private:
    [[nodiscard]] Vector rk4(double t, const Vector& z, Mode mode, double h) const;
    [[nodiscard]] bool leaves_mode(double t, const Vector& z, Mode mode) const;

    const HybridModel& model_;
    HigsTolerances tol_;
    int max_events_per_step_;
};

}  // namespace higs
