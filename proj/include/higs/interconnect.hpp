#pragma once

// Positive-feedback loop of an LTI plant and a HIGS (u = x_h, e = y = Cx),
// simulated with event-located mode switches, plus runtime monitors for the
// element storage V and the loop storage
//     W = 1/2 x^T Y^{-1} x + x_h^2 / (2 k_h) - C x x_h.

#include "higs/higs.hpp"
#include "higs/lti.hpp"

#include <optional>
#include <string>
#include <vector>

namespace higs {

struct ClosedLoopState {
    Vector x;
    double x_h = 0.0;
    Mode mode = Mode::Integrator;
    double t = 0.0;
};

struct ClosedLoopDerivative {
    Vector x_dot;
    double x_h_dot = 0.0;
};

/// Mode-dependent vector field. In the gain mode x_h is taken as k_h C x.
/// `disturbance` is added to x_h at the plant input.
[[nodiscard]] ClosedLoopDerivative closed_loop_field(const ClosedLoopState& state, const HigsParams& params,
                                                     const StateSpace& sys, double disturbance = 0.0);

struct StepDisturbance {
    double amplitude = 1.0;
    double t_on = 0.0;

    [[nodiscard]] double at(double t) const { return t >= t_on ? amplitude : 0.0; }
};

struct MonitorToggles {
    bool storage = true;      // V
    bool lyapunov = false;    // W, needs Y
    bool sector = true;
    bool dissipation = true;
};

struct SimConfig {
    double dt = 1e-6;
    double t_final = 0.05;
    int record_stride = 1;
    double x_h0 = 0.0;
    std::optional<StepDisturbance> disturbance;
    MonitorToggles monitors;
    long max_switches = 1'000'000;
    HigsTolerances tol;

    void validate() const;
};

struct ClosedLoopSample {
    double t = 0.0;
    Vector x;
    double x_h = 0.0;
    double e = 0.0;
    double edot = 0.0;
    double u = 0.0;
    double d = 0.0;
    Mode mode = Mode::Integrator;
    double V = 0.0;
    double dissipation = 0.0;
    double W = 0.0;     // NaN when unavailable
    double W_dot = 0.0; // backward difference, 0 at the first sample
};

struct Trajectory {
    std::vector<ClosedLoopSample> samples;
    std::vector<SwitchEvent> events;
    bool w_available = false;
};

/// Throws InvalidInput for bad dimensions/config, SectorViolation when the
/// initial state is outside the sector, EventResolutionError and ChatteringAbort.
/// `y` is required when the W monitor is enabled.
[[nodiscard]] Trajectory simulate(const StateSpace& sys, const HigsParams& params, const Vector& x0,
                                  const SimConfig& cfg, const std::optional<Matrix>& y = std::nullopt);

struct LinearSample {
    double t = 0.0;
    Vector x;
    double y = 0.0;
    double d = 0.0;
};

/// RK4 of x' = Ax + B d(t) (HIGS disconnected).
[[nodiscard]] std::vector<LinearSample> simulate_open_loop_plant(const StateSpace& sys, const Vector& x0,
                                                                 const SimConfig& cfg);

struct StepResponse {
    Trajectory closed_loop;
    std::vector<LinearSample> open_loop;
};

/// Closed- and open-loop responses to the configured step disturbance from rest.
[[nodiscard]] StepResponse step_disturbance(const StateSpace& sys, const HigsParams& params, const SimConfig& cfg);

struct MonitorReport {
    bool w_checked = false;
    double max_w_increase = 0.0;       // max (W_{k+1} - W_k) / (1 + |W_k|)
    double min_w = 0.0;                // over samples with (x, x_h) != 0
    double max_dissipation = 0.0;      // V' - u' e
    double max_sector_violation = 0.0; // (x_h^2 / k_h - e x_h) / (1 + x_h^2)
    double max_lemma2 = 0.0;           // (e x_h - k_h e^2) / (1 + e^2)
    double max_gain_identity = 0.0;    // |(x_h / k_h - e) x_h'| / (1 + |e x_h'|) on gain samples
    std::vector<std::string> violations;

    [[nodiscard]] bool clean() const { return violations.empty(); }
};

/// Recomputes every monitor from the sampled (x, x_h, mode, d); stored monitor
/// columns are ignored.
[[nodiscard]] MonitorReport certify_trajectory(const Trajectory& trajectory, const StateSpace& sys,
                                               const HigsParams& params, const std::optional<Matrix>& y,
                                               const HigsTolerances& tol = {});

/// ||x|| + |x_h|
[[nodiscard]] double combined_norm(const ClosedLoopSample& s);

/// First time after which combined_norm stays below fraction * initial; nullopt if never.
[[nodiscard]] std::optional<double> settling_time(const Trajectory& trajectory, double fraction = 0.02);

}  // namespace higs
