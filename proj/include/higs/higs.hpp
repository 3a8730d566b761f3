#pragma once

// The hybrid integrator-gain element:
//     x_h' = w_h e          in the integrator mode (F1)
//     x_h  = k_h e          in the gain mode (F2)
//     u    = x_h
// with the sector F = {(e, u, e') : e u >= u^2 / k_h}.

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace higs {

enum class Mode { Integrator = 0, Gain = 1 };

[[nodiscard]] const char* to_string(Mode mode);

class HigsParams {
public:
    /// Throws InvalidInput unless k_h > 0 and omega_h >= 0 (both finite).
    HigsParams(double k_h, double omega_h);

    [[nodiscard]] double k_h() const noexcept { return k_h_; }
    [[nodiscard]] double omega_h() const noexcept { return omega_h_; }

private:
    double k_h_;
    double omega_h_;
};

struct HigsTolerances {
    double sector = 1e-9;
    double gain_mode = 1e-9;
    double monitor = 1e-7;
    /// Event times are located to event * dt.
    double event = 1e-10;
};

/// e u >= u^2 / k_h - tol (1 + u^2)
[[nodiscard]] bool in_sector(double e, double u, const HigsParams& params, const HigsTolerances& tol = {});

/// |u - k_h e| <= tol (1 + |u|)  and  w_h e^2 > k_h e e'
[[nodiscard]] bool in_f2(double e, double u, double edot, const HigsParams& params, const HigsTolerances& tol = {});

/// Gain iff the point is in F2, Integrator otherwise. Throws SectorViolation
/// when (e, x_h) is outside the sector beyond tolerance.
[[nodiscard]] Mode mode_select(double e, double edot, double x_h, const HigsParams& params,
                               const HigsTolerances& tol = {});

/// Distance of x_h outside the interval between 0 and k_h e (negative inside).
/// Shares its zero set with e x_h - x_h^2 / k_h but stays linear near e = 0.
[[nodiscard]] double sector_gap(double e, double x_h, const HigsParams& params);

/// w_h e^2 - k_h e e'; positive on the gain-mode side of the boundary.
[[nodiscard]] double gain_switch_function(double e, double edot, const HigsParams& params);

struct HigsState {
    double x_h = 0.0;
    Mode mode = Mode::Integrator;
    double t = 0.0;
};

/// Input e(t) with derivative e'(t). Without an analytic derivative a central
/// difference with step fd_step is used everywhere.
class InputSignal {
public:
    using Function = std::function<double(double)>;

    explicit InputSignal(Function e, Function edot = nullptr, double fd_step = 1e-6);

    [[nodiscard]] double e(double t) const { return e_(t); }
    [[nodiscard]] double edot(double t) const;

private:
    Function e_;
    Function edot_;
    double fd_step_;
};

/// One sample of an element trajectory.
struct HigsSample {
    double t = 0.0;
    double e = 0.0;
    double edot = 0.0;
    double x_h = 0.0;
    Mode mode = Mode::Integrator;
};

struct SwitchEvent {
    double t = 0.0;
    Mode from = Mode::Integrator;
    Mode to = Mode::Integrator;
};

/// V = x_h^2 / (2 k_h)
[[nodiscard]] double storage(double x_h, const HigsParams& params);

/// V' - u' e at one sample, using the mode's own derivative formulas.
[[nodiscard]] double dissipation_residual(const HigsSample& s, const HigsParams& params);

/// max over samples of V' - u' e; 0 for an empty trajectory.
[[nodiscard]] double nni_dissipation_residual(std::span<const HigsSample> samples, const HigsParams& params);

/// Advances the element by dt against a prescribed input, locating any mode
/// switches inside the step. Switch records are appended to `events` if given.
[[nodiscard]] HigsState step_open_loop(const HigsState& state, const InputSignal& input, double dt,
                                       const HigsParams& params, std::vector<SwitchEvent>* events = nullptr,
                                       const HigsTolerances& tol = {});

struct HigsTrajectory {
    std::vector<HigsSample> samples;
    std::vector<SwitchEvent> events;
};

/// Repeated step_open_loop from t = 0 with x_h(0) = x_h0; samples every `stride` steps.
[[nodiscard]] HigsTrajectory simulate_open_loop(const HigsParams& params, const InputSignal& input, double t_final,
                                                double dt, int stride = 1, double x_h0 = 0.0,
                                                const HigsTolerances& tol = {});

}  // namespace higs
