#include "higs/hybrid.hpp"

#include "higs/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace higs {

namespace {

// Rounding allowance for the sector gap, relative to max(|k_h e|, |x_h|).
constexpr double kGapRel = 1e-14;

}  // namespace

HybridStepper::HybridStepper(const HybridModel& model, HigsTolerances tol, int max_events_per_step)
    : model_(model), tol_(tol), max_events_per_step_(max_events_per_step) {}

Vector HybridStepper::rk4(double t, const Vector& z, Mode mode, double h) const {
    const Vector k1 = model_.field(t, z, mode);
    const Vector k2 = model_.field(t + 0.5 * h, z + 0.5 * h * k1, mode);
    const Vector k3 = model_.field(t + 0.5 * h, z + 0.5 * h * k2, mode);
    const Vector k4 = model_.field(t + h, z + h * k3, mode);
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void HybridStepper::project(HybridPoint& point) const {
    if (point.mode == Mode::Gain) {
        const auto last = point.z.size() - 1;
        point.z(last) = model_.params().k_h() * model_.error(point.t, point.z);
    }
}

Mode HybridStepper::initial_mode(double t, const Vector& z) const {
    const double e = model_.error(t, z);
    const double x_h = z(z.size() - 1);
    return mode_select(e, model_.error_rate(t, z, Mode::Integrator), x_h, model_.params(), tol_);
}

bool HybridStepper::leaves_mode(double t, const Vector& z, Mode mode) const {
    const HigsParams& p = model_.params();
    const double e = model_.error(t, z);
    if (mode == Mode::Integrator) {
        const double x_h = z(z.size() - 1);
        const double gap = sector_gap(e, x_h, p);
        return gap > kGapRel * std::max(std::abs(p.k_h() * e), std::abs(x_h));
    }
    return gain_switch_function(e, model_.error_rate(t, z, Mode::Gain), p) <= 0.0;
}

void HybridStepper::step(HybridPoint& point, double dt, std::vector<SwitchEvent>& events) const {
    if (!(dt > 0.0)) {
        throw InvalidInput("step size must be positive");
    }
    const HigsParams& p = model_.params();
    const auto last = point.z.size() - 1;
    const double t_start = point.t;
    const double t_target = t_start + dt;
    const double resolution = tol_.event * dt;

    auto advance = [&](const HybridPoint& from, double h) {
        HybridPoint to{from.t + h, rk4(from.t, from.z, from.mode, h), from.mode};
        project(to);
        return to;
    };

    int handled = 0;
    while (true) {
        const double remaining = t_target - point.t;
        if (remaining <= 0.0) {
            break;
        }
        HybridPoint end = advance(point, remaining);
        if (!leaves_mode(end.t, end.z, end.mode)) {
            point = end;
            break;
        }

        // Bracket the switch in [lo, hi] (fractions of the remaining interval).
        double lo = 0.0;
        double hi = 1.0;
        HybridPoint at = point;
        HybridPoint past = end;
        if (!leaves_mode(point.t, point.z, point.mode)) {
            while ((hi - lo) * remaining > resolution) {
                const double mid = 0.5 * (lo + hi);
                const HybridPoint trial = advance(point, mid * remaining);
                if (leaves_mode(trial.t, trial.z, trial.mode)) {
                    hi = mid;
                    past = trial;
                } else {
                    lo = mid;
                    at = trial;
                }
            }
            // Gain mode is still admissible at the lower end; leave it where it no longer is.
            if (point.mode == Mode::Gain) {
                at = past;
            }
        }

        if (++handled > max_events_per_step_) {
            throw EventResolutionError("more than " + std::to_string(max_events_per_step_) +
                                       " mode switches inside one step at t = " + std::to_string(point.t) +
                                       "; reduce dt");
        }

        const double e = model_.error(at.t, at.z);
        Mode next = Mode::Integrator;
        if (at.mode == Mode::Integrator) {
            const double boundary = p.k_h() * e;
            double& x_h = at.z(last);
            if (std::abs(x_h - boundary) <= std::abs(x_h)) {
                x_h = boundary;
                const double edot = model_.error_rate(at.t, at.z, Mode::Gain);
                next = gain_switch_function(e, edot, p) > 0.0 ? Mode::Gain : Mode::Integrator;
            } else {
                x_h = std::clamp(x_h, std::min(0.0, boundary), std::max(0.0, boundary));
            }
        }
        if (next != at.mode) {
            events.push_back(SwitchEvent{at.t, at.mode, next});
        }
        at.mode = next;
        project(at);
        point = at;
    }
    point.t = t_target;
}

}  // namespace higs
