#include "higs/higs.hpp"

#include "higs/error.hpp"
#include "higs/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace higs {

namespace {

// The element driven by a prescribed input; the state vector is just [x_h].
class OpenLoopModel final : public HybridModel {
public:
    OpenLoopModel(const InputSignal& input, const HigsParams& params) : input_(input), params_(params) {}

    double error(double t, const Vector&) const override { return input_.e(t); }
    double error_rate(double t, const Vector&, Mode) const override { return input_.edot(t); }

    Vector field(double t, const Vector&, Mode mode) const override {
        Vector out(1);
        out(0) = mode == Mode::Integrator ? params_.omega_h() * input_.e(t) : params_.k_h() * input_.edot(t);
        return out;
    }

    const HigsParams& params() const override { return params_; }

private:
    const InputSignal& input_;
    const HigsParams& params_;
};

void require_in_sector(double e, double x_h, const HigsParams& params, const HigsTolerances& tol) {
    if (!in_sector(e, x_h, params, tol)) {
        std::ostringstream os;
        os << "state outside the sector: e = " << e << ", x_h = " << x_h << ", k_h = " << params.k_h();
        throw SectorViolation(os.str());
    }
}

}  // namespace

const char* to_string(Mode mode) { return mode == Mode::Gain ? "gain" : "integrator"; }

HigsParams::HigsParams(double k_h, double omega_h) : k_h_(k_h), omega_h_(omega_h) {
    if (!(k_h > 0.0) || !std::isfinite(k_h)) {
        throw InvalidInput("k_h must be a finite positive number");
    }
    if (!(omega_h >= 0.0) || !std::isfinite(omega_h)) {
        throw InvalidInput("omega_h must be finite and non-negative");
    }
}

bool in_sector(double e, double u, const HigsParams& params, const HigsTolerances& tol) {
    return e * u >= u * u / params.k_h() - tol.sector * (1.0 + u * u);
}

bool in_f2(double e, double u, double edot, const HigsParams& params, const HigsTolerances& tol) {
    const bool on_boundary = std::abs(u - params.k_h() * e) <= tol.gain_mode * (1.0 + std::abs(u));
    return on_boundary && params.omega_h() * e * e > params.k_h() * e * edot;
}

Mode mode_select(double e, double edot, double x_h, const HigsParams& params, const HigsTolerances& tol) {
    require_in_sector(e, x_h, params, tol);
    return in_f2(e, x_h, edot, params, tol) ? Mode::Gain : Mode::Integrator;
}

double sector_gap(double e, double x_h, const HigsParams& params) {
    const double boundary = params.k_h() * e;
    return std::max(x_h - std::max(0.0, boundary), std::min(0.0, boundary) - x_h);
}

double gain_switch_function(double e, double edot, const HigsParams& params) {
    return params.omega_h() * e * e - params.k_h() * e * edot;
}

InputSignal::InputSignal(Function e, Function edot, double fd_step)
    : e_(std::move(e)), edot_(std::move(edot)), fd_step_(fd_step) {
    if (!e_) {
        throw InvalidInput("input signal requires e(t)");
    }
    if (!(fd_step_ > 0.0)) {
        throw InvalidInput("finite-difference step must be positive");
    }
}

double InputSignal::edot(double t) const {
    if (edot_) {
        return edot_(t);
    }
    return (e_(t + fd_step_) - e_(t - fd_step_)) / (2.0 * fd_step_);
}

double storage(double x_h, const HigsParams& params) { return x_h * x_h / (2.0 * params.k_h()); }

double dissipation_residual(const HigsSample& s, const HigsParams& params) {
    if (s.mode == Mode::Gain) {
        const double xh_dot = params.k_h() * s.edot;
        return s.e * xh_dot - xh_dot * s.e;
    }
    const double v_dot = params.omega_h() * s.e * s.x_h / params.k_h();
    const double u_dot = params.omega_h() * s.e;
    return v_dot - u_dot * s.e;
}

double nni_dissipation_residual(std::span<const HigsSample> samples, const HigsParams& params) {
    double worst = 0.0;
    for (const auto& s : samples) {
        worst = std::max(worst, dissipation_residual(s, params));
    }
    return worst;
}

HigsState step_open_loop(const HigsState& state, const InputSignal& input, double dt, const HigsParams& params,
                         std::vector<SwitchEvent>* events, const HigsTolerances& tol) {
    if (!(dt > 0.0)) {
        throw InvalidInput("dt must be positive");
    }
    require_in_sector(input.e(state.t), state.x_h, params, tol);

    const OpenLoopModel model(input, params);
    const HybridStepper stepper(model, tol);
    HybridPoint point{state.t, Vector::Constant(1, state.x_h), state.mode};
    stepper.project(point);

    std::vector<SwitchEvent> local;
    stepper.step(point, dt, events != nullptr ? *events : local);
    return HigsState{point.z(0), point.mode, point.t};
}

HigsTrajectory simulate_open_loop(const HigsParams& params, const InputSignal& input, double t_final, double dt,
                                  int stride, double x_h0, const HigsTolerances& tol) {
    if (!(dt > 0.0) || !(t_final > 0.0) || stride < 1) {
        throw InvalidInput("simulate_open_loop: need dt > 0, t_final > 0 and stride >= 1");
    }
    const OpenLoopModel model(input, params);
    const HybridStepper stepper(model, tol);

    HybridPoint point{0.0, Vector::Constant(1, x_h0), Mode::Integrator};
    point.mode = stepper.initial_mode(0.0, point.z);
    stepper.project(point);

    HigsTrajectory out;
    auto record = [&] {
        out.samples.push_back(HigsSample{point.t, input.e(point.t), input.edot(point.t), point.z(0), point.mode});
    };
    record();
    const auto steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
    for (long k = 1; k <= steps; ++k) {
        stepper.step(point, dt, out.events);
        point.t = static_cast<double>(k) * dt;
        if (k % stride == 0 || k == steps) {
            record();
        }
    }
    return out;
}

}  // namespace higs
