#include "higs/interconnect.hpp"

#include "higs/error.hpp"
#include "higs/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace higs {

namespace {

class ClosedLoopModel final : public HybridModel {
public:
    ClosedLoopModel(const StateSpace& sys, const HigsParams& params, std::optional<StepDisturbance> disturbance)
        : sys_(sys), params_(params), disturbance_(disturbance), n_(sys.order()) {}

    double error(double, const Vector& z) const override { return sys_.c().row(0).dot(z.head(n_)); }

    double error_rate(double t, const Vector& z, Mode mode) const override {
        const auto derivative = closed_loop_field(unpack(t, z, mode), params_, sys_, disturbance(t));
        return sys_.c().row(0).dot(derivative.x_dot);
    }

    Vector field(double t, const Vector& z, Mode mode) const override {
        const auto derivative = closed_loop_field(unpack(t, z, mode), params_, sys_, disturbance(t));
        Vector out(n_ + 1);
        out.head(n_) = derivative.x_dot;
        out(n_) = derivative.x_h_dot;
        return out;
    }

    const HigsParams& params() const override { return params_; }

    [[nodiscard]] double disturbance(double t) const { return disturbance_ ? disturbance_->at(t) : 0.0; }

private:
    ClosedLoopState unpack(double t, const Vector& z, Mode mode) const {
        return ClosedLoopState{z.head(n_), z(n_), mode, t};
    }

    const StateSpace& sys_;
    const HigsParams& params_;
    std::optional<StepDisturbance> disturbance_;
    int n_;
};

class StorageMonitor {
public:
    StorageMonitor(const StateSpace& sys, const HigsParams& params, const Matrix& y)
        : c_(sys.c()), k_h_(params.k_h()), y_ldlt_(y) {
        if (y.rows() != sys.order() || y.cols() != sys.order()) {
            throw InvalidInput("Y dimension does not match the plant order");
        }
        if (y_ldlt_.info() != Eigen::Success || !y_ldlt_.isPositive()) {
            throw InvalidInput("Y must be symmetric positive definite");
        }
    }

    [[nodiscard]] double operator()(const Vector& x, double x_h) const {
        const double quad = x.dot(y_ldlt_.solve(x));
        return 0.5 * quad + x_h * x_h / (2.0 * k_h_) - c_.row(0).dot(x) * x_h;
    }

private:
    Matrix c_;
    double k_h_;
    Eigen::LDLT<Matrix> y_ldlt_;
};

// Splits [t0, t1] at an interior disturbance switch-on time.
template <typename Step>
void step_with_breakpoint(double t0, double t1, const std::optional<StepDisturbance>& disturbance, Step&& step) {
    if (disturbance && disturbance->t_on > t0 && disturbance->t_on < t1) {
        step(t0, disturbance->t_on);
        step(disturbance->t_on, t1);
    } else {
        step(t0, t1);
    }
}

long step_count(const SimConfig& cfg) { return std::lround(std::ceil(cfg.t_final / cfg.dt - 1e-9)); }

}  // namespace

ClosedLoopDerivative closed_loop_field(const ClosedLoopState& state, const HigsParams& params, const StateSpace& sys,
                                       double disturbance) {
    if (state.x.size() != sys.order()) {
        throw InvalidInput("closed_loop_field: state dimension mismatch");
    }
    const auto& a = sys.a();
    const auto& b = sys.b().col(0);
    const auto& c = sys.c().row(0);
    ClosedLoopDerivative out;
    if (state.mode == Mode::Integrator) {
        out.x_dot = a * state.x + b * (state.x_h + disturbance);
        out.x_h_dot = params.omega_h() * c.dot(state.x);
    } else {
        out.x_dot = a * state.x + b * (params.k_h() * c.dot(state.x) + disturbance);
        out.x_h_dot = params.k_h() * c.dot(out.x_dot);
    }
    return out;
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || !(t_final > dt) || record_stride < 1 || max_switches < 1) {
        throw InvalidInput("simulation config: need dt > 0, t_final > dt, record_stride >= 1");
    }
    if (!std::isfinite(x_h0)) {
        throw InvalidInput("simulation config: x_h0 must be finite");
    }
    if (disturbance && (!std::isfinite(disturbance->amplitude) || !std::isfinite(disturbance->t_on))) {
        throw InvalidInput("simulation config: disturbance must be finite");
    }
}

Trajectory simulate(const StateSpace& sys, const HigsParams& params, const Vector& x0, const SimConfig& cfg,
                    const std::optional<Matrix>& y) {
    cfg.validate();
    const int n = sys.order();
    if (x0.size() != n || !x0.allFinite()) {
        throw InvalidInput("x0 must be a finite vector of length " + std::to_string(n));
    }
    if (cfg.monitors.lyapunov && !y) {
        throw InvalidInput("the W monitor requires a Y certificate");
    }
    std::optional<StorageMonitor> w_monitor;
    if (cfg.monitors.lyapunov) {
        w_monitor.emplace(sys, params, *y);
    }

    const ClosedLoopModel model(sys, params, cfg.disturbance);
    const HybridStepper stepper(model, cfg.tol);

    Vector z(n + 1);
    z.head(n) = x0;
    z(n) = cfg.x_h0;
    HybridPoint point{0.0, z, Mode::Integrator};
    point.mode = stepper.initial_mode(0.0, point.z);
    stepper.project(point);

    Trajectory out;
    out.w_available = w_monitor.has_value();
    auto record = [&] {
        ClosedLoopSample s;
        s.t = point.t;
        s.x = point.z.head(n);
        s.x_h = point.z(n);
        s.mode = point.mode;
        s.d = model.disturbance(point.t);
        s.e = model.error(point.t, point.z);
        s.edot = model.error_rate(point.t, point.z, point.mode);
        s.u = s.x_h;
        s.V = cfg.monitors.storage ? storage(s.x_h, params) : std::numeric_limits<double>::quiet_NaN();
        s.dissipation = cfg.monitors.dissipation
                            ? dissipation_residual(HigsSample{s.t, s.e, s.edot, s.x_h, s.mode}, params)
                            : std::numeric_limits<double>::quiet_NaN();
        s.W = w_monitor ? (*w_monitor)(s.x, s.x_h) : std::numeric_limits<double>::quiet_NaN();
        if (!out.samples.empty() && w_monitor) {
            const auto& prev = out.samples.back();
            s.W_dot = (s.W - prev.W) / (s.t - prev.t);
        }
        if (cfg.monitors.sector && !in_sector(s.e, s.u, params, cfg.tol)) {
            std::ostringstream os;
            os << "sector monitor: (e, u) = (" << s.e << ", " << s.u << ") outside F at t = " << s.t;
            throw SectorViolation(os.str());
        }
        out.samples.push_back(std::move(s));
    };
    record();

    const long steps = step_count(cfg);
    for (long k = 1; k <= steps; ++k) {
        const double t_next = static_cast<double>(k) * cfg.dt;
        step_with_breakpoint(point.t, t_next, cfg.disturbance, [&](double t0, double t1) {
            point.t = t0;
            stepper.step(point, t1 - t0, out.events);
            point.t = t1;
        });
        if (static_cast<long>(out.events.size()) > cfg.max_switches) {
            throw ChatteringAbort("more than " + std::to_string(cfg.max_switches) + " mode switches by t = " +
                                  std::to_string(point.t));
        }
        if (k % cfg.record_stride == 0 || k == steps) {
            record();
        }
    }
    return out;
}

std::vector<LinearSample> simulate_open_loop_plant(const StateSpace& sys, const Vector& x0, const SimConfig& cfg) {
    cfg.validate();
    if (x0.size() != sys.order()) {
        throw InvalidInput("x0 dimension mismatch");
    }
    const auto& a = sys.a();
    const Vector b = sys.b().col(0);
    auto d = [&](double t) { return cfg.disturbance ? cfg.disturbance->at(t) : 0.0; };
    auto f = [&](double t, const Vector& x) -> Vector { return a * x + b * d(t); };

    std::vector<LinearSample> out;
    Vector x = x0;
    double t = 0.0;
    auto record = [&] { out.push_back(LinearSample{t, x, sys.c().row(0).dot(x) + sys.d() * d(t), d(t)}); };
    record();
    const long steps = step_count(cfg);
    for (long k = 1; k <= steps; ++k) {
        const double t_next = static_cast<double>(k) * cfg.dt;
        step_with_breakpoint(t, t_next, cfg.disturbance, [&](double t0, double t1) {
            const double h = t1 - t0;
            const Vector k1 = f(t0, x);
            const Vector k2 = f(t0 + 0.5 * h, x + 0.5 * h * k1);
            const Vector k3 = f(t0 + 0.5 * h, x + 0.5 * h * k2);
            const Vector k4 = f(t0 + h, x + h * k3);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = t1;
        });
        if (k % cfg.record_stride == 0 || k == steps) {
            record();
        }
    }
    return out;
}

StepResponse step_disturbance(const StateSpace& sys, const HigsParams& params, const SimConfig& cfg) {
    if (!cfg.disturbance) {
        throw InvalidInput("step_disturbance: configuration has no disturbance");
    }
    const Vector x0 = Vector::Zero(sys.order());
    SimConfig closed = cfg;
    closed.x_h0 = 0.0;
    closed.monitors.lyapunov = false;
    return StepResponse{simulate(sys, params, x0, closed), simulate_open_loop_plant(sys, x0, cfg)};
}

MonitorReport certify_trajectory(const Trajectory& trajectory, const StateSpace& sys, const HigsParams& params,
                                 const std::optional<Matrix>& y, const HigsTolerances& tol) {
    MonitorReport report;
    const double k_h = params.k_h();
    const auto& c = sys.c().row(0);
    std::optional<StorageMonitor> w_monitor;
    if (y) {
        w_monitor.emplace(sys, params, *y);
        report.w_checked = true;
        report.min_w = std::numeric_limits<double>::infinity();
    }

    double previous_w = std::numeric_limits<double>::quiet_NaN();
    long nonzero_samples = 0;
    for (const auto& s : trajectory.samples) {
        const double e = c.dot(s.x);
        const double x_h = s.x_h;
        const ClosedLoopState state{s.x, x_h, Mode::Integrator, s.t};
        // Integrator-form x' so that a corrupted x_h shows up in e'.
        const double edot = c.dot(closed_loop_field(state, params, sys, s.d).x_dot);

        report.max_sector_violation =
            std::max(report.max_sector_violation, (x_h * x_h / k_h - e * x_h) / (1.0 + x_h * x_h));
        report.max_lemma2 = std::max(report.max_lemma2, (e * x_h - k_h * e * e) / (1.0 + e * e));
        report.max_dissipation =
            std::max(report.max_dissipation, dissipation_residual(HigsSample{s.t, e, edot, x_h, s.mode}, params));
        if (s.mode == Mode::Gain) {
            const double xh_dot = k_h * edot;
            report.max_gain_identity = std::max(report.max_gain_identity,
                                                std::abs((x_h / k_h - e) * xh_dot) / (1.0 + std::abs(e * xh_dot)));
        }
        if (w_monitor) {
            const double w = (*w_monitor)(s.x, x_h);
            if (s.x.norm() + std::abs(x_h) > 0.0) {
                ++nonzero_samples;
                report.min_w = std::min(report.min_w, w);
            }
            if (!std::isnan(previous_w)) {
                report.max_w_increase = std::max(report.max_w_increase, (w - previous_w) / (1.0 + std::abs(previous_w)));
            }
            previous_w = w;
        }
    }
    if (w_monitor && !std::isfinite(report.min_w)) {
        report.min_w = 0.0;
    }

    auto flag = [&](bool bad, const std::string& what, double value) {
        if (bad) {
            std::ostringstream os;
            os << what << " (" << value << ")";
            report.violations.push_back(os.str());
        }
    };
    flag(report.max_sector_violation > tol.sector, "sector membership violated", report.max_sector_violation);
    flag(report.max_lemma2 > tol.sector, "e x_h - k_h e^2 <= 0 violated", report.max_lemma2);
    flag(report.max_dissipation > tol.monitor, "V' <= u' e violated", report.max_dissipation);
    flag(report.max_gain_identity > tol.monitor, "gain-mode identity x_h = k_h e violated", report.max_gain_identity);
    if (w_monitor) {
        flag(report.max_w_increase > tol.monitor, "W increased between samples", report.max_w_increase);
        flag(nonzero_samples > 0 && !(report.min_w > 0.0), "W not positive", report.min_w);
    }
    return report;
}

double combined_norm(const ClosedLoopSample& s) { return s.x.norm() + std::abs(s.x_h); }

std::optional<double> settling_time(const Trajectory& trajectory, double fraction) {
    if (trajectory.samples.empty()) {
        return std::nullopt;
    }
    const double threshold = fraction * combined_norm(trajectory.samples.front());
    std::optional<double> settled;
    for (const auto& s : trajectory.samples) {
        if (combined_norm(s) > threshold) {
            settled.reset();
        } else if (!settled) {
            settled = s.t;
        }
    }
    return settled;
}

}  // namespace higs
