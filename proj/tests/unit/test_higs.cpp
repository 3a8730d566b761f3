#include "higs/error.hpp"
#include "higs/higs.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace higs;

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(HigsParams(1.0, 0.0));
    CHECK_THROWS_AS(HigsParams(0.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(HigsParams(-1.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(HigsParams(1.0, -1.0), InvalidInput);
    CHECK_THROWS_AS(HigsParams(std::nan(""), 1.0), InvalidInput);
    CHECK_THROWS_AS(HigsParams(1.0, std::numeric_limits<double>::infinity()), InvalidInput);
}

TEST_CASE("sector membership") {
    const HigsParams p(1.0, 10.0);
    CHECK(in_sector(1.0, 0.5, p));
    CHECK(in_sector(0.0, 0.0, p));
    CHECK_FALSE(in_sector(1.0, -0.1, p));
    CHECK(in_sector(1.0, 1.0, p));
    CHECK_FALSE(in_sector(1.0, 1.1, p));
    CHECK(in_sector(-2.0, -1.0, p));
    CHECK(sector_gap(1.0, 0.5, p) < 0.0);
    CHECK(sector_gap(1.0, 1.5, p) == doctest::Approx(0.5));
    CHECK(sector_gap(-1.0, 0.25, p) == doctest::Approx(0.25));
}

TEST_CASE("gain region F2") {
    const HigsParams p(2.0, 5.0);
    CHECK(in_f2(1.0, 2.0, 0.0, p));
    // k e' > w_h e: the integrator keeps up
    CHECK_FALSE(in_f2(1.0, 2.0, 10.0, p));
    CHECK_FALSE(in_f2(1.0, 1.0, 0.0, p));
    // e = 0 on the boundary: strict inequality fails
    CHECK_FALSE(in_f2(0.0, 0.0, 1.0, p));
}

TEST_CASE("mode selection") {
    const HigsParams p(1.0, 10.0);
    CHECK(mode_select(1.0, 3.0, 0.2, p) == Mode::Integrator);
    CHECK(mode_select(1.0, 0.0, 1.0, p) == Mode::Gain);
    CHECK(mode_select(1.0, 20.0, 1.0, p) == Mode::Integrator);
    CHECK_THROWS_AS(mode_select(1.0, 0.0, -0.5, p), SectorViolation);
    CHECK(std::string(to_string(Mode::Gain)) == "gain");
}

TEST_CASE("zero input keeps the state at zero") {
    const HigsParams p(1.0, 100.0);
    const InputSignal zero([](double) { return 0.0; }, [](double) { return 0.0; });
    const auto traj = simulate_open_loop(p, zero, 0.1, 1e-3);
    for (const auto& s : traj.samples) {
        CHECK(s.x_h == 0.0);
    }
    CHECK(nni_dissipation_residual(traj.samples, p) == 0.0);
}

TEST_CASE("constant input ramps then holds at k_h c") {
    const double c = 1.5, k = 2.0, wh = 10.0, dt = 1e-3;
    const HigsParams p(k, wh);
    const InputSignal step([=](double) { return c; }, [](double) { return 0.0; });
    const auto traj = simulate_open_loop(p, step, 0.5, dt);
    const double t_hit = k / wh;  // w_h c t = k c
    for (const auto& s : traj.samples) {
        if (s.t < t_hit - 1e-9) {
            CHECK(s.x_h == doctest::Approx(wh * c * s.t).epsilon(1e-12));
            CHECK(s.mode == Mode::Integrator);
        } else if (s.t > t_hit + 1e-9) {
            CHECK(s.x_h == doctest::Approx(k * c).epsilon(1e-12));
            CHECK(s.mode == Mode::Gain);
        }
    }
    REQUIRE(traj.events.size() == 1);
    CHECK(traj.events[0].from == Mode::Integrator);
    CHECK(traj.events[0].to == Mode::Gain);
    CHECK(std::abs(traj.events[0].t - t_hit) <= 1e-9 * dt + 1e-15);
    CHECK(nni_dissipation_residual(traj.samples, p) <= 1e-7);
}

TEST_CASE("single open-loop step") {
    const HigsParams p(1.0, 10.0);
    const InputSignal ramp([](double t) { return 1.0 + t; }, [](double) { return 1.0; });
    std::vector<SwitchEvent> events;
    const auto next = step_open_loop(HigsState{0.0, Mode::Integrator, 0.0}, ramp, 1e-2, p, &events);
    CHECK(next.t == doctest::Approx(1e-2));
    // x_h = 10 (t + t^2 / 2)
    CHECK(next.x_h == doctest::Approx(10.0 * (1e-2 + 0.5e-4)).epsilon(1e-12));
    CHECK(events.empty());
    CHECK_THROWS_AS(step_open_loop(HigsState{-1.0, Mode::Integrator, 0.0}, ramp, 1e-2, p), SectorViolation);
    CHECK_THROWS_AS(step_open_loop(HigsState{0.0, Mode::Integrator, 0.0}, ramp, 0.0, p), InvalidInput);
}

TEST_CASE("finite-difference derivative fallback") {
    const InputSignal sine([](double t) { return std::sin(3.0 * t); });
    CHECK(sine.edot(0.4) == doctest::Approx(3.0 * std::cos(1.2)).epsilon(1e-8));
    CHECK_THROWS_AS(InputSignal(nullptr), InvalidInput);
}

TEST_CASE("dissipation residual formulas") {
    const HigsParams p(2.0, 4.0);
    CHECK(dissipation_residual(HigsSample{0.0, 1.3, -7.0, 2.6, Mode::Gain}, p) == 0.0);
    // (w_h / k)(e x_h - k e^2)
    const double e = 1.0, x_h = 1.0;
    CHECK(dissipation_residual(HigsSample{0.0, e, 0.0, x_h, Mode::Integrator}, p) ==
          doctest::Approx(4.0 / 2.0 * (e * x_h - 2.0 * e * e)));
    CHECK(dissipation_residual(HigsSample{0.0, 0.0, 0.0, 0.0, Mode::Integrator}, p) == 0.0);
    CHECK(storage(3.0, p) == doctest::Approx(9.0 / 4.0));
}

TEST_CASE("sinusoidal input keeps every element invariant") {
    for (const double k : {0.3, 1.0, 4.0}) {
        const double wh = 50.0;
        for (const double w : {0.2 * wh / k, wh / k, 8.0 * wh / k}) {
            const HigsParams p(k, wh);
            const InputSignal sine([w](double t) { return std::sin(w * t); },
                                   [w](double t) { return w * std::cos(w * t); });
            const double period = 2.0 * std::numbers::pi / w;
            const double dt = period / 2000.0;
            const auto traj = simulate_open_loop(p, sine, 4.0 * period, dt);
            CAPTURE(k);
            CAPTURE(w);
            double max_jump = 0.0;
            for (std::size_t i = 0; i < traj.samples.size(); ++i) {
                const auto& s = traj.samples[i];
                CHECK(in_sector(s.e, s.x_h, p));
                CHECK(s.e * s.x_h >= -1e-9);
                CHECK(s.e * s.x_h - k * s.e * s.e <= 1e-9 * (1.0 + s.e * s.e));
                if (s.mode == Mode::Gain) {
                    CHECK(std::abs(s.x_h - k * s.e) <= 1e-9 * (1.0 + std::abs(s.x_h)));
                }
                if (i > 0) {
                    max_jump = std::max(max_jump, std::abs(s.x_h - traj.samples[i - 1].x_h));
                }
            }
            // continuity: per-step change bounded by max(w_h, k w) |e| dt
            CHECK(max_jump <= 1.01 * std::max(wh, k * w) * dt);
            CHECK(nni_dissipation_residual(traj.samples, p) <= 1e-7);
            CHECK(traj.events.size() >= 6);
        }
    }
}

TEST_CASE("frozen integrator") {
    const HigsParams p(1.0, 0.0);
    const InputSignal sine([](double t) { return std::sin(t); }, [](double t) { return std::cos(t); });
    const auto traj = simulate_open_loop(p, sine, 10.0, 1e-2);
    for (const auto& s : traj.samples) {
        CHECK(s.x_h == 0.0);
    }
}

TEST_CASE("open-loop simulation refuses bad arguments") {
    const HigsParams p(1.0, 1.0);
    const InputSignal one([](double) { return 1.0; });
    CHECK_THROWS_AS(simulate_open_loop(p, one, 1.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(simulate_open_loop(p, one, 1.0, 0.1, 0), InvalidInput);
    CHECK_THROWS_AS(simulate_open_loop(p, one, 1.0, 0.1, 1, -1.0), SectorViolation);
}
