#include "higs/error.hpp"
#include "higs/mems.hpp"
#include "higs/ni_verify.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace higs;

namespace {

StateSpace scalar(double a, double b, double c, double d = 0.0) {
    return StateSpace(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b), Matrix::Constant(1, 1, c), d);
}

// g / (s^2 + 1)
StateSpace oscillator(double g) {
    Matrix a(2, 2);
    a << 0.0, 1.0, -1.0, 0.0;
    return StateSpace(a, (Matrix(2, 1) << 0.0, 1.0).finished(), (Matrix(1, 2) << g, 0.0).finished());
}

// 1 / (s^2 + 1)^2 in companion form
StateSpace double_oscillator() {
    Matrix a = Matrix::Zero(4, 4);
    a(0, 1) = a(1, 2) = a(2, 3) = 1.0;
    a(3, 0) = -1.0;
    a(3, 2) = -2.0;
    Matrix b = Matrix::Zero(4, 1);
    b(3) = 1.0;
    Matrix c = Matrix::Zero(1, 4);
    c(0) = 1.0;
    return StateSpace(a, b, c);
}

const StateSpace kNonNi = scalar(-1.0, 1.0, -1.0, 1.0);  // s / (s + 1)

}  // namespace

TEST_CASE("first-order lag passes the frequency check") {
    const auto r = check_ni_frequency(scalar(-1, 1, 1));
    CHECK(r.passed);
    CHECK(r.pole_check.passed);
    CHECK(r.sweep_min >= 0.0);
    CHECK(r.residues.empty());
    CHECK(r.evaluated_points == 8001);
}

TEST_CASE("MEMS plant passes the frequency check") {
    const auto r = check_ni_frequency(mems::plant());
    CHECK(r.passed);
    CHECK(r.sweep_min >= -r.sweep_tol);
    CHECK_FALSE(r.grid_spec.empty());
}

TEST_CASE("differentiator-like system fails with the worst frequency on the grid") {
    const GridSpec grid{1e-2, 1e2, 801, true};
    const auto r = check_ni_frequency(kNonNi, grid);
    CHECK_FALSE(r.passed);
    CHECK(r.pole_check.passed);
    // -2 Im G = -2 w / (1 + w^2), minimal at w = 1
    CHECK(r.sweep_min == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(r.worst_frequency == doctest::Approx(1.0).epsilon(1e-9));
    const auto f = grid.frequencies();
    CHECK(std::find(f.begin(), f.end(), r.worst_frequency) != f.end());
}

TEST_CASE("pole conditions") {
    // 1/s: pole at the origin
    const auto origin = check_ni_frequency(scalar(0.0, 1.0, 1.0), GridSpec{0.1, 10, 100, true});
    CHECK_FALSE(origin.pole_check.passed);
    CHECK_FALSE(origin.passed);
    // 1/(s-1): unstable
    const auto unstable = check_ni_frequency(scalar(1.0, 1.0, 1.0));
    CHECK_FALSE(unstable.pole_check.passed);
    REQUIRE(unstable.pole_check.offending.size() == 1);
    CHECK(unstable.pole_check.offending[0].real() == doctest::Approx(1.0));
}

TEST_CASE("frequency check refuses non-minimal realizations and empty grids") {
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << -1.0, -2.0;
    const StateSpace nm(a, (Matrix(2, 1) << 1.0, 0.0).finished(), (Matrix(1, 2) << 1.0, 0.0).finished());
    CHECK_THROWS_AS(check_ni_frequency(nm), NonMinimal);
    CHECK_THROWS_AS(check_ni_frequency(scalar(-1, 1, 1), GridSpec{1.0, 2.0, 1, true}), InvalidInput);
    CHECK_THROWS_AS(check_ni_frequency(scalar(-1, 1, 1), GridSpec{2.0, 1.0, 10, true}), InvalidInput);
}

TEST_CASE("residues of imaginary-axis poles") {
    const auto pos = residue_at(oscillator(1.0), 1.0);
    CHECK(pos.simple);
    REQUIRE(pos.residue);
    CHECK(std::abs(*pos.residue - Complex(0.5, 0.0)) < 1e-7);
    REQUIRE(pos.psd);
    CHECK(*pos.psd);

    const auto neg = residue_at(oscillator(-1.0), 1.0);
    REQUIRE(neg.residue);
    CHECK(std::abs(*neg.residue - Complex(-0.5, 0.0)) < 1e-7);
    CHECK_FALSE(*neg.psd);

    CHECK_THROWS_AS(residue_at(oscillator(1.0), 3.0), NoPoleNear);

    const auto dbl = residue_at(double_oscillator(), 1.0);
    CHECK_FALSE(dbl.simple);
    CHECK_FALSE(dbl.psd.has_value());
}

TEST_CASE("lossless oscillator: frequency check uses residue analysis") {
    const auto r = check_ni_frequency(oscillator(1.0));
    CHECK(r.passed);
    REQUIRE(r.residues.size() == 1);
    CHECK(r.residues[0].pole == doctest::Approx(1.0));
    CHECK(std::isfinite(r.sweep_min));

    CHECK_FALSE(check_ni_frequency(oscillator(-1.0)).passed);
    CHECK_FALSE(check_ni_frequency(double_oscillator()).passed);
}

TEST_CASE("verify_y on the scalar lag") {
    const auto sys = scalar(-1, 1, 1);
    CHECK(verify_y(sys, Matrix::Constant(1, 1, 1.0)).valid());
    const auto negative = verify_y(sys, Matrix::Constant(1, 1, -1.0));
    CHECK_FALSE(negative.valid());
    CHECK_FALSE(negative.y_positive());
    const auto off = verify_y(sys, Matrix::Constant(1, 1, 2.0));
    CHECK_FALSE(off.valid());
    CHECK(off.residual_b == doctest::Approx(1.0));
    CHECK_THROWS_AS(verify_y(sys, Matrix::Identity(2, 2)), InvalidInput);

    Matrix asym(2, 2);
    asym << 1.0, 0.1, 0.0, 1.0;
    CHECK_FALSE(verify_y(mems::plant(), asym).symmetric);
}

TEST_CASE("synth_y on the scalar lag gives Y = 1") {
    const auto r = synth_y(scalar(-1, 1, 1));
    REQUIRE(r.certified());
    CHECK(r.certificate->y(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.certificate->max_eig_lyap == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("synth_y on the MEMS plant") {
    const auto sys = mems::plant();
    const auto r = synth_y(sys);
    REQUIRE(r.certified());
    const Matrix& y = r.certificate->y;
    CHECK(verify_y(sys, y).valid());
    const double cyc = (sys.c() * y * sys.c().transpose())(0, 0);
    const double g0 = 130.9727 * 128.0 / 1.6676e4;
    CHECK(std::abs(cyc - g0) <= 1e-6 * (1.0 + g0));
    // Y C^T = -A^{-1} B fixes y12 = 0 and y22 = 128 / (130.9727 * 16676).
    CHECK(std::abs(y(0, 1)) <= 1e-12);
    CHECK(y(1, 1) == doctest::Approx(128.0 / (130.9727 * 16676.0)).epsilon(1e-9));
    // the only admissible y11 makes the off-diagonal of AY + YA^T vanish
    CHECK(y(0, 0) == doctest::Approx(16676.0 * y(1, 1) / 32768.0).epsilon(1e-3));
}

TEST_CASE("synth_y on the lossless oscillator finds Y = I") {
    const auto r = synth_y(oscillator(1.0));
    REQUIRE(r.certified());
    CHECK((r.certificate->y - Matrix::Identity(2, 2)).norm() < 1e-3);
}

TEST_CASE("synth_y does not certify non-NI systems") {
    const auto lead = synth_y(kNonNi);
    CHECK_FALSE(lead.certified());
    CHECK(lead.status != SynthStatus::Certified);
    CHECK_FALSE(synth_y(oscillator(-1.0)).certified());
    CHECK_FALSE(synth_y(scalar(1.0, 1.0, 1.0)).certified());
    const auto nf = synth_y(kNonNi);
    CHECK(nf.message.find("not a proof") != std::string::npos);
}

TEST_CASE("synth_y preconditions") {
    CHECK_THROWS_AS(synth_y(scalar(0.0, 1.0, 1.0)), SingularSystem);
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << -1.0, -2.0;
    CHECK_THROWS_AS(synth_y(StateSpace(a, (Matrix(2, 1) << 1.0, 0.0).finished(), (Matrix(1, 2) << 1.0, 0.0).finished())),
                    NonMinimal);
    const int n = kMaxSynthOrder + 1;
    Matrix big = -Matrix::Identity(n, n);
    big.diagonal(1).setOnes();
    Matrix b = Matrix::Zero(n, 1);
    b(n - 1) = 1.0;
    Matrix c = Matrix::Zero(1, n);
    c(0) = 1.0;
    CHECK_THROWS_AS(synth_y(StateSpace(big, b, c)), InvalidInput);
}

TEST_CASE("the linear constraint is consistent for every minimal plant with invertible A") {
    // Y c = v always has the symmetric solution (v c^T + c v^T) / |c|^2 - (v.c) c c^T / |c|^4.
    std::mt19937 rng(5);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 4;
        Matrix a(n, n), b(n, 1), c(1, n);
        for (int i = 0; i < n * n; ++i) a(i) = nd(rng);
        for (int i = 0; i < n; ++i) {
            b(i) = nd(rng);
            c(i) = nd(rng);
        }
        const StateSpace sys(a, b, c);
        if (!is_minimal(sys).minimal) continue;
        const auto r = synth_y(sys);
        CHECK(r.status != SynthStatus::ConstraintInconsistent);
        if (r.certified()) {
            CHECK(verify_y(sys, r.certificate->y).valid());
        }
    }
}

TEST_CASE("random mass-spring systems pass both checks") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ms = oracle::random_mass_spring(rng);
        const StateSpace sys(ms.a, ms.b, ms.c);
        CAPTURE(ms.mass);
        CAPTURE(ms.damping);
        CAPTURE(ms.stiffness);
        CHECK(check_ni_frequency(sys).passed);
        const auto r = synth_y(sys);
        REQUIRE(r.certified());
        CHECK(verify_y(sys, r.certificate->y).valid());
        const double cyc = (sys.c() * r.certificate->y * sys.c().transpose())(0, 0);
        CHECK(std::abs(cyc - dc_gain(sys)) <= 1e-6 * (1.0 + std::abs(dc_gain(sys))));
    }
}

TEST_CASE("grid spec") {
    const GridSpec g{1.0, 100.0, 3, true};
    const auto f = g.frequencies();
    CHECK(f.size() == 3);
    CHECK(f[1] == doctest::Approx(10.0));
    const GridSpec lin{1.0, 3.0, 3, false};
    CHECK(lin.frequencies()[1] == doctest::Approx(2.0));
    const auto d = default_ni_grid(mems::plant());
    CHECK(d.points == 8001);
    CHECK(d.omega_min == doctest::Approx(1e-2 * std::sqrt(16676.0 * 32768.0)));
}
