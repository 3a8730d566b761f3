#include "higs/error.hpp"
#include "higs/mems.hpp"
#include "higs/stability.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace higs;

namespace {

StateSpace scalar(double a, double b, double c, double d = 0.0) {
    return StateSpace(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b), Matrix::Constant(1, 1, c), d);
}

bool mentions(const StabilityCertificate& cert, const std::string& what) {
    for (const auto& r : cert.reasons) {
        if (r.find(what) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("gain bound") {
    const auto mems_bound = gain_bound(mems::plant());
    REQUIRE(mems_bound);
    CHECK(*mems_bound == doctest::Approx(1.6676e4 / (130.9727 * 128.0)).epsilon(1e-13));
    CHECK(*mems_bound >= 0.9947);
    CHECK(*mems_bound <= 0.9949);
    CHECK_FALSE(gain_bound(scalar(-1.0, 1.0, -1.0)).has_value());
    CHECK(*gain_bound(scalar(-1.0, 2.0, 1.0)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(gain_bound(scalar(0.0, 1.0, 1.0)), SingularSystem);
}

TEST_CASE("distance from multiples of the identity") {
    Matrix m = Matrix::Zero(2, 2);
    m.diagonal() << 2.0, 3.0;
    CHECK(alpha_identity_distance(m) == doctest::Approx(std::sqrt(0.5)));
    CHECK(alpha_identity_distance(5.0 * Matrix::Identity(3, 3)) == 0.0);
    CHECK_THROWS_AS(alpha_identity_distance(Matrix::Zero(2, 3)), InvalidInput);

    // M = 5 I from A = 5 I - k B C
    Matrix b(2, 1), c(1, 2);
    b << 1.0, 0.0;
    c << 1.0, 1.0;
    Matrix a = 5.0 * Matrix::Identity(2, 2) - 2.0 * b * c;
    const auto degenerate = check_alpha_identity(StateSpace(a, b, c), 2.0);
    CHECK_FALSE(degenerate.ok);
    CHECK(degenerate.distance <= 1e-15);

    const auto ok = check_alpha_identity(mems::plant(), mems::kGain);
    CHECK(ok.ok);
    CHECK(ok.distance > 3e4);

    CHECK(check_alpha_identity(scalar(-1.0, 1.0, 1.0), 0.5).ok);
    CHECK_FALSE(check_alpha_identity(scalar(1.0, 1.0, 1.0), 0.5).ok);
}

TEST_CASE("MEMS certificate passes at the chosen gain") {
    const auto cert = certify(mems::plant(), mems::higs_params());
    CHECK(cert.verdict == Verdict::Pass);
    CHECK(cert.reasons.empty());
    REQUIRE(cert.schur_margin);
    // schur margin = 1/k_h - C Y C^T = 1/k_h - G(0)
    CHECK(std::abs(*cert.schur_margin - (1.0 / mems::kGain - cert.dc_gain)) <= 1e-6 * (1.0 + cert.dc_gain));
    CHECK_FALSE(cert.y_ref.empty());
    CHECK(cert.y_status == SynthStatus::Certified);
}

TEST_CASE("MEMS certificate fails above the bound with every reason listed") {
    const auto cert = certify(mems::plant(), HigsParams(1.2, mems::kOmegaH));
    CHECK(cert.verdict == Verdict::Fail);
    CHECK(1.2 * cert.dc_gain == doctest::Approx(1.2064).epsilon(1e-4));
    CHECK(mentions(cert, "k_h G(0)"));
    CHECK(mentions(cert, "Schur"));
    CHECK(cert.reasons.size() == 2);
}

TEST_CASE("scalar special case") {
    const auto pass = certify(scalar(-1.0, 1.0, 1.0), HigsParams(0.5, 1.0));
    CHECK(pass.verdict == Verdict::Pass);
    const auto high = certify(scalar(-1.0, 1.0, 1.0), HigsParams(1.5, 1.0));
    CHECK(high.verdict == Verdict::Fail);
    // unstable scalar plant: not NI and A >= 0
    const auto unstable = certify(scalar(1.0, 1.0, 1.0), HigsParams(0.5, 1.0));
    CHECK(unstable.verdict == Verdict::Fail);
    CHECK(mentions(unstable, "scalar"));
}

TEST_CASE("missing Y makes the verdict inconclusive") {
    const SynthResult none{SynthStatus::NoCertificateFound, std::nullopt, 50, 1000, "budget exhausted"};
    const auto cert = certify(mems::plant(), mems::higs_params(), none);
    CHECK(cert.verdict == Verdict::Inconclusive);
    REQUIRE(cert.reasons.size() == 1);
    CHECK(mentions(cert, "no Y certificate"));
    CHECK_FALSE(cert.schur_margin);

    // another failing condition makes it a failure
    const auto both = certify(mems::plant(), HigsParams(1.2, 1.0), none);
    CHECK(both.verdict == Verdict::Fail);
    CHECK(both.reasons.size() == 2);

    const SynthResult inconsistent{SynthStatus::ConstraintInconsistent, std::nullopt, 0, 0, ""};
    CHECK(certify(mems::plant(), mems::higs_params(), inconsistent).verdict == Verdict::Fail);
}

TEST_CASE("certify refuses non-minimal plants") {
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << -1.0, -2.0;
    const StateSpace nm(a, (Matrix(2, 1) << 1.0, 0.0).finished(), (Matrix(1, 2) << 1.0, 0.0).finished());
    CHECK_THROWS_AS(certify(nm, HigsParams(0.5, 1.0)), NonMinimal);
}

TEST_CASE("sweep over k_h") {
    const auto rows = sweep_k_h(mems::plant(), {0.9, 0.1, 0.4939}, mems::kOmegaH);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].k_h == 0.1);
    CHECK(rows[1].k_h == 0.4939);
    CHECK(rows[2].k_h == 0.9);
    for (const auto& r : rows) {
        CHECK(r.certificate.verdict == Verdict::Pass);
        CHECK_FALSE(r.marginal);
        CHECK_FALSE(r.settling_time.has_value());
    }
    const auto marginal = sweep_k_h(mems::plant(), {0.99}, mems::kOmegaH);
    CHECK(marginal[0].certificate.verdict == Verdict::Pass);
    CHECK(marginal[0].marginal);
    CHECK(*marginal[0].certificate.schur_margin < 0.01);
    CHECK(sweep_k_h(mems::plant(), {}, mems::kOmegaH).empty());
    CHECK_THROWS_AS(sweep_k_h(mems::plant(), {0.5, -1.0}, 1.0), InvalidInput);
}

TEST_CASE("sweep with settling times") {
    SweepSimulation sim;
    sim.x0 = mems::initial_state();
    sim.config.t_final = 0.02;
    sim.config.record_stride = 10;
    const auto rows = sweep_k_h(mems::plant(), {0.4939, 0.9}, mems::kOmegaH, sim);
    for (const auto& r : rows) {
        REQUIRE(r.settling_time.has_value());
        CHECK(*r.settling_time > 0.0);
        CHECK(*r.settling_time < 0.02);
    }
}

TEST_CASE("passing certificates are consistent with simulation") {
    const auto sys = mems::plant();
    const auto p = mems::higs_params();
    REQUIRE(certify(sys, p).verdict == Verdict::Pass);
    std::mt19937 rng(99);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SimConfig cfg;
    cfg.dt = 1e-6;
    cfg.t_final = 0.05;
    cfg.record_stride = 1000;
    for (int trial = 0; trial < 20; ++trial) {
        Vector x0(2);
        x0 << nd(rng), nd(rng);
        x0 *= std::sqrt(u(rng)) / x0.norm();
        const auto traj = simulate(sys, p, x0, cfg);
        CHECK(combined_norm(traj.samples.back()) <= 1e-3 * combined_norm(traj.samples.front()));
    }
}

TEST_CASE("gain bound scales inversely with the output") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> beta_dist(0.01, 100.0);
    for (int trial = 0; trial < 25; ++trial) {
        const auto ms = oracle::random_mass_spring(rng);
        const StateSpace sys(ms.a, ms.b, ms.c);
        const double beta = beta_dist(rng);
        const StateSpace scaled = sys.with_output_scaled(beta);
        CHECK(std::abs(dc_gain(scaled) - beta * dc_gain(sys)) <= 1e-9 * std::abs(beta * dc_gain(sys)));
        CHECK(std::abs(*gain_bound(scaled) - *gain_bound(sys) / beta) <= 1e-9 * (*gain_bound(sys) / beta));
    }
}

TEST_CASE("fingerprints") {
    const Matrix a = Matrix::Identity(2, 2);
    Matrix b = a;
    CHECK(matrix_fingerprint(a) == matrix_fingerprint(b));
    b(0, 1) = 1e-300;
    CHECK(matrix_fingerprint(a) != matrix_fingerprint(b));
    CHECK(matrix_fingerprint(a).rfind("Y2x2-", 0) == 0);
}
