#pragma once

// Negative-imaginary verification of SISO plants: a frequency-domain check
// (pole locations, sign of Im G(jw), residues of imaginary-axis poles) and
// synthesis/verification of the Y certificate
//     Y = Y^T > 0,  AY + YA^T <= 0,  B + AYC^T = 0.

#include "higs/lti.hpp"

#include <optional>
#include <string>
#include <vector>

namespace higs {

struct GridSpec {
    double omega_min = 0.0;  // rad/s
    double omega_max = 0.0;
    int points = 0;
    bool log_spaced = true;

    [[nodiscard]] std::vector<double> frequencies() const;
    [[nodiscard]] std::string describe() const;
};

/// 2000 points per decade over [1e-2, 1e2] x spectral radius of A.
[[nodiscard]] GridSpec default_ni_grid(const StateSpace& sys);

struct PoleCheck {
    bool passed = true;
    std::vector<Complex> offending;
};

struct ResidueReport {
    double pole = 0.0;  // w0, rad/s
    bool simple = false;
    std::optional<Complex> residue;
    /// Unset when the pole is not simple.
    std::optional<bool> psd;
    /// |difference| between the last two Richardson estimates.
    double error_estimate = 0.0;
};

struct NiFrequencyReport {
    PoleCheck pole_check;
    double sweep_min = 0.0;         // min over grid of -2 Im G(jw)
    double worst_frequency = 0.0;   // rad/s, argmin of the above
    double sweep_tol = 0.0;
    std::string grid_spec;
    std::size_t evaluated_points = 0;
    std::vector<ResidueReport> residues;
    bool passed = false;
};

struct YCertificate {
    Matrix y;
    double min_eig_y = 0.0;
    double max_eig_lyap = 0.0;  // largest eigenvalue of AY + YA^T
    double residual_b = 0.0;    // ||B + AYC^T||
    double tol_psd = 0.0;
    double tol_lin = 0.0;
    bool symmetric = false;

    [[nodiscard]] bool y_positive() const { return min_eig_y > 0.0; }
    [[nodiscard]] bool lyapunov_ok() const { return max_eig_lyap <= tol_psd; }
    [[nodiscard]] bool linear_ok() const { return residual_b <= tol_lin; }
    [[nodiscard]] bool valid() const { return symmetric && y_positive() && lyapunov_ok() && linear_ok(); }
};

enum class SynthStatus {
    Certified,
    /// Search budget exhausted. Not a proof that the plant is not NI.
    NoCertificateFound,
    /// B + AYC^T = 0 has no symmetric solution, which rules out the NI property.
    ConstraintInconsistent,
};

struct SynthResult {
    SynthStatus status = SynthStatus::NoCertificateFound;
    /// Best candidate found; a passing certificate when status == Certified.
    std::optional<YCertificate> certificate;
    int restarts_used = 0;
    int evaluations = 0;
    std::string message;

    [[nodiscard]] bool certified() const { return status == SynthStatus::Certified; }
};

[[nodiscard]] const char* to_string(SynthStatus status);

/// Numerical policy, all scaled by ||A||_F where relevant.
struct NiTolerances {
    double pole_axis_rel = 1e-7;
    double origin_rel = 1e-9;
    double sweep_rel = 1e-8;
    double psd_rel = 1e-7;
    double lin = 1e-8;
    double cluster_rel = 1e-6;
};

[[nodiscard]] NiFrequencyReport check_ni_frequency(const StateSpace& sys, const GridSpec& grid,
                                                   const NiTolerances& tol = {});
[[nodiscard]] NiFrequencyReport check_ni_frequency(const StateSpace& sys);

/// Residue K0 = lim_{s -> j w0} (s - j w0) j G(s) of an imaginary-axis pole.
[[nodiscard]] ResidueReport residue_at(const StateSpace& sys, double omega0, const NiTolerances& tol = {});

/// Maximum order accepted by the certificate search.
inline constexpr int kMaxSynthOrder = 12;

struct SynthOptions {
    int restart_budget = 50;
    int max_evaluations = 200000;
    unsigned seed = 0x5eed;
};

[[nodiscard]] SynthResult synth_y(const StateSpace& sys, const SynthOptions& options = {},
                                  const NiTolerances& tol = {});

/// Independent recomputation of every certificate margin for a given Y.
[[nodiscard]] YCertificate verify_y(const StateSpace& sys, const Matrix& y, const NiTolerances& tol = {});

}  // namespace higs
