#pragma once

// Closed-loop stability certificate for the positive-feedback interconnection
// of an NI plant and a HIGS: k_h G(0) < 1, a valid Y certificate, the Schur
// margin 1/k_h - C Y C^T > 0, and A + k_h B C not a multiple of the identity.

#include "higs/higs.hpp"
#include "higs/interconnect.hpp"
#include "higs/lti.hpp"
#include "higs/ni_verify.hpp"

#include <optional>
#include <string>
#include <vector>

namespace higs {

/// 1 / G(0) for G(0) > 0, nullopt ("unbounded") otherwise. Throws SingularSystem for singular A.
[[nodiscard]] std::optional<double> gain_bound(const StateSpace& sys);

inline constexpr double kAlphaTol = 1e-9;

struct AlphaIdentity {
    bool ok = false;
    double distance = 0.0;  // min over alpha of ||M - alpha I||_F
};

/// distance of M from the multiples of the identity, ||M - (tr M / n) I||_F
[[nodiscard]] double alpha_identity_distance(const Matrix& m);

/// M = A + k_h B C; ok iff distance > kAlphaTol ||M||_F. A scalar M always
/// equals alpha I, so for n = 1 the check passes iff A < 0.
[[nodiscard]] AlphaIdentity check_alpha_identity(const StateSpace& sys, double k_h);

enum class Verdict { Pass, Fail, Inconclusive };

[[nodiscard]] const char* to_string(Verdict verdict);

struct StabilityCertificate {
    double k_h = 0.0;
    double dc_gain = 0.0;
    std::optional<double> k_h_bound;  // nullopt = unbounded
    std::optional<double> schur_margin;
    AlphaIdentity alpha_identity;
    std::optional<YCertificate> y;
    std::string y_ref;  // fingerprint of Y, empty without one
    SynthStatus y_status = SynthStatus::NoCertificateFound;
    Verdict verdict = Verdict::Fail;
    std::vector<std::string> reasons;
};

/// Runs synth_y unless `synth` is supplied. Throws NonMinimal for non-minimal plants
/// and SingularSystem for singular A.
[[nodiscard]] StabilityCertificate certify(const StateSpace& sys, const HigsParams& params,
                                           const std::optional<SynthResult>& synth = std::nullopt);

/// Fingerprint of a matrix: dimensions plus FNV-1a of the raw entries.
[[nodiscard]] std::string matrix_fingerprint(const Matrix& m);

/// Rows with 1 - k_h G(0) below this are flagged marginal.
inline constexpr double kMarginalReturnGap = 0.01;

struct SweepSimulation {
    Vector x0;
    SimConfig config;
};

struct SweepRow {
    double k_h = 0.0;
    StabilityCertificate certificate;
    bool marginal = false;
    std::optional<double> settling_time;  // s, 2% of the initial combined norm
    std::string simulation_error;
};

/// One row per grid value, ordered by k_h. The Y search runs once for the whole grid.
[[nodiscard]] std::vector<SweepRow> sweep_k_h(const StateSpace& sys, std::vector<double> k_h_grid, double omega_h,
                                              const std::optional<SweepSimulation>& simulation = std::nullopt);

}  // namespace higs
