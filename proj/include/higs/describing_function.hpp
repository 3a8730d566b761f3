#pragma once

// Sinusoidal-input describing function of the HIGS and the quasi-linear
// closed-loop response built from it.

#include "higs/higs.hpp"
#include "higs/lti.hpp"

#include <vector>

namespace higs {

struct DfPoint {
    double omega = 0.0;  // rad/s
    double gamma = 0.0;  // switching angle, rad, in [0, pi]
    Complex value;
};

/// gamma = 2 atan(k_h w / w_h); pi when w_h = 0.
[[nodiscard]] double switching_angle(const HigsParams& params, double omega);

/// First-harmonic gain D_h(jw) for the input sin(wt). Throws InvalidInput for w <= 0.
[[nodiscard]] DfPoint describing_function(const HigsParams& params, double omega);

/// w_c = w_h |1 + 4j / pi|
[[nodiscard]] double df_cutoff(const HigsParams& params);

struct BodeRow {
    DfPoint point;
    double freq_hz = 0.0;
    double mag_db = 0.0;
    double phase_deg = 0.0;
};

struct BodeTable {
    std::vector<BodeRow> rows;
    double cutoff = 0.0;  // rad/s
};

[[nodiscard]] BodeTable df_bode(const HigsParams& params, const std::vector<double>& grid);

/// Magnitude in dB and phase in degrees (principal value).
[[nodiscard]] double magnitude_db(Complex value);
[[nodiscard]] double phase_deg(Complex value);

/// Minimum |1 - G D_h| accepted by df_closed_loop.
inline constexpr double kMinReturnDifference = 1e-6;

/// T = G / (1 - G D_h): reference-to-output map of the positive-feedback loop.
/// Throws SingularSystem when |1 - G D_h| < kMinReturnDifference at a grid point.
[[nodiscard]] ComplexResponse df_closed_loop(const ComplexResponse& plant, const HigsParams& params);
[[nodiscard]] ComplexResponse df_closed_loop(const StateSpace& plant, const HigsParams& params,
                                             const std::vector<double>& grid);

}  // namespace higs
