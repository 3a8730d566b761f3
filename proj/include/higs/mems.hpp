#pragma once

// MEMS nanopositioner model (fitted second-order NI model) and the HIGS tuning
// used with it.

#include "higs/higs.hpp"
#include "higs/lti.hpp"

namespace higs::mems {

inline StateSpace plant() {
    Matrix a(2, 2);
    a << -547.571, -1.6676e4, 32768.0, 0.0;
    Matrix b(2, 1);
    b << 128.0, 0.0;
    Matrix c(1, 2);
    c << 0.0, 130.9727;
    return StateSpace(a, b, c, 0.0);
}

inline constexpr double kGain = 0.4939;
inline constexpr double kOmegaH = 1.1705e4;  // rad/s

inline HigsParams higs_params() { return HigsParams(kGain, kOmegaH); }

inline Vector initial_state() {
    Vector x0(2);
    x0 << 0.003, 0.024;
    return x0;
}

}  // namespace higs::mems
