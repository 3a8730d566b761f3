#include "higs/describing_function.hpp"

#include "higs/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace higs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kJ{0.0, 1.0};

// exp(-j theta) - 1 without cancellation for small theta.
Complex expm1_neg_j(double theta) {
    const double s = std::sin(0.5 * theta);
    return {-2.0 * s * s, -std::sin(theta)};
}

}  // namespace

double switching_angle(const HigsParams& params, double omega) {
    if (params.omega_h() == 0.0) {
        return kPi;
    }
    return 2.0 * std::atan(params.k_h() * omega / params.omega_h());
}

DfPoint describing_function(const HigsParams& params, double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw InvalidInput("describing_function: frequency must be positive");
    }
    const double gamma = switching_angle(params, omega);
    // At gamma = pi (w_h = 0) exp(-2j gamma) - 1 vanishes exactly.
    const Complex double_term = gamma == kPi ? Complex{} : kJ * expm1_neg_j(2.0 * gamma) / (2.0 * kPi);

    Complex value = params.k_h() * ((kPi - gamma) / kPi + double_term);
    if (params.omega_h() > 0.0) {
        const Complex bracket = gamma / kPi + double_term - 4.0 * kJ * expm1_neg_j(gamma) / (2.0 * kPi);
        value += params.omega_h() / (kJ * omega) * bracket;
    }
    return DfPoint{omega, gamma, value};
}

double df_cutoff(const HigsParams& params) { return params.omega_h() * std::abs(Complex(1.0, 4.0 / kPi)); }

double magnitude_db(Complex value) { return 20.0 * std::log10(std::abs(value)); }

double phase_deg(Complex value) { return std::arg(value) * 180.0 / kPi; }

BodeTable df_bode(const HigsParams& params, const std::vector<double>& grid) {
    BodeTable table;
    table.cutoff = df_cutoff(params);
    table.rows.reserve(grid.size());
    double previous = 0.0;
    for (const double w : grid) {
        if (!(w > previous)) {
            throw InvalidInput("df_bode: grid must be positive and strictly increasing");
        }
        previous = w;
        const DfPoint p = describing_function(params, w);
        table.rows.push_back(BodeRow{p, w / (2.0 * kPi), magnitude_db(p.value), phase_deg(p.value)});
    }
    return table;
}

ComplexResponse df_closed_loop(const ComplexResponse& plant, const HigsParams& params) {
    if (plant.frequencies.size() != plant.values.size()) {
        throw InvalidInput("df_closed_loop: response lengths differ");
    }
    ComplexResponse out;
    out.frequencies = plant.frequencies;
    out.values.reserve(plant.values.size());
    for (std::size_t k = 0; k < plant.values.size(); ++k) {
        const double w = plant.frequencies[k];
        const Complex g = plant.values[k];
        const Complex return_difference = 1.0 - g * describing_function(params, w).value;
        if (std::abs(return_difference) < kMinReturnDifference) {
            std::ostringstream os;
            os << "df_closed_loop: near-singular return difference at " << w << " rad/s";
            throw SingularSystem(os.str(), w);
        }
        out.values.push_back(g / return_difference);
    }
    return out;
}

ComplexResponse df_closed_loop(const StateSpace& plant, const HigsParams& params, const std::vector<double>& grid) {
    return df_closed_loop(freq_response(plant, grid), params);
}

}  // namespace higs
