#include "higs/stability.hpp"

#include "higs/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace higs {

std::optional<double> gain_bound(const StateSpace& sys) {
    const double g0 = dc_gain(sys);
    if (g0 > 0.0) {
        return 1.0 / g0;
    }
    return std::nullopt;
}

double alpha_identity_distance(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw InvalidInput("alpha_identity_distance: square matrix required");
    }
    const double alpha = m.trace() / static_cast<double>(m.rows());
    return (m - alpha * Matrix::Identity(m.rows(), m.cols())).norm();
}

AlphaIdentity check_alpha_identity(const StateSpace& sys, double k_h) {
    const Matrix m = sys.a() + k_h * sys.b() * sys.c();
    AlphaIdentity out;
    out.distance = alpha_identity_distance(m);
    if (sys.order() == 1) {
        out.ok = sys.a()(0, 0) < 0.0;
    } else {
        out.ok = out.distance > kAlphaTol * m.norm();
    }
    return out;
}

const char* to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "fail";
}

std::string matrix_fingerprint(const Matrix& m) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double v = m(i, j);
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof v);
            for (unsigned char b : bytes) {
                hash ^= b;
                hash *= 0x100000001b3ULL;
            }
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "Y%ldx%ld-%016llx", static_cast<long>(m.rows()), static_cast<long>(m.cols()),
                  static_cast<unsigned long long>(hash));
    return buf;
}

StabilityCertificate certify(const StateSpace& sys, const HigsParams& params, const std::optional<SynthResult>& synth) {
    const auto minimality = is_minimal(sys);
    if (!minimality.minimal) {
        throw NonMinimal("certify: realization is not minimal");
    }
    StabilityCertificate cert;
    cert.k_h = params.k_h();
    cert.dc_gain = dc_gain(sys);
    cert.k_h_bound = gain_bound(sys);
    cert.alpha_identity = check_alpha_identity(sys, params.k_h());

    const SynthResult result = synth ? *synth : synth_y(sys);
    cert.y_status = result.status;

    std::vector<std::string> hard;
    auto fail = [&](const std::string& reason) { hard.push_back(reason); };

    std::ostringstream os;
    os.precision(10);
    if (params.k_h() * cert.dc_gain >= 1.0) {
        os << "k_h G(0) = " << params.k_h() * cert.dc_gain << " >= 1";
        fail(os.str());
        os.str("");
    }
    if (!cert.alpha_identity.ok) {
        if (sys.order() == 1) {
            fail("scalar plant with A >= 0");
        } else {
            os << "A + k_h B C is within " << cert.alpha_identity.distance << " of alpha I";
            fail(os.str());
            os.str("");
        }
    }

    bool y_missing = false;
    if (result.certified()) {
        cert.y = result.certificate;
        cert.y_ref = matrix_fingerprint(result.certificate->y);
        const Matrix& y = result.certificate->y;
        const double cyc = (sys.c() * y * sys.c().transpose())(0, 0);
        cert.schur_margin = 1.0 / params.k_h() - cyc;
        if (!(*cert.schur_margin > 0.0)) {
            os << "Schur margin 1/k_h - C Y C^T = " << *cert.schur_margin << " <= 0";
            fail(os.str());
            os.str("");
        }
    } else if (result.status == SynthStatus::ConstraintInconsistent) {
        fail("no symmetric Y solves B + A Y C^T = 0, plant is not NI");
    } else {
        y_missing = true;
    }

    cert.reasons = hard;
    if (y_missing) {
        cert.reasons.push_back("no Y certificate found (" + result.message + ")");
    }
    if (!hard.empty()) {
        cert.verdict = Verdict::Fail;
    } else if (y_missing) {
        cert.verdict = Verdict::Inconclusive;
    } else {
        cert.verdict = Verdict::Pass;
    }
    return cert;
}

std::vector<SweepRow> sweep_k_h(const StateSpace& sys, std::vector<double> k_h_grid, double omega_h,
                                const std::optional<SweepSimulation>& simulation) {
    std::vector<SweepRow> rows;
    if (k_h_grid.empty()) {
        return rows;
    }
    for (double k : k_h_grid) {
        if (!(k > 0.0) || !std::isfinite(k)) {
            throw InvalidInput("sweep_k_h: grid values must be positive");
        }
    }
    std::sort(k_h_grid.begin(), k_h_grid.end());
    const SynthResult synth = synth_y(sys);
    rows.reserve(k_h_grid.size());
    for (double k : k_h_grid) {
        const HigsParams params(k, omega_h);
        SweepRow row;
        row.k_h = k;
        row.certificate = certify(sys, params, synth);
        row.marginal = row.certificate.dc_gain > 0.0 && 1.0 - k * row.certificate.dc_gain < kMarginalReturnGap;
        if (simulation) {
            try {
                row.settling_time = settling_time(simulate(sys, params, simulation->x0, simulation->config));
            } catch (const Error& e) {
                row.simulation_error = e.what();
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace higs
