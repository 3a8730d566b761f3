#include "higs/ni_verify.hpp"

#include "higs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace higs {

namespace {

constexpr int kPointsPerDecade = 2000;

double frobenius(const Matrix& m) { return m.norm(); }

// Symmetric matrices are parametrized by their scaled half-vectorization:
// diagonal entries as-is, off-diagonal entries times sqrt(2), so that the
// Euclidean norm of the vector equals the Frobenius norm of the matrix.
class SymmetricBasis {
public:
    explicit SymmetricBasis(int n) : n_(n) {
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                pairs_.emplace_back(i, j);
            }
        }
    }

    [[nodiscard]] int size() const { return static_cast<int>(pairs_.size()); }

    [[nodiscard]] Matrix unpack(const Vector& v) const {
        Matrix y = Matrix::Zero(n_, n_);
        for (int k = 0; k < size(); ++k) {
            const auto [i, j] = pairs_[static_cast<std::size_t>(k)];
            if (i == j) {
                y(i, i) = v(k);
            } else {
                y(i, j) = y(j, i) = v(k) / std::sqrt(2.0);
            }
        }
        return y;
    }

    [[nodiscard]] Matrix unit(int k) const {
        Vector e = Vector::Zero(size());
        e(k) = 1.0;
        return unpack(e);
    }

private:
    int n_;
    std::vector<std::pair<int, int>> pairs_;
};

double min_symmetric_eig(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_symmetric_eig(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

void require_minimal(const StateSpace& sys) {
    if (!is_minimal(sys).minimal) {
        throw NonMinimal("realization is not minimal; the NI lemma requires a minimal realization");
    }
}

// Objective terms of the certificate search, normalized so both are O(1).
struct Margins {
    double y_term = 0.0;     // lambda_min(Y) / s
    double lyap_term = 0.0;  // -lambda_max(AY + YA^T) / (2 ||A|| s)
};

class CertificateSearch {
public:
    CertificateSearch(const StateSpace& sys, const SymmetricBasis& basis, Vector particular, Matrix nullspace,
                      const SynthOptions& options)
        : sys_(sys),
          basis_(basis),
          particular_(std::move(particular)),
          nullspace_(std::move(nullspace)),
          options_(options),
          rng_(options.seed) {
        scale_ = particular_.norm();
        if (!(scale_ > 0.0)) {
            scale_ = 1.0;
        }
        norm_a_ = std::max(frobenius(sys.a()), std::numeric_limits<double>::min());
    }

    [[nodiscard]] int dimension() const { return static_cast<int>(nullspace_.cols()); }
    [[nodiscard]] int evaluations() const { return evaluations_; }

    [[nodiscard]] Matrix candidate(const Vector& z) const {
        Vector v = particular_;
        if (z.size() > 0) {
            v += scale_ * (nullspace_ * z);
        }
        return basis_.unpack(v);
    }

    Margins margins(const Vector& z) {
        ++evaluations_;
        const Matrix y = candidate(z);
        const Matrix lyap = sys_.a() * y + y * sys_.a().transpose();
        Margins m;
        m.y_term = min_symmetric_eig(y) / scale_;
        m.lyap_term = -max_symmetric_eig(lyap) / (2.0 * norm_a_ * scale_);
        return m;
    }

    // Coordinate pattern search with restarts in random orthonormal frames.
    template <typename Objective>
    Vector maximize(Vector z, Objective&& objective, int& restarts_used) {
        const int d = dimension();
        double best = objective(margins(z));
        Matrix frame = Matrix::Identity(d, d);
        double initial_step = 0.5;

        for (int restart = 0; restart <= options_.restart_budget; ++restart) {
            const double before = best;
            double step = initial_step;
            while (step > 1e-15 && evaluations_ < options_.max_evaluations) {
                bool improved = false;
                for (int k = 0; k < d && !improved; ++k) {
                    for (const double sign : {1.0, -1.0}) {
                        const Vector trial = z + sign * step * frame.col(k);
                        const double value = objective(margins(trial));
                        if (value > best) {
                            best = value;
                            z = trial;
                            improved = true;
                            break;
                        }
                    }
                }
                if (improved) {
                    step *= 2.0;
                } else {
                    step *= 0.5;
                }
            }
            restarts_used = restart;
            if (restart > 0 && !(best > before + 1e-15 * std::max(1.0, std::abs(before)))) {
                break;
            }
            frame = random_frame(d);
            initial_step = 1e-2;
        }
        return z;
    }

private:
    Matrix random_frame(int d) {
        std::normal_distribution<double> normal(0.0, 1.0);
        Matrix g(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                g(i, j) = normal(rng_);
            }
        }
        Eigen::HouseholderQR<Matrix> qr(g);
        return qr.householderQ() * Matrix::Identity(d, d);
    }

    const StateSpace& sys_;
    const SymmetricBasis& basis_;
    Vector particular_;
    Matrix nullspace_;
    SynthOptions options_;
    std::mt19937 rng_;
    double scale_ = 1.0;
    double norm_a_ = 1.0;
    int evaluations_ = 0;
};

}  // namespace

std::vector<double> GridSpec::frequencies() const {
    if (points < 2 || !(omega_min > 0.0) || !(omega_max > omega_min)) {
        throw InvalidInput("grid: need 0 < omega_min < omega_max and points >= 2");
    }
    return log_spaced ? logspace(omega_min, omega_max, points) : linspace(omega_min, omega_max, points);
}

std::string GridSpec::describe() const {
    std::ostringstream os;
    os.precision(6);
    os << points << (log_spaced ? " log-spaced" : " linearly spaced") << " points over [" << omega_min << ", "
       << omega_max << "] rad/s";
    return os.str();
}

GridSpec default_ni_grid(const StateSpace& sys) {
    double rho = spectral_radius(sys.a());
    if (!(rho > 0.0)) {
        rho = 1.0;
    }
    GridSpec g;
    g.omega_min = 1e-2 * rho;
    g.omega_max = 1e2 * rho;
    g.points = 4 * kPointsPerDecade + 1;
    g.log_spaced = true;
    return g;
}

const char* to_string(SynthStatus status) {
    switch (status) {
    case SynthStatus::Certified:
        return "certified";
    case SynthStatus::NoCertificateFound:
        return "no certificate found";
    case SynthStatus::ConstraintInconsistent:
        return "constraint inconsistent";
    }
    return "unknown";
}

ResidueReport residue_at(const StateSpace& sys, double omega0, const NiTolerances& tol) {
    if (!(omega0 > 0.0)) {
        throw InvalidInput("residue_at: omega0 must be positive");
    }
    const double norm_a = frobenius(sys.a());
    const double axis_tol = tol.pole_axis_rel * norm_a;
    const double cluster_tol = tol.cluster_rel * norm_a;
    const Complex target(0.0, omega0);

    const auto spectrum = eigenvalues(sys.a()).eigenvalues;
    const Complex* nearest = nullptr;
    for (const auto& lambda : spectrum) {
        if (nearest == nullptr || std::abs(lambda - target) < std::abs(*nearest - target)) {
            nearest = &lambda;
        }
    }
    if (nearest == nullptr || std::abs(*nearest - target) > axis_tol) {
        std::ostringstream os;
        os << "no pole near j*" << omega0 << " (tolerance " << axis_tol << ")";
        throw NoPoleNear(os.str());
    }
    const Complex pole = *nearest;

    ResidueReport out;
    out.pole = omega0;
    const auto multiplicity = std::count_if(spectrum.begin(), spectrum.end(),
                                            [&](const Complex& l) { return std::abs(l - pole) <= cluster_tol; });
    out.simple = multiplicity == 1;
    if (!out.simple) {
        return out;
    }

    // f(r) = r j G(pole + r) = K0 + a r + O(r^2); Richardson over r_k = 10^-k ||A||.
    std::vector<Complex> samples;
    for (int k = 2; k <= 6; ++k) {
        const double r = std::pow(10.0, -k) * norm_a;
        samples.push_back(r * Complex(0.0, 1.0) * evaluate_transfer(sys, pole + r));
    }
    std::vector<Complex> extrapolated;
    for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
        extrapolated.push_back((10.0 * samples[k + 1] - samples[k]) / 9.0);
    }
    const Complex k0 = extrapolated.back();
    out.residue = k0;
    out.error_estimate = std::abs(extrapolated.back() - extrapolated[extrapolated.size() - 2]);

    const double psd_tol = std::max(tol.psd_rel * std::abs(k0), 10.0 * out.error_estimate);
    out.psd = k0.real() >= -psd_tol && std::abs(k0.imag()) <= psd_tol;
    return out;
}

NiFrequencyReport check_ni_frequency(const StateSpace& sys, const GridSpec& grid, const NiTolerances& tol) {
    require_minimal(sys);
    const double norm_a = frobenius(sys.a());
    const double axis_tol = tol.pole_axis_rel * norm_a;
    const double origin_tol = tol.origin_rel * norm_a;

    NiFrequencyReport out;
    out.grid_spec = grid.describe();

    std::vector<double> axis_poles;
    for (const auto& lambda : eigenvalues(sys.a()).eigenvalues) {
        if (std::abs(lambda) <= origin_tol || lambda.real() > axis_tol) {
            out.pole_check.passed = false;
            out.pole_check.offending.push_back(lambda);
        } else if (std::abs(lambda.real()) <= axis_tol && lambda.imag() > 0.0) {
            axis_poles.push_back(lambda.imag());
        }
    }
    for (const double w0 : axis_poles) {
        out.residues.push_back(residue_at(sys, w0, tol));
    }

    std::vector<double> effective;
    for (const double w : grid.frequencies()) {
        const bool near_pole = std::any_of(axis_poles.begin(), axis_poles.end(),
                                           [&](double w0) { return std::abs(w - w0) <= axis_tol; });
        if (!near_pole) {
            effective.push_back(w);
        }
    }
    if (effective.empty()) {
        throw InvalidInput("check_ni_frequency: effective frequency grid is empty");
    }

    const auto response = freq_response(sys, effective);
    double max_abs = 0.0;
    out.sweep_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < response.values.size(); ++k) {
        const double value = -2.0 * response.values[k].imag();
        max_abs = std::max(max_abs, std::abs(response.values[k]));
        if (value < out.sweep_min) {
            out.sweep_min = value;
            out.worst_frequency = response.frequencies[k];
        }
    }
    out.evaluated_points = response.values.size();
    out.sweep_tol = tol.sweep_rel * max_abs;

    const bool residues_ok = std::all_of(out.residues.begin(), out.residues.end(), [](const ResidueReport& r) {
        return r.simple && r.psd.value_or(false);
    });
    out.passed = out.pole_check.passed && out.sweep_min >= -out.sweep_tol && residues_ok;
    return out;
}

NiFrequencyReport check_ni_frequency(const StateSpace& sys) {
    return check_ni_frequency(sys, default_ni_grid(sys));
}

YCertificate verify_y(const StateSpace& sys, const Matrix& y, const NiTolerances& tol) {
    const int n = sys.order();
    if (y.rows() != n || y.cols() != n) {
        throw InvalidInput("verify_y: Y must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    validate_matrix(y, "Y");

    YCertificate cert;
    cert.symmetric = (y - y.transpose()).cwiseAbs().maxCoeff() <= 1e-12;
    cert.y = 0.5 * (y + y.transpose());

    // General (nonsymmetric) eigen route, independent of the search's symmetric solver.
    auto extreme_real = [](const Matrix& m, bool want_max) {
        double best = want_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        for (const auto& lambda : eigenvalues(m).eigenvalues) {
            best = want_max ? std::max(best, lambda.real()) : std::min(best, lambda.real());
        }
        return best;
    };
    const Matrix& a = sys.a();
    const Matrix lyap = a * cert.y + cert.y * a.transpose();
    cert.min_eig_y = extreme_real(cert.y, false);
    cert.max_eig_lyap = extreme_real(lyap, true);
    cert.residual_b = (sys.b() + a * cert.y * sys.c().transpose()).norm();
    cert.tol_psd = tol.psd_rel * 2.0 * frobenius(a) * cert.y.norm();
    cert.tol_lin = tol.lin * (sys.b().norm() + 1.0);
    return cert;
}

SynthResult synth_y(const StateSpace& sys, const SynthOptions& options, const NiTolerances& tol) {
    const int n = sys.order();
    if (n > kMaxSynthOrder) {
        throw InvalidInput("synth_y: order exceeds " + std::to_string(kMaxSynthOrder));
    }
    require_minimal(sys);
    (void)dc_gain(sys);  // throws SingularSystem when det(A) = 0

    // Linear constraint A Y C^T = -B as an n x m system on the symmetric parametrization.
    const SymmetricBasis basis(n);
    const int m = basis.size();
    Matrix op(n, m);
    for (int k = 0; k < m; ++k) {
        op.col(k) = sys.a() * basis.unit(k) * sys.c().transpose();
    }
    const Vector rhs = -sys.b();

    Eigen::JacobiSVD<Matrix> svd(op, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > 1e-12 * sv(0)) {
            rank = static_cast<int>(i) + 1;
        }
    }
    Vector particular = Vector::Zero(m);
    if (rank > 0) {
        const Vector coeffs = svd.matrixU().leftCols(rank).transpose() * rhs;
        particular = svd.matrixV().leftCols(rank) * coeffs.cwiseQuotient(sv.head(rank));
    }

    SynthResult result;
    const double lin_residual = (op * particular - rhs).norm();
    if (lin_residual > tol.lin * (sys.b().norm() + 1.0)) {
        result.status = SynthStatus::ConstraintInconsistent;
        std::ostringstream os;
        os << "B + AYC^T = 0 has no symmetric solution (residual " << lin_residual << "); plant is not NI";
        result.message = os.str();
        return result;
    }
    const Matrix nullspace = svd.matrixV().rightCols(m - rank);

    CertificateSearch search(sys, basis, particular, nullspace, options);
    Vector z = Vector::Zero(search.dimension());
    int restarts = 0;
    if (search.dimension() > 0) {
        z = search.maximize(z, [](const Margins& mg) { return std::min(mg.y_term, mg.lyap_term); }, restarts);

        // Lossless directions pin lambda_max(AY + YA^T) at 0; then grow lambda_min(Y)
        // while keeping the Lyapunov term within half its tolerance.
        const Margins at = search.margins(z);
        const double slack = -0.5 * tol.psd_rel;
        if (at.lyap_term < at.y_term && at.lyap_term >= slack) {
            int more = 0;
            z = search.maximize(
                z,
                [slack](const Margins& mg) {
                    return mg.lyap_term >= slack ? mg.y_term : -1e3 + mg.lyap_term;
                },
                more);
            restarts += more;
        }
    }

    result.certificate = verify_y(sys, search.candidate(z), tol);
    result.restarts_used = restarts;
    result.evaluations = search.evaluations();
    if (result.certificate->valid()) {
        result.status = SynthStatus::Certified;
        result.message = "certificate found";
    } else {
        result.status = SynthStatus::NoCertificateFound;
        result.message = "no certificate found within the search budget (inconclusive, not a proof that the plant "
                         "is not NI)";
    }
    return result;
}

}  // namespace higs
