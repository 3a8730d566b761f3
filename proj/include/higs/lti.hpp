#pragma once

// Dense SISO LTI foundation: state-space models, spectra, frequency response,
// DC gain and minimality.

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace higs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Largest state dimension accepted by the toolkit.
inline constexpr int kMaxOrder = 32;

/// Throws InvalidInput unless `m` is non-empty with finite entries.
void validate_matrix(const Matrix& m, const char* name);

/// Continuous-time SISO realization x' = Ax + Bu, y = Cx + Du.
class StateSpace {
public:
    StateSpace(Matrix a, Matrix b, Matrix c, double d = 0.0);

    [[nodiscard]] const Matrix& a() const noexcept { return a_; }
    [[nodiscard]] const Matrix& b() const noexcept { return b_; }
    [[nodiscard]] const Matrix& c() const noexcept { return c_; }
    [[nodiscard]] double d() const noexcept { return d_; }
    [[nodiscard]] int order() const noexcept { return static_cast<int>(a_.rows()); }

    /// Same dynamics with the output row scaled by `factor`.
    [[nodiscard]] StateSpace with_output_scaled(double factor) const;

private:
    Matrix a_;
    Matrix b_;
    Matrix c_;
    double d_;
};

struct ComplexResponse {
    std::vector<double> frequencies;  // rad/s, strictly increasing
    std::vector<Complex> values;
};

struct Spectrum {
    std::vector<Complex> eigenvalues;
    /// max_i ||M v_i - lambda_i v_i|| / ||v_i||
    double residual = 0.0;
};

struct MinimalityReport {
    bool minimal = false;
    int controllability_rank = 0;
    int observability_rank = 0;
    /// Smallest singular value kept by each rank decision (0 when the rank is 0).
    double controllability_margin = 0.0;
    double observability_margin = 0.0;
};

/// All eigenvalues of a real square matrix (n <= 32). Conjugate pairs are
/// adjacent, positive imaginary part first.
[[nodiscard]] Spectrum eigenvalues(const Matrix& m);

/// Transfer function C (sI - A)^{-1} B + D at an arbitrary complex point.
[[nodiscard]] Complex evaluate_transfer(const StateSpace& sys, Complex s);

/// G(jw) on a positive, strictly increasing grid. Throws SingularSystem at an
/// imaginary-axis pole.
[[nodiscard]] ComplexResponse freq_response(const StateSpace& sys, const std::vector<double>& grid);

/// G(0) = -C A^{-1} B + D. Throws SingularSystem when A is singular.
[[nodiscard]] double dc_gain(const StateSpace& sys);

[[nodiscard]] MinimalityReport is_minimal(const StateSpace& sys);

/// Numerical rank with relative tolerance `rel_tol` on the singular values.
struct RankDecision {
    int rank = 0;
    double margin = 0.0;
};
[[nodiscard]] RankDecision numerical_rank(const Matrix& m, double rel_tol = 1e-9);

/// `points` log-spaced values between lo and hi inclusive.
[[nodiscard]] std::vector<double> logspace(double lo, double hi, int points);
[[nodiscard]] std::vector<double> linspace(double lo, double hi, int points);

[[nodiscard]] double spectral_radius(const Matrix& m);

}  // namespace higs
