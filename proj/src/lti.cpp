#include "higs/lti.hpp"

#include "higs/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace higs {

namespace {

constexpr double kSingularRcond = 1e-14;
constexpr int kSweepsPerRow = 30;

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

void check_order(const Matrix& m, const char* name) {
    if (m.rows() > kMaxOrder || m.cols() > kMaxOrder) {
        throw InvalidInput(std::string(name) + ": dimension exceeds the supported maximum of " +
                           std::to_string(kMaxOrder));
    }
}

// Solves (sI - A) x = B and returns C x + D, with one step of iterative refinement.
Complex solve_resolvent(const StateSpace& sys, Complex s, double report_frequency) {
    ComplexMatrix m = -sys.a().cast<Complex>();
    m.diagonal().array() += s;
    const ComplexVector rhs = sys.b().cast<Complex>();

    Eigen::PartialPivLU<ComplexMatrix> lu(m);
    const double rc = lu.rcond();
    if (!(rc > kSingularRcond)) {
        throw SingularSystem("singular resolvent at s = (" + std::to_string(s.real()) + ", " +
                                 std::to_string(s.imag()) + "); imaginary-axis pole?",
                             report_frequency);
    }
    ComplexVector x = lu.solve(rhs);
    ComplexVector r = rhs - m * x;
    x += lu.solve(r);
    r = rhs - m * x;

    const double scale = m.norm() * x.norm() + rhs.norm();
    if (scale > 0.0 && r.norm() > 1e-10 * scale) {
        throw SingularSystem("resolvent solve residual too large", report_frequency);
    }
    return (sys.c().cast<Complex>() * x)(0, 0) + sys.d();
}

}  // namespace

void validate_matrix(const Matrix& m, const char* name) {
    if (m.rows() < 1 || m.cols() < 1) {
        throw InvalidInput(std::string(name) + ": empty matrix");
    }
    if (!m.allFinite()) {
        throw InvalidInput(std::string(name) + ": non-finite entry");
    }
}

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, double d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(d) {
    validate_matrix(a_, "A");
    validate_matrix(b_, "B");
    validate_matrix(c_, "C");
    check_order(a_, "A");
    if (a_.rows() != a_.cols()) {
        throw InvalidInput("A must be square");
    }
    const auto n = a_.rows();
    if (b_.rows() != n || b_.cols() != 1) {
        throw InvalidInput("B must be a column of height " + std::to_string(n));
    }
    if (c_.rows() != 1 || c_.cols() != n) {
        throw InvalidInput("C must be a row of width " + std::to_string(n));
    }
    if (!std::isfinite(d_)) {
        throw InvalidInput("D must be finite");
    }
}

StateSpace StateSpace::with_output_scaled(double factor) const {
    return StateSpace(a_, b_, c_ * factor, d_ * factor);
}

Spectrum eigenvalues(const Matrix& m) {
    validate_matrix(m, "matrix");
    check_order(m, "matrix");
    if (m.rows() != m.cols()) {
        throw InvalidInput("eigenvalues: matrix must be square");
    }
    const auto n = m.rows();

    Eigen::EigenSolver<Matrix> solver;
    solver.setMaxIterations(kSweepsPerRow * n);
    solver.compute(m, true);
    if (solver.info() != Eigen::Success) {
        throw NonConvergence("eigenvalues: QR iteration did not converge within " +
                             std::to_string(kSweepsPerRow * n) + " sweeps");
    }

    Spectrum out;
    const auto values = solver.eigenvalues();
    const auto vectors = solver.eigenvectors();
    const ComplexMatrix mc = m.cast<Complex>();
    for (Eigen::Index i = 0; i < n; ++i) {
        const ComplexVector v = vectors.col(i);
        const double vn = v.norm();
        if (vn > 0.0) {
            out.residual = std::max(out.residual, (mc * v - values(i) * v).norm() / vn);
        }
    }

    std::vector<std::pair<Complex, Eigen::Index>> tagged;
    tagged.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        tagged.emplace_back(values(i), i);
    }
    // Real part descending, then by |imag| so conjugates stay adjacent.
    std::stable_sort(tagged.begin(), tagged.end(), [](const auto& l, const auto& r) {
        if (l.first.real() != r.first.real()) {
            return l.first.real() > r.first.real();
        }
        if (std::abs(l.first.imag()) != std::abs(r.first.imag())) {
            return std::abs(l.first.imag()) < std::abs(r.first.imag());
        }
        return l.first.imag() > r.first.imag();
    });
    out.eigenvalues.reserve(tagged.size());
    for (const auto& [value, index] : tagged) {
        out.eigenvalues.push_back(value);
    }
    return out;
}

Complex evaluate_transfer(const StateSpace& sys, Complex s) {
    return solve_resolvent(sys, s, s.imag());
}

ComplexResponse freq_response(const StateSpace& sys, const std::vector<double>& grid) {
    ComplexResponse out;
    out.frequencies.reserve(grid.size());
    out.values.reserve(grid.size());
    double previous = 0.0;
    for (const double w : grid) {
        if (!(w > previous) || !std::isfinite(w)) {
            throw InvalidInput("frequency grid must be positive and strictly increasing");
        }
        previous = w;
        out.frequencies.push_back(w);
        out.values.push_back(solve_resolvent(sys, Complex(0.0, w), w));
    }
    return out;
}

double dc_gain(const StateSpace& sys) {
    const Matrix& a = sys.a();
    Eigen::PartialPivLU<Matrix> lu(a);
    if (!(lu.rcond() > kSingularRcond)) {
        throw SingularSystem("dc_gain: A is singular (pole at the origin)");
    }
    Vector x = lu.solve(sys.b());
    x += lu.solve(Vector(sys.b() - a * x));
    return -(sys.c() * x)(0, 0) + sys.d();
}

RankDecision numerical_rank(const Matrix& m, double rel_tol) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    RankDecision out;
    if (sv.size() == 0 || sv(0) == 0.0) {
        return out;
    }
    const double cutoff = rel_tol * sv(0);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) {
            out.rank = static_cast<int>(i) + 1;
            out.margin = sv(i);
        }
    }
    return out;
}

MinimalityReport is_minimal(const StateSpace& sys) {
    const int n = sys.order();
    Matrix ctrb(n, n);
    Matrix obsv(n, n);
    Vector col = sys.b();
    Eigen::RowVectorXd row = sys.c();
    for (int k = 0; k < n; ++k) {
        ctrb.col(k) = col;
        obsv.row(k) = row;
        col = sys.a() * col;
        row = row * sys.a();
    }
    const RankDecision rc = numerical_rank(ctrb);
    const RankDecision ro = numerical_rank(obsv);

    MinimalityReport out;
    out.controllability_rank = rc.rank;
    out.observability_rank = ro.rank;
    out.controllability_margin = rc.margin;
    out.observability_margin = ro.margin;
    out.minimal = rc.rank == n && ro.rank == n;
    return out;
}

std::vector<double> logspace(double lo, double hi, int points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2) {
        throw InvalidInput("logspace: need 0 < lo < hi and at least 2 points");
    }
    std::vector<double> out(static_cast<std::size_t>(points));
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int i = 0; i < points; ++i) {
        out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (points - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> linspace(double lo, double hi, int points) {
    if (!(hi > lo) || points < 2) {
        throw InvalidInput("linspace: need lo < hi and at least 2 points");
    }
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
    }
    out.back() = hi;
    return out;
}

double spectral_radius(const Matrix& m) {
    double r = 0.0;
    for (const auto& lambda : eigenvalues(m).eigenvalues) {
        r = std::max(r, std::abs(lambda));
    }
    return r;
}

}  // namespace higs
