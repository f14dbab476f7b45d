#include "solaris/numerics.hpp"

#include "solaris/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>

namespace solaris::numerics {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_)
        throw ParseError("Matrix: data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
    require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

void require_finite(const Vector& v, const char* what) {
    if (!all_finite(v))
        throw FitError(std::string(what) + ": non-finite entry");
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ParseError("matmul: inner dimensions " + std::to_string(a.cols()) +
                         " and " + std::to_string(b.rows()) + " differ");
    Matrix out(a.rows(), b.cols());
    // i-k-j order keeps the inner loop contiguous in both b and out.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out(j, i) = a(i, j);
    return out;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size())
        throw ParseError("matvec: matrix has " + std::to_string(a.cols()) +
                         " cols, vector has " + std::to_string(x.size()));
    Vector out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        out[i] = acc;
    }
    return out;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw ParseError("dot: lengths differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm_inf(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double sum_squares(const Vector& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

CholeskyFactor cholesky(const Matrix& a, double jitter) {
    if (a.rows() != a.cols())
        throw ParseError("cholesky: matrix is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", expected square");
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-10)
                throw ParseError("cholesky: matrix not symmetric at (" +
                                 std::to_string(i) + "," + std::to_string(j) + ")");

    Matrix lower(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j) + jitter;
        for (std::size_t k = 0; k < j; ++k) diag -= lower(j, k) * lower(j, k);
        if (!(diag > 0.0) || !std::isfinite(diag))
            throw FitError("cholesky: not positive definite at pivot " +
                           std::to_string(j));
        const double ljj = std::sqrt(diag);
        lower(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double acc = a(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= lower(i, k) * lower(j, k);
            lower(i, j) = acc / ljj;
        }
    }
    return CholeskyFactor{std::move(lower), n, jitter};
}

CholeskyFactor cholesky_auto(const Matrix& a, double jitter_init, double jitter_max) {
    std::string last_error;
    for (double jitter = jitter_init; jitter <= jitter_max * (1.0 + 1e-12); jitter *= 10.0) {
        try {
            return cholesky(a, jitter);
        } catch (const FitError& e) {
            last_error = e.what();
        }
    }
    throw FitError("cholesky_auto: failed up to jitter " + std::to_string(jitter_max) +
                   " (" + last_error + ")");
}

Vector solve_lower(const CholeskyFactor& f, const Vector& b) {
    if (f.dim != b.size())
        throw ParseError("solve_lower: factor dim " + std::to_string(f.dim) +
                         ", rhs length " + std::to_string(b.size()));
    const Matrix& L = f.lower;
    Vector y(b);
    for (std::size_t i = 0; i < f.dim; ++i) {
        double acc = y[i];
        for (std::size_t k = 0; k < i; ++k) acc -= L(i, k) * y[k];
        y[i] = acc / L(i, i);
    }
    return y;
}

Vector solve_cholesky(const CholeskyFactor& f, const Vector& b) {
    Vector y = solve_lower(f, b);
    const Matrix& L = f.lower;
    // back substitution with L^T
    for (std::size_t ii = f.dim; ii-- > 0;) {
        double acc = y[ii];
        for (std::size_t k = ii + 1; k < f.dim; ++k) acc -= L(k, ii) * y[k];
        y[ii] = acc / L(ii, ii);
    }
    return y;
}

double log_det(const CholeskyFactor& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.dim; ++i) acc += std::log(f.lower(i, i));
    return 2.0 * acc;
}

Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f,
                                  const Vector& x, double h) {
    if (!(h > 0.0))
        throw ParseError("finite_difference_jacobian: step must be positive");
    Vector probe = x;
    const Vector f0 = f(x);
    require_finite(f0, "finite_difference_jacobian");
    Matrix jac(f0.size(), x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        probe[j] = x[j] + h;
        Vector fp = f(probe);
        probe[j] = x[j] - h;
        Vector fm = f(probe);
        probe[j] = x[j];
        require_finite(fp, "finite_difference_jacobian");
        require_finite(fm, "finite_difference_jacobian");
        if (fp.size() != f0.size() || fm.size() != f0.size())
            throw FitError("finite_difference_jacobian: output length changed");
        for (std::size_t i = 0; i < f0.size(); ++i)
            jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
    }
    return jac;
}

} // namespace solaris::numerics
