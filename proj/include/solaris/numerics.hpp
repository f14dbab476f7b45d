#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace solaris::numerics {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. All target problems are small
/// (<= ~1200 square), so there is no sparse or blocked storage.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, Vector values);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const Vector& data() const { return data_; }
    Vector& data() { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

struct CholeskyFactor {
    Matrix lower;       // lower-triangular, strictly positive diagonal
    std::size_t dim = 0;
    double jitter = 0.0; // jitter that was actually added to the diagonal
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Vector matvec(const Matrix& a, const Vector& x);

double dot(const Vector& a, const Vector& b);
double norm_inf(const Vector& v);
double sum_squares(const Vector& v);

bool all_finite(const Vector& v);
void require_finite(const Vector& v, const char* what);

/// Factorize a + jitter*I. `a` must be square and symmetric within 1e-10.
/// Throws FitError naming the pivot index if a pivot is non-positive.
CholeskyFactor cholesky(const Matrix& a, double jitter = 0.0);

/// Factorization with the escalating jitter policy: start at jitter_init,
/// multiply by 10 until jitter_max, then give up.
CholeskyFactor cholesky_auto(const Matrix& a, double jitter_init = 1e-10,
                             double jitter_max = 1e-6);

/// Solve (L L^T) x = b by forward then back substitution.
Vector solve_cholesky(const CholeskyFactor& f, const Vector& b);

/// Forward substitution only: solve L x = b.
Vector solve_lower(const CholeskyFactor& f, const Vector& b);

/// log|A| of the factorized matrix, i.e. 2 * sum(log(diag(L))).
double log_det(const CholeskyFactor& f);

/// Central-difference Jacobian of f at x: entry (i,j) is
/// (f_i(x + h e_j) - f_i(x - h e_j)) / (2h).
Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f,
                                  const Vector& x, double h);

} // namespace solaris::numerics
