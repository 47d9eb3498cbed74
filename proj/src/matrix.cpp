#include "rcfm/matrix.hpp"

#include <stdexcept>

namespace rcfm {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

Matrix spd_inverse(const Matrix& a) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n) throw std::runtime_error("spd_inverse: matrix must be square");
    if (!a.all_finite()) throw std::runtime_error("spd_inverse: non-finite entries");

    // Cholesky factorization a = L * L^T.
    Matrix l(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s))
                    throw std::runtime_error("spd_inverse: matrix is not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }

    // Invert column by column: solve L y = e_k, then L^T x = y.
    Matrix inv(n, n, 0.0);
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = (i == k) ? 1.0 : 0.0;
            for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * y[j];
            y[i] = s / l(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= l(j, ii) * inv(j, k);
            inv(ii, k) = s / l(ii, ii);
        }
    }
    return inv;
}

}  // namespace rcfm
