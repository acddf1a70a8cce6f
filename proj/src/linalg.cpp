#include "invnet/linalg.hpp"

#include <cmath>
#include <utility>

namespace invnet {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> Matrix::multiply(std::span<const double> x) const {
    if (x.size() != cols_) throw std::invalid_argument("Matrix::multiply: dimension mismatch");
    std::vector<double> y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

SymMatrix SymMatrix::from_dense(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("SymMatrix::from_dense: matrix not square");
    SymMatrix s(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j <= i; ++j) s.at(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

SymMatrix SymMatrix::from_packed(std::size_t n, std::vector<double> packed) {
    if (packed.size() != packed_size(n)) throw std::invalid_argument("SymMatrix::from_packed: bad length");
    SymMatrix s;
    s.n_ = n;
    s.packed_ = std::move(packed);
    return s;
}

void SymMatrix::add_rank_one(double c, std::span<const double> u) {
    if (u.size() != n_) throw std::invalid_argument("SymMatrix::add_rank_one: dimension mismatch");
    double* p = packed_.data();
    for (std::size_t i = 0; i < n_; ++i) {
        const double cu = c * u[i];
        for (std::size_t j = 0; j <= i; ++j) *p++ += cu * u[j];
    }
}

void SymMatrix::scale(double factor) {
    for (double& v : packed_) v *= factor;
}

void SymMatrix::add_to_diagonal(double value) {
    for (std::size_t i = 0; i < n_; ++i) at(i, i) += value;
}

Matrix SymMatrix::to_dense() const {
    Matrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = (*this)(i, j);
    return m;
}

std::vector<double> SymMatrix::multiply(std::span<const double> x) const {
    if (x.size() != n_) throw std::invalid_argument("SymMatrix::multiply: dimension mismatch");
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double v = (*this)(i, j);
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
        y[i] += (*this)(i, i) * x[i];
    }
    return y;
}

Matrix cholesky(const SymMatrix& a, double eps) {
    const std::size_t n = a.order();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j) + eps;
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d))
            throw NumericalError("cholesky: non-positive pivot at row " + std::to_string(j));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

namespace {

// Solves L L^T x = b in place.
void cholesky_substitute(const Matrix& l, std::span<double> x) {
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
        x[i] = s / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
}

}  // namespace

std::vector<double> solve_spd(const SymMatrix& a, std::span<const double> b, double eps) {
    if (b.size() != a.order()) throw std::invalid_argument("solve_spd: dimension mismatch");
    for (double v : a.packed())
        if (!std::isfinite(v)) throw NumericalError("solve_spd: non-finite matrix entry");
    const Matrix l = cholesky(a, eps);
    std::vector<double> x(b.begin(), b.end());
    cholesky_substitute(l, x);
    return x;
}

Matrix inverse_spd(const SymMatrix& a, double eps) {
    const std::size_t n = a.order();
    const Matrix l = cholesky(a, eps);
    Matrix inv(n, n);
    std::vector<double> col(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(col.begin(), col.end(), 0.0);
        col[j] = 1.0;
        cholesky_substitute(l, col);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    // symmetrize away substitution round-off
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) inv(i, j) = inv(j, i) = 0.5 * (inv(i, j) + inv(j, i));
    return inv;
}

bool sherman_morrison(Matrix& inv, std::span<const double> u, double c) {
    const std::size_t n = inv.rows();
    if (inv.cols() != n || u.size() != n) throw std::invalid_argument("sherman_morrison: dimension mismatch");
    if (c == 0.0) return true;
    const std::vector<double> v = inv.multiply(u);
    double utv = 0.0;
    for (std::size_t i = 0; i < n; ++i) utv += u[i] * v[i];
    const double denom = 1.0 + c * utv;
    if (!(std::abs(denom) > kDenominatorGuard) || !std::isfinite(denom)) return false;
    const double f = c / denom;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv(i, j) -= f * v[i] * v[j];
    return true;
}

std::vector<double> qd_solve(const QuasiDiagonal& a, std::span<const double> b) {
    const std::size_t m = a.a0.size();
    if (a.diag.size() != m || b.size() != m + 1) throw std::invalid_argument("qd_solve: dimension mismatch");
    if (!(a.a00 > 0.0)) throw NumericalError("qd_solve: A_00 must be positive");
    std::vector<double> w(m + 1);
    double bias = b[0] / a.a00;
    for (std::size_t i = 0; i < m; ++i) {
        const double denom = a.diag[i] * a.a00 - a.a0[i] * a.a0[i];
        if (!(denom > 0.0) || !std::isfinite(denom))
            throw NumericalError("qd_solve: non-positive denominator at entry " + std::to_string(i + 1));
        w[i + 1] = (b[i + 1] * a.a00 - b[0] * a.a0[i]) / denom;
        bias -= a.a0[i] / a.a00 * w[i + 1];
    }
    w[0] = bias;
    return w;
}

SymMatrix materialize_qd(const QuasiDiagonal& a) {
    const std::size_t m = a.a0.size();
    if (a.diag.size() != m) throw std::invalid_argument("materialize_qd: dimension mismatch");
    if (!(a.a00 > 0.0)) throw NumericalError("materialize_qd: A_00 must be positive");
    SymMatrix s(m + 1);
    s.at(0, 0) = a.a00;
    for (std::size_t i = 0; i < m; ++i) {
        s.at(i + 1, 0) = a.a0[i];
        s.at(i + 1, i + 1) = a.diag[i];
        for (std::size_t j = 0; j < i; ++j) s.at(i + 1, j + 1) = a.a0[i] * a.a0[j] / a.a00;
    }
    return s;
}

std::vector<double> solve_general(const Matrix& a, std::span<const double> b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_general: dimension mismatch");
    Matrix m = a;
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t i = col + 1; i < n; ++i)
            if (std::abs(m(i, col)) > std::abs(m(pivot, col))) pivot = i;
        if (!(std::abs(m(pivot, col)) > 0.0)) throw NumericalError("solve_general: singular matrix");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(col, j), m(pivot, j));
            std::swap(x[col], x[pivot]);
        }
        for (std::size_t i = col + 1; i < n; ++i) {
            const double f = m(i, col) / m(col, col);
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) m(i, j) -= f * m(col, j);
            x[i] -= f * x[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
        x[i] = s / m(i, i);
    }
    return x;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.values()) s += v * v;
    return std::sqrt(s);
}

}  // namespace invnet
