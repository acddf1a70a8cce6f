#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace invnet {

/// Raised when a factorization or closed-form solve meets a non-positive pivot,
/// a vanishing denominator, or non-finite input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Denominator guard shared by the rank-one update and the quasi-diagonal solve.
inline constexpr double kDenominatorGuard = 1e-12;

/// Dense row-major matrix. Only what the small per-unit solves need.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<const double> values() const { return data_; }
    std::span<double> values() { return data_; }

    std::vector<double> multiply(std::span<const double> x) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Symmetric matrix in packed lower-triangular storage: entry (i, j), j <= i,
/// lives at i*(i+1)/2 + j. Symmetric by construction.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t n) : n_(n), packed_(packed_size(n), 0.0) {}

    static constexpr std::size_t packed_size(std::size_t n) { return n * (n + 1) / 2; }
    static constexpr std::size_t index(std::size_t i, std::size_t j) {
        return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
    }

    static SymMatrix from_dense(const Matrix& m);
    static SymMatrix from_packed(std::size_t n, std::vector<double> packed);

    std::size_t order() const { return n_; }

    double operator()(std::size_t i, std::size_t j) const { return packed_[index(i, j)]; }
    double& at(std::size_t i, std::size_t j) { return packed_[index(i, j)]; }

    std::span<const double> packed() const { return packed_; }
    std::span<double> packed() { return packed_; }

    /// this += c * u u^T
    void add_rank_one(double c, std::span<const double> u);
    void scale(double factor);
    void add_to_diagonal(double value);

    Matrix to_dense() const;
    std::vector<double> multiply(std::span<const double> x) const;

private:
    std::size_t n_ = 0;
    std::vector<double> packed_;
};

/// Entries A_00, A_0i, A_ii of a unit block, i ranging over incoming units.
struct QuasiDiagonal {
    double a00 = 0.0;
    std::vector<double> a0;    // A_0i, i = 1..p-1
    std::vector<double> diag;  // A_ii, i = 1..p-1

    std::size_t order() const { return a0.size() + 1; }
};

/// Lower Cholesky factor of (A + eps Id). Throws NumericalError on a
/// non-positive or non-finite pivot.
Matrix cholesky(const SymMatrix& a, double eps = 0.0);

/// x = (A + eps Id)^{-1} b.
std::vector<double> solve_spd(const SymMatrix& a, std::span<const double> b, double eps = 0.0);

/// Dense inverse of (A + eps Id) through its Cholesky factor.
Matrix inverse_spd(const SymMatrix& a, double eps = 0.0);

/// In-place rank-one update: inv <- (A + c u u^T)^{-1} given inv = A^{-1}.
/// Returns false, leaving inv untouched, when |1 + c u^T inv u| <= kDenominatorGuard;
/// the caller should refactorize.
[[nodiscard]] bool sherman_morrison(Matrix& inv, std::span<const double> u, double c);

/// Solves materialize_qd(A) w = b in closed form.
std::vector<double> qd_solve(const QuasiDiagonal& a, std::span<const double> b);

/// Diagonal plus rank-one matrix with row 0 and the diagonal of A preserved and
/// off-diagonal weight entries A_0i A_0i' / A_00.
SymMatrix materialize_qd(const QuasiDiagonal& a);

/// General square solve with partial pivoting (used for input recombinations).
std::vector<double> solve_general(const Matrix& a, std::span<const double> b);

double frobenius_norm(const Matrix& m);

}  // namespace invnet
