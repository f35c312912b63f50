#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace kf {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

/// Structural tolerance: unitarity, orthonormality, support checks.
inline constexpr double kStructTol = 1e-10;
/// Entries below this modulus are treated as exact zeros.
inline constexpr double kZeroTol = 1e-12;

/// Dense row-major complex matrix. Small sizes only (d^2 <= 16).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, CVector entries);
    Matrix(std::initializer_list<std::initializer_list<Complex>> rows);

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    Complex &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const Complex> entries() const { return data_; }
    std::span<Complex> entries() { return data_; }
    CVector row(std::size_t r) const;

    Matrix adjoint() const;
    Complex trace() const;
    double frobenius_norm() const;
    /// Largest entry modulus.
    double max_abs() const;
    bool all_finite() const;
    /// True when every entry has modulus below `tol`.
    bool is_zero(double tol = kZeroTol) const;

    Matrix &operator+=(const Matrix &o);
    Matrix &operator-=(const Matrix &o);
    Matrix &operator*=(Complex s);

    friend Matrix operator+(Matrix a, const Matrix &b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix &b) { return a -= b; }
    friend Matrix operator*(Matrix a, Complex s) { return a *= s; }
    friend Matrix operator*(Complex s, Matrix a) { return a *= s; }
    friend Matrix operator*(const Matrix &a, const Matrix &b);
    friend bool operator==(const Matrix &, const Matrix &) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    CVector data_;
};

Matrix mat_mul(const Matrix &a, const Matrix &b);
double frobenius_distance(const Matrix &a, const Matrix &b);
/// Kronecker product a (x) b.
Matrix kron(const Matrix &a, const Matrix &b);

/// Square matrix with U^dagger U = I checked at construction.
class UnitaryMatrix {
public:
    /// Throws std::invalid_argument when ||U^dagger U - I||_F > tol.
    explicit UnitaryMatrix(Matrix m, double tol = kStructTol);

    static UnitaryMatrix identity(std::size_t n) { return UnitaryMatrix(Matrix::identity(n)); }

    std::size_t dim() const { return m_.rows(); }
    const Matrix &matrix() const { return m_; }
    Complex operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

    /// Block-diagonal U (+) I_extra.
    UnitaryMatrix direct_sum_identity(std::size_t extra) const;

private:
    Matrix m_;
};

/// ||U^dagger U - I||_F.
double unitarity_defect(const Matrix &u);

/// Returns a dim x dim unitary whose leading rows span the given rows.
/// The rows are re-orthonormalized in order; the remainder is completed by
/// Gram-Schmidt over e_0, e_1, ... skipping near-dependent candidates.
/// Throws std::invalid_argument on dependent or over-long input.
UnitaryMatrix complete_to_unitary(std::span<const CVector> rows, std::size_t dim);

Complex inner(std::span<const Complex> a, std::span<const Complex> b);  // sum conj(a_i) b_i
double norm(std::span<const Complex> v);

/// Eigenvalues of a Hermitian matrix in ascending order.
std::vector<double> hermitian_eigenvalues(const Matrix &h);

struct Svd {
    Matrix u;                    // rows x rows
    std::vector<double> sigma;   // min(rows, cols), descending
    Matrix v;                    // cols x cols, A = U diag(sigma) V^dagger
};
/// Full singular value decomposition.
Svd svd(const Matrix &a);

}  // namespace kf
