#include "krausfold/densemath.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace kf {

namespace {

Eigen::MatrixXcd to_eigen(const Matrix &m) {
    Eigen::MatrixXcd e(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
    return e;
}

Matrix from_eigen(const Eigen::MatrixXcd &e) {
    Matrix m(e.rows(), e.cols());
    for (Eigen::Index r = 0; r < e.rows(); ++r)
        for (Eigen::Index c = 0; c < e.cols(); ++c) m(r, c) = e(r, c);
    return m;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, CVector entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows * cols)
        throw std::invalid_argument("Matrix: entry count does not match shape");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto &r : rows) {
        if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CVector Matrix::row(std::size_t r) const {
    return CVector(data_.begin() + r * cols_, data_.begin() + (r + 1) * cols_);
}

Matrix Matrix::adjoint() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
}

Complex Matrix::trace() const {
    Complex t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto &z : data_) s += std::norm(z);
    return std::sqrt(s);
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (const auto &z : data_) m = std::max(m, std::abs(z));
    return m;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const Complex &z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

bool Matrix::is_zero(double tol) const { return max_abs() < tol; }

Matrix &Matrix::operator+=(const Matrix &o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix +=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Matrix &Matrix::operator-=(const Matrix &o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix -=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Matrix &Matrix::operator*=(Complex s) {
    for (auto &z : data_) z *= s;
    return *this;
}

Matrix operator*(const Matrix &a, const Matrix &b) { return mat_mul(a, b); }

Matrix mat_mul(const Matrix &a, const Matrix &b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("mat_mul: dimension mismatch (" + std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.rows()) + ")");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

double frobenius_distance(const Matrix &a, const Matrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("frobenius_distance: shape mismatch");
    double s = 0.0;
    auto ea = a.entries();
    auto eb = b.entries();
    for (std::size_t i = 0; i < ea.size(); ++i) s += std::norm(ea[i] - eb[i]);
    return std::sqrt(s);
}

Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

double unitarity_defect(const Matrix &u) {
    if (!u.square()) return std::numeric_limits<double>::infinity();
    return frobenius_distance(mat_mul(u.adjoint(), u), Matrix::identity(u.rows()));
}

UnitaryMatrix::UnitaryMatrix(Matrix m, double tol) : m_(std::move(m)) {
    if (!m_.square()) throw std::invalid_argument("UnitaryMatrix: not square");
    if (!m_.all_finite()) throw std::invalid_argument("UnitaryMatrix: non-finite entry");
    const double defect = unitarity_defect(m_);
    if (defect > tol)
        throw std::invalid_argument("UnitaryMatrix: ||U^dagger U - I|| = " + std::to_string(defect));
}

UnitaryMatrix UnitaryMatrix::direct_sum_identity(std::size_t extra) const {
    const std::size_t n = dim();
    Matrix out(n + extra, n + extra);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) out(r, c) = m_(r, c);
    for (std::size_t i = n; i < n + extra; ++i) out(i, i) = 1.0;
    return UnitaryMatrix(std::move(out));
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double norm(std::span<const Complex> v) {
    double s = 0.0;
    for (const auto &z : v) s += std::norm(z);
    return std::sqrt(s);
}

UnitaryMatrix complete_to_unitary(std::span<const CVector> rows, std::size_t dim) {
    if (rows.size() > dim) throw std::invalid_argument("complete_to_unitary: more rows than dim");
    std::vector<CVector> basis;
    basis.reserve(dim);

    // Two projection passes keep the completion orthogonal to ~1e-15.
    auto orthogonalize = [&](CVector v) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto &q : basis) {
                const Complex p = inner(q, v);
                for (std::size_t i = 0; i < dim; ++i) v[i] -= p * q[i];
            }
        return v;
    };

    for (const auto &r : rows) {
        if (r.size() != dim) throw std::invalid_argument("complete_to_unitary: row length != dim");
        const double n0 = norm(r);
        if (std::abs(n0 - 1.0) > kStructTol)
            throw std::invalid_argument("complete_to_unitary: input row not unit-norm");
        CVector v = orthogonalize(r);
        const double n = norm(v);
        if (n < 1.0 - kStructTol)
            throw std::invalid_argument("complete_to_unitary: input rows not orthonormal");
        for (auto &z : v) z /= n;
        basis.push_back(std::move(v));
    }
    for (std::size_t k = 0; k < dim && basis.size() < dim; ++k) {
        CVector e(dim);
        e[k] = 1.0;
        CVector v = orthogonalize(std::move(e));
        const double n = norm(v);
        if (n < 1e-6) continue;
        for (auto &z : v) z /= n;
        basis.push_back(std::move(v));
    }
    Matrix u(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) u(r, c) = basis[r][c];
    return UnitaryMatrix(std::move(u));
}

std::vector<double> hermitian_eigenvalues(const Matrix &h) {
    if (!h.square()) throw std::invalid_argument("hermitian_eigenvalues: not square");
    Eigen::MatrixXcd e = to_eigen(h);
    e = 0.5 * (e + e.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(e, Eigen::EigenvaluesOnly);
    const auto &ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

Svd svd(const Matrix &a) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> solver(to_eigen(a), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto &s = solver.singularValues();
    return Svd{from_eigen(solver.matrixU()), std::vector<double>(s.data(), s.data() + s.size()),
               from_eigen(solver.matrixV())};
}

}  // namespace kf
