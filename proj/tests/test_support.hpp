#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "krausfold/channel.hpp"

namespace kf::testing {

inline Matrix random_matrix(std::mt19937_64 &rng, std::size_t r, std::size_t c) {
    std::normal_distribution<double> g;
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

/// Haar-ish unitary: Gram-Schmidt on a Gaussian matrix, written independently
/// of the library's completion routine.
inline Matrix random_unitary(std::mt19937_64 &rng, std::size_t n) {
    Matrix g = random_matrix(rng, n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t p = 0; p < r; ++p) {
            Complex dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) dot += std::conj(g(p, k)) * g(r, k);
            for (std::size_t k = 0; k < n; ++k) g(r, k) -= dot * g(p, k);
        }
        double nrm = 0.0;
        for (std::size_t k = 0; k < n; ++k) nrm += std::norm(g(r, k));
        nrm = std::sqrt(nrm);
        for (std::size_t k = 0; k < n; ++k) g(r, k) /= nrm;
    }
    return g;
}

/// The four-operator qubit layout with top row (a1,b1), bottom row (a2,b2),
/// diagonal (a3,b3) and anti-diagonal (b4 top right, a4 bottom left).
inline KrausSet qubit4_set(const std::vector<double> &a, const std::vector<Complex> &b) {
    return KrausSet(2, std::vector<Matrix>{
                           Matrix{{a[0], b[0]}, {0.0, 0.0}},
                           Matrix{{0.0, 0.0}, {a[1], b[1]}},
                           Matrix{{a[2], 0.0}, {0.0, b[2]}},
                           Matrix{{0.0, b[3]}, {a[3], 0.0}},
                       });
}

/// Five-operator qubit layout: qubit4_set plus a single (1,1) entry a5.
inline KrausSet qubit5_set(const std::vector<double> &a, const std::vector<Complex> &b) {
    auto ops = qubit4_set(a, b).matrices();
    ops.push_back(Matrix{{a[4], 0.0}, {0.0, 0.0}});
    return KrausSet(2, ops);
}

/// Random valid five-operator qubit layout: a real unit vector for column one,
/// a complex unit vector for column two orthogonal to (a1, a2, 0, 0).
inline KrausSet random_qubit5(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    std::vector<double> a(5);
    double na = 0.0;
    for (auto &x : a) {
        x = g(rng);
        na += x * x;
    }
    for (auto &x : a) x /= std::sqrt(na);
    std::vector<Complex> b(4);
    for (auto &z : b) z = Complex(g(rng), g(rng));
    const double ww = a[0] * a[0] + a[1] * a[1];
    const Complex proj = (a[0] * b[0] + a[1] * b[1]) / ww;
    b[0] -= proj * a[0];
    b[1] -= proj * a[1];
    double nb = 0.0;
    for (const auto &z : b) nb += std::norm(z);
    for (auto &z : b) z /= std::sqrt(nb);
    return qubit5_set(a, b);
}

}  // namespace kf::testing
