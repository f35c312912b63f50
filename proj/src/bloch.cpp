#include "krausfold/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "krausfold/classes.hpp"
#include "krausfold/reduction.hpp"

namespace kf {

namespace {

const double kSqrt3 = std::sqrt(3.0);
constexpr double kSectionTol = 1e-12;
constexpr double kMarginTol = 1e-9;

const Complex kI(0.0, 1.0);

double sq(Complex z) { return std::norm(z); }

void check_length(const BlochVector3 &t) {
    double n2 = 0.0;
    for (double x : t) {
        if (!std::isfinite(x)) throw PhysicalityError("Bloch vector has a non-finite component");
        n2 += x * x;
    }
    if (std::sqrt(n2) > max_bloch_length() + 1e-12)
        throw PhysicalityError("Bloch vector length " + std::to_string(std::sqrt(n2)) + " exceeds 2/sqrt(3)");
}

}  // namespace

double max_bloch_length() { return 2.0 / kSqrt3; }

const std::array<Matrix, 8> &gell_mann() {
    static const std::array<Matrix, 8> basis = [] {
        std::array<Matrix, 8> l;
        const std::pair<int, int> pairs[3] = {{0, 1}, {0, 2}, {1, 2}};
        for (int k = 0; k < 3; ++k) {
            const auto [i, j] = pairs[k];
            Matrix sym(3, 3), asym(3, 3);
            sym(i, j) = 1.0;
            sym(j, i) = 1.0;
            asym(i, j) = -kI;
            asym(j, i) = kI;
            l[k] = std::move(sym);
            l[k + 3] = std::move(asym);
        }
        l[6] = Matrix{{1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, {0.0, 0.0, 0.0}};
        const double s = 1.0 / kSqrt3;
        l[7] = Matrix{{s, 0.0, 0.0}, {0.0, s, 0.0}, {0.0, 0.0, -2.0 * s}};
        return l;
    }();
    return basis;
}

Matrix bloch_to_density_unchecked(const BlochVector3 &t) {
    Matrix rho = Matrix::identity(3);
    rho *= 1.0 / 3.0;
    const auto &l = gell_mann();
    for (int i = 0; i < 8; ++i) {
        if (t[i] == 0.0) continue;
        Matrix term = l[i];
        term *= 0.5 * t[i];
        rho += term;
    }
    return rho;
}

double min_state_eigenvalue(const BlochVector3 &t) { return hermitian_eigenvalues(bloch_to_density_unchecked(t)).front(); }

Matrix bloch_to_density(const BlochVector3 &t) {
    check_length(t);
    Matrix rho = bloch_to_density_unchecked(t);
    const double ev = hermitian_eigenvalues(rho).front();
    if (ev < -1e-9)
        throw PhysicalityError("Bloch vector does not describe a state (minimum eigenvalue " + std::to_string(ev) +
                               ")");
    return rho;
}

double physical_scale(const BlochVector3 &t) {
    double n2 = 0.0;
    for (double x : t) n2 += x * x;
    if (n2 == 0.0) return std::numeric_limits<double>::infinity();
    // The minimum eigenvalue is concave in the scale, so the valid scales form
    // an interval [0, s*]; the length bound caps s*.
    double lo = 0.0, hi = max_bloch_length() / std::sqrt(n2);
    auto scaled = [&](double s) {
        BlochVector3 v;
        for (int i = 0; i < 8; ++i) v[i] = s * t[i];
        return v;
    };
    if (min_state_eigenvalue(scaled(hi)) >= 0.0) return hi;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (min_state_eigenvalue(scaled(mid)) >= 0.0 ? lo : hi) = mid;
    }
    return lo;
}

BlochVector3 density_to_bloch(const Matrix &rho) {
    if (rho.rows() != 3 || rho.cols() != 3) throw std::invalid_argument("density_to_bloch: expected a 3x3 matrix");
    if (frobenius_distance(rho, rho.adjoint()) > 1e-10)
        throw std::invalid_argument("density_to_bloch: matrix is not Hermitian");
    BlochVector3 t{};
    const auto &l = gell_mann();
    for (int i = 0; i < 8; ++i) t[i] = mat_mul(rho, l[i]).trace().real();
    return t;
}

BlochVector3 push_forward(const KrausSet &s, const BlochVector3 &t) {
    if (s.dim() != 3) throw std::invalid_argument("push_forward: expected a qutrit channel");
    return density_to_bloch(apply(s, bloch_to_density(t)));
}

SioParams sio_params(const KrausSet &s) {
    const auto slots = assign_slots(s, Regime::QutritSIO15);
    const auto table = class_table(Regime::QutritSIO15);
    SioParams p;
    auto value = [&](int cls, int col) {
        const int row = table[cls - 1].rows[col];
        return row == Signature::kZeroColumn ? Complex{} : slots[cls - 1](row, col);
    };
    for (int k = 1; k <= 15; ++k) p.a[k - 1] = value(k, 0);
    for (int k = 1; k <= 12; ++k) p.b[k - 1] = value(k, 1);
    for (int k = 1; k <= 6; ++k) p.c[k - 1] = value(k, 2);
    return p;
}

ClosedFormImage sio_image_closed_form(const SioParams &p, const BlochVector3 &t) {
    auto a = [&](int k) { return p.a[k - 1]; };
    auto b = [&](int k) { return p.b[k - 1]; };
    auto c = [&](int k) { return p.c[k - 1]; };
    auto ra = [&](int k) { return a(k).real(); };
    auto rb = [&](int k) { return b(k).real(); };
    auto rc = [&](int k) { return c(k).real(); };
    const double t1 = t[0], t2 = t[1], t3 = t[2], t4 = t[3], t5 = t[4], t6 = t[5], t7 = t[6], t8 = t[7];

    ClosedFormImage out;
    BlochVector3 &m = out.m;
    m[0] = t1 * (ra(1) * rb(1) + ra(3) * rb(3) + ra(7) * rb(7) + ra(9) * rb(9));
    m[1] = t2 * (ra(1) * rc(1) + ra(5) * rc(5));
    m[2] = t3 * (b(1) * std::conj(c(1)) + b(2) * std::conj(c(2))).real();
    m[3] = t4 * (ra(1) * rb(1) - ra(3) * rb(3) + ra(7) * rb(7) - ra(9) * rb(9));
    m[4] = t5 * (ra(1) * rc(1) - ra(5) * rc(5));
    const Complex m6 =
        t6 * 0.5 *
        (b(1) * std::conj(c(1)) + std::conj(b(1)) * c(1) - b(2) * std::conj(c(2)) + std::conj(b(2)) * c(2));
    m[5] = m6.real();
    out.m6_imag_part = m6.imag();

    // Diagonal of the input and per-row weights of the output.
    const double p1 = 1.0 / 3.0 + t7 / 2.0 + t8 / (2.0 * kSqrt3);
    const double p2 = 1.0 / 3.0 - t7 / 2.0 + t8 / (2.0 * kSqrt3);
    const double p3 = 1.0 / 3.0 - t8 / kSqrt3;
    const double r1 = (sq(a(1)) + sq(a(2)) + sq(a(7)) + sq(a(8)) + sq(a(13))) * p1 +
                      (sq(b(3)) + sq(b(6)) + sq(b(9)) + sq(b(12))) * p2 + (sq(c(4)) + sq(c(5))) * p3;
    const double r2 = (sq(a(3)) + sq(a(4)) + sq(a(9)) + sq(a(10)) + sq(a(14))) * p1 +
                      (sq(b(1)) + sq(b(5)) + sq(b(7)) + sq(b(11))) * p2 + (sq(c(2)) + sq(c(6))) * p3;
    m[6] = r1 - r2;

    const double row3_a = sq(a(5)) + sq(a(6)) + sq(a(11)) + sq(a(12));
    const double row3_b = sq(b(2)) + sq(b(4)) + sq(b(8)) + sq(b(10));
    const double row3_c = sq(c(1)) + sq(c(3));
    m[7] = 1.0 / kSqrt3 -
           kSqrt3 * (row3_c * (1.0 / 3.0 - t8 / kSqrt3) + (row3_a + row3_b) * (1.0 / 3.0 + t8 / (2.0 * kSqrt3)));
    out.m7_reference = (1.0 - row3_c) / 3.0 + (1.0 - row3_a) * (1.0 / 3.0 + t7 / 2.0) +
                        (1.0 - row3_b) * (1.0 / 3.0 - t7 / 2.0);
    return out;
}

ClosedFormDeviation closed_form_deviation(const KrausSet &s, const BlochVector3 &t) {
    ClosedFormDeviation d;
    d.closed = sio_image_closed_form(sio_params(s), t);
    d.matrix_path = push_forward(s, t);
    for (int i = 0; i < 8; ++i) {
        d.deviation[i] = std::abs(d.closed.m[i] - d.matrix_path[i]);
        d.max_deviation = std::max(d.max_deviation, d.deviation[i]);
    }
    d.m7_reference_deviation = std::abs(d.closed.m7_reference - d.matrix_path[6]);
    return d;
}

std::optional<std::pair<int, int>> section_of(const BlochVector3 &t) {
    std::vector<int> nz;
    for (int i = 0; i < 8; ++i)
        if (std::abs(t[i]) > kSectionTol) nz.push_back(i);
    if (nz.size() != 2) return std::nullopt;
    return std::make_pair(nz[0], nz[1]);
}

ConditionReport check_conditions(const BlochVector3 &t, const BlochVector3 &m) {
    ConditionReport rep;
    for (int id = 1; id <= 4; ++id) rep.conditions[id - 1].id = id;
    rep.conditions[1].advisory = true;
    rep.cond2_residual = -kSqrt3 * m[6] + m[7] - 2.0 * kSqrt3 / 3.0;
    auto set = [&](int id, double margin) {
        ConditionRecord &c = rep.conditions[id - 1];
        c.applicable = true;
        c.margin = margin;
        c.satisfied = margin >= -kMarginTol;
    };

    rep.section = section_of(t);
    if (!rep.section) {
        rep.generic = true;
        double ct = 0.0, cm = 0.0;
        for (int k = 0; k < 3; ++k) {
            ct += std::hypot(t[k], t[k + 3]);
            cm += std::hypot(m[k], m[k + 3]);
        }
        set(4, ct - cm);
        return rep;
    }
    const auto [i, j] = *rep.section;
    if (i < 6 && j >= 6) {
        double interval;
        if (j == 6) {
            const double lo = (1.0 - kSqrt3) / 3.0, hi = 2.0 / kSqrt3;
            interval = std::min(m[6] - lo, hi - m[6]);
        } else {
            const double lim = 2.0 * kSqrt3 / 3.0;
            interval = std::min(m[7] + lim, lim - m[7]);
        }
        set(1, std::min(t[i] * t[i] - m[i] * m[i], interval));
    } else if (i == 6 && j == 7) {
        set(2, -std::abs(rep.cond2_residual));
    } else if (j == i + 3) {
        set(3, t[i] * t[i] + t[j] * t[j] - m[i] * m[i] - m[j] * m[j]);
    } else {
        const double st = std::abs(t[i]) + std::abs(t[j]);
        const double sm = std::abs(m[i]) + std::abs(m[j]);
        set(4, st * st - sm * sm);
    }
    return rep;
}

}  // namespace kf
