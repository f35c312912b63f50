#include "krausfold/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "krausfold/refactor.hpp"

namespace kf {

namespace {

constexpr double kDegenerateTol = 1e-10;
constexpr double kExplicitUnitaryTol = 1e-9;
constexpr double kChopTol = 1e-9;
constexpr double kCertifyTol = 1e-9;

double sq(Complex z) { return std::norm(z); }

Complex entry(const Matrix &m, int row, int col) { return m(row, col); }

// Column-c value of a class operator (its single entry in column c, or 0).
Complex column_value(const Matrix &m, Regime r, int cls, int col) {
    const Signature &s = class_table(r)[cls - 1];
    const int row = s.rows[col];
    return row == Signature::kZeroColumn ? Complex{} : entry(m, row, col);
}

ExplicitUnitary finish(Matrix u, std::string note = {}) {
    ExplicitUnitary out;
    out.unitarity_defect = unitarity_defect(u);
    out.status = (u.all_finite() && out.unitarity_defect <= kExplicitUnitaryTol) ? ExplicitStatus::Valid
                                                                               : ExplicitStatus::NotUnitary;
    out.matrix = std::move(u);
    out.note = std::move(note);
    return out;
}

ExplicitUnitary degenerate(std::string note) {
    ExplicitUnitary out;
    out.status = ExplicitStatus::Degenerate;
    out.unitarity_defect = std::numeric_limits<double>::infinity();
    out.note = std::move(note);
    return out;
}

// The 4x4 qubit construction acting on (top row, bottom row, single (1,1)
// entry, anti-diagonal). a3/b-labels follow the original construction, where a3 is the
// coefficient of the single-entry operator.
ExplicitUnitary qubit_like_explicit(Complex a1, Complex a2, Complex a3, Complex a4, Complex b1, Complex b4) {
    const double A1 = sq(a1), A2 = sq(a2), A3 = sq(a3), A4 = sq(a4);
    const double B1 = sq(b1), B4 = sq(b4);
    const double nb1 = std::sqrt(B1), nb4 = std::sqrt(B4);
    const double k_den = A1 + A3;
    const double bracket = A1 * B4 + A3 * B1 + A3 * B4;
    const double l_den = A3 * A3 * A4 * B1 * B1 * B4 * B4 + A2 * B1 * B4 * bracket * bracket +
                         A1 * A3 * A4 * B1 * B1 * B4 * B4 + A3 * A3 * A4 * B1 * B1 * B1 * B4;
    const double m_den = A2 * A3 * B1 * B4 + A3 * A3 * A4 * B1 * B1 + A1 * A2 * B1 * B4 + A2 * A3 * B1 * B1;
    const double n_den = A3 * A3 * B1 * B4 + A1 * A3 * B1 * B4 + k_den * k_den * B4 * B4;
    if (k_den < kDegenerateTol) return degenerate("k: a1^2 + a3^2 vanishes");
    if (l_den < kDegenerateTol) return degenerate("l: normalization denominator vanishes");
    if (m_den < kDegenerateTol) return degenerate("m: normalization denominator vanishes");
    if (n_den < kDegenerateTol) return degenerate("n: normalization denominator vanishes");
    const double k = 1.0 / std::sqrt(k_den), l = 1.0 / std::sqrt(l_den), m = 1.0 / std::sqrt(m_den),
                 n = 1.0 / std::sqrt(n_den);
    const Complex b1c = std::conj(b1), b4c = std::conj(b4);
    Matrix u(4, 4);
    u(0, 0) = k * a1;
    u(0, 2) = k * a3;
    u(1, 0) = -l * A3 * a4 * B1 * B4;
    u(1, 1) = l * a2 * b1 * b4c * bracket;
    u(1, 2) = l * a1 * a3 * a4 * B1 * B4;
    u(1, 3) = l * A3 * a4 * B1 * nb1 * nb4;
    u(2, 0) = -m * a2 * a3 * b1c * b4;
    u(2, 1) = -m * a3 * a4 * B1;
    u(2, 2) = m * a1 * a2 * b1c * b4;
    u(2, 3) = m * a2 * a3 * B1;
    u(3, 0) = n * A3 * b1c * b4;
    u(3, 2) = -n * a1 * a3 * b1c * b4;
    u(3, 3) = n * k_den * B4;
    return finish(std::move(u));
}

// G3 variant, stated with its own normalizations and signs. Operands
// (K4, K8, K38, K16) with a4, a8, a38, a16, b4, b16.
ExplicitUnitary g3_explicit(Complex a4, Complex a8, Complex a38, Complex a16, Complex b4, Complex b16) {
    const double A4 = sq(a4), A8 = sq(a8), A38 = sq(a38), A16 = sq(a16);
    const double B4 = sq(b4), B16 = sq(b16);
    const double nb4 = std::sqrt(B4), nb16 = std::sqrt(B16);
    const double k_den = A4 + A38;
    const double bracket = A4 * B16 + A38 * B4 + A38 * B16;
    const double l_den = B4 * B16 *
                         (A38 * A38 * A16 * B4 * B16 + A8 * bracket * bracket + A4 * A38 * A16 * B4 * B16 +
                          A38 * A38 * A16 * B4 * B4);
    const double m_den = B4 * (A8 * A38 * B16 + A38 * A38 * A16 * B4 + A4 * A8 * B16 + A8 * A38 * B4);
    const double n_den = B16 * (A38 * A38 * B4 + A4 * A38 * B4 + k_den * k_den * B16);
    if (k_den < kDegenerateTol) return degenerate("k3: a4^2 + a38^2 vanishes");
    if (l_den < kDegenerateTol) return degenerate("l3: normalization denominator vanishes");
    if (m_den < kDegenerateTol) return degenerate("m3: normalization denominator vanishes");
    if (n_den < kDegenerateTol) return degenerate("n3: normalization denominator vanishes");
    const double k = 1.0 / std::sqrt(k_den), l = 1.0 / std::sqrt(l_den), m = 1.0 / std::sqrt(m_den),
                 n = 1.0 / std::sqrt(n_den);
    const Complex b4c = std::conj(b4), b16c = std::conj(b16);
    Matrix u(4, 4);
    u(0, 0) = k * a4;
    u(0, 2) = k * a38;
    u(1, 0) = -l * A38 * a16 * B4 * B16;
    u(1, 1) = l * a8 * b4 * b16c * bracket;
    u(1, 2) = l * a4 * a38 * a16 * B4 * B16;
    u(1, 3) = l * A38 * a16 * B4 * nb4 * nb16;
    u(2, 0) = m * a8 * a38 * b4c * b16;
    u(2, 1) = -m * a38 * a16 * B4;
    u(2, 2) = m * a4 * a8 * b16 * b4c;
    u(2, 3) = m * a8 * a38 * B4;
    u(3, 0) = n * A38 * b4c * b16;
    u(3, 2) = -n * a4 * a38 * b4c * b16;
    u(3, 3) = n * k_den * B16;
    return finish(std::move(u));
}

// G1/G2 family on (P, Q, R): P two-column with (a_p, b_p), Q two-column with
// b_q in the shared position, R single entry a_r. Normalizations as stated.
ExplicitUnitary three_op_io_explicit(Complex ap, Complex bp, Complex bq, Complex ar) {
    const double Ap = sq(ap), Ar = sq(ar), Bp = sq(bp), Bq = sq(bq);
    const double l_den = Ap + Ar;
    const double inner_den = Ar * (Bp + Bq) + Ar * Bq;
    const double m_den = l_den * inner_den;
    if (l_den < kDegenerateTol) return degenerate("l: a_p^2 + a_r^2 vanishes");
    if (inner_den < kDegenerateTol) return degenerate("n: normalization denominator vanishes");
    const double l = 1.0 / std::sqrt(l_den), m = 1.0 / std::sqrt(m_den), n = 1.0 / std::sqrt(inner_den);
    Matrix u(3, 3);
    u(0, 0) = l * std::conj(ap);
    u(0, 2) = l * std::conj(ar);
    u(1, 0) = m * std::conj(bp) * Ar;
    u(1, 1) = m * l_den * std::conj(bq);
    u(1, 2) = -m * std::conj(ar) * std::conj(bp) * ap;
    u(2, 0) = n * ar * bq;
    u(2, 1) = -n * ar * bp;
    u(2, 2) = -n * ap * bq;
    return finish(std::move(u));
}

// H1/H2 family on (P, Q, R): P with b_p, Q with (a_q, b_q), R single entry a_r.
ExplicitUnitary three_op_sio_explicit(Complex bp, Complex aq, Complex bq, Complex ar) {
    const double Aq = sq(aq), Ar = sq(ar), Bp = sq(bp), Bq = sq(bq);
    const double m_den = Aq + Ar;
    const double n_den = Aq * Bp + Ar * Bp + Ar * Bq;
    if (m_den < kDegenerateTol) return degenerate("m: a_q^2 + a_r^2 vanishes");
    if (n_den < kDegenerateTol) return degenerate("n: normalization denominator vanishes");
    const double l = 1.0 / std::sqrt(m_den * n_den), m = 1.0 / std::sqrt(m_den), n = 1.0 / std::sqrt(n_den);
    Matrix u(3, 3);
    u(0, 0) = -l * m_den * bp;
    u(0, 1) = -l * Ar * std::conj(bq);
    u(0, 2) = l * aq * std::conj(ar) * std::conj(bq);
    u(1, 1) = -m * std::conj(aq);
    u(1, 2) = -m * std::conj(ar);
    u(2, 0) = n * ar * bq;
    u(2, 1) = -n * ar * std::conj(bp);
    u(2, 2) = n * aq * std::conj(bp);
    return finish(std::move(u));
}

std::vector<MergeGroup> build_groups(Regime r) {
    switch (r) {
    case Regime::Qubit5:
    case Regime::Qubit4:
        return {{"Q", {1, 2, 3, 4, 5}, 5, std::nullopt, {1, 2, 5, 4}, {1, 2, 3, 4}}};
    case Regime::QutritIO39:
        return {
            {"G1", {32, 24, 37}, 37, 39, {32, 24, 37}, {32, 24, 39}},
            {"G2", {8, 12, 39}, 39, 38, {8, 12, 39}, {8, 12, 38}},
            {"G3", {4, 8, 38, 16}, 38, 12, {4, 8, 38, 16}, {4, 8, 12, 16}},
            {"G4", {11, 12, 19, 20}, 20, std::nullopt, {}, {}},
            {"G5", {15, 16, 35, 36}, 36, std::nullopt, {}, {}},
            {"G6", {15, 16, 23, 24}, 24, std::nullopt, {}, {}},
            {"G7", {11, 12, 27, 28}, 28, std::nullopt, {}, {}},
        };
    case Regime::QutritSIO15:
        return {
            {"H1", {9, 12, 14, 15}, 15, 14, {9, 12, 15}, {9, 12, 14}},
            {"H2", {8, 10, 13, 14}, 14, 13, {8, 10, 14}, {8, 10, 13}},
        };
    }
    return {};
}

}  // namespace

std::span<const MergeGroup> merge_groups(Regime r) {
    static const std::vector<MergeGroup> qubit = build_groups(Regime::Qubit5);
    static const std::vector<MergeGroup> io = build_groups(Regime::QutritIO39);
    static const std::vector<MergeGroup> sio = build_groups(Regime::QutritSIO15);
    switch (r) {
    case Regime::Qubit5:
    case Regime::Qubit4: return qubit;
    case Regime::QutritIO39: return io;
    case Regime::QutritSIO15: return sio;
    }
    return {};
}

KrausSet mix(const UnitaryMatrix &u, const KrausSet &s) {
    if (u.dim() != s.size())
        throw std::invalid_argument("mix: unitary is " + std::to_string(u.dim()) + "x" + std::to_string(u.dim()) +
                                    " but the set has " + std::to_string(s.size()) + " operators");
    std::vector<Matrix> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < u.dim(); ++i) {
        Matrix l(s.dim(), s.dim());
        for (std::size_t j = 0; j < s.size(); ++j) {
            const Complex c = u.matrix()(i, j);
            if (c == Complex{}) continue;
            Matrix t = s[j].matrix();
            t *= c;
            l += t;
        }
        out.push_back(std::move(l));
    }
    return KrausSet(s.dim(), out);
}

KrausSet merge_proportional(const KrausSet &s, double rel_tol) {
    std::vector<Matrix> ops = s.pruned().matrices();
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t a = 0; a < ops.size() && !merged; ++a) {
            const double na2 = std::pow(ops[a].frobenius_norm(), 2);
            for (std::size_t b = a + 1; b < ops.size() && !merged; ++b) {
                Complex overlap = 0.0;
                const auto ea = ops[a].entries(), eb = ops[b].entries();
                for (std::size_t i = 0; i < ea.size(); ++i) overlap += std::conj(ea[i]) * eb[i];
                const Complex lambda = overlap / na2;
                Matrix resid = ops[b];
                Matrix scaled = ops[a];
                scaled *= lambda;
                resid -= scaled;
                const double scale = std::max(ops[a].frobenius_norm(), ops[b].frobenius_norm());
                if (resid.frobenius_norm() > rel_tol * scale) continue;
                // Rotation [[1, conj(lambda)], [-lambda, 1]] / sqrt(1 + |lambda|^2); the second
                // output is the (vanishing) residual and is dropped.
                const double norm_factor = std::sqrt(1.0 + std::norm(lambda));
                Matrix keep = ops[b];
                keep *= std::conj(lambda);
                keep += ops[a];
                keep *= 1.0 / norm_factor;
                ops[a] = std::move(keep);
                ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(b));
                merged = true;
            }
        }
    }
    return KrausSet(s.dim(), ops).pruned();
}

std::string_view explicit_status_name(ExplicitStatus s) {
    switch (s) {
    case ExplicitStatus::Valid: return "valid";
    case ExplicitStatus::Degenerate: return "degenerate";
    case ExplicitStatus::NotUnitary: return "not-unitary";
    }
    return "?";
}

QubitParams qubit_params(const KrausSet &five_forms) {
    const auto slots = assign_slots(five_forms, Regime::Qubit5);
    QubitParams p;
    for (int c = 1; c <= 5; ++c) p.a[c - 1] = column_value(slots[c - 1], Regime::Qubit5, c, 0);
    for (int c = 1; c <= 4; ++c) p.b[c - 1] = column_value(slots[c - 1], Regime::Qubit5, c, 1);
    return p;
}

ExplicitUnitary explicit_unitary_qubit(const QubitParams &p) {
    ExplicitUnitary u = qubit_like_explicit(p.a[0], p.a[1], p.a[4], p.a[3], p.b[0], p.b[3]);
    if (u.status == ExplicitStatus::Degenerate) return u;
    Matrix v(5, 5);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) v(i, j) = u.matrix(i, j);
    v(4, 4) = 1.0;
    return finish(std::move(v), u.note);
}

ExplicitUnitary explicit_unitary(Regime r, const MergeGroup &g, std::span<const Matrix> slots) {
    if (g.explicit_operands.empty()) return degenerate("no explicit unitary for group " + g.name);
    auto col = [&](int cls, int c) { return column_value(slots[cls - 1], r, cls, c); };
    if (g.name == "Q") return qubit_like_explicit(col(1, 0), col(2, 0), col(5, 0), col(4, 0), col(1, 1), col(4, 1));
    if (g.name == "G1") return three_op_io_explicit(col(32, 0), col(32, 1), col(24, 1), col(37, 0));
    if (g.name == "G2") return three_op_io_explicit(col(8, 0), col(8, 1), col(12, 1), col(39, 0));
    if (g.name == "G3") return g3_explicit(col(4, 0), col(8, 0), col(38, 0), col(16, 0), col(4, 1), col(16, 1));
    if (g.name == "H1") return three_op_sio_explicit(col(9, 1), col(12, 0), col(12, 1), col(15, 0));
    if (g.name == "H2") return three_op_sio_explicit(col(8, 1), col(10, 0), col(10, 1), col(14, 0));
    return degenerate("no explicit unitary for group " + g.name);
}

std::string_view reduction_status_name(ReductionStatus s) {
    switch (s) {
    case ReductionStatus::Reduced: return "Reduced";
    case ReductionStatus::FallbackUsed: return "FallbackUsed";
    case ReductionStatus::NotReduced: return "NotReduced";
    }
    return "?";
}

std::string_view step_action_name(StepAction a) {
    switch (a) {
    case StepAction::Skipped: return "skipped";
    case StepAction::ExplicitPath: return "explicit";
    case StepAction::Fallback: return "fallback";
    case StepAction::Failed: return "failed";
    }
    return "?";
}

std::vector<Matrix> assign_slots(const KrausSet &s, Regime r) {
    if (s.dim() != regime_dim(r))
        throw std::invalid_argument("operator dimension " + std::to_string(s.dim()) + " does not match regime " +
                                    std::string(regime_name(r)));
    const auto table = class_table(r);
    std::vector<Matrix> slots(table.size(), Matrix(s.dim(), s.dim()));
    std::vector<bool> used(table.size(), false);
    std::vector<std::pair<std::size_t, Signature>> pending;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].is_zero()) continue;
        const auto &sig = s[i].signature();
        if (!sig) throw std::invalid_argument("operator " + std::to_string(i + 1) + " is not incoherent");
        const auto cls = class_of(*sig, r);
        if (cls && !used[cls->index - 1]) {
            used[cls->index - 1] = true;
            slots[cls->index - 1] = s[i].matrix();
        } else {
            pending.emplace_back(i, *sig);
        }
    }
    for (const auto &[i, sig] : pending) {
        std::size_t c = 0;
        while (c < table.size() && (used[c] || !fits(sig, table[c]))) ++c;
        if (c == table.size())
            throw std::invalid_argument("operator " + std::to_string(i + 1) + " with layout " + sig.str() +
                                        " fits no free class of regime " + std::string(regime_name(r)));
        used[c] = true;
        slots[c] = s[i].matrix();
    }
    return slots;
}

namespace {

std::vector<Position> positions_of(Regime r, int cls) {
    std::vector<Position> out;
    for (const auto &[row, col] : support_positions(class_table(r)[cls - 1])) out.emplace_back(row, col);
    return out;
}

// Zeroes entries outside the class layout if they are negligible; false if not.
bool chop_to_class(Matrix &m, Regime r, int cls, double scale) {
    const Signature &sig = class_table(r)[cls - 1];
    for (std::size_t row = 0; row < m.rows(); ++row)
        for (std::size_t col = 0; col < m.cols(); ++col) {
            if (sig.rows[col] == static_cast<int>(row)) continue;
            if (std::abs(m(row, col)) > kChopTol * std::max(1.0, scale)) return false;
            m(row, col) = 0.0;
        }
    return true;
}

double list_distance(std::size_t d, const std::vector<Matrix> &a, const std::vector<Matrix> &b) {
    return frobenius_distance(choi(KrausSet(d, a)).matrix(), choi(KrausSet(d, b)).matrix());
}

std::size_t count_nonzero(const std::vector<Matrix> &slots) {
    return static_cast<std::size_t>(
        std::count_if(slots.begin(), slots.end(), [](const Matrix &m) { return !m.is_zero(kZeroTol); }));
}

double max_norm(const std::vector<Matrix> &ops) {
    double s = 0.0;
    for (const auto &m : ops) s = std::max(s, m.max_abs());
    return s;
}

// Explicit unitary path. On success writes the new slot contents.
bool try_explicit(Regime r, const MergeGroup &g, std::vector<Matrix> &slots, StepLog &log) {
    const ExplicitUnitary pu = explicit_unitary(r, g, slots);
    if (pu.status != ExplicitStatus::Valid) {
        log.detail = "explicit unitary " + std::string(explicit_status_name(pu.status));
        if (!pu.note.empty()) log.detail += " (" + pu.note + ")";
        if (pu.status == ExplicitStatus::NotUnitary)
            log.detail += ", defect " + std::to_string(pu.unitarity_defect);
        return false;
    }
    const std::size_t d = regime_dim(r);
    std::vector<Matrix> operands;
    for (int c : g.explicit_operands) operands.push_back(slots[c - 1]);
    const KrausSet mixed = mix(UnitaryMatrix(pu.matrix, kExplicitUnitaryTol), KrausSet(d, operands));
    const double scale = max_norm(operands);

    std::vector<Matrix> next = slots;
    for (int c : g.explicit_operands) next[c - 1] = Matrix(d, d);
    for (std::size_t i = 0; i < g.explicit_targets.size(); ++i) {
        const int target = g.explicit_targets[i];
        Matrix out = mixed[i].matrix();
        if (!chop_to_class(out, r, target, scale)) {
            log.detail = "explicit unitary output " + std::to_string(i + 1) + " leaves the layout of class " +
                         std::to_string(target);
            return false;
        }
        Matrix &slot = next[target - 1];
        if (slot.is_zero(kZeroTol)) {
            slot = std::move(out);
            continue;
        }
        if (out.is_zero(kZeroTol)) continue;
        // Two operators now share a class; they must be proportional to merge.
        const KrausSet pair = merge_proportional(KrausSet(d, std::vector<Matrix>{slot, out}));
        if (pair.size() != 1) {
            log.detail = "explicit unitary output " + std::to_string(i + 1) + " shares class " +
                         std::to_string(target) + " with a non-proportional operator";
            return false;
        }
        slot = pair[0].matrix();
    }
    std::vector<Matrix> before, after;
    for (std::size_t c = 0; c < slots.size(); ++c) {
        if (!slots[c].is_zero(kZeroTol)) before.push_back(slots[c]);
        if (!next[c].is_zero(kZeroTol)) after.push_back(next[c]);
    }
    log.choi_distance = list_distance(d, before, after);
    if (log.choi_distance > kCertifyTol) {
        log.detail = "explicit unitary changes the channel (distance " + std::to_string(log.choi_distance) + ")";
        return false;
    }
    slots = std::move(next);
    log.detail = "explicit unitary validated";
    return true;
}

// Pattern-constrained refactorization followed by the unitary mixing that
// realizes it.
bool try_fallback(Regime r, const MergeGroup &g, std::vector<Matrix> &slots, StepLog &log) {
    const std::size_t d = regime_dim(r);
    std::vector<int> involved = g.members;
    if (g.residual_target &&
        std::find(involved.begin(), involved.end(), *g.residual_target) == involved.end())
        involved.push_back(*g.residual_target);
    std::vector<int> outputs;
    for (int c : involved)
        if (c != g.eliminated_class) outputs.push_back(c);

    std::vector<Matrix> ops;
    for (int c : involved)
        if (!slots[c - 1].is_zero(kZeroTol)) ops.push_back(slots[c - 1]);
    std::vector<std::vector<Position>> patterns;
    for (int c : outputs) patterns.push_back(positions_of(r, c));

    // Mixing preserves the Kraus rank of the sub-list, so more independent
    // operators than output slots can never be refactorized.
    if (!ops.empty()) {
        Matrix gram(ops.size(), ops.size());
        for (std::size_t i = 0; i < ops.size(); ++i)
            for (std::size_t j = 0; j < ops.size(); ++j) gram(i, j) = mat_mul(ops[i].adjoint(), ops[j]).trace();
        const auto ev = hermitian_eigenvalues(gram);
        const double top = std::max(ev.back(), 1e-300);
        const auto rank = static_cast<std::size_t>(
            std::count_if(ev.begin(), ev.end(), [&](double x) { return x > 1e-12 * top; }));
        if (rank > outputs.size()) {
            log.detail += (log.detail.empty() ? "" : "; ") + std::string("no decomposition: Kraus rank ") +
                          std::to_string(rank) + " exceeds the " + std::to_string(outputs.size()) +
                          " remaining classes";
            return false;
        }
    }

    std::string why;
    const auto sol = solve_pattern_decomposition(ops, patterns, &why);
    if (!sol) {
        log.detail += (log.detail.empty() ? "" : "; ") + std::string("no decomposition: ") + why;
        return false;
    }
    std::vector<Matrix> from = ops;
    while (from.size() < outputs.size()) from.emplace_back(d, d);
    std::optional<UnitaryMatrix> u;
    try {
        u = relating_unitary(from, sol->outputs);
    } catch (const std::invalid_argument &e) {
        log.detail += (log.detail.empty() ? "" : "; ") + std::string("no relating unitary: ") + e.what();
        return false;
    }
    const KrausSet mixed = mix(*u, KrausSet(d, from));
    const double scale = max_norm(ops);
    std::vector<Matrix> produced;
    for (std::size_t i = 0; i < mixed.size(); ++i) {
        Matrix m = mixed[i].matrix();
        if (i < outputs.size()) {
            if (!chop_to_class(m, r, outputs[i], scale)) {
                log.detail += "; mixed operator leaves the layout of class " + std::to_string(outputs[i]);
                return false;
            }
        } else if (m.max_abs() > kChopTol * std::max(1.0, scale)) {
            log.detail += "; surplus mixed operator does not vanish";
            return false;
        }
        if (i < outputs.size()) produced.push_back(std::move(m));
    }
    std::vector<Matrix> kept;
    for (const auto &m : produced)
        if (!m.is_zero(kZeroTol)) kept.push_back(m);
    log.choi_distance = list_distance(d, ops, kept.empty() ? std::vector<Matrix>{Matrix(d, d)} : kept);
    if (log.choi_distance > kCertifyTol) {
        log.detail += "; refactorized operators change the channel";
        return false;
    }
    for (int c : involved) slots[c - 1] = Matrix(d, d);
    for (std::size_t i = 0; i < outputs.size(); ++i) slots[outputs[i] - 1] = produced[i];
    log.detail += (log.detail.empty() ? "" : "; ") + std::string("fallback refactorization certified");
    return true;
}

bool group_selected(const ReductionOptions &opt, const MergeGroup &g) {
    return opt.only_groups.empty() ||
           std::find(opt.only_groups.begin(), opt.only_groups.end(), g.name) != opt.only_groups.end();
}

}  // namespace

ReductionOutcome reduce(const KrausSet &s, Regime r, const ReductionOptions &opt) {
    if (r == Regime::Qubit4) r = Regime::Qubit5;
    ReductionOutcome out;
    out.regime = r;
    out.op_count_before = s.size();
    std::vector<Matrix> slots = assign_slots(s, r);
    const std::size_t d = regime_dim(r);

    bool fallback_used = false;
    for (const MergeGroup &g : merge_groups(r)) {
        if (!group_selected(opt, g)) continue;
        StepLog log{g.name, StepAction::Skipped, count_nonzero(slots), 0, 0.0, {}};
        if (slots[g.eliminated_class - 1].is_zero(kZeroTol)) {
            log.detail = "class " + std::to_string(g.eliminated_class) + " already empty";
        } else if (opt.allow_explicit_path && try_explicit(r, g, slots, log)) {
            log.action = StepAction::ExplicitPath;
        } else if (opt.allow_fallback && try_fallback(r, g, slots, log)) {
            log.action = StepAction::Fallback;
            fallback_used = true;
        } else {
            log.action = StepAction::Failed;
            if (!opt.allow_fallback) log.detail += "; fallback disabled";
        }
        log.count_after = count_nonzero(slots);
        out.log.push_back(std::move(log));
    }

    std::vector<Matrix> ops;
    for (const auto &m : slots)
        if (!m.is_zero(kZeroTol)) ops.push_back(m);
    out.result = merge_proportional(KrausSet(d, ops));
    out.op_count_after = out.result.size();
    out.choi_distance = channels_equal(s, out.result, kCertifyTol).distance;
    out.all_incoherent = out.result.all_incoherent();
    out.strictly_incoherent = out.result.all_strictly_incoherent();

    const bool failed = std::any_of(out.log.begin(), out.log.end(),
                                    [](const StepLog &l) { return l.action == StepAction::Failed; });
    const bool certified = out.choi_distance <= kCertifyTol && out.all_incoherent &&
                           (r != Regime::QutritSIO15 || out.strictly_incoherent);
    if (!certified || failed || (out.op_count_after > reduced_bound(r) && opt.only_groups.empty()))
        out.status = ReductionStatus::NotReduced;
    else
        out.status = fallback_used ? ReductionStatus::FallbackUsed : ReductionStatus::Reduced;
    return out;
}

ReductionOutcome reduce_qubit_io(const KrausSet &s, const ReductionOptions &opt) {
    return reduce(s, Regime::Qubit5, opt);
}
ReductionOutcome reduce_qutrit_io(const KrausSet &s, const ReductionOptions &opt) {
    return reduce(s, Regime::QutritIO39, opt);
}
ReductionOutcome reduce_qutrit_sio(const KrausSet &s, const ReductionOptions &opt) {
    return reduce(s, Regime::QutritSIO15, opt);
}

}  // namespace kf
