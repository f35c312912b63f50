#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "krausfold/channel.hpp"

namespace kf {

/// Eight real coefficients t1..t8 (index 0..7) of a qutrit state
/// rho = I/3 + (1/2) sum_i t_i lambda_i.
using BlochVector3 = std::array<double, 8>;

/// Largest Bloch-vector length of a qutrit state, 2/sqrt(3).
double max_bloch_length();

/// Gell-Mann matrices in this library's order: lambda1..3 real symmetric for
/// index pairs (1,2), (1,3), (2,3); lambda4..6 imaginary antisymmetric for the
/// same pairs (lambda4 = [[0,-i,0],[i,0,0],[0,0,0]]); lambda7 = diag(1,-1,0);
/// lambda8 = diag(1,1,-2)/sqrt(3).
const std::array<Matrix, 8> &gell_mann();

/// Raised for vectors longer than 2/sqrt(3) or whose reconstruction is not PSD.
class PhysicalityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// rho = I/3 + (1/2) sum t_i lambda_i, rejecting unphysical vectors
/// (length above 2/sqrt(3) + 1e-12 or minimum eigenvalue below -1e-9).
Matrix bloch_to_density(const BlochVector3 &t);
/// Same matrix without the physicality checks.
Matrix bloch_to_density_unchecked(const BlochVector3 &t);
/// Smallest eigenvalue of the reconstructed matrix.
double min_state_eigenvalue(const BlochVector3 &t);
/// Largest s >= 0 with s*t still a valid state (bisection to 1e-12).
double physical_scale(const BlochVector3 &t);

/// t_i = Tr(rho lambda_i). Throws std::invalid_argument for non-3x3 or
/// non-Hermitian (1e-10) input.
BlochVector3 density_to_bloch(const Matrix &rho);

/// density_to_bloch(apply(S, bloch_to_density(t))).
BlochVector3 push_forward(const KrausSet &s, const BlochVector3 &t);

/// Canonical strictly incoherent parameters: class k of the fifteen forms
/// holds a[k-1] in column 1, b[k-1] in column 2 (k <= 12) and c[k-1] in
/// column 3 (k <= 6).
struct SioParams {
    std::array<Complex, 15> a{};
    std::array<Complex, 12> b{};
    std::array<Complex, 6> c{};
};
/// Reads the parameters off a strictly incoherent qutrit set (slot assignment
/// as in the reduction drivers).
SioParams sio_params(const KrausSet &s);

struct ClosedFormImage {
    BlochVector3 m{};       // the closed form, with m7 taken from the diagonal row sums
    double m7_reference;   // the reference closed-form m7, kept for the report
    double m6_imag_part;    // imaginary remainder of the reference m6 expression
};
/// Closed-form image of t under a strictly incoherent channel. m1..m6 and m8
/// follow the reference closed forms (single-coordinate sections); m7 is computed
/// as rho'11 - rho'22 from the diagonal row sums.
ClosedFormImage sio_image_closed_form(const SioParams &p, const BlochVector3 &t);

struct ClosedFormDeviation {
    ClosedFormImage closed;
    BlochVector3 matrix_path{};
    BlochVector3 deviation{};  // |closed - matrix_path| per component
    double max_deviation = 0.0;
    double m7_reference_deviation = 0.0;
};
ClosedFormDeviation closed_form_deviation(const KrausSet &s, const BlochVector3 &t);

/// Indices (0-based) of the two nonzero coordinates (|t_k| > 1e-12) when t lies
/// on a two-dimensional section.
std::optional<std::pair<int, int>> section_of(const BlochVector3 &t);

struct ConditionRecord {
    int id;  // 1..4
    bool applicable = false;
    bool satisfied = true;
    double margin = 0.0;
    bool advisory = false;  // condition 2 is evaluated but not an invariant
};

struct ConditionReport {
    std::array<ConditionRecord, 4> conditions{};
    std::optional<std::pair<int, int>> section;  // 0-based
    bool generic = false;          // t not on a section: coherence-sum bound used
    double cond2_residual = 0.0;   // -sqrt3 m7 + m8 - 2 sqrt3 / 3 (meaningful on (7,8))
    const ConditionRecord &operator[](int id) const { return conditions.at(id - 1); }
};

/// Evaluates the achievable-region conditions for a transition t -> m.
///   1: sections (i, j), i in 1..6, j in {7, 8}: m_i^2 <= t_i^2 and the stated
///      interval for m_j; margin is the smaller slack.
///   2: section (7, 8): residual of -sqrt3 m7 + m8 = 2 sqrt3/3, advisory.
///   3: sections (1,4), (2,5), (3,6): m_i^2 + m_j^2 <= t_i^2 + t_j^2.
///   4: other sections inside 1..6: (|m_i| + |m_j|)^2 <= (|t_i| + |t_j|)^2.
/// Off-section inputs get condition 4 in its coherence-sum form
/// sum_k sqrt(m_k^2 + m_{k+3}^2) <= sum_k sqrt(t_k^2 + t_{k+3}^2).
ConditionReport check_conditions(const BlochVector3 &t, const BlochVector3 &m);

}  // namespace kf
