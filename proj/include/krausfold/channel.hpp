#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "krausfold/densemath.hpp"

namespace kf {

/// Tolerance on sum K^dagger K = I for a set to count as a channel.
inline constexpr double kCompletenessTol = 1e-8;

/// Column-wise target-row map of an incoherent operator. `rows[c]` is the
/// 0-based row holding column c's single nonzero entry, or kZeroColumn.
struct Signature {
    static constexpr int kZeroColumn = -1;
    std::vector<int> rows;

    std::size_t dim() const { return rows.size(); }
    bool is_zero() const;
    /// 1-based textual form, e.g. "(1,2,0)".
    std::string str() const;
    /// Parses the 1-based form produced by str(); 0 marks a zero column.
    static Signature from_one_based(std::initializer_list<int> rows);

    friend bool operator==(const Signature &, const Signature &) = default;
    friend auto operator<=>(const Signature &, const Signature &) = default;
};

/// Positions (row, col) an operator with this signature may occupy.
std::vector<std::pair<int, int>> support_positions(const Signature &sig);

/// True when every nonzero column of `sub` maps to the same row in `sig`.
bool fits(const Signature &sub, const Signature &sig);

class KrausOperator {
public:
    explicit KrausOperator(Matrix m);

    const Matrix &matrix() const { return mat_; }
    std::size_t dim() const { return mat_.rows(); }
    /// Cached signature; empty when the operator is not incoherent.
    const std::optional<Signature> &signature() const { return sig_; }
    bool is_zero() const { return mat_.is_zero(kZeroTol); }

private:
    Matrix mat_;
    std::optional<Signature> sig_;
};

/// Signature of `m`, or nullopt when some column holds two entries above kStructTol.
std::optional<Signature> signature_of(const Matrix &m);
inline std::optional<Signature> signature_of(const KrausOperator &k) { return k.signature(); }

/// Both K and K^dagger incoherent: at most one nonzero per column and per row.
bool is_strictly_incoherent(const Matrix &m);
inline bool is_strictly_incoherent(const KrausOperator &k) { return is_strictly_incoherent(k.matrix()); }

/// A finite list of d x d operators; no completeness requirement at construction.
class KrausSet {
public:
    KrausSet() = default;
    KrausSet(std::size_t dim, std::vector<KrausOperator> ops);
    KrausSet(std::size_t dim, const std::vector<Matrix> &ops);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ops_.size(); }
    bool empty() const { return ops_.empty(); }
    const std::vector<KrausOperator> &ops() const { return ops_; }
    const KrausOperator &operator[](std::size_t i) const { return ops_.at(i); }
    std::vector<Matrix> matrices() const;

    /// Same set without zero operators (all entries below kZeroTol).
    KrausSet pruned() const;
    KrausSet concat(const KrausSet &other) const;

    bool all_incoherent() const;
    bool all_strictly_incoherent() const;

private:
    std::size_t dim_ = 0;
    std::vector<KrausOperator> ops_;
};

/// ||sum K^dagger K - I||_F.
double completeness_defect(const KrausSet &s);
inline bool is_channel(const KrausSet &s) { return completeness_defect(s) <= kCompletenessTol; }

/// sum K rho K^dagger.
Matrix apply(const KrausSet &s, const Matrix &rho);

/// J = sum_ij E_ij (x) Phi(E_ij); J[(i*d + k), (j*d + l)] = sum_n K_n[k,i] conj(K_n[l,j]).
class ChoiMatrix {
public:
    ChoiMatrix(std::size_t dim, Matrix m) : dim_(dim), mat_(std::move(m)) {}
    std::size_t dim() const { return dim_; }
    const Matrix &matrix() const { return mat_; }
    /// Checks Hermiticity (1e-10), trace d (1e-8) and PSD (min eigenvalue >= -1e-8).
    bool satisfies_cptp_invariants() const;

private:
    std::size_t dim_;
    Matrix mat_;
};

ChoiMatrix choi(const KrausSet &s);

/// Number of Choi eigenvalues above tol * largest. Throws std::domain_error for
/// sets that are not CPTP within kCompletenessTol.
std::size_t choi_rank(const KrausSet &s, double tol = 1e-9);

struct ChannelComparison {
    bool equal;
    double distance;
};
/// Choi-matrix Frobenius comparison. Throws on dimension mismatch.
ChannelComparison channels_equal(const KrausSet &a, const KrausSet &b, double tol = 1e-9);

}  // namespace kf
