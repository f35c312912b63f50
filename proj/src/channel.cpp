#include "krausfold/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kf {

bool Signature::is_zero() const {
    return std::all_of(rows.begin(), rows.end(), [](int r) { return r == kZeroColumn; });
}

std::string Signature::str() const {
    std::string s = "(";
    for (std::size_t c = 0; c < rows.size(); ++c) {
        if (c) s += ",";
        s += std::to_string(rows[c] + 1);
    }
    return s + ")";
}

Signature Signature::from_one_based(std::initializer_list<int> rows) {
    Signature sig;
    for (int r : rows) sig.rows.push_back(r - 1);
    return sig;
}

std::vector<std::pair<int, int>> support_positions(const Signature &sig) {
    std::vector<std::pair<int, int>> out;
    for (std::size_t c = 0; c < sig.rows.size(); ++c)
        if (sig.rows[c] != Signature::kZeroColumn) out.emplace_back(sig.rows[c], static_cast<int>(c));
    return out;
}

bool fits(const Signature &sub, const Signature &sig) {
    if (sub.dim() != sig.dim()) return false;
    for (std::size_t c = 0; c < sub.dim(); ++c)
        if (sub.rows[c] != Signature::kZeroColumn && sub.rows[c] != sig.rows[c]) return false;
    return true;
}

std::optional<Signature> signature_of(const Matrix &m) {
    if (!m.square()) throw std::invalid_argument("signature_of: operator is not square");
    Signature sig;
    sig.rows.assign(m.cols(), Signature::kZeroColumn);
    for (std::size_t c = 0; c < m.cols(); ++c)
        for (std::size_t r = 0; r < m.rows(); ++r) {
            if (std::abs(m(r, c)) <= kStructTol) continue;
            if (sig.rows[c] != Signature::kZeroColumn) return std::nullopt;
            sig.rows[c] = static_cast<int>(r);
        }
    return sig;
}

bool is_strictly_incoherent(const Matrix &m) {
    return signature_of(m).has_value() && signature_of(m.adjoint()).has_value();
}

KrausOperator::KrausOperator(Matrix m) : mat_(std::move(m)) {
    if (!mat_.square()) throw std::invalid_argument("KrausOperator: operator is not square");
    if (!mat_.all_finite()) throw std::invalid_argument("KrausOperator: non-finite entry");
    sig_ = signature_of(mat_);
}

KrausSet::KrausSet(std::size_t dim, std::vector<KrausOperator> ops) : dim_(dim), ops_(std::move(ops)) {
    for (const auto &k : ops_)
        if (k.dim() != dim_) throw std::invalid_argument("KrausSet: operator dimension mismatch");
}

KrausSet::KrausSet(std::size_t dim, const std::vector<Matrix> &ops) : dim_(dim) {
    ops_.reserve(ops.size());
    for (const auto &m : ops) {
        if (m.rows() != dim || m.cols() != dim)
            throw std::invalid_argument("KrausSet: operator dimension mismatch");
        ops_.emplace_back(m);
    }
}

std::vector<Matrix> KrausSet::matrices() const {
    std::vector<Matrix> out;
    out.reserve(ops_.size());
    for (const auto &k : ops_) out.push_back(k.matrix());
    return out;
}

KrausSet KrausSet::pruned() const {
    std::vector<KrausOperator> kept;
    for (const auto &k : ops_)
        if (!k.is_zero()) kept.push_back(k);
    return KrausSet(dim_, std::move(kept));
}

KrausSet KrausSet::concat(const KrausSet &other) const {
    if (other.dim_ != dim_) throw std::invalid_argument("KrausSet::concat: dimension mismatch");
    auto ops = ops_;
    ops.insert(ops.end(), other.ops_.begin(), other.ops_.end());
    return KrausSet(dim_, std::move(ops));
}

bool KrausSet::all_incoherent() const {
    return std::all_of(ops_.begin(), ops_.end(), [](const KrausOperator &k) { return k.signature().has_value(); });
}

bool KrausSet::all_strictly_incoherent() const {
    return std::all_of(ops_.begin(), ops_.end(), [](const KrausOperator &k) { return is_strictly_incoherent(k); });
}

double completeness_defect(const KrausSet &s) {
    Matrix sum(s.dim(), s.dim());
    for (const auto &k : s.ops()) sum += mat_mul(k.matrix().adjoint(), k.matrix());
    return frobenius_distance(sum, Matrix::identity(s.dim()));
}

Matrix apply(const KrausSet &s, const Matrix &rho) {
    if (rho.rows() != s.dim() || rho.cols() != s.dim()) throw std::invalid_argument("apply: shape mismatch");
    Matrix out(s.dim(), s.dim());
    for (const auto &k : s.ops()) out += mat_mul(mat_mul(k.matrix(), rho), k.matrix().adjoint());
    return out;
}

bool ChoiMatrix::satisfies_cptp_invariants() const {
    if (frobenius_distance(mat_, mat_.adjoint()) > 1e-10) return false;
    if (std::abs(mat_.trace() - static_cast<double>(dim_)) > 1e-8) return false;
    const auto ev = hermitian_eigenvalues(mat_);
    return ev.empty() || ev.front() >= -1e-8;
}

ChoiMatrix choi(const KrausSet &s) {
    const std::size_t d = s.dim();
    Matrix j(d * d, d * d);
    for (const auto &op : s.ops()) {
        const Matrix &k = op.matrix();
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t kk = 0; kk < d; ++kk) {
                const Complex left = k(kk, i);
                if (left == Complex{}) continue;
                for (std::size_t jj = 0; jj < d; ++jj)
                    for (std::size_t l = 0; l < d; ++l) j(i * d + kk, jj * d + l) += left * std::conj(k(l, jj));
            }
    }
    return ChoiMatrix(d, std::move(j));
}

std::size_t choi_rank(const KrausSet &s, double tol) {
    const double defect = completeness_defect(s);
    if (defect > kCompletenessTol)
        throw std::domain_error("choi_rank: set is not CPTP (completeness defect " + std::to_string(defect) + ")");
    const auto ev = hermitian_eigenvalues(choi(s).matrix());
    if (ev.empty() || ev.back() <= 0.0) return 0;
    const double cut = tol * ev.back();
    return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [cut](double x) { return x > cut; }));
}

ChannelComparison channels_equal(const KrausSet &a, const KrausSet &b, double tol) {
    if (a.dim() != b.dim()) throw std::invalid_argument("channels_equal: dimension mismatch");
    const double dist = frobenius_distance(choi(a).matrix(), choi(b).matrix());
    return {dist <= tol, dist};
}

}  // namespace kf
