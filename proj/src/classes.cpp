#include "krausfold/classes.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace kf {

namespace {

Signature sig(std::initializer_list<int> one_based) { return Signature::from_one_based(one_based); }

// Five-form ordering: K1 top row, K2 bottom row, K3 diagonal, K4 anti-diagonal, K5 a single (1,1) entry.
const std::vector<Signature> &qubit5() {
    static const std::vector<Signature> t = {sig({1, 1}), sig({2, 2}), sig({1, 2}), sig({2, 1}), sig({1, 0})};
    return t;
}

// (row of column 1, row of column 2, row of column 3), 0 = zero column.
const std::vector<Signature> &qutrit_io39() {
    static const std::vector<Signature> t = {
        sig({1, 1, 1}), sig({1, 1, 2}), sig({1, 1, 3}), sig({1, 1, 0}),  //  K1 -  K4
        sig({2, 2, 1}), sig({2, 2, 2}), sig({2, 2, 3}), sig({2, 2, 0}),  //  K5 -  K8
        sig({1, 2, 1}), sig({1, 2, 2}), sig({1, 2, 3}), sig({1, 2, 0}),  //  K9 - K12
        sig({2, 1, 1}), sig({2, 1, 2}), sig({2, 1, 3}), sig({2, 1, 0}),  // K13 - K16
        sig({1, 3, 1}), sig({1, 3, 2}), sig({1, 3, 3}), sig({1, 3, 0}),  // K17 - K20
        sig({2, 3, 1}), sig({2, 3, 2}), sig({2, 3, 3}), sig({2, 3, 0}),  // K21 - K24
        sig({3, 2, 1}), sig({3, 2, 2}), sig({3, 2, 3}), sig({3, 2, 0}),  // K25 - K28
        sig({3, 3, 1}), sig({3, 3, 2}), sig({3, 3, 3}), sig({3, 3, 0}),  // K29 - K32
        sig({3, 1, 1}), sig({3, 1, 2}), sig({3, 1, 3}), sig({3, 1, 0}),  // K33 - K36
        sig({3, 0, 0}), sig({1, 0, 0}), sig({2, 0, 0}),                  // K37 - K39
    };
    return t;
}

const std::vector<Signature> &qutrit_sio15() {
    static const std::vector<Signature> t = {
        sig({1, 2, 3}), sig({1, 3, 2}), sig({2, 1, 3}), sig({2, 3, 1}), sig({3, 2, 1}), sig({3, 1, 2}),  // K1 - K6
        sig({1, 2, 0}), sig({1, 3, 0}), sig({2, 1, 0}), sig({2, 3, 0}), sig({3, 2, 0}), sig({3, 1, 0}),  // K7 - K12
        sig({1, 0, 0}), sig({2, 0, 0}), sig({3, 0, 0}),                                                  // K13 - K15
    };
    return t;
}

}  // namespace

std::string_view regime_name(Regime r) {
    switch (r) {
    case Regime::Qubit5: return "qubit5";
    case Regime::Qubit4: return "qubit4";
    case Regime::QutritIO39: return "qutrit-io39";
    case Regime::QutritSIO15: return "qutrit-sio15";
    }
    return "?";
}

std::optional<Regime> parse_regime(std::string_view name) {
    if (name == "qubit5" || name == "qubit-io") return Regime::Qubit5;
    if (name == "qubit4") return Regime::Qubit4;
    if (name == "qutrit-io39" || name == "qutrit-io") return Regime::QutritIO39;
    if (name == "qutrit-sio15" || name == "qutrit-sio") return Regime::QutritSIO15;
    return std::nullopt;
}

std::size_t regime_dim(Regime r) { return (r == Regime::Qubit5 || r == Regime::Qubit4) ? 2 : 3; }

std::size_t reduced_bound(Regime r) {
    switch (r) {
    case Regime::Qubit5:
    case Regime::Qubit4: return 4;
    case Regime::QutritIO39: return 32;
    case Regime::QutritSIO15: return 13;
    }
    return 0;
}

std::span<const Signature> class_table(Regime r) {
    switch (r) {
    case Regime::Qubit5: return qubit5();
    case Regime::Qubit4: return std::span<const Signature>(qubit5()).first(4);
    case Regime::QutritIO39: return qutrit_io39();
    case Regime::QutritSIO15: return qutrit_sio15();
    }
    return {};
}

std::vector<Signature> enumerate_class_signatures(Regime r) {
    const int d = static_cast<int>(regime_dim(r));
    const bool injective = r == Regime::QutritSIO15;
    std::vector<Signature> out;
    for (int active = 1; active <= d; ++active) {
        // All row maps for the first `active` columns.
        int total = 1;
        for (int i = 0; i < active; ++i) total *= d;
        for (int code = 0; code < total; ++code) {
            Signature s;
            s.rows.assign(d, Signature::kZeroColumn);
            int rest = code;
            for (int c = 0; c < active; ++c) {
                s.rows[c] = rest % d;
                rest /= d;
            }
            if (injective) {
                std::vector<int> used(s.rows.begin(), s.rows.begin() + active);
                std::sort(used.begin(), used.end());
                if (std::adjacent_find(used.begin(), used.end()) != used.end()) continue;
            }
            out.push_back(std::move(s));
        }
    }
    if (r == Regime::Qubit5 || r == Regime::Qubit4) {
        // The qubit list keeps only the (1,1) single-column form and, for Qubit4, none.
        std::erase_if(out, [&](const Signature &s) {
            if (s.rows[1] != Signature::kZeroColumn) return false;
            return r == Regime::Qubit4 || s.rows[0] != 0;
        });
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<CanonicalClass> class_of(const Signature &s, Regime r) {
    const auto table = class_table(r);
    const auto it = std::find(table.begin(), table.end(), s);
    if (it == table.end()) return std::nullopt;
    return CanonicalClass{r, static_cast<int>(it - table.begin()) + 1};
}

std::vector<std::optional<CanonicalClass>> classify(const KrausSet &s, Regime r) {
    if (s.dim() != regime_dim(r)) throw std::invalid_argument("classify: set dimension does not match regime");
    std::vector<std::optional<CanonicalClass>> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto &sig = s[i].signature();
        if (!sig) throw std::invalid_argument("classify: operator " + std::to_string(i + 1) + " is not incoherent");
        out.push_back(class_of(*sig, r));
    }
    return out;
}

Matrix class_operator(Regime r, int index, std::span<const Complex> values) {
    const auto table = class_table(r);
    if (index < 1 || index > static_cast<int>(table.size()))
        throw std::out_of_range("class_operator: class index out of range");
    const Signature &s = table[index - 1];
    if (values.size() != s.dim()) throw std::invalid_argument("class_operator: need one value per column");
    Matrix m(s.dim(), s.dim());
    for (std::size_t c = 0; c < s.dim(); ++c)
        if (s.rows[c] != Signature::kZeroColumn) m(s.rows[c], c) = values[c];
    return m;
}

}  // namespace kf
