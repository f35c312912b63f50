#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "krausfold/channel.hpp"

namespace kf {

/// Canonical operator layouts.
///   Qubit5      - the five qubit incoherent forms (indices 1-5)
///   Qubit4      - the reduced four-operator qubit forms (1-4)
///   QutritIO39  - 27 three-column + 9 two-column + 3 one-column qutrit forms
///   QutritSIO15 - the 6 + 6 + 3 row-injective qutrit forms
enum class Regime { Qubit5, Qubit4, QutritIO39, QutritSIO15 };

std::string_view regime_name(Regime r);
std::optional<Regime> parse_regime(std::string_view name);
std::size_t regime_dim(Regime r);
/// Largest operator count a reduced set of this regime may have (5/4/32/13 is
/// the bound after reduction; Qubit5 maps to 4 as well).
std::size_t reduced_bound(Regime r);

struct CanonicalClass {
    Regime regime;
    int index;  // 1-based, as listed

    friend bool operator==(const CanonicalClass &, const CanonicalClass &) = default;
};

/// Hand-transcribed signature table, index i-1 holds class i.
std::span<const Signature> class_table(Regime r);

/// Signatures produced by enumeration: every row map whose nonzero columns are a
/// prefix of the column order (column 1 always nonzero). For QutritSIO15 the
/// nonzero columns must additionally map to distinct rows. Sorted.
std::vector<Signature> enumerate_class_signatures(Regime r);

/// Exact-match lookup. nullopt means Unclassified.
std::optional<CanonicalClass> class_of(const Signature &sig, Regime r);

/// Per-operator exact classification. Throws std::invalid_argument when an
/// operator is not incoherent; nullopt entries are Unclassified.
std::vector<std::optional<CanonicalClass>> classify(const KrausSet &s, Regime r);

/// Builds the operator with the given class layout from per-column values,
/// `values[c]` landing at (row of column c, c). Zero columns ignore their value.
Matrix class_operator(Regime r, int index, std::span<const Complex> values);

}  // namespace kf
