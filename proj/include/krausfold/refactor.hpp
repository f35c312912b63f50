#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "krausfold/channel.hpp"

namespace kf {

using Position = std::pair<int, int>;  // (row, col), 0-based

/// Unit vector c with sum_n c_n K_n vanishing on every forbidden position, or
/// nullopt (Infeasible) when the restricted system has trivial null space.
/// Phase fixed so that the first nonzero component is real positive.
std::optional<CVector> cancellation_row(std::span<const Matrix> ops, std::span<const Position> forbidden);

/// Re-expresses the operators on `positions` as one operator per pattern, each
/// supported inside its pattern (1 or 2 positions), reproducing the same Gram
/// matrix sum_n vec(K_n) vec(K_n)^dagger. Works when the patterns form paths and
/// cycles (one free weight, fixed by root finding) with optional singletons.
/// Returns nullopt with `why` filled in when no such decomposition exists.
struct PatternSolve {
    std::vector<Matrix> outputs;  // one per pattern, same order
};
std::optional<PatternSolve> solve_pattern_decomposition(std::span<const Matrix> ops,
                                                        std::span<const std::vector<Position>> patterns,
                                                        std::string *why = nullptr);

/// Unitary U (|from| x |from|) with to_i = sum_j U_ij from_j, given that both
/// lists describe the same completely positive map (|to| <= |from|, missing
/// entries of `to` are zero operators). Throws std::invalid_argument when the
/// lists are not related.
UnitaryMatrix relating_unitary(std::span<const Matrix> from, std::span<const Matrix> to);

}  // namespace kf
