#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "krausfold/channel.hpp"
#include "krausfold/classes.hpp"

namespace kf {

/// One merge step: the operators in `members` (plus the current occupant of
/// `residual_target`, if any) are re-mixed so that the slot of
/// `eliminated_class` empties. Class indices are 1-based within the regime.
struct MergeGroup {
    std::string name;
    std::vector<int> members;
    int eliminated_class;
    std::optional<int> residual_target;
    /// Class order the explicit unitary acts on, and the class each of its output
    /// rows is expected to land in. Empty when no explicit unitary exists.
    std::vector<int> explicit_operands;
    std::vector<int> explicit_targets;
};

/// Groups in application order: one qubit group; G1..G7 for qutrit IO; H1, H2
/// for qutrit SIO.
std::span<const MergeGroup> merge_groups(Regime r);

/// L_i = sum_j U_ij K_j. Throws std::invalid_argument on dimension mismatch.
KrausSet mix(const UnitaryMatrix &u, const KrausSet &s);

/// Replaces every pair with K_b = lambda K_a (relative tolerance `rel_tol`) by
/// sqrt(1 + |lambda|^2) K_a, repeats until no pair is left, and prunes zeros.
KrausSet merge_proportional(const KrausSet &s, double rel_tol = 1e-9);

enum class ExplicitStatus { Valid, Degenerate, NotUnitary };
std::string_view explicit_status_name(ExplicitStatus s);

struct ExplicitUnitary {
    ExplicitStatus status = ExplicitStatus::Degenerate;
    Matrix matrix;            // as built from the explicit formulas (empty if Degenerate)
    double unitarity_defect;  // ||U^dagger U - I||_F, infinity if Degenerate
    std::string note;
};

/// Qubit parameters with the five-form labels: K1 = [[a1,b1],[0,0]],
/// K2 = [[0,0],[a2,b2]], K3 = diag(a3,b3), K4 = [[0,b4],[a4,0]], K5 = a5 E11.
struct QubitParams {
    std::array<Complex, 5> a{};
    std::array<Complex, 4> b{};
};
QubitParams qubit_params(const KrausSet &five_forms);

/// The explicit 4x4 construction extended by one identity row/column, acting on
/// (K1, K2, K5, K4) with K3 passed through: V = U (+) I1 in operand order
/// (K1, K2, K5, K4, K3). Degenerate when a1^2 + a5^2 (or any other explicit
/// normalization denominator) is below 1e-10.
ExplicitUnitary explicit_unitary_qubit(const QubitParams &p);

/// Explicit unitary for a merge group, evaluated on the current slot contents
/// (`slots[c-1]` holds class c, zero matrix if empty). Acts on
/// `group.explicit_operands` in that order. Degenerate if the group has none.
ExplicitUnitary explicit_unitary(Regime r, const MergeGroup &group, std::span<const Matrix> slots);

enum class ReductionStatus { Reduced, FallbackUsed, NotReduced };
std::string_view reduction_status_name(ReductionStatus s);

enum class StepAction { Skipped, ExplicitPath, Fallback, Failed };
std::string_view step_action_name(StepAction a);

struct StepLog {
    std::string group;
    StepAction action;
    std::size_t count_before;
    std::size_t count_after;
    double choi_distance;  // of the group's sub-list before vs after
    std::string detail;
};

struct ReductionOptions {
    bool allow_explicit_path = true;
    bool allow_fallback = true;
    /// Restrict to the named groups (e.g. {"G1"}); empty = all, in order.
    std::vector<std::string> only_groups;
};

struct ReductionOutcome {
    Regime regime;
    KrausSet result;
    double choi_distance = 0.0;
    bool all_incoherent = false;
    bool strictly_incoherent = false;
    std::size_t op_count_before = 0;
    std::size_t op_count_after = 0;
    ReductionStatus status = ReductionStatus::NotReduced;
    std::vector<StepLog> log;
};

/// Places each nonzero operator into a class slot of the regime: its exact class
/// when free, otherwise the lowest free class whose layout contains it. Throws
/// std::invalid_argument when an operator is not incoherent or finds no slot.
std::vector<Matrix> assign_slots(const KrausSet &s, Regime r);

ReductionOutcome reduce(const KrausSet &s, Regime r, const ReductionOptions &opt = {});
ReductionOutcome reduce_qubit_io(const KrausSet &s, const ReductionOptions &opt = {});
ReductionOutcome reduce_qutrit_io(const KrausSet &s, const ReductionOptions &opt = {});
ReductionOutcome reduce_qutrit_sio(const KrausSet &s, const ReductionOptions &opt = {});

}  // namespace kf
