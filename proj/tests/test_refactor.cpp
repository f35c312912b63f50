#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "krausfold/classes.hpp"
#include "krausfold/refactor.hpp"
#include "test_support.hpp"

using namespace kf;
using kf::testing::random_qubit5;
using kf::testing::random_unitary;

namespace {

Complex rand_c(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    return {g(rng), g(rng)};
}

Matrix combine(std::span<const Matrix> ops, const CVector &c) {
    Matrix out(ops.front().rows(), ops.front().cols());
    for (std::size_t n = 0; n < ops.size(); ++n) {
        Matrix t = ops[n];
        t *= c[n];
        out += t;
    }
    return out;
}

Matrix io_class(int index, std::mt19937_64 &rng) {
    const std::vector<Complex> v{rand_c(rng), rand_c(rng), rand_c(rng)};
    return class_operator(Regime::QutritIO39, index, v);
}

Matrix sio_class(int index, std::mt19937_64 &rng) {
    const std::vector<Complex> v{rand_c(rng), rand_c(rng), rand_c(rng)};
    return class_operator(Regime::QutritSIO15, index, v);
}

std::vector<Position> positions_of(Regime r, int index) {
    std::vector<Position> out;
    for (const auto &[row, col] : support_positions(class_table(r)[index - 1])) out.emplace_back(row, col);
    return out;
}

/// Compares the completely positive maps of two raw operator lists.
double cp_distance(const std::vector<Matrix> &a, const std::vector<Matrix> &b) {
    const std::size_t d = a.front().rows();
    return frobenius_distance(choi(KrausSet(d, a)).matrix(), choi(KrausSet(d, b)).matrix());
}

}  // namespace

TEST(CancellationRow, ProportionalPairCancels) {
    const Matrix k{{0.3, Complex(0.0, 0.4)}, {0.0, 0.0}};
    Matrix k2 = k;
    const Complex lambda(0.5, -1.5);
    k2 *= lambda;
    const std::vector<Matrix> ops{k, k2};
    const std::vector<Position> forbid{{0, 0}};
    const auto c = cancellation_row(ops, forbid);
    ASSERT_TRUE(c);
    EXPECT_NEAR(norm(*c), 1.0, 1e-12);
    EXPECT_LT(combine(ops, *c).max_abs(), 1e-12);
    // Expected direction (lambda, -1)/norm with the first entry made real positive.
    const double n = std::sqrt(1.0 + std::norm(lambda));
    EXPECT_NEAR((*c)[0].real(), std::abs(lambda) / n, 1e-12);
    EXPECT_NEAR((*c)[0].imag(), 0.0, 1e-15);
    EXPECT_NEAR(std::abs((*c)[1]), 1.0 / n, 1e-12);
}

TEST(CancellationRow, MergeGroupOneLeavesClass39Pattern) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<Matrix> ops{io_class(32, rng), io_class(24, rng), io_class(37, rng)};
        const std::vector<Position> forbid{{2, 0}, {2, 1}};
        const auto c = cancellation_row(ops, forbid);
        ASSERT_TRUE(c);
        const Matrix l = combine(ops, *c);
        const auto sig = signature_of(l);
        ASSERT_TRUE(sig);
        EXPECT_EQ(class_of(*sig, Regime::QutritIO39)->index, 39) << sig->str();
    }
}

TEST(CancellationRow, SioGroupTwoLeavesClass13Pattern) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<Matrix> ops{sio_class(8, rng), sio_class(10, rng), sio_class(14, rng)};
        const std::vector<Position> forbid{{2, 1}, {1, 0}};
        const auto c = cancellation_row(ops, forbid);
        ASSERT_TRUE(c);
        const auto sig = signature_of(combine(ops, *c));
        ASSERT_TRUE(sig);
        EXPECT_EQ(class_of(*sig, Regime::QutritSIO15)->index, 13) << sig->str();
    }
}

TEST(CancellationRow, OverdeterminedIsInfeasible) {
    const std::vector<Matrix> ops{Matrix{{1.0, 0.0}, {0.0, 0.0}}, Matrix{{0.0, 1.0}, {0.0, 0.0}}};
    const std::vector<Position> forbid{{0, 0}, {0, 1}};
    EXPECT_FALSE(cancellation_row(ops, forbid));
}

TEST(CancellationRow, NoForbiddenPositionsGivesFirstUnitVector) {
    const std::vector<Matrix> ops{Matrix::identity(2), Matrix::identity(2)};
    const auto c = cancellation_row(ops, {});
    ASSERT_TRUE(c);
    EXPECT_EQ((*c)[0], Complex(1.0));
    EXPECT_EQ((*c)[1], Complex(0.0));
}

TEST(PatternDecomposition, QubitFiveToFourCycle) {
    std::mt19937_64 rng(33);
    std::vector<std::vector<Position>> patterns;
    for (int i = 1; i <= 4; ++i) patterns.push_back(positions_of(Regime::Qubit4, i));
    for (int trial = 0; trial < 200; ++trial) {
        const auto ops = random_qubit5(rng).matrices();
        std::string why;
        const auto sol = solve_pattern_decomposition(ops, patterns, &why);
        ASSERT_TRUE(sol) << why;
        ASSERT_EQ(sol->outputs.size(), 4u);
        for (int i = 0; i < 4; ++i) {
            const auto sig = signature_of(sol->outputs[i]);
            ASSERT_TRUE(sig);
            EXPECT_TRUE(fits(*sig, class_table(Regime::Qubit4)[i]));
        }
        EXPECT_LT(cp_distance(ops, sol->outputs), 1e-9);
    }
}

TEST(PatternDecomposition, PathWithSingletonAbsorber) {
    // Classes 32, 24, 37 onto the patterns of 32, 24 and 39.
    std::mt19937_64 rng(34);
    const std::vector<std::vector<Position>> patterns{positions_of(Regime::QutritIO39, 32),
                                                      positions_of(Regime::QutritIO39, 24),
                                                      positions_of(Regime::QutritIO39, 39)};
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<Matrix> ops{io_class(32, rng), io_class(24, rng), io_class(37, rng)};
        std::string why;
        const auto sol = solve_pattern_decomposition(ops, patterns, &why);
        ASSERT_TRUE(sol) << why;
        EXPECT_LT(cp_distance(ops, sol->outputs), 1e-9);
    }
}

TEST(PatternDecomposition, UnjoinedCoherenceRejected) {
    // Both operators populate (1,1) and (1,2) coherently; single-position
    // targets cannot carry that coherence.
    const std::vector<Matrix> ops{Matrix{{0.5, 0.5}, {0.0, 0.0}}, Matrix{{0.5, 1.0}, {0.0, 0.0}}};
    const std::vector<std::vector<Position>> patterns{{{0, 0}}, {{0, 1}}};
    std::string why;
    EXPECT_FALSE(solve_pattern_decomposition(ops, patterns, &why));
    EXPECT_NE(why.find("coherence"), std::string::npos);
}

TEST(PatternDecomposition, IncoherentPairSplitsIntoSingletons) {
    const std::vector<Matrix> ops{Matrix{{0.5, 0.5}, {0.0, 0.0}}, Matrix{{0.5, -0.5}, {0.0, 0.0}}};
    const std::vector<std::vector<Position>> patterns{{{0, 0}}, {{0, 1}}};
    const auto sol = solve_pattern_decomposition(ops, patterns);
    ASSERT_TRUE(sol);
    EXPECT_NEAR(std::abs(sol->outputs[0](0, 0)), std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(std::abs(sol->outputs[1](0, 1)), std::sqrt(0.5), 1e-12);
}

TEST(PatternDecomposition, SupportOutsidePatternsRejected) {
    const std::vector<Matrix> ops{Matrix{{1.0, 0.0}, {0.0, 1.0}}};
    const std::vector<std::vector<Position>> patterns{{{0, 0}}};
    std::string why;
    EXPECT_FALSE(solve_pattern_decomposition(ops, patterns, &why));
    EXPECT_NE(why.find("outside"), std::string::npos);
}

TEST(RelatingUnitary, RecoversRandomMixing) {
    std::mt19937_64 rng(36);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ops = random_qubit5(rng).matrices();
        const Matrix u = random_unitary(rng, 5);
        std::vector<Matrix> mixed;
        for (std::size_t i = 0; i < 5; ++i) {
            Matrix l(2, 2);
            for (std::size_t j = 0; j < 5; ++j) {
                Matrix t = ops[j];
                t *= u(i, j);
                l += t;
            }
            mixed.push_back(l);
        }
        const UnitaryMatrix w = relating_unitary(ops, mixed);
        for (std::size_t i = 0; i < 5; ++i) {
            Matrix l(2, 2);
            for (std::size_t j = 0; j < 5; ++j) {
                Matrix t = ops[j];
                t *= w.matrix()(i, j);
                l += t;
            }
            EXPECT_LT(frobenius_distance(l, mixed[i]), 1e-9);
        }
    }
}

TEST(RelatingUnitary, ShorterTargetPadsWithZeros) {
    std::mt19937_64 rng(37);
    std::vector<std::vector<Position>> patterns;
    for (int i = 1; i <= 4; ++i) patterns.push_back(positions_of(Regime::Qubit4, i));
    const auto ops = random_qubit5(rng).matrices();
    const auto sol = solve_pattern_decomposition(ops, patterns);
    ASSERT_TRUE(sol);
    const UnitaryMatrix w = relating_unitary(ops, sol->outputs);
    Matrix last(2, 2);
    for (std::size_t j = 0; j < 5; ++j) {
        Matrix t = ops[j];
        t *= w.matrix()(4, j);
        last += t;
    }
    EXPECT_LT(last.max_abs(), 1e-9);
}

TEST(RelatingUnitary, UnrelatedListsThrow) {
    const std::vector<Matrix> a{Matrix::identity(2)};
    const std::vector<Matrix> b{Matrix{{1.0, 0.0}, {0.0, 0.0}}};
    EXPECT_THROW(relating_unitary(a, b), std::invalid_argument);
}
