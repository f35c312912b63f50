#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "krausfold/channel.hpp"
#include "test_support.hpp"

using namespace kf;
using kf::testing::qubit4_set;
using kf::testing::random_unitary;

namespace {

const double kS = 1.0 / std::sqrt(2.0);

KrausSet identity_set(std::size_t d) { return KrausSet(d, std::vector<Matrix>{Matrix::identity(d)}); }

KrausSet dephasing2() {
    return KrausSet(2, std::vector<Matrix>{Matrix{{1.0, 0.0}, {0.0, 0.0}}, Matrix{{0.0, 0.0}, {0.0, 1.0}}});
}

KrausSet mix_by(const Matrix &u, const KrausSet &s) {
    std::vector<Matrix> out;
    for (std::size_t i = 0; i < u.rows(); ++i) {
        Matrix l(s.dim(), s.dim());
        for (std::size_t j = 0; j < s.size(); ++j) {
            Matrix t = s[j].matrix();
            t *= u(i, j);
            l += t;
        }
        out.push_back(l);
    }
    return KrausSet(s.dim(), out);
}

}  // namespace

TEST(SignatureOf, Permutation) {
    const auto sig = signature_of(Matrix{{0.0, 1.0}, {1.0, 0.0}});
    ASSERT_TRUE(sig);
    EXPECT_EQ(*sig, Signature::from_one_based({2, 1}));
}

TEST(SignatureOf, TopRowOperator) {
    const auto sig = signature_of(Matrix{{kS, kS}, {0.0, 0.0}});
    ASSERT_TRUE(sig);
    EXPECT_EQ(sig->str(), "(1,1)");
}

TEST(SignatureOf, HadamardIsNotIncoherent) {
    EXPECT_FALSE(signature_of(Matrix{{kS, kS}, {kS, -kS}}));
}

TEST(SignatureOf, ZeroMatrixHasAllZeroColumns) {
    const auto sig = signature_of(Matrix(3, 3));
    ASSERT_TRUE(sig);
    EXPECT_TRUE(sig->is_zero());
    EXPECT_EQ(sig->str(), "(0,0,0)");
}

TEST(SignatureOf, EntriesBelowToleranceIgnored) {
    const auto sig = signature_of(Matrix{{1.0, 0.0}, {1e-13, 1.0}});
    ASSERT_TRUE(sig);
    EXPECT_EQ(*sig, Signature::from_one_based({1, 2}));
}

TEST(StrictIncoherence, Diagonal) {
    EXPECT_TRUE(is_strictly_incoherent(Matrix{{0.3, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.0, 0.0, 0.7}}));
}

TEST(StrictIncoherence, SharedRowFails) {
    EXPECT_FALSE(is_strictly_incoherent(Matrix{{0.4, 0.6, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}));
}

TEST(StrictIncoherence, ZeroMatrixVacuouslyTrue) { EXPECT_TRUE(is_strictly_incoherent(Matrix(3, 3))); }

TEST(Fits, SubSignatureMatchesOnNonzeroColumns) {
    EXPECT_TRUE(fits(Signature::from_one_based({2, 0, 0}), Signature::from_one_based({2, 3, 1})));
    EXPECT_FALSE(fits(Signature::from_one_based({2, 0, 0}), Signature::from_one_based({1, 3, 1})));
}

TEST(CompletenessDefect, IdentityIsZero) { EXPECT_EQ(completeness_defect(identity_set(3)), 0.0); }

TEST(CompletenessDefect, QubitFourOperatorExample) {
    const KrausSet s = qubit4_set({0.5, 0.5, 0.5, 0.5}, {0.5, -0.5, 0.5, 0.5});
    EXPECT_LT(completeness_defect(s), 1e-15);
    EXPECT_TRUE(is_channel(s));
}

TEST(CompletenessDefect, MissingWeightMatchesSummation) {
    const KrausSet s = qubit4_set({0.5, 0.5, 0.5, 0.0}, {0.5, -0.5, 0.5, 0.5});
    // sum K^dagger K = diag(3/4, 1) with zero off-diagonals.
    EXPECT_NEAR(completeness_defect(s), 0.25, 1e-15);
    EXPECT_FALSE(is_channel(s));
}

TEST(Choi, IdentityQubit) {
    const Matrix j = choi(identity_set(2)).matrix();
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            const bool one = (r == 0 || r == 3) && (c == 0 || c == 3);
            EXPECT_EQ(j(r, c), Complex(one ? 1.0 : 0.0)) << r << "," << c;
        }
}

TEST(Choi, DephasingIsDiagonalRankTwo) {
    const ChoiMatrix j = choi(dephasing2());
    EXPECT_TRUE(j.satisfies_cptp_invariants());
    EXPECT_EQ(j.matrix(), (Matrix{{1, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 1}}));
    EXPECT_EQ(choi_rank(dephasing2()), 2u);
}

TEST(Choi, InvariantUnderUnitaryMixing) {
    std::mt19937_64 rng(21);
    const KrausSet s = qubit4_set({0.5, 0.5, 0.5, 0.5}, {0.5, -0.5, 0.5, 0.5});
    for (int trial = 0; trial < 20; ++trial) {
        const KrausSet t = mix_by(random_unitary(rng, 4), s);
        EXPECT_LT(frobenius_distance(choi(s).matrix(), choi(t).matrix()), 1e-10);
    }
}

TEST(Choi, LinearInOperatorList) {
    const KrausSet a = dephasing2();
    const KrausSet b(2, std::vector<Matrix>{Matrix{{0.0, 1.0}, {0.0, 0.0}}});
    Matrix sum = choi(a).matrix();
    sum += choi(b).matrix();
    EXPECT_LT(frobenius_distance(choi(a.concat(b)).matrix(), sum), 1e-15);
}

TEST(ChoiRank, Identity) { EXPECT_EQ(choi_rank(identity_set(2)), 1u); }

TEST(ChoiRank, GenericQubitFourOperatorSet) {
    const KrausSet s = qubit4_set({0.5, 0.5, 0.5, 0.5}, {0.5, -0.5, 0.5, 0.5});
    EXPECT_EQ(choi_rank(s), 4u);
}

TEST(ChoiRank, RejectsNonChannel) {
    const KrausSet s(2, std::vector<Matrix>{Matrix{{1.0, 0.0}, {0.0, 0.0}}});
    EXPECT_THROW(choi_rank(s), std::domain_error);
}

TEST(ChannelsEqual, Reflexive) {
    const auto r = channels_equal(dephasing2(), dephasing2());
    EXPECT_TRUE(r.equal);
    EXPECT_EQ(r.distance, 0.0);
}

TEST(ChannelsEqual, MixedSetIsEqual) {
    std::mt19937_64 rng(22);
    const KrausSet s = dephasing2();
    EXPECT_TRUE(channels_equal(s, mix_by(random_unitary(rng, 2), s)).equal);
}

TEST(ChannelsEqual, IdentityVersusDephasing) {
    const auto r = channels_equal(identity_set(2), dephasing2());
    EXPECT_FALSE(r.equal);
    EXPECT_NEAR(r.distance, std::sqrt(2.0), 1e-15);
}

TEST(ChannelsEqual, DimensionMismatchThrows) {
    EXPECT_THROW(channels_equal(identity_set(2), identity_set(3)), std::invalid_argument);
}

TEST(Apply, IdentityChannel) {
    const Matrix rho{{0.5, Complex(0.1, 0.2)}, {Complex(0.1, -0.2), 0.5}};
    EXPECT_LT(frobenius_distance(apply(identity_set(2), rho), rho), 1e-15);
}

TEST(Apply, DephasingKillsOffDiagonals) {
    const Matrix rho{{0.7, Complex(0.1, 0.2)}, {Complex(0.1, -0.2), 0.3}};
    EXPECT_LT(frobenius_distance(apply(dephasing2(), rho), Matrix{{0.7, 0.0}, {0.0, 0.3}}), 1e-15);
}

TEST(Apply, IncoherentSetMapsDiagonalToDiagonal) {
    const KrausSet s = qubit4_set({0.5, 0.5, 0.5, 0.5}, {0.5, -0.5, 0.5, 0.5});
    const Matrix out = apply(s, Matrix{{0.2, 0.0}, {0.0, 0.8}});
    EXPECT_LT(std::abs(out(0, 1)), 1e-15);
    EXPECT_NEAR(out.trace().real(), 1.0, 1e-14);
}

TEST(KrausSet, PruneDropsZeroOperators) {
    const KrausSet s(2, std::vector<Matrix>{Matrix::identity(2), Matrix(2, 2), Matrix{{1e-13, 0.0}, {0.0, 0.0}}});
    EXPECT_EQ(s.pruned().size(), 1u);
}

TEST(KrausSet, RejectsMismatchedShapes) {
    EXPECT_THROW(KrausSet(2, std::vector<Matrix>{Matrix::identity(3)}), std::invalid_argument);
}
