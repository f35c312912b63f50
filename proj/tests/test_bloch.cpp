#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "krausfold/bloch.hpp"
#include "krausfold/sampler.hpp"

using namespace kf;

namespace {

const double kSqrt3 = std::sqrt(3.0);

BlochVector3 section(int i, double ti, int j, double tj) {
    BlochVector3 t{};
    t[i - 1] = ti;
    t[j - 1] = tj;
    return t;
}

KrausSet identity3() { return KrausSet(3, std::vector<Matrix>{Matrix::identity(3)}); }

KrausSet swap12() {
    return KrausSet(3, std::vector<Matrix>{Matrix{{0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}}});
}

KrausSet random_sio(std::mt19937_64 &rng) {
    SamplerConfig cfg;
    cfg.regime = Regime::QutritSIO15;
    return sample_channel(cfg, rng);
}

}  // namespace

TEST(GellMann, OrthonormalTracelessHermitian) {
    const auto &l = gell_mann();
    for (int i = 0; i < 8; ++i) {
        EXPECT_NEAR(std::abs(l[i].trace()), 0.0, 1e-15) << i;
        EXPECT_LE(frobenius_distance(l[i], l[i].adjoint()), 1e-15) << i;
        for (int j = 0; j < 8; ++j) {
            const Complex ip = mat_mul(l[i], l[j]).trace();
            EXPECT_NEAR(ip.real(), i == j ? 2.0 : 0.0, 1e-14) << i << "," << j;
            EXPECT_NEAR(ip.imag(), 0.0, 1e-14);
        }
    }
}

TEST(GellMann, LibraryOrdering) {
    const auto &l = gell_mann();
    EXPECT_EQ(l[3](0, 1), Complex(0.0, -1.0));
    EXPECT_EQ(l[3](1, 0), Complex(0.0, 1.0));
    EXPECT_EQ(l[1](0, 2), Complex(1.0));
    EXPECT_EQ(l[6](1, 1), Complex(-1.0));
    EXPECT_NEAR(l[7](2, 2).real(), -2.0 / kSqrt3, 1e-15);
}

TEST(BlochState, MaximallyMixedIsZero) {
    const Matrix rho = bloch_to_density(BlochVector3{});
    EXPECT_LE(frobenius_distance(rho, Matrix::identity(3) * (1.0 / 3.0)), 1e-15);
}

TEST(BlochState, PureThirdLevelHasMaximalLength) {
    Matrix rho(3, 3);
    rho(2, 2) = 1.0;
    const BlochVector3 t = density_to_bloch(rho);
    EXPECT_NEAR(t[7], -2.0 / kSqrt3, 1e-15);
    EXPECT_NEAR(std::sqrt(t[7] * t[7]), max_bloch_length(), 1e-15);
    EXPECT_NO_THROW(bloch_to_density(t));
}

TEST(BlochState, RoundTrip) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 50; ++trial) {
        BlochVector3 t;
        for (auto &x : t) x = g(rng);
        const double s = 0.999 * physical_scale(t);
        for (auto &x : t) x *= s;
        const BlochVector3 back = density_to_bloch(bloch_to_density(t));
        for (int i = 0; i < 8; ++i) EXPECT_NEAR(back[i], t[i], 1e-13);
    }
}

TEST(BlochState, RejectsTooLong) {
    EXPECT_THROW(bloch_to_density(section(1, 1.0, 2, 1.0)), PhysicalityError);
}

TEST(BlochState, RejectsNonPositiveWithinLength) {
    // Length 1 < 2/sqrt(3), but rho has a negative eigenvalue.
    EXPECT_THROW(bloch_to_density(section(1, 0.8, 2, 0.6)), PhysicalityError);
}

TEST(BlochState, PhysicalScaleHitsBoundary) {
    const BlochVector3 t = section(1, 0.8, 2, 0.6);
    const double s = physical_scale(t);
    BlochVector3 v;
    for (int i = 0; i < 8; ++i) v[i] = s * t[i];
    EXPECT_NEAR(min_state_eigenvalue(v), 0.0, 1e-10);
    EXPECT_TRUE(std::isinf(physical_scale(BlochVector3{})));
}

TEST(BlochState, DensityToBlochValidatesInput) {
    EXPECT_THROW(density_to_bloch(Matrix::identity(2)), std::invalid_argument);
    Matrix m = Matrix::identity(3);
    m(0, 1) = 1.0;
    EXPECT_THROW(density_to_bloch(m), std::invalid_argument);
}

TEST(PushForward, IdentityAndDephasing) {
    const BlochVector3 t = section(2, 0.4, 8, 0.3);
    const BlochVector3 m = push_forward(identity3(), t);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(m[i], t[i], 1e-15);

    std::vector<Matrix> ops;
    for (int i = 0; i < 3; ++i) {
        Matrix e(3, 3);
        e(i, i) = 1.0;
        ops.push_back(e);
    }
    const BlochVector3 d = push_forward(KrausSet(3, ops), t);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(d[i], 0.0, 1e-15);
    EXPECT_NEAR(d[7], 0.3, 1e-15);
}

TEST(ClosedForm, IdentityAgreesExactly) {
    const BlochVector3 t = section(1, 0.3, 7, 0.2);
    const auto dev = closed_form_deviation(identity3(), t);
    EXPECT_LE(dev.max_deviation, 1e-12);
}

TEST(ClosedForm, ReferenceSeventhCoordinateOffsetForIdentity) {
    // At the maximally mixed input the reference expression gives 2/3, the true
    // image coordinate is 0.
    const auto img = sio_image_closed_form(sio_params(identity3()), BlochVector3{});
    EXPECT_NEAR(img.m7_reference, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(img.m[6], 0.0, 1e-15);
}

TEST(ClosedForm, DiagonalCoordinatesMatchMatrixPath) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const KrausSet s = random_sio(rng);
        const auto dev7 = closed_form_deviation(s, section(7, 0.3, 8, 0.2));
        EXPECT_LE(dev7.deviation[6], 1e-12);
        // The reference eighth coordinate leaves out the single-entry class that
        // feeds row 3 from column 1; the gap is exactly that weight.
        const BlochVector3 t = section(1, 0.3, 8, 0.2);
        const auto dev8 = closed_form_deviation(s, t);
        const double p1 = 1.0 / 3.0 + t[7] / (2.0 * kSqrt3);
        EXPECT_NEAR(dev8.deviation[7], kSqrt3 * std::norm(sio_params(s).a[14]) * p1, 1e-12);
    }
}

TEST(ClosedForm, SingleCoordinateImagesOnTheirOwnAxis) {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        const KrausSet s = random_sio(rng);
        const SioParams p = sio_params(s);
        for (int k = 0; k < 5; ++k) {
            BlochVector3 t{};
            t[k] = 0.3;
            EXPECT_LE(closed_form_deviation(s, t).deviation[k], 1e-12) << "m" << k + 1;
        }
        // The sixth display's last term carries the wrong sign; the real part
        // misses exactly t6 Re(b2 conj(c2)).
        BlochVector3 t{};
        t[5] = 0.3;
        const double expected = std::abs(0.3 * (p.b[1] * std::conj(p.c[1])).real());
        EXPECT_NEAR(closed_form_deviation(s, t).deviation[5], expected, 1e-12);
    }
}

TEST(Sections, DetectsPairs) {
    const auto s = section_of(section(2, 0.1, 5, -0.2));
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->first, 1);
    EXPECT_EQ(s->second, 4);
    EXPECT_FALSE(section_of(BlochVector3{}).has_value());
    BlochVector3 three = section(1, 0.1, 2, 0.1);
    three[2] = 0.1;
    EXPECT_FALSE(section_of(three).has_value());
}

TEST(Conditions, IdentityTouchesBoundaries) {
    for (auto [i, j] : std::vector<std::pair<int, int>>{{1, 7}, {3, 8}, {1, 4}, {2, 6}}) {
        const BlochVector3 t = section(i, 0.3, j, 0.3);
        const auto rep = check_conditions(t, push_forward(identity3(), t));
        int applicable = 0;
        for (int id = 1; id <= 4; ++id)
            if (rep[id].applicable) {
                ++applicable;
                EXPECT_TRUE(rep[id].satisfied) << i << "," << j;
            }
        EXPECT_EQ(applicable, 1);
    }
}

TEST(Conditions, ResidualOnDiagonalSection) {
    const double t7 = 0.3, t8 = 0.2;
    const BlochVector3 t = section(7, t7, 8, t8);
    const auto rep = check_conditions(t, push_forward(identity3(), t));
    EXPECT_TRUE(rep[2].applicable);
    EXPECT_TRUE(rep[2].advisory);
    EXPECT_NEAR(rep.cond2_residual, -kSqrt3 * t7 + t8 - 2.0 * kSqrt3 / 3.0, 1e-12);
}

TEST(Conditions, SwapLeavesStatedIntervalOnSeventhAxis) {
    // Exchanging levels 1 and 2 is strictly incoherent and maps m7 to -t7,
    // below the interval's lower end (1 - sqrt3)/3 for t7 = 0.5.
    const BlochVector3 t = section(1, 0.4, 7, 0.5);
    const BlochVector3 m = push_forward(swap12(), t);
    EXPECT_NEAR(m[6], -0.5, 1e-15);
    const auto rep = check_conditions(t, m);
    EXPECT_TRUE(rep[1].applicable);
    EXPECT_FALSE(rep[1].satisfied);
    EXPECT_NEAR(rep[1].margin, -0.5 - (1.0 - kSqrt3) / 3.0, 1e-12);
}

TEST(Conditions, DiskAndDiamondHoldForSampledChannels) {
    std::mt19937_64 rng(23);
    const BlochVector3 disk = section(1, 0.3, 4, 0.3);
    const BlochVector3 diamond = section(1, 0.3, 2, 0.3);
    for (int trial = 0; trial < 200; ++trial) {
        const KrausSet s = random_sio(rng);
        EXPECT_TRUE(check_conditions(disk, push_forward(s, disk))[3].satisfied);
        EXPECT_TRUE(check_conditions(diamond, push_forward(s, diamond))[4].satisfied);
    }
}

TEST(Conditions, OffSectionUsesCoherenceSum) {
    BlochVector3 t = section(1, 0.2, 2, 0.2);
    t[6] = 0.1;
    const auto rep = check_conditions(t, push_forward(identity3(), t));
    EXPECT_TRUE(rep.generic);
    EXPECT_TRUE(rep[4].applicable);
    EXPECT_NEAR(rep[4].margin, 0.0, 1e-12);
}
