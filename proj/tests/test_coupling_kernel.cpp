#include <gtest/gtest.h>

#include <cmath>

#include "lmc/coupling_kernel.hpp"
#include "lmc/errors.hpp"
#include "lmc/rng.hpp"

using namespace lmc;

namespace {

Vec v1(double a) {
    Vec z(1);
    z << a;
    return z;
}

struct Additive1d {
    LevyModel levy{1, 0.5, 1.0, 1.0, Support::Ball};
    CoefficientField cf = make_coefficients(1, {"linear", {}}, {"constant", {}});
};

struct Multiplicative1d {
    LevyModel levy{1, 0.5, 1.0, 1.0, Support::Ball};
    CoefficientField cf = make_coefficients(1, {"zero", {}}, {"diag_sin", {}});
};

CoefficientField fixed_sigma(double sx_at_one, double sy_at_zero) {
    // sigma(1) = sx_at_one, sigma(0.9) = sy_at_zero, linear in between.
    auto sig = [=](const Vec& x) {
        Mat m(1, 1);
        m << sy_at_zero + (sx_at_one - sy_at_zero) * (x(0) - 0.9) / 0.1;
        return m;
    };
    auto inv = [sig](const Vec& x) {
        Mat m = sig(x);
        m(0, 0) = 1.0 / m(0, 0);
        return m;
    };
    return CoefficientField(1, [](const Vec&) { return zeros(1); }, sig, inv, 1e3, 1e3, true, false);
}

}  // namespace

TEST(ClippedDifference, Cases) {
    EXPECT_EQ(clipped_difference(v1(1.0), v1(1.0), 0.5)(0), 0.0);
    EXPECT_EQ(clipped_difference(v1(3.0), v1(1.0), 5.0)(0), 2.0);
    EXPECT_EQ(clipped_difference(v1(3.0), v1(1.0), 0.5)(0), 0.5);
}

TEST(Psi, IdentityAndAdditive) {
    Additive1d s;
    CouplingKernel k(s.levy, s.cf, 1.0);
    EXPECT_EQ(k.psi(v1(0.4), v1(0.4), v1(0.2))(0), 0.2);
    EXPECT_NEAR(k.psi(v1(0.1), v1(0.0), v1(0.2))(0), 0.3, 1e-15);
}

TEST(Psi, MultiplicativeCoalescenceArithmetic) {
    LevyModel levy(1, 0.5, 1.0, 1.0, Support::Ball);
    auto cf = fixed_sigma(2.0, 4.0);
    CouplingKernel k(levy, cf, 1.0);
    const Vec x = v1(1.0), y = v1(0.9), z = v1(0.2);
    const double w = k.psi(x, y, z)(0);
    EXPECT_NEAR(w, 0.125, 1e-15);
    EXPECT_NEAR(x(0) + 2.0 * z(0) - (y(0) + 4.0 * w), 0.0, 1e-15);
}

TEST(Psi, InverseComposition) {
    LevyModel levy(2, 1.2, 1.0, 1.0, Support::Ball);
    auto cf = make_coefficients(2, {"zero", {}}, {"rotation", {{"eps", 0.7}}});
    CouplingKernel k(levy, cf, 0.5);
    Rng rng = make_stream(5, 0, kAuxStream);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 200; ++i) {
        Vec x(2), y(2), z(2);
        for (int j = 0; j < 2; ++j) {
            x(j) = 3 * n01(rng);
            y(j) = x(j) + 0.3 * n01(rng);
            z(j) = 0.5 * n01(rng);
        }
        const AffineMap a = k.affine(x, y);
        EXPECT_LE((a.psi_inverse(a.psi(z)) - z).norm(), 1e-12);
        if ((x - y).norm() <= 0.5) {
            const Vec gap = (x + cf.diffusion(x) * z) - (y + cf.diffusion(y) * a.psi(z));
            EXPECT_LE(gap.norm(), 1e-10 * (1 + x.norm() + z.norm()));
        }
    }
}

TEST(Rho, Values) {
    Additive1d s;
    CouplingKernel k(s.levy, s.cf, 1.0);
    auto [r, ri] = k.rho(v1(0.1), v1(0.0), v1(0.2));
    EXPECT_NEAR(r, std::pow(0.2 / 0.3, 1.5), 1e-14);
    EXPECT_GE(ri, 0.0);
    EXPECT_LE(ri, 1.0);
    EXPECT_EQ(k.rho(v1(0.1), v1(0.0), v1(0.95)).first, 0.0);
    auto same = k.rho(v1(0.3), v1(0.3), v1(0.5));
    EXPECT_EQ(same.first, 1.0);
    EXPECT_EQ(same.second, 1.0);
    EXPECT_THROW(k.rho(v1(0.1), v1(0.0), v1(1.5)), DomainError);
}

TEST(MuMass, AdditiveMatchesOracle) {
    Additive1d s;
    CouplingKernel k(s.levy, s.cf, 1.0);
    // mpmath oracle; equals 4 sqrt(2) a^{-1/2} - 4.
    const double oracle = 13.888543819998317078;
    EXPECT_NEAR(k.mu_mass(v1(0.1), v1(0.0)).value / oracle, 1.0, 1e-4);
    EXPECT_NEAR(k.mu_mass(v1(0.0), v1(0.1)).value, k.mu_mass(v1(0.1), v1(0.0)).value, 1e-9);
    EXPECT_NEAR(k.mu_inverse_mass(v1(0.1), v1(0.0)).value / oracle, 1.0, 1e-9);
}

TEST(MuMass, ScalingLaw) {
    Additive1d s;
    CouplingKernel k(s.levy, s.cf, 1.0);
    for (double a : {0.1, 0.05, 0.025}) {
        const double scaled = k.mu_mass(v1(a), v1(0.0)).value * std::pow(a, 0.5);
        EXPECT_GT(scaled, 4.0);
        EXPECT_LT(scaled, 4.0 * std::sqrt(2.0));
    }
}

TEST(MuMass, SymmetricMultiplicative) {
    Multiplicative1d s;
    CouplingKernel k(s.levy, s.cf, 1.0);
    const double a = k.mu_mass(v1(0.3), v1(-0.4)).value;
    const double b = k.mu_inverse_mass(v1(0.3), v1(-0.4)).value;
    EXPECT_NEAR(a / b, 1.0, 1e-8);
    EXPECT_NEAR(k.mu_mass(v1(-0.4), v1(0.3)).value / a, 1.0, 1e-8);
}

TEST(MuMass, TwoDimensionalPushforwardMass) {
    LevyModel levy(2, 0.7, 1.0, 1.0, Support::HalfSlab);
    auto cf = make_coefficients(2, {"zero", {}}, {"diag_sin", {}});
    CouplingKernel k(levy, cf, 1.0);
    Vec x(2), y(2);
    x << 0.4, -0.2;
    y << 0.1, 0.05;
    const double a = k.mu_mass(x, y).value;
    const double b = k.mu_inverse_mass(x, y).value;
    EXPECT_NEAR(a / b, 1.0, 1e-6);
}

TEST(Pushforward, AdditiveAndMultiplicative) {
    Additive1d s;
    CouplingKernel k(s.levy, s.cf, 1.0);
    std::vector<std::function<double(const Vec&)>> hs{[](const Vec&) { return 1.0; }};
    EXPECT_LE(k.pushforward_identity_check(v1(0.1), v1(0.0), hs), 1e-6);
    hs = {[](const Vec& z) { return z(0); }};
    EXPECT_LE(k.pushforward_identity_check(v1(0.1), v1(0.0), hs), 1e-4);

    Multiplicative1d m;
    CouplingKernel km(m.levy, m.cf, 1.0);
    hs = {[](const Vec& z) { return std::cos(z(0)); }};
    EXPECT_LE(km.pushforward_identity_check(v1(0.3), v1(-0.4), hs), 1e-3);
}

TEST(Pushforward, OracleSides) {
    // mpmath oracle values for int h(Psi z) mu_Psi and int h mu_{Psi^{-1}}.
    Multiplicative1d m;
    CouplingKernel k(m.levy, m.cf, 1.0);
    const AffineMap a = k.affine(v1(0.3), v1(-0.4));
    quad::Options o;
    auto lhs = quad::integrate(
        k.mu_domain(),
        [&](const Vec& z, double) { return std::cos(a.psi(z)(0)) * k.mu_density(a, z, false); },
        [&](const Vec& e, std::vector<double>& out) { k.append_mu_breaks(a, false, e, 0.0, out); },
        o);
    EXPECT_NEAR(lhs.value, 4.942558117218850946, 1e-8);
}

TEST(Thinning, BranchesAndMechanics) {
    Additive1d s;
    CouplingKernel k(s.levy, s.cf, 0.25);
    const Mat id = Mat::Identity(1, 1);
    // Far pair: distance 1 > kappa.
    const AffineMap far = k.affine(v1(1.0), v1(0.0));
    auto c = k.thin(far, id, v1(0.3), 1e-9, 0.0);
    ASSERT_EQ(c.branch, Branch::Coalesce);
    EXPECT_NEAR(std::abs(1.0 + 0.3 - (0.0 + c.y_jump(0))), 0.75, 1e-15);
    const auto [r1, r2] = k.rho(far, v1(0.3), 0.0);
    auto rf = k.thin(far, id, v1(0.3), 0.5 * r1 + 0.5 * r2 - 1e-9, 0.0);
    if (r2 > 0.0) {
        ASSERT_EQ(rf.branch, Branch::Reflect);
        EXPECT_NEAR(std::abs(1.0 + 0.3 - rf.y_jump(0)), 1.25, 1e-15);
    }
    auto sy = k.thin(far, id, v1(0.3), 0.999999, 0.0);
    EXPECT_EQ(sy.branch, Branch::Synchronize);
    EXPECT_EQ(sy.y_jump(0), 0.3);
}
