#include <gtest/gtest.h>

#include <cmath>

#include "lmc/coefficient_field.hpp"
#include "lmc/errors.hpp"

using namespace lmc;

namespace {

std::vector<Vec> line_grid(double lo, double hi, int n) {
    std::vector<Vec> out;
    for (int i = 0; i < n; ++i) {
        Vec x(1);
        x << lo + (hi - lo) * (i + 0.5) / n;
        out.push_back(x);
    }
    return out;
}

std::vector<PointPair> line_pairs(int n) {
    std::vector<PointPair> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Vec x(1), y(1);
            x << -10.0 + 20.0 * i / (n - 1);
            y << -10.0 + 20.0 * j / (n - 1) + 1e-3;
            out.emplace_back(x, y);
        }
    return out;
}

CoefficientField custom_1d(std::function<double(double)> b, std::function<double(double)> s,
                           double lam, double lip) {
    auto drift = [b](const Vec& x) {
        Vec o(1);
        o << b(x(0));
        return o;
    };
    auto sig = [s](const Vec& x) {
        Mat m(1, 1);
        m << s(x(0));
        return m;
    };
    auto inv = [s](const Vec& x) {
        Mat m(1, 1);
        m << 1.0 / s(x(0));
        return m;
    };
    return CoefficientField(1, drift, sig, inv, lam, lip, true, false);
}

}  // namespace

TEST(Structure, IdentityDiffusion) {
    auto cf = make_coefficients(2, {"linear", {}}, {"constant", {}});
    auto rep = verify_structure(cf, sobol_grid(2, 1000, 10.0),
                                distance_pairs(2, 1000, 10.0, 1e-4, 20.0, 1));
    EXPECT_TRUE(rep.ok());
    EXPECT_DOUBLE_EQ(rep.max_upper, 1.0);
    EXPECT_EQ(rep.max_lipschitz, 0.0);
}

TEST(Structure, DiagSinPreset) {
    auto cf = make_coefficients(1, {"zero", {}}, {"diag_sin", {}});
    EXPECT_DOUBLE_EQ(cf.lambda_nd(), 3.0);
    EXPECT_DOUBLE_EQ(cf.lip_sigma(), 1.0);
    auto rep = verify_structure(cf, line_grid(-10, 10, 20000), line_pairs(200));
    EXPECT_TRUE(rep.ok());
    // Dense-grid oracle: |sigma| spans [1,3] and the slope reaches 1.
    EXPECT_NEAR(rep.max_upper, 3.0, 1e-6);
    EXPECT_NEAR(rep.max_inverse, 1.0, 1e-6);
    EXPECT_NEAR(rep.max_lipschitz, 1.0, 1e-3);
}

TEST(Structure, DegenerateDiffusionFlagged) {
    auto cf = custom_1d([](double) { return 0.0; }, [](double x) { return x; }, 2.0, 1.0);
    auto rep = verify_structure(cf, line_grid(-1, 1, 100), {});
    EXPECT_FALSE(rep.nondegenerate_ok);
    ASSERT_FALSE(rep.violations.empty());
    Vec zero(1);
    zero << 0.0;
    EXPECT_THROW(verify_structure(cf, {zero}, {}), StructuralError);
}

TEST(Structure, RotationPresetLipschitz) {
    auto cf = make_coefficients(2, {"zero", {}}, {"rotation", {{"scale", 1.5}, {"eps", 0.4}}});
    auto rep = verify_structure(cf, sobol_grid(2, 1000, 10.0),
                                distance_pairs(2, 1000, 10.0, 1e-4, 20.0, 2));
    EXPECT_TRUE(rep.ok());
    EXPECT_FALSE(cf.diagonal());
}

TEST(Dissipativity, LinearExact) {
    auto cf = make_coefficients(1, {"linear", {}}, {"constant", {}});
    auto rep = dissipativity_check(cf, *cf.profile(), distance_pairs(1, 1000, 10, 1e-4, 20, 3));
    EXPECT_TRUE(rep.ok());
    EXPECT_NEAR(rep.far_violation, 0.0, 1e-9);
}

TEST(Dissipativity, SinPerturbedProfile) {
    auto cf = make_coefficients(1, {"sin_perturbed", {}}, {"constant", {}});
    const auto& p = *cf.profile();
    EXPECT_DOUBLE_EQ(p.k1, 2.0);
    EXPECT_DOUBLE_EQ(p.k2, 0.5);
    EXPECT_DOUBLE_EQ(p.l0, 4.0);
    auto rep = dissipativity_check(cf, p, line_pairs(400));
    EXPECT_TRUE(rep.ok());
    EXPECT_GT(rep.near_pairs, 0u);
    EXPECT_GT(rep.far_pairs, 0u);
}

TEST(Dissipativity, OtherPresetsHoldOnGrid) {
    for (const char* name : {"sign_perturbed", "holder"}) {
        for (int d : {1, 2}) {
            auto cf = make_coefficients(d, {name, {}}, {"constant", {}});
            auto rep = dissipativity_check(cf, *cf.profile(),
                                           distance_pairs(d, 4000, 10, 1e-4, 20, 5));
            EXPECT_TRUE(rep.ok()) << name << " d=" << d;
        }
    }
}

TEST(Dissipativity, AntiDissipativeFails) {
    auto cf = custom_1d([](double x) { return x; }, [](double) { return 1.0; }, 1.0, 0.0);
    auto rep = dissipativity_check(cf, {0.0, 1.0, 1.0, 1.0}, line_pairs(50));
    EXPECT_FALSE(rep.ok());
    EXPECT_GT(rep.far_violation, 0.0);
}

TEST(Dissipativity, MonotoneUnderRefinement) {
    auto cf = make_coefficients(1, {"sin_perturbed", {}}, {"constant", {}});
    DissipativityProfile tight{0.5, 0.9, 1.0, 1.0};
    auto coarse = dissipativity_check(cf, tight, distance_pairs(1, 100, 10, 1e-4, 20, 9));
    auto pairs = distance_pairs(1, 100, 10, 1e-4, 20, 9);
    auto more = distance_pairs(1, 1000, 10, 1e-4, 20, 10);
    pairs.insert(pairs.end(), more.begin(), more.end());
    auto fine = dissipativity_check(cf, tight, pairs);
    EXPECT_GE(fine.far_violation, coarse.far_violation);
    EXPECT_GE(fine.near_violation, coarse.near_violation);
}

TEST(Presets, UnknownNamesAndKeys) {
    EXPECT_THROW(make_coefficients(1, {"bogus", {}}, {"constant", {}}), ConfigError);
    EXPECT_THROW(make_coefficients(1, {"linear", {{"q", 1.0}}}, {"constant", {}}), ConfigError);
    EXPECT_THROW(make_coefficients(1, {"linear", {}}, {"rotation", {}}), ParameterError);
}
