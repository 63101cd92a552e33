#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lmc/errors.hpp"
#include "lmc/rate_analysis.hpp"
#include "lmc/rng.hpp"

using namespace lmc;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

struct Bench {
    LevyModel levy;
    CoefficientField cf;
    CouplingKernel k;
    Bench(int dim, double alpha, Support s, PresetSpec drift, PresetSpec diff, double kappa)
        : levy(dim, alpha, 1.0, 1.0, s), cf(make_coefficients(dim, drift, diff)), k(levy, cf, kappa) {}
};

// Closed forms for a power comparison c r^e and phi(r) = k1 r^beta + k2 r / 2.
double g1_exact(double r, double c, double e) { return std::pow(r, 1 - e) / (c * (1 - e)); }
double g2_exact(double r, double c, double e, double k1, double k2, double beta) {
    return (k1 * std::pow(r, beta - e) / (beta - e) + 0.5 * k2 * std::pow(r, 1 - e) / (1 - e)) / c;
}

}  // namespace

TEST(Certificate, IntegralsMatchClosedForm) {
    const PowerComparison comp{0.7, 0.5};
    const auto c = assemble_certificate(2.0, 0.5, 4.0, 1.0, comp);
    EXPECT_NEAR(c.g1_end, g1_exact(8.0, 0.7, 0.5), 1e-6 * c.g1_end);
    EXPECT_NEAR(c.g2_end, g2_exact(8.0, 0.7, 0.5, 2.0, 0.5, 1.0), 1e-6 * c.g2_end);
    const auto h = assemble_certificate(1.0, 1.0, 1.0, 0.5, {1.3, 0.25});
    EXPECT_NEAR(h.g2_end, g2_exact(2.0, 1.3, 0.25, 1.0, 1.0, 0.5), 1e-6 * h.g2_end);
    EXPECT_NEAR(h.g1(0.5), g1_exact(0.5, 1.3, 0.25), 1e-9);
}

TEST(Certificate, FormulasAreExact) {
    const auto c = assemble_certificate(0.5, 1.0, 0.5, 1.0, {1.0, 0.5});
    EXPECT_DOUBLE_EQ(c.c2, std::min(2.0, 1.0 / c.g1_end));
    EXPECT_DOUBLE_EQ(c.g_end, c.g1_end + 2.0 / c.c2 * c.g2_end);
    EXPECT_NEAR(c.lambda, c.c2 / (1.0 + std::exp(c.c2 * c.g_end)), 1e-15);
    EXPECT_NEAR(std::exp(c.log_lambda), c.lambda, 1e-14 * c.lambda);
    EXPECT_NEAR(std::exp(c.log_C), c.C, 1e-12 * c.C);
    EXPECT_NEAR(c.c1, std::exp(-c.c2 * c.g_end), 1e-15);
    EXPECT_NEAR(c.C, (1.0 + c.c1) / (2.0 * c.c1), 1e-12 * c.C);
    EXPECT_GT(c.lambda, 0.0);
}

TEST(Certificate, PsiShape) {
    const auto c = assemble_certificate(0.5, 1.0, 0.5, 1.0, {1.0, 0.5});
    // g grows like sqrt(r) here, so the slope at the origin needs a tiny step.
    EXPECT_NEAR((c.psi(1e-12) - c.psi(0.0)) / 1e-12, 1.0 + c.c1, 1e-4);
    const double h = 1e-6;
    EXPECT_NEAR(c.psi_d1(1.0), c.c1 + std::exp(-c.c2 * c.g_end), 1e-12);
    const double edge = 1.0;
    EXPECT_NEAR((c.psi(edge) - c.psi(edge - h)) / h, c.c1 + std::exp(-c.c2 * c.g_end), 1e-5);
    double prev_slope = 1e300;
    for (double r = 0.05; r < 3.0; r += 0.05) {
        const double s = (c.psi(r + 0.01) - c.psi(r)) / 0.01;
        EXPECT_GT(s, 0.0);
        EXPECT_LE(s, prev_slope + 1e-9);
        prev_slope = s;
        // psi / r stays between c1 and 1 + c1.
        EXPECT_GE(c.psi(r) / r, c.c1 - 1e-12);
        EXPECT_LE(c.psi(r) / r, 1.0 + c.c1 + 1e-12);
    }
}

TEST(Certificate, DegenerateRange) {
    const auto c = assemble_certificate(0.0, 0.75, 0.0, 1.0, {});
    EXPECT_TRUE(c.degenerate);
    EXPECT_EQ(c.c1, 1.0);
    EXPECT_EQ(c.C, 1.0);
    EXPECT_DOUBLE_EQ(c.lambda, 0.75);
    EXPECT_DOUBLE_EQ(c.psi(1.5), 3.0);
}

TEST(Certificate, MonotoneInFarRate) {
    // The near-range bound is held fixed; only the far-range rate moves.
    double prev = 0.0;
    for (double k2 : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
        const auto c = assemble_certificate(1.0, k2, 1.0, 1.0, {1.0, 0.5}, 0.25);
        EXPECT_GE(c.lambda, prev);
        prev = c.lambda;
    }
}

TEST(Certificate, Unavailable) {
    EXPECT_THROW(assemble_certificate(1.0, 0.0, 1.0, 1.0, {1.0, 0.5}), CertificateError);
    EXPECT_THROW(assemble_certificate(1.0, 1.0, 1.0, 1.0, {1.0, 1.0}), CertificateError);
    // beta = 0 makes the near-range integrand blow up at the origin.
    try {
        assemble_certificate(1.0, 1.0, 1.0, 0.0, {1.0, 0.5});
        FAIL();
    } catch (const CertificateError& e) {
        EXPECT_NE(std::string(e.what()).find("g2"), std::string::npos);
    }
}

TEST(GradientRate, PowerLambdaClosedForm) {
    LevyModel levy(1, 0.5, 1.0, 1.0, Support::Ball);
    const double a = 3.0, theta = 0.25;
    const auto g = gradient_rate_certificate(levy, theta, [&](double r) { return a * std::pow(r, -0.5); });
    for (double eps : {1e-4, 1e-2, 0.5}) {
        const double exact = a * theta * (1 - theta) * std::pow(2.0, theta - 2) * std::pow(eps, theta - 0.5);
        EXPECT_NEAR(g.lambda_psi(eps), exact, 1e-12 * exact);
    }
}

TEST(GradientRate, PowerEnvelopeSlope) {
    LevyModel levy(1, 0.5, 1.0, 1.0, Support::Ball);
    const auto g = gradient_rate_certificate(levy, 0.25, [](double r) { return std::pow(r, -0.5); });
    std::vector<double> lt, le;
    for (double t = 1e-6; t <= 1e-2; t *= 3) {
        lt.push_back(std::log(t));
        le.push_back(std::log(g.envelope(t)));
    }
    EXPECT_NEAR(stats::fit_line(lt, le).slope, -0.5, 0.01);
}

TEST(GradientRate, LogEnvelopeShape) {
    LevyModel levy(1, 1.5, 1.0, 1.0, Support::Ball);
    const double theta = 1.0;
    const auto g = gradient_rate_certificate(levy, theta, [](double r) { return std::pow(r, -1.5); });
    auto shape = [&](double t) { return std::pow(std::pow(std::log(1 / t), 1 + theta) / t, 1 / 1.5); };
    const double r1 = g.envelope(1e-8) / shape(1e-8);
    const double r2 = g.envelope(1e-12) / shape(1e-12);
    EXPECT_NEAR(r2 / r1, 1.0, 0.2);
}

TEST(GradientRate, ThetaRange) {
    LevyModel a(1, 0.5, 1.0, 1.0, Support::Ball);
    LevyModel b(1, 1.5, 1.0, 1.0, Support::Ball);
    auto J = [](double r) { return 1.0 / r; };
    EXPECT_THROW(gradient_rate_certificate(a, 0.6, J), ParameterError);
    EXPECT_THROW(gradient_rate_certificate(a, 0.0, J), ParameterError);
    EXPECT_THROW(gradient_rate_certificate(b, -1.0, J), ParameterError);
    EXPECT_NO_THROW(gradient_rate_certificate(b, 3.0, J));
}

TEST(FitDecay, Synthetic) {
    std::vector<double> t, v, c, n;
    Rng rng = make_stream(1, 0, kAuxStream);
    std::normal_distribution<double> n01;
    for (int i = 0; i <= 40; ++i) {
        const double s = 0.25 * i;
        t.push_back(s);
        v.push_back(std::exp(-2.0 * s));
        c.push_back(3.0);
        n.push_back(5.0 * std::exp(-0.3 * s) * (1.0 + 0.01 * n01(rng)));
    }
    const auto f = fit_decay(t, v, 0.0, 10.0);
    EXPECT_NEAR(f.rate, 2.0, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_NEAR(fit_decay(t, c, 0.0, 10.0).rate, 0.0, 1e-14);
    const auto g = fit_decay(t, n, 1.0, 10.0);
    EXPECT_GE(g.rate, 0.25);
    EXPECT_LE(g.rate, 0.35);
    EXPECT_THROW(fit_decay(t, v, 0.1, 0.4), ParameterError);
}

TEST(JK, AdditiveBallExponent) {
    Bench b(1, 0.5, Support::Ball, {"linear", {}}, {"constant", {}}, 0.5);
    const auto jk = estimate_J_K(b.k, {0.1, 0.05, 0.025, 0.0125});
    for (std::size_t i = 0; i < jk.radii.size(); ++i) {
        EXPECT_NEAR(jk.mass_min[i], jk.mass_max[i], 1e-7 * jk.mass_max[i]);
        EXPECT_LE(jk.J[i], jk.mass_min[i]);
        EXPECT_GT(jk.K[i], 0.0);
    }
    EXPECT_NEAR(jk.exponent, -0.5, 0.15);
    EXPECT_NEAR(jk.J_at(0.05), jk.J[1], 1e-12 * jk.J[1]);
    EXPECT_THROW(estimate_J_K(b.k, {0.6}), ParameterError);
}

TEST(JK, MultiplicativeBallExponent) {
    Bench b(1, 1.5, Support::Ball, {"linear", {}}, {"diag_sin", {}}, 0.5);
    JKOptions o;
    o.pair_samples = 6;
    const auto jk = estimate_J_K(b.k, {0.1, 0.05, 0.025, 0.0125}, o);
    EXPECT_NEAR(jk.exponent, -1.5, 0.15);
}

TEST(ContractionCertificate, AdditiveSinPerturbed) {
    Bench b(1, 0.5, Support::Ball, {"sin_perturbed", {}}, {"constant", {}}, 0.5);
    const auto prof = *b.cf.profile();
    EXPECT_DOUBLE_EQ(prof.k1, 2.0);
    EXPECT_DOUBLE_EQ(prof.k2, 0.5);
    EXPECT_DOUBLE_EQ(prof.l0, 4.0);
    const auto c = contraction_certificate(b.k, prof);
    EXPECT_EQ(c.A2, 0.0);
    EXPECT_DOUBLE_EQ(c.k1_star, 2.0);
    EXPECT_DOUBLE_EQ(c.k2_eff, 0.5);
    EXPECT_DOUBLE_EQ(c.comparison.exponent, 0.5);
    EXPECT_GE(c.comparison_margin, 1.0 - 1e-12);
    // lambda itself underflows for this profile; its log does not.
    EXPECT_TRUE(std::isfinite(c.log_lambda));
    EXPECT_NEAR(c.log_lambda, std::log(c.c2) - c.c2 * c.g_end, 1e-9 * std::abs(c.log_lambda));
    EXPECT_NEAR(c.g1_end, g1_exact(8.0, c.comparison.coeff, 0.5), 1e-6 * c.g1_end);
    std::printf("coeff=%.6g g1=%.6g g2=%.6g c2=%.6g log_lambda=%.6g\n", c.comparison.coeff,
                c.g1_end, c.g2_end, c.c2, c.log_lambda);
}

TEST(DecayReport, EqualStartsAreZero) {
    Bench b(1, 0.5, Support::Ball, {"linear", {}}, {"constant", {}}, 1.0);
    SimConfig sim;
    sim.n_paths = 100;
    sim.horizon = 2.0;
    const auto rep = tv_and_w1_report(b.k, v1(0.2), v1(0.2), sim, {0.5, 1.0, 1.5}, 0.5, 2.0);
    for (std::size_t i = 0; i < rep.curve.size(); ++i) {
        EXPECT_EQ(rep.w1_upper[i], 0.0);
        EXPECT_EQ(rep.tv_upper[i], 0.0);
    }
    EXPECT_FALSE(rep.w1_fit.has_value());
}

TEST(DecayReport, LinearDriftDecays) {
    Bench b(1, 0.5, Support::Ball, {"linear", {}}, {"constant", {}}, 1.0);
    SimConfig sim;
    sim.n_paths = 4000;
    sim.horizon = 2.0;
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(0.1 * i);
    const auto rep = tv_and_w1_report(b.k, v1(0.5), v1(-0.5), sim, grid, 0.2, 2.0);
    ASSERT_TRUE(rep.w1_fit && rep.tv_fit);
    EXPECT_GT(rep.w1_fit->rate, 0.0);
    EXPECT_GT(rep.tv_fit->rate, 0.0);
    EXPECT_LE(rep.w1_exact_horizon, rep.w1_upper.back() + 1e-12);
}

TEST(Lyapunov, LinearDriftDominates) {
    const LevyModel levy(1, 0.5, 1.0, 1.0, Support::Ball);
    const auto cf = make_coefficients(1, {"linear", {}}, {"constant", {}});
    const std::vector<double> radii{0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0};
    const auto rep = lyapunov_check(cf, levy, radii);
    EXPECT_TRUE(rep.ok);
    EXPECT_GE(rep.c4, 0.5);
    const auto twice = lyapunov_check(cf, levy, radii, 2.0, 2.0);
    EXPECT_NEAR(twice.c4, rep.c4, 1e-9);
    EXPECT_NEAR(twice.c5, 2.0 * rep.c5, 1e-8);
    const auto zero = make_coefficients(1, {"zero", {}}, {"constant", {}});
    EXPECT_FALSE(lyapunov_check(zero, levy, radii).ok);
}

TEST(InvariantProbe, HorizonZeroIsDelta) {
    Bench b(1, 0.5, Support::Ball, {"linear", {}}, {"constant", {}}, 1.0);
    SimConfig sim;
    sim.n_paths = 50;
    sim.horizon = 0.0;
    const auto p = invariant_measure_probe(b.k, {v1(3.0)}, sim, 10, 2000, 0);
    for (const auto& x : p.samples[0]) EXPECT_EQ(x(0), 3.0);
}

TEST(InvariantProbe, StartsForget) {
    Bench b(1, 0.5, Support::Ball, {"linear", {}}, {"constant", {}}, 1.0);
    SimConfig sim;
    sim.n_paths = 2000;
    sim.horizon = 12.0;
    sim.trunc = 1e-2;
    sim.seed = 3;
    const auto p = invariant_measure_probe(b.k, {v1(5.0), v1(-5.0)}, sim, 200, 2000, 300);
    EXPECT_TRUE(p.ok()) << p.pairs[0].test.observed << " " << p.pairs[0].test.quantile95;
    ASSERT_EQ(p.cauchy_w1.size(), 4u);
    EXPECT_GT(p.cauchy_w1.front(), p.cauchy_w1.back());
}
