#include <gtest/gtest.h>

#include <cmath>

#include "lmc/errors.hpp"
#include "lmc/simulator.hpp"

using namespace lmc;

namespace {

Vec v1(double a) {
    Vec z(1);
    z << a;
    return z;
}

struct Bench {
    LevyModel levy;
    CoefficientField cf;
    CouplingKernel k;
    Bench(int dim, double alpha, Support s, PresetSpec drift, PresetSpec diff, double kappa,
          double c0 = 1.0)
        : levy(dim, alpha, c0, 1.0, s), cf(make_coefficients(dim, drift, diff)), k(levy, cf, kappa) {}
};

}  // namespace

TEST(Simulator, ConstantPathWithoutJumps) {
    Bench s(1, 0.5, Support::Ball, {"zero", {}}, {"constant", {}}, 1.0);
    SimConfig sim;
    sim.horizon = 1e-9;
    const auto p = simulate_marginal(s.cf, s.levy, v1(0.7), sim);
    for (const auto& x : p.states) EXPECT_EQ(x(0), 0.7);
}

TEST(Simulator, HorizonZeroIsStart) {
    Bench s(1, 0.5, Support::Ball, {"linear", {}}, {"constant", {}}, 1.0);
    SimConfig sim;
    sim.horizon = 0.0;
    const auto p = simulate_marginal(s.cf, s.levy, v1(0.7), sim);
    EXPECT_EQ(p.states.back()(0), 0.7);
}

TEST(Simulator, DriftOnlyFollowsExponential) {
    Bench s(1, 0.5, Support::Ball, {"linear", {}}, {"constant", {}}, 1.0, 1e-14);
    SimConfig sim;
    sim.dt_max = 1e-3;
    const auto p = simulate_marginal(s.cf, s.levy, v1(2.0), sim);
    EXPECT_NEAR(p.states.back()(0), 2.0 * std::exp(-1.0), 2.0 * sim.dt_max);
}

TEST(Simulator, VarianceMatchesSecondMoment) {
    Bench s(1, 0.5, Support::Ball, {"zero", {}}, {"constant", {}}, 1.0);
    SimConfig sim;
    sim.n_paths = 100000;
    sim.seed = 17;
    const auto ends = marginal_endpoints(s.cf, s.levy, v1(0.0), sim);
    std::vector<double> xs;
    for (const auto& e : ends) xs.push_back(e(0));
    const auto m = stats::moments(xs);
    const double target = 4.0 / 3.0;
    // Standard error of the sample variance.
    const double se = std::sqrt((m.fourth - m.variance * m.variance) / xs.size());
    EXPECT_NEAR(m.variance, target, 4.0 * se);
    EXPECT_NEAR(m.mean, 0.0, 4.0 * std::sqrt(m.variance / xs.size()));
}

TEST(Simulator, ValidationErrors) {
    Bench s(1, 0.5, Support::Ball, {"zero", {}}, {"constant", {}}, 1.0);
    SimConfig sim;
    sim.trunc = 1.0;
    EXPECT_THROW(simulate_marginal(s.cf, s.levy, v1(0.0), sim), ParameterError);
    sim.trunc = 1e-3;
    sim.dt_max = 0.0;
    EXPECT_THROW(simulate_marginal(s.cf, s.levy, v1(0.0), sim), ParameterError);
}

TEST(Coupled, EqualStartsStayTogether) {
    Bench s(1, 0.5, Support::Ball, {"sin_perturbed", {}}, {"diag_sin", {}}, 1.0);
    SimConfig sim;
    const auto p = simulate_coupled(s.k, v1(0.4), v1(0.4), sim, 0, {{}, true});
    EXPECT_EQ(p.coupling_time, 0.0);
    for (std::size_t i = 0; i < p.times.size(); ++i) EXPECT_EQ(p.x_states[i], p.y_states[i]);
}

TEST(Coupled, MarginalIsBitIdentical) {
    Bench s(2, 0.5, Support::HalfSlab, {"linear", {}}, {"diag_sin", {}}, 1.0);
    SimConfig sim;
    sim.seed = 99;
    Vec x0(2), y0(2);
    x0 << 0.3, -0.2;
    y0 << -0.5, 0.4;
    Recording rec{{0.25, 0.5, 0.75}, true};
    const auto m = simulate_marginal(s.cf, s.levy, x0, sim, 3, rec);
    const auto c = simulate_coupled(s.k, x0, y0, sim, 3, rec);
    ASSERT_EQ(m.states.size(), c.x_states.size());
    for (std::size_t i = 0; i < m.states.size(); ++i) {
        EXPECT_EQ(m.times[i], c.times[i]);
        EXPECT_EQ(m.states[i], c.x_states[i]);
    }
}

TEST(Coupled, DeterministicAndSticky) {
    Bench s(1, 0.5, Support::Ball, {"sin_perturbed", {}}, {"diag_sin", {}}, 1.0);
    SimConfig sim;
    sim.horizon = 5.0;
    sim.seed = 4;
    Recording rec{{}, true};
    std::size_t coupled = 0;
    for (std::size_t path = 0; path < 20; ++path) {
        const auto a = simulate_coupled(s.k, v1(0.5), v1(-0.3), sim, path, rec);
        const auto b = simulate_coupled(s.k, v1(0.5), v1(-0.3), sim, path, rec);
        ASSERT_EQ(a.times, b.times);
        for (std::size_t i = 0; i < a.times.size(); ++i) {
            EXPECT_EQ(a.x_states[i], b.x_states[i]);
            EXPECT_EQ(a.y_states[i], b.y_states[i]);
            if (a.times[i] > a.coupling_time) EXPECT_EQ(a.x_states[i], a.y_states[i]);
        }
        if (a.coupled()) ++coupled;
    }
    EXPECT_GT(coupled, 10u);
}

TEST(Coupled, CoalesceIsExactWithinKappa) {
    for (const char* diff : {"constant", "diag_sin"}) {
        Bench s(1, 0.5, Support::Ball, {"zero", {}}, {diff, {}}, 1.0);
        Rng rng = make_stream(7, 0, kJumpStream);
        std::size_t hits = 0;
        for (int i = 0; i < 20000; ++i) {
            const Vec x = v1(0.37), y = v1(0.37 - 0.05 * (1 + i % 7));
            const Vec z = s.levy.sample_size(1e-3, rng);
            const auto ev = coupled_jump(s.k, x, y, z, uniform01(rng), 1e-3);
            if (ev.branch == Branch::Coalesce) {
                ++hits;
                EXPECT_EQ(ev.x_after, ev.y_after);
            }
        }
        EXPECT_GT(hits, 100u) << diff;
    }
}

TEST(Coupled, KappaStepsBeyondThreshold) {
    Bench s(1, 0.5, Support::Ball, {"zero", {}}, {"constant", {}}, 0.2);
    Rng rng = make_stream(8, 0, kJumpStream);
    std::size_t moves = 0;
    for (int i = 0; i < 20000; ++i) {
        const Vec x = v1(0.9), y = v1(0.1);
        const Vec z = s.levy.sample_size(1e-3, rng);
        const auto ev = coupled_jump(s.k, x, y, z, uniform01(rng), 1e-3);
        const double d = std::abs(ev.x_after(0) - ev.y_after(0));
        if (ev.branch == Branch::Coalesce) EXPECT_NEAR(d, 0.6, 4e-16);
        if (ev.branch == Branch::Reflect) EXPECT_NEAR(d, 1.0, 4e-16);
        if (ev.branch == Branch::Synchronize) EXPECT_NEAR(d, 0.8, 4e-16);
        if (ev.branch != Branch::Synchronize) ++moves;
    }
    EXPECT_GT(moves, 100u);
}

TEST(Coupled, BranchFrequenciesMatchMasses) {
    Bench s(1, 0.5, Support::Ball, {"zero", {}}, {"diag_sin", {}}, 1.0);
    const double trunc = 1e-2;
    const Vec x = v1(0.3), y = v1(-0.1);
    const double total = s.levy.tail_mass(trunc);
    const double p_co = 0.5 * s.k.mu_mass(x, y, trunc).value / total;
    const double p_re = 0.5 * s.k.mu_inverse_mass(x, y, trunc).value / total;
    Rng rng = make_stream(12, 0, kJumpStream);
    const int n = 100000;
    int co = 0, re = 0;
    for (int i = 0; i < n; ++i) {
        const auto ev = coupled_jump(s.k, x, y, s.levy.sample_size(trunc, rng), uniform01(rng), trunc);
        co += ev.branch == Branch::Coalesce;
        re += ev.branch == Branch::Reflect;
    }
    EXPECT_NEAR(co / double(n), p_co, 4 * std::sqrt(p_co * (1 - p_co) / n));
    EXPECT_NEAR(re / double(n), p_re, 4 * std::sqrt(p_re * (1 - p_re) / n));
}

TEST(Ensemble, EqualStartsNeverSurvive) {
    Bench s(1, 0.5, Support::Ball, {"linear", {}}, {"constant", {}}, 1.0);
    SimConfig sim;
    sim.n_paths = 200;
    const auto ens = coupling_time_ensemble(s.k, v1(0.1), v1(0.1), sim, {0.5});
    for (const auto& p : ens.curve) {
        EXPECT_EQ(p.survival, 0.0);
        EXPECT_EQ(p.mean_dist, 0.0);
    }
}

TEST(Ensemble, StartDistanceAndDecay) {
    Bench s(1, 0.5, Support::Ball, {"linear", {}}, {"constant", {}}, 1.0);
    SimConfig sim;
    sim.n_paths = 2000;
    sim.horizon = 3.0;
    const auto ens = coupling_time_ensemble(s.k, v1(0.5), v1(-0.5), sim, {1.0, 2.0});
    EXPECT_DOUBLE_EQ(ens.curve.front().mean_dist, 1.0);
    EXPECT_EQ(ens.curve.front().survival, 1.0);
    EXPECT_LT(ens.curve.back().survival, ens.curve[1].survival);
    EXPECT_LE(ens.curve.back().ci_lo, ens.curve.back().survival);
}

TEST(LawConsistency, AdditiveSmall) {
    Bench s(1, 0.5, Support::Ball, {"sin_perturbed", {}}, {"constant", {}}, 1.0);
    SimConfig sim;
    sim.n_paths = 10000;
    sim.seed = 21;
    const auto rep = marginal_law_consistency(s.k, v1(0.0), v1(1.0), sim);
    EXPECT_TRUE(rep.ok()) << rep.mean_z[0] << " " << rep.var_z[0] << " " << rep.energy.observed;
}
