#include "lmc/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "lmc/errors.hpp"

namespace lmc {

void SimConfig::validate(const LevyModel& levy) const {
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ParameterError("horizon must be finite and >= 0");
    if (!(dt_max > 0.0)) throw ParameterError("dt_max must be positive");
    if (!(trunc > 0.0)) throw ParameterError("trunc must be positive");
    if (levy.support() != Support::FullSpace && !(trunc < levy.eta()))
        throw ParameterError("trunc must lie below eta");
    if (n_paths == 0) throw ParameterError("n_paths must be positive");
    if (!(exit_radius > 0.0)) throw ParameterError("exit_radius must be positive");
}

double SimConfig::resolved_tol(const Vec& x0, const Vec& y0) const {
    return coalesce_tol >= 0.0 ? coalesce_tol : 1e-9 * (1.0 + (x0 - y0).norm());
}

namespace {

constexpr double kDivergence = 1e15;

// Shared per-run state: the compensator is computed once, not per path.
struct Engine {
    const CoefficientField& cf;
    const LevyModel& levy;
    const SimConfig& sim;
    Vec comp;
    bool has_comp;

    Engine(const CoefficientField& c, const LevyModel& l, const SimConfig& s)
        : cf(c), levy(l), sim(s), comp(l.compensator_drift(s.trunc)) {
        has_comp = comp.squaredNorm() > 0.0;
    }

    void drift(Vec& x, double t0, double t1) const {
        const double span = t1 - t0;
        if (!(span > 0.0)) return;
        const auto n = static_cast<long>(std::ceil(span / sim.dt_max));
        const double h = span / static_cast<double>(n);
        for (long i = 0; i < n; ++i) {
            if (has_comp)
                x += h * (cf.drift(x) + cf.diffusion(x) * comp);
            else
                x += h * cf.drift(x);
        }
    }

    static void guard(const Vec& x) {
        if (!(x.norm() < kDivergence)) throw NumericError("state diverged", x.norm());
    }
};

std::vector<double> normalized_grid(const std::vector<double>& grid, double horizon) {
    std::vector<double> g;
    g.push_back(0.0);
    for (double t : grid)
        if (t > 0.0 && t < horizon) g.push_back(t);
    g.push_back(horizon);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

MarginalPath run_marginal(const Engine& eng, const Vec& x0, std::size_t path, std::uint64_t seed,
                          const Recording& rec) {
    const SimConfig& sim = eng.sim;
    Rng rng = make_stream(seed, path, kJumpStream);
    const auto jumps = eng.levy.sample_jumps(sim.horizon, sim.trunc, rng);
    const auto grid = normalized_grid(rec.grid, sim.horizon);
    MarginalPath p;
    Vec x = x0;
    double t = 0.0;
    p.times.push_back(0.0);
    p.states.push_back(x);
    std::size_t gi = 1;
    for (const Jump& j : jumps) {
        while (gi < grid.size() && grid[gi] <= j.time) {
            eng.drift(x, t, grid[gi]);
            t = grid[gi++];
            p.times.push_back(t);
            p.states.push_back(x);
        }
        eng.drift(x, t, j.time);
        t = j.time;
        x += eng.cf.diffusion(x) * j.size;
        Engine::guard(x);
        if (rec.record_jumps) {
            p.times.push_back(t);
            p.states.push_back(x);
        }
    }
    for (; gi < grid.size(); ++gi) {
        eng.drift(x, t, grid[gi]);
        t = grid[gi];
        p.times.push_back(t);
        p.states.push_back(x);
    }
    Engine::guard(x);
    return p;
}

CoupledPath run_coupled(const Engine& eng, const CouplingKernel& k, const Vec& x0, const Vec& y0,
                        std::size_t path, const Recording& rec) {
    const SimConfig& sim = eng.sim;
    Rng rng_jumps = make_stream(sim.seed, path, kJumpStream);
    Rng rng_thin = make_stream(sim.seed, path, kThinningStream);
    const auto jumps = eng.levy.sample_jumps(sim.horizon, sim.trunc, rng_jumps);
    const auto grid = normalized_grid(rec.grid, sim.horizon);
    const double tol = sim.resolved_tol(x0, y0);

    CoupledPath p;
    Vec x = x0, y = y0;
    double t = 0.0;
    bool coupled = false;
    auto check = [&]() {
        const double dist = (x - y).norm();
        if (!coupled && dist <= tol) {
            coupled = true;
            p.coupling_time = t;
            y = x;
        }
        if (!p.exit_time && dist > sim.exit_radius) p.exit_time = t;
    };
    auto record = [&]() {
        p.times.push_back(t);
        p.x_states.push_back(x);
        p.y_states.push_back(y);
    };
    auto advance = [&](double t1) {
        eng.drift(x, t, t1);
        if (coupled)
            y = x;
        else
            eng.drift(y, t, t1);
        t = t1;
        check();
    };

    check();
    record();
    std::size_t gi = 1;
    for (const Jump& j : jumps) {
        // One uniform per jump keeps the thinning stream aligned with the jumps.
        const double u = uniform01(rng_thin);
        while (gi < grid.size() && grid[gi] <= j.time) {
            advance(grid[gi++]);
            record();
        }
        advance(j.time);
        if (coupled) {
            x += eng.cf.diffusion(x) * j.size;
            y = x;
        } else {
            const JumpEvent ev = coupled_jump(k, x, y, j.size, u, sim.trunc);
            switch (ev.branch) {
                case Branch::Coalesce: ++p.branches.coalesce; break;
                case Branch::Reflect: ++p.branches.reflect; break;
                case Branch::Synchronize: ++p.branches.synchronize; break;
            }
            x = ev.x_after;
            y = ev.y_after;
            Engine::guard(y);
        }
        Engine::guard(x);
        check();
        if (rec.record_jumps) record();
    }
    for (; gi < grid.size(); ++gi) {
        advance(grid[gi]);
        record();
    }
    return p;
}

}  // namespace

JumpEvent coupled_jump(const CouplingKernel& k, const Vec& x, const Vec& y, const Vec& z, double u,
                       double trunc) {
    const CoefficientField& cf = k.coeff();
    JumpEvent ev;
    ev.x_before = x;
    ev.y_before = y;
    ev.x_after = x + cf.diffusion(x) * z;
    const AffineMap a = k.affine(x, y);
    if (a.identity) {
        ev.branch = Branch::Synchronize;
        ev.y_after = ev.x_after;
        return ev;
    }
    const Mat sy = cf.diffusion(y);
    const ThinningDecision dec = k.thin(a, sy, z, u, trunc);
    ev.branch = dec.branch;
    if (dec.branch == Branch::Coalesce && a.distance <= k.kappa())
        ev.y_after = ev.x_after;
    else
        ev.y_after = y + dec.y_jump;
    return ev;
}

MarginalPath simulate_marginal(const CoefficientField& cf, const LevyModel& levy, const Vec& x0,
                               const SimConfig& sim, std::size_t path_index, const Recording& rec) {
    sim.validate(levy);
    if (x0.size() != levy.dim()) throw ParameterError("start point dimension mismatch");
    const Engine eng(cf, levy, sim);
    return run_marginal(eng, x0, path_index, sim.seed, rec);
}

CoupledPath simulate_coupled(const CouplingKernel& k, const Vec& x0, const Vec& y0,
                             const SimConfig& sim, std::size_t path_index, const Recording& rec) {
    sim.validate(k.levy());
    if (x0.size() != k.dim() || y0.size() != k.dim())
        throw ParameterError("start point dimension mismatch");
    const Engine eng(k.coeff(), k.levy(), sim);
    return run_coupled(eng, k, x0, y0, path_index, rec);
}

std::vector<Vec> marginal_endpoints(const CoefficientField& cf, const LevyModel& levy,
                                    const Vec& x0, const SimConfig& sim) {
    sim.validate(levy);
    const Engine eng(cf, levy, sim);
    std::vector<Vec> out(sim.n_paths);
    const auto n = static_cast<long>(sim.n_paths);
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] =
            run_marginal(eng, x0, static_cast<std::size_t>(i), sim.seed, {}).states.back();
    return out;
}

CouplingEnsemble coupling_time_ensemble(const CouplingKernel& k, const Vec& x0, const Vec& y0,
                                        const SimConfig& sim, const std::vector<double>& grid) {
    sim.validate(k.levy());
    const Engine eng(k.coeff(), k.levy(), sim);
    const auto times = normalized_grid(grid, sim.horizon);
    const std::size_t n = sim.n_paths, g = times.size();
    Recording rec{times, false};

    std::vector<double> dist(n * g);
    CouplingEnsemble out;
    out.coupling_times.resize(n);
    out.x_final.resize(n);
    out.y_final.resize(n);
    std::vector<BranchCounts> counts(n);
    const auto nl = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long il = 0; il < nl; ++il) {
        const auto i = static_cast<std::size_t>(il);
        const CoupledPath p = run_coupled(eng, k, x0, y0, i, rec);
        for (std::size_t j = 0; j < g; ++j) dist[i * g + j] = (p.x_states[j] - p.y_states[j]).norm();
        out.coupling_times[i] = p.coupling_time;
        out.x_final[i] = p.x_states.back();
        out.y_final[i] = p.y_states.back();
        counts[i] = p.branches;
    }
    for (const auto& c : counts) {
        out.branches.coalesce += c.coalesce;
        out.branches.reflect += c.reflect;
        out.branches.synchronize += c.synchronize;
    }
    out.curve.resize(g);
    for (std::size_t j = 0; j < g; ++j) {
        SurvivalPoint& sp = out.curve[j];
        sp.t = times[j];
        std::size_t alive = 0;
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (out.coupling_times[i] > sp.t) ++alive;
            const double d = dist[i * g + j];
            s += d;
            s2 += d * d;
        }
        const double nn = static_cast<double>(n);
        sp.survival = static_cast<double>(alive) / nn;
        const auto ci = stats::wilson(alive, n);
        sp.ci_lo = ci.lo;
        sp.ci_hi = ci.hi;
        sp.mean_dist = s / nn;
        const double var = n > 1 ? std::max(0.0, (s2 - s * s / nn) / (nn - 1.0)) : 0.0;
        sp.mean_dist_se = std::sqrt(var / nn);
    }
    return out;
}

LawConsistencyReport marginal_law_consistency(const CouplingKernel& k, const Vec& x0,
                                              const Vec& y0, const SimConfig& sim,
                                              std::size_t energy_sample, int n_perm) {
    LawConsistencyReport rep;
    rep.n_paths = sim.n_paths;
    const CouplingEnsemble ens = coupling_time_ensemble(k, x0, y0, sim, {});
    SimConfig indep = sim;
    std::uint64_t state = sim.seed ^ 0x6a09e667f3bcc909ULL;
    indep.seed = splitmix64(state);
    const std::vector<Vec> ref = marginal_endpoints(k.coeff(), k.levy(), y0, indep);

    const int d = k.dim();
    rep.moments_ok = true;
    for (int c = 0; c < d; ++c) {
        std::vector<double> a(ens.y_final.size()), b(ref.size());
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = ens.y_final[i](c);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = ref[i](c);
        const auto cmp = stats::compare_moments(a, b);
        rep.mean_z.push_back(cmp.mean_z);
        rep.var_z.push_back(cmp.var_z);
        if (!(std::abs(cmp.mean_z) <= 4.0 && std::abs(cmp.var_z) <= 4.0)) rep.moments_ok = false;
    }
    if (d == 1) {
        std::vector<double> a(ens.y_final.size()), b(ref.size());
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = ens.y_final[i](0);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = ref[i](0);
        rep.energy_sample = a.size();
        rep.energy = stats::energy_permutation_test(a, b, n_perm, sim.seed);
    } else {
        const std::size_t m = std::min({energy_sample, ens.y_final.size(), ref.size()});
        const std::vector<Vec> a(ens.y_final.begin(), ens.y_final.begin() + static_cast<std::ptrdiff_t>(m));
        const std::vector<Vec> b(ref.begin(), ref.begin() + static_cast<std::ptrdiff_t>(m));
        rep.energy_sample = m;
        rep.energy = stats::energy_permutation_test(a, b, n_perm, sim.seed);
    }
    rep.energy_ok = rep.energy.observed <= rep.energy.perm_mean + 4.0 * rep.energy.perm_sd;
    return rep;
}

}  // namespace lmc
