#include "lmc/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "lmc/errors.hpp"
#include "lmc/generator.hpp"
#include "lmc/rate_analysis.hpp"
#include "lmc/rng.hpp"
#include "lmc/simulator.hpp"
#include "lmc/test_functions.hpp"

namespace lmc {

Bench::Bench(const ExperimentConfig& cfg)
    : levy(cfg.model.dim, cfg.model.alpha, cfg.model.c0, cfg.model.eta, cfg.model.support),
      cf(make_coefficients(cfg.model.dim, cfg.drift, cfg.diffusion)),
      k(levy, cf, cfg.kappa) {}

namespace {

using Row = std::vector<std::string>;

std::string describe(double v, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

// A list of one value means "along the first axis"; otherwise one entry per coordinate.
Vec point(const std::vector<double>& v, int dim, const char* what) {
    Vec p = Vec::Zero(dim);
    if (v.size() == 1) {
        p(0) = v.front();
    } else if (static_cast<int>(v.size()) == dim) {
        for (int i = 0; i < dim; ++i) p(i) = v[static_cast<std::size_t>(i)];
    } else {
        throw ConfigError(std::string("'") + what + "' needs one value or one per coordinate");
    }
    return p;
}

void add_coords(Row& row, const Vec& v) {
    for (int i = 0; i < v.size(); ++i) row.push_back(fmt(v(i)));
}

std::vector<std::string> coord_names(const char* prefix, int dim) {
    std::vector<std::string> out;
    for (int i = 0; i < dim; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

GeneratorOptions generator_options(int dim) {
    GeneratorOptions o;
    if (dim == 2) {
        // Long rays near the slab direction make tight angular tolerances costly.
        o.quad.rel_tol = 1e-8;
        o.quad.angle_rel_tol = 1e-6;
    }
    return o;
}

// ------------------------------------------------------------ scenarios

ScenarioResult marginality(const ExperimentConfig& cfg) {
    cfg.params.require_known(cfg.scenario, {"pairs", "tol", "half_width", "min_dist", "max_dist"});
    const Bench b(cfg);
    const int d = cfg.model.dim;
    const auto n = static_cast<std::size_t>(cfg.params.get("pairs", 20));
    const double tol = cfg.params.get("tol", 1e-3);
    std::vector<SmoothPtr> fs, gs;
    if (d == 1) {
        fs = {gaussian_bump(Vec::Constant(1, 0.0), 0.6), cosine_fn(Vec::Constant(1, 1.0), 0.2),
              cosine_fn(Vec::Constant(1, 1.3), 0.0)};
        gs = {gaussian_bump(Vec::Constant(1, 0.5), 0.8, 2.0), gaussian_bump(Vec::Constant(1, -0.3), 0.5),
              cosine_fn(Vec::Constant(1, 0.7), 1.0)};
    } else {
        auto c = [d](double a, double bb) {
            Vec v = Vec::Zero(d);
            v(0) = a;
            v(1) = bb;
            return v;
        };
        fs = {gaussian_bump(c(0.1, -0.2), 0.8), gaussian_bump(c(-0.3, 0.2), 0.7),
              gaussian_bump(c(0.4, 0.4), 1.0, 0.5)};
        gs = {gaussian_bump(c(0.7, 0.4), 0.6, 2.0), gaussian_bump(c(0.0, 0.0), 0.9),
              gaussian_bump(c(-0.5, 0.1), 0.6)};
    }
    const auto pairs = distance_pairs(d, n, cfg.params.get("half_width", 1.5),
                                      cfg.params.get("min_dist", 0.02),
                                      cfg.params.get("max_dist", 2.0), cfg.sim.seed);
    const auto rep = marginality_suite(b.k, fs, gs, pairs, generator_options(d));

    Table t{"marginality",
            concat(concat({"row", "f_index"}, coord_names("x", d)),
                   concat(coord_names("y", d), {"coupled", "lf", "lg", "rel_error"})),
            {}};
    std::size_t i = 0;
    for (const auto& r : rep.rows) {
        Row row{fmt(i++), std::to_string(r.f_index)};
        add_coords(row, r.x);
        add_coords(row, r.y);
        for (double v : {r.coupled, r.lf, r.lg, r.rel_error}) row.push_back(fmt(v));
        t.add(std::move(row));
    }
    ScenarioResult out;
    out.checks.push_back({"marginality", rep.max_rel_error <= tol,
                          "max rel error " + describe(rep.max_rel_error) + " over " +
                              std::to_string(rep.rows.size()) + " evaluations (tol " + describe(tol) + ")"});
    out.tables.push_back(std::move(t));
    return out;
}

ScenarioResult pushforward(const ExperimentConfig& cfg) {
    cfg.params.require_known(cfg.scenario, {"pairs", "tol", "mass_tol"});
    const Bench b(cfg);
    const int d = cfg.model.dim;
    const auto n = static_cast<std::size_t>(cfg.params.get("pairs", 10));
    const double tol = cfg.params.get("tol", 1e-3);
    const double mass_tol = cfg.params.get("mass_tol", 1e-6);
    const std::vector<std::pair<std::string, std::function<double(const Vec&)>>> hs{
        {"damped_cos", [](const Vec& z) { return std::cos(z.sum() + 0.3) / (1.0 + z.squaredNorm()); }},
        {"gauss", [](const Vec& z) { return std::exp(-z.squaredNorm()); }},
        {"cauchy", [](const Vec& z) { return 1.0 / (1.0 + z.squaredNorm()); }}};
    const auto pairs = distance_pairs(d, n, 1.5, 0.02, 2.0, cfg.sim.seed);
    quad::Options q;
    if (d == 2) q = quad::Options{1e-9, 1e-7};
    Table t{"pushforward", concat(concat({"pair"}, coord_names("x", d)),
                                  concat(coord_names("y", d), {"h", "rel_gap", "mass", "inverse_mass", "mass_gap"})),
            {}};
    double worst = 0.0, worst_mass = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [x, y] = pairs[i];
        const double m1 = b.k.mu_mass(x, y, 0.0, q).value;
        const double m2 = b.k.mu_inverse_mass(x, y, 0.0, q).value;
        const double mass_gap = std::abs(m1 - m2) / std::max(m1, m2);
        worst_mass = std::max(worst_mass, mass_gap);
        for (const auto& [name, h] : hs) {
            const double gap = b.k.pushforward_identity_check(x, y, {h}, q);
            worst = std::max(worst, gap);
            Row row{fmt(i)};
            add_coords(row, x);
            add_coords(row, y);
            for (auto s : {name, fmt(gap), fmt(m1), fmt(m2), fmt(mass_gap)}) row.push_back(s);
            t.add(std::move(row));
        }
    }
    ScenarioResult out;
    out.checks.push_back({"pushforward", worst <= tol,
                          "max rel gap " + describe(worst) + " (tol " + describe(tol) + ")"});
    out.checks.push_back({"mass_equality", worst_mass <= mass_tol,
                          "max rel mass gap " + describe(worst_mass) + " (tol " + describe(mass_tol) + ")"});
    out.tables.push_back(std::move(t));
    return out;
}

ScenarioResult drift_bound(const ExperimentConfig& cfg) {
    cfg.params.require_known(cfg.scenario, {"pairs", "slack_tol", "radius", "infinite_radius"});
    const Bench b(cfg);
    const int d = cfg.model.dim;
    const auto n = static_cast<std::size_t>(cfg.params.get("pairs", 50));
    const double tol = cfg.params.get("slack_tol", 1e-6);
    std::vector<double> radii{cfg.params.get("radius", 2.0)};
    const bool want_inf = cfg.params.get("infinite_radius", 1.0) != 0.0;
    const bool inf_valid = b.levy.moment_integrals().big_first_finite;
    if (want_inf && inf_valid) radii.push_back(quad::kInf);
    const std::vector<RadialPtr> fs{power_capped(0.5, 2.0), identity_capped(2.0)};
    const auto pairs = distance_pairs(d, n, 1.5, 0.02, 2.0, cfg.sim.seed);
    Table t{"drift_bound",
            concat(concat({"pair", "f", "R"}, coord_names("x", d)),
                   concat(coord_names("y", d), {"lhs", "rhs", "slack", "theta0", "drift", "theta_inner", "theta_outer"})),
            {}};
    double worst = quad::kInf;
    const auto opts = generator_options(d);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [x, y] = pairs[i];
        for (const auto& f : fs)
            for (double radius : radii) {
                const auto rep = drift_bound_check(b.k, *f, x, y, radius, opts);
                worst = std::min(worst, rep.slack);
                Row row{fmt(i), f->name(), fmt(radius)};
                add_coords(row, x);
                add_coords(row, y);
                for (double v : {rep.lhs, rep.rhs, rep.slack, rep.theta0, rep.drift, rep.theta_inner, rep.theta_outer})
                    row.push_back(fmt(v));
                t.add(std::move(row));
            }
    }
    ScenarioResult out;
    std::string radius_note = inf_valid ? "R in {" + describe(radii[0]) + ", inf}"
                                        : "R = " + describe(radii[0]) + " (inf invalid: large-jump moment diverges)";
    out.checks.push_back({"drift_bound", worst >= -tol,
                          "min slack " + describe(worst) + ", " + radius_note});
    out.tables.push_back(std::move(t));
    return out;
}

ScenarioResult coalescence(const ExperimentConfig& cfg) {
    cfg.params.require_known(cfg.scenario, {"events"});
    const Bench b(cfg);
    const int d = cfg.model.dim;
    const auto events = static_cast<std::size_t>(cfg.params.get("events", 1e4));
    const double kappa = cfg.kappa, trunc = cfg.sim.trunc;
    Rng rng = make_stream(cfg.sim.seed, 0, kAuxStream);
    auto direction = [&]() {
        Vec e = Vec::Zero(d);
        std::normal_distribution<double> n01;
        for (int i = 0; i < d; ++i) e(i) = d == 1 ? 1.0 : n01(rng);
        return Vec(e / e.norm());
    };
    auto start = [&]() {
        Vec x(d);
        for (int i = 0; i < d; ++i) x(i) = 2.0 * uniform01(rng) - 1.0;
        return x;
    };
    Table t{"coalescence", {"part", "events", "coalesce", "reflect", "synchronize", "violations", "max_deviation"}, {}};
    ScenarioResult out;

    // Within kappa a coalescing jump must land both copies on the same point.
    {
        std::size_t counts[3] = {0, 0, 0}, bad = 0;
        for (std::size_t i = 0; i < events; ++i) {
            const Vec x = start();
            const Vec y = x - kappa * (0.05 + 0.95 * uniform01(rng)) * direction();
            const Vec z = b.levy.sample_size(trunc, rng);
            const auto ev = coupled_jump(b.k, x, y, z, uniform01(rng), trunc);
            ++counts[static_cast<int>(ev.branch)];
            if (ev.branch == Branch::Coalesce && !(ev.x_after == ev.y_after)) ++bad;
        }
        t.add({"within_kappa", fmt(events), fmt(counts[0]), fmt(counts[1]), fmt(counts[2]), fmt(bad), "0"});
        out.checks.push_back({"exact_coalescence", bad == 0 && counts[0] > 0,
                              std::to_string(counts[0]) + " coalescing jumps, " + std::to_string(bad) +
                                  " not exact"});
    }
    // Beyond kappa with additive noise the distance moves by exactly kappa.
    if (b.cf.constant_diffusion()) {
        std::size_t counts[3] = {0, 0, 0}, bad = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i < events; ++i) {
            const Vec x = start();
            const double dist = kappa * (1.05 + 2.0 * uniform01(rng));
            const Vec y = x - dist * direction();
            const Vec z = b.levy.sample_size(trunc, rng);
            const auto ev = coupled_jump(b.k, x, y, z, uniform01(rng), trunc);
            ++counts[static_cast<int>(ev.branch)];
            const double after = (ev.x_after - ev.y_after).norm();
            const double expected = ev.branch == Branch::Coalesce ? dist - kappa
                                    : ev.branch == Branch::Reflect ? dist + kappa
                                                                   : dist;
            const double dev = std::abs(after - expected);
            worst = std::max(worst, dev);
            // Independent rounding of x + z and y + z + shift: a few ulps.
            if (dev > 4.0 * std::numeric_limits<double>::epsilon() * (dist + kappa + 1.0)) ++bad;
        }
        t.add({"beyond_kappa", fmt(events), fmt(counts[0]), fmt(counts[1]), fmt(counts[2]), fmt(bad), fmt(worst)});
        out.checks.push_back({"kappa_step", bad == 0 && counts[0] > 0 && counts[1] > 0,
                              std::to_string(counts[0] + counts[1]) + " coalesce/reflect jumps, max deviation " +
                                  describe(worst)});
    }
    out.tables.push_back(std::move(t));
    return out;
}

ScenarioResult law_consistency(const ExperimentConfig& cfg) {
    cfg.params.require_known(cfg.scenario, {"x0", "y0", "energy_sample", "permutations"});
    const Bench b(cfg);
    const int d = cfg.model.dim;
    const Vec x0 = point(cfg.params.list("x0", {0.0}), d, "x0");
    const Vec y0 = point(cfg.params.list("y0", {1.0}), d, "y0");
    const auto rep = marginal_law_consistency(b.k, x0, y0, cfg.sim,
                                              static_cast<std::size_t>(cfg.params.get("energy_sample", 2000)),
                                              static_cast<int>(cfg.params.get("permutations", 200)));
    Table t{"law_consistency", {"statistic", "coordinate", "value", "band"}, {}};
    for (std::size_t i = 0; i < rep.mean_z.size(); ++i) {
        t.add({"mean_z", fmt(i), fmt(rep.mean_z[i]), "4"});
        t.add({"var_z", fmt(i), fmt(rep.var_z[i]), "4"});
    }
    t.add({"energy", "all", fmt(rep.energy.observed), fmt(rep.energy.perm_mean + 4.0 * rep.energy.perm_sd)});
    t.add({"energy_perm_mean", "all", fmt(rep.energy.perm_mean), ""});
    t.add({"energy_perm_sd", "all", fmt(rep.energy.perm_sd), ""});
    ScenarioResult out;
    double worst_z = 0.0;
    for (std::size_t i = 0; i < rep.mean_z.size(); ++i)
        worst_z = std::max({worst_z, std::abs(rep.mean_z[i]), std::abs(rep.var_z[i])});
    out.checks.push_back({"moments", rep.moments_ok,
                          "max |z| " + describe(worst_z) + " over " + std::to_string(rep.n_paths) + " paths"});
    out.checks.push_back({"energy", rep.energy_ok,
                          "energy " + describe(rep.energy.observed) + " vs band " +
                              describe(rep.energy.perm_mean + 4.0 * rep.energy.perm_sd)});
    out.tables.push_back(std::move(t));
    return out;
}

ScenarioResult j_exponent(const ExperimentConfig& cfg) {
    cfg.params.require_known(cfg.scenario, {"radii", "pairs", "slope_tol", "half_width"});
    const Bench b(cfg);
    JKOptions o;
    o.pair_samples = static_cast<std::size_t>(cfg.params.get("pairs", 16));
    o.half_width = cfg.params.get("half_width", 2.0);
    o.seed = cfg.sim.seed;
    const double tol = cfg.params.get("slope_tol", 0.15);
    const auto jk = estimate_J_K(b.k, cfg.params.list("radii", {0.02, 0.01, 0.005, 0.0025}), o);
    Table t{"j_curve", {"r", "J", "mass_min", "mass_max", "K"}, {}};
    for (std::size_t i = 0; i < jk.radii.size(); ++i)
        t.add({fmt(jk.radii[i]), fmt(jk.J[i]), fmt(jk.mass_min[i]), fmt(jk.mass_max[i]), fmt(jk.K[i])});
    Table s{"j_fit", {"alpha", "exponent", "log_prefactor", "r2"}, {}};
    s.add({fmt(cfg.model.alpha), fmt(jk.exponent), fmt(jk.log_prefactor), fmt(jk.fit_r2)});
    ScenarioResult out;
    out.checks.push_back({"j_exponent", std::abs(jk.exponent + cfg.model.alpha) <= tol,
                          "slope " + describe(jk.exponent) + " vs -alpha = " + describe(-cfg.model.alpha)});
    out.tables.push_back(std::move(t));
    out.tables.push_back(std::move(s));
    return out;
}

std::vector<double> uniform_grid(double step, double horizon) {
    std::vector<double> g;
    for (int i = 1; i * step <= horizon + 1e-12; ++i) g.push_back(i * step);
    return g;
}

Table certificate_table(const RateCertificate& c) {
    Table t{"certificate", {"quantity", "value"}, {}};
    const std::vector<std::pair<const char*, double>> rows{
        {"A1_sampled", c.A1},        {"A2", c.A2},
        {"a1_half_width", c.a1_half_width}, {"K1_star", c.k1_star},
        {"K2_eff", c.k2_eff},        {"l0", c.l0},
        {"beta", c.beta},            {"J_exponent", c.jk.exponent},
        {"comparison_coeff", c.comparison.coeff}, {"comparison_exponent", c.comparison.exponent},
        {"comparison_margin", c.comparison_margin}, {"g1_end", c.g1_end},
        {"g2_end", c.g2_end},        {"g_end", c.g_end},
        {"c1", c.c1},                {"c2", c.c2},
        {"lambda", c.lambda},        {"log_lambda", c.log_lambda},
        {"C", c.C},                  {"log_C", c.log_C}};
    for (const auto& [k, v] : rows) t.add({k, fmt(v)});
    return t;
}

ScenarioResult decay(const ExperimentConfig& cfg, bool tv) {
    cfg.params.require_known(cfg.scenario, {"x0", "y0", "t_lo", "t_hi", "grid_step", "r2_min",
                                            "cert_fraction", "certificate"});
    const Bench b(cfg);
    const int d = cfg.model.dim;
    const Vec x0 = point(cfg.params.list("x0", {2.0}), d, "x0");
    const Vec y0 = point(cfg.params.list("y0", {-2.0}), d, "y0");
    const double t_lo = cfg.params.get("t_lo", 1.0), t_hi = cfg.params.get("t_hi", 10.0);
    const double r2_min = cfg.params.get("r2_min", 0.95);
    const auto grid = uniform_grid(cfg.params.get("grid_step", 0.5), cfg.sim.horizon);
    const auto rep = tv_and_w1_report(b.k, x0, y0, cfg.sim, grid, t_lo, t_hi);

    Table curve{tv ? "tv_curve" : "w1_curve",
                {"t", "w1_upper", "w1_lo", "w1_hi", "tv_upper", "tv_lo", "tv_hi", "survival"},
                {}};
    for (std::size_t i = 0; i < rep.curve.size(); ++i)
        curve.add({fmt(rep.curve[i].t), fmt(rep.w1_upper[i]), fmt(rep.w1_lo[i]), fmt(rep.w1_hi[i]),
                   fmt(rep.tv_upper[i]), fmt(rep.tv_lo[i]), fmt(rep.tv_hi[i]), fmt(rep.curve[i].survival)});
    Table fits{tv ? "tv_fit" : "w1_fit", {"curve", "rate", "intercept", "r2", "points"}, {}};
    auto fit_row = [&](const char* name, const std::optional<DecayFit>& f) {
        if (f)
            fits.add({name, fmt(f->rate), fmt(f->intercept), fmt(f->r2), fmt(f->points)});
        else
            fits.add({name, "nan", "nan", "nan", "0"});
    };
    fit_row("w1", rep.w1_fit);
    fit_row("tv", rep.tv_fit);
    fits.add({"w1_exact_horizon", fmt(rep.w1_exact_horizon), "", "", ""});

    ScenarioResult out;
    if ((x0 - y0).norm() == 0.0) {
        const bool zero = std::all_of(rep.w1_upper.begin(), rep.w1_upper.end(), [](double v) { return v == 0.0; }) &&
                          std::all_of(rep.tv_upper.begin(), rep.tv_upper.end(), [](double v) { return v == 0.0; });
        out.checks.push_back({"equal_starts_zero", zero, "both curves identically zero"});
    } else if (!tv) {
        const auto& f = rep.w1_fit;
        out.checks.push_back({"w1_rate_positive", f && f->rate > 0.0,
                              f ? "rate " + describe(f->rate) : "no positive points in window"});
        out.checks.push_back({"w1_r2", f && f->r2 >= r2_min,
                              f ? "r2 " + describe(f->r2) + " (min " + describe(r2_min) + ")" : "no fit"});
        if (cfg.params.get("certificate", 1.0) != 0.0 && b.cf.profile()) {
            try {
                CertificateOptions co;
                co.jk.seed = cfg.sim.seed;
                const auto cert = contraction_certificate(b.k, *b.cf.profile(), co);
                const double frac = cfg.params.get("cert_fraction", 0.8);
                out.checks.push_back({"w1_rate_vs_certificate", f && f->rate >= frac * cert.lambda,
                                      (f ? "rate " + describe(f->rate) : std::string("no fit")) +
                                          " vs certificate lambda " + describe(cert.lambda) +
                                          " (log " + describe(cert.log_lambda, 6) + ")"});
                out.tables.push_back(certificate_table(cert));
            } catch (const CertificateError& e) {
                Table t{"certificate", {"quantity", "value"}, {{"unavailable", e.what()}}};
                out.tables.push_back(std::move(t));
            }
        }
    } else {
        const auto& f = rep.tv_fit;
        out.checks.push_back({"tv_rate_positive", f && f->rate > 0.0,
                              f ? "rate " + describe(f->rate) + ", r2 " + describe(f->r2)
                                : "no positive points in window"});
    }
    out.tables.insert(out.tables.begin(), std::move(fits));
    out.tables.insert(out.tables.begin(), std::move(curve));
    return out;
}

ScenarioResult gradient_rate(const ExperimentConfig& cfg) {
    cfg.params.require_known(cfg.scenario, {"theta", "distances", "center", "t_lo", "t_hi", "points",
                                            "slope_tol", "f_sup"});
    const Bench b(cfg);
    const int d = cfg.model.dim;
    const double theta = cfg.params.get("theta", 0.25);
    const double alpha = cfg.model.alpha;
    const auto dists = cfg.params.list("distances", {0.2, 0.1, 0.05});
    const Vec center = point(cfg.params.list("center", {0.3}), d, "center");
    const double t_lo = cfg.params.get("t_lo", 0.01), t_hi = cfg.params.get("t_hi", 1.0);
    const int npts = static_cast<int>(cfg.params.get("points", 13));
    const double tol = cfg.params.get("slope_tol", 0.3);
    const double f_sup = cfg.params.get("f_sup", 1.0);
    std::vector<double> grid;
    for (int i = 0; i < npts; ++i) grid.push_back(t_lo * std::pow(t_hi / t_lo, i / double(npts - 1)));
    SimConfig sim = cfg.sim;
    sim.horizon = std::max(sim.horizon, t_hi);

    // f(x) = clamp(x_1, -1, 1): bounded and Lipschitz, reported at the horizon only.
    auto f = [](const Vec& x) { return std::clamp(x(0), -1.0, 1.0); };
    Vec e = Vec::Zero(d);
    e(0) = 1.0;
    std::vector<std::vector<SurvivalPoint>> curves;
    std::vector<double> direct;
    for (double r : dists) {
        const auto ens = coupling_time_ensemble(b.k, center + 0.5 * r * e, center - 0.5 * r * e, sim, grid);
        curves.push_back(ens.curve);
        double s = 0.0;
        for (std::size_t i = 0; i < ens.x_final.size(); ++i) s += f(ens.x_final[i]) - f(ens.y_final[i]);
        direct.push_back(std::abs(s) / static_cast<double>(ens.x_final.size()) / std::pow(r, theta));
    }
    Table t{"gradient_bound", {"t"}, {}};
    for (double r : dists) t.columns.push_back("bound_r" + fmt(r));
    t.columns.push_back("estimate");
    t.columns.push_back("envelope");

    std::optional<GradientCertificate> gc;
    std::string cert_note;
    try {
        std::vector<double> jr;
        for (double r : dists)
            if (r < cfg.kappa) jr.push_back(r);
        if (jr.size() >= 2) {
            JKOptions o;
            o.seed = cfg.sim.seed;
            const auto jk = estimate_J_K(b.k, jr, o);
            gc.emplace(gradient_rate_certificate(b.levy, theta, [jk](double r) { return jk.J_at(r); }));
        } else {
            cert_note = "envelope needs two distances below kappa";
        }
    } catch (const Error& err) {
        cert_note = err.what();
    }

    std::vector<double> lt, le;
    for (std::size_t i = 0; i < curves.front().size(); ++i) {
        const double tt = curves.front()[i].t;
        if (tt < t_lo * (1.0 - 1e-12) || tt > t_hi * (1.0 + 1e-12)) continue;
        Row row{fmt(tt)};
        double est = 0.0;
        for (std::size_t j = 0; j < dists.size(); ++j) {
            const double v = 2.0 * f_sup * curves[j][i].survival / std::pow(dists[j], theta);
            row.push_back(fmt(v));
            est = std::max(est, v);
        }
        row.push_back(fmt(est));
        row.push_back(gc ? fmt(gc->envelope(tt, f_sup)) : "nan");
        t.add(std::move(row));
        if (est > 0.0) {
            lt.push_back(std::log(tt));
            le.push_back(std::log(est));
        }
    }
    ScenarioResult out;
    const double target = -theta / alpha;
    if (lt.size() >= 3) {
        const auto fit = stats::fit_line(lt, le);
        out.checks.push_back({"gradient_slope", std::abs(fit.slope - target) <= tol,
                              "slope " + describe(fit.slope) + " vs -theta/alpha = " + describe(target) +
                                  " (r2 " + describe(fit.r2) + ")"});
        Table s{"gradient_fit", {"slope", "target", "r2", "note"}, {}};
        s.add({fmt(fit.slope), fmt(target), fmt(fit.r2), cert_note});
        out.tables.push_back(std::move(s));
    } else {
        out.checks.push_back({"gradient_slope", false, "fewer than three positive points"});
    }
    Table dt{"gradient_direct", {"r", "abs_diff_over_r_theta_at_horizon"}, {}};
    for (std::size_t j = 0; j < dists.size(); ++j) dt.add({fmt(dists[j]), fmt(direct[j])});
    out.tables.insert(out.tables.begin(), std::move(t));
    out.tables.push_back(std::move(dt));
    return out;
}

ScenarioResult invariant_probe(const ExperimentConfig& cfg) {
    cfg.params.require_known(cfg.scenario, {"starts", "permutations", "cauchy_paths", "energy_sample"});
    const Bench b(cfg);
    const int d = cfg.model.dim;
    std::vector<Vec> starts;
    for (double s : cfg.params.list("starts", {5.0, -5.0})) starts.push_back(point({s}, d, "starts"));
    const auto probe = invariant_measure_probe(
        b.k, starts, cfg.sim, static_cast<int>(cfg.params.get("permutations", 200)),
        static_cast<std::size_t>(cfg.params.get("energy_sample", 2000)),
        static_cast<std::size_t>(cfg.params.get("cauchy_paths", 1000)));
    Table pt{"invariant_pairs", {"start_a", "start_b", "energy", "perm_mean", "perm_sd", "quantile95", "p_value"}, {}};
    for (const auto& p : probe.pairs)
        pt.add({fmt(starts[p.a](0)), fmt(starts[p.b](0)), fmt(p.test.observed), fmt(p.test.perm_mean),
                fmt(p.test.perm_sd), fmt(p.test.quantile95), fmt(p.test.p_value)});
    Table ct{"invariant_cauchy", {"t", "w1_t_2t"}, {}};
    for (std::size_t i = 0; i < probe.cauchy_times.size(); ++i)
        ct.add({fmt(probe.cauchy_times[i]), fmt(probe.cauchy_w1[i])});

    std::vector<double> radii{0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0};
    const auto ly = lyapunov_check(b.cf, b.levy, radii);
    Table lt{"lyapunov", {"radius", "max_Lf_over_f", "max_Lf"}, {}};
    for (std::size_t i = 0; i < ly.radii.size(); ++i)
        lt.add({fmt(ly.radii[i]), fmt(ly.worst_ratio[i]), fmt(ly.worst_lf[i])});
    lt.add({"c4", fmt(ly.c4), ""});
    lt.add({"c5", fmt(ly.c5), ""});

    ScenarioResult out;
    std::string detail;
    for (const auto& p : probe.pairs)
        detail += "energy " + describe(p.test.observed) + " vs q95 " + describe(p.test.quantile95) + "; ";
    out.checks.push_back({"invariant_agreement", probe.ok(), detail});
    out.tables.push_back(std::move(pt));
    out.tables.push_back(std::move(ct));
    out.tables.push_back(std::move(lt));
    return out;
}

ExperimentConfig base(const char* scenario, std::uint64_t seed) {
    ExperimentConfig c;
    c.scenario = scenario;
    c.model = {1, 0.5, 1.0, 1.0, Support::Ball};
    c.drift = {"sin_perturbed", {}};
    c.diffusion = {"constant", {}};
    c.kappa = 0.5;
    c.sim.seed = seed;
    return c;
}

ExperimentConfig multiplicative(ExperimentConfig c) {
    c.diffusion = {"diag_sin", {}};
    return c;
}

ExperimentConfig tag(ExperimentConfig c, const std::string& label) {
    // The output directory field doubles as a label inside the plan.
    c.output_dir = label;
    return c;
}

ScenarioResult dispatch(const ExperimentConfig& cfg);

ScenarioResult full_suite(const ExperimentConfig& cfg) {
    cfg.params.require_known(cfg.scenario, {});
    ScenarioResult all;
    for (const auto& c : acceptance_plan(cfg.sim.seed)) {
        const auto o = run_criterion(c);
        all.merge(o.result);
    }
    return all;
}

ScenarioResult dispatch(const ExperimentConfig& cfg) {
    const auto& s = cfg.scenario;
    if (s == "marginality") return marginality(cfg);
    if (s == "pushforward") return pushforward(cfg);
    if (s == "drift_bound") return drift_bound(cfg);
    if (s == "coalescence") return coalescence(cfg);
    if (s == "law_consistency") return law_consistency(cfg);
    if (s == "j_exponent") return j_exponent(cfg);
    if (s == "coupling_decay") return decay(cfg, false);
    if (s == "tv_decay") return decay(cfg, true);
    if (s == "gradient_rate") return gradient_rate(cfg);
    if (s == "invariant_probe") return invariant_probe(cfg);
    if (s == "full_suite") return full_suite(cfg);
    throw ConfigError("unknown scenario '" + s + "'");
}

}  // namespace

ScenarioResult run_scenario(const ExperimentConfig& cfg) {
    validate(cfg);
    return dispatch(cfg);
}

std::vector<Criterion> acceptance_plan(std::uint64_t seed) {
    std::vector<Criterion> plan;
    auto with = [](ExperimentConfig c, const std::string& key, std::vector<double> v) {
        c.params.set(key, std::move(v));
        return c;
    };

    plan.push_back({1, "marginality",
                    {tag(base("marginality", seed), "additive"),
                     tag(multiplicative(base("marginality", seed)), "multiplicative")}});
    plan.push_back({2, "pushforward",
                    {tag(base("pushforward", seed), "additive"),
                     tag(multiplicative(base("pushforward", seed)), "multiplicative")}});
    plan.push_back({3, "drift_bound",
                    {tag(base("drift_bound", seed), "additive"),
                     tag(multiplicative(base("drift_bound", seed)), "multiplicative")}});
    plan.push_back({4, "coalescence",
                    {tag(base("coalescence", seed), "additive"),
                     tag(multiplicative(base("coalescence", seed)), "multiplicative")}});
    {
        ExperimentConfig a = base("law_consistency", seed);
        a.sim.n_paths = 100000;
        ExperimentConfig m = multiplicative(base("law_consistency", seed));
        m.model = {2, 0.5, 1.0, 1.0, Support::HalfSlab};
        m.drift = {"linear", {}};
        m.sim.n_paths = 100000;
        m = with(with(m, "x0", {0.3, -0.2}), "y0", {-0.5, 0.4});
        plan.push_back({5, "law_consistency", {tag(a, "additive"), tag(m, "multiplicative_halfslab")}});
    }
    {
        std::vector<ExperimentConfig> cs;
        for (double alpha : {0.5, 1.5})
            for (Support s : {Support::Ball, Support::HalfSlab}) {
                ExperimentConfig c = multiplicative(base("j_exponent", seed));
                c.model = {2, alpha, 1.0, 1.0, s};
                c.drift = {"linear", {}};
                cs.push_back(tag(c, std::string(to_string(s)) + "_alpha" + fmt(alpha)));
            }
        plan.push_back({6, "j_exponent", cs});
    }
    {
        ExperimentConfig c = base("coupling_decay", seed);
        c.sim.horizon = 10.0;
        c.sim.n_paths = 10000;
        plan.push_back({7, "w1_decay", {tag(c, "sin_perturbed")}});
        ExperimentConfig t = c;
        t.scenario = "tv_decay";
        ExperimentConfig z = t;
        z.drift = {"sign_perturbed", {}};
        plan.push_back({8, "tv_decay", {tag(t, "sin_perturbed"), tag(z, "sign_perturbed")}});
    }
    {
        ExperimentConfig c = base("gradient_rate", seed);
        c.drift = {"holder", {}};
        c.sim.horizon = 1.0;
        c.sim.dt_max = 1e-3;
        c.sim.n_paths = 10000;
        plan.push_back({9, "gradient_rate", {tag(c, "holder")}});
    }
    {
        ExperimentConfig c = base("invariant_probe", seed);
        c.drift = {"linear", {}};
        c.sim.horizon = 50.0;
        c.sim.n_paths = 10000;
        plan.push_back({10, "invariant_probe", {tag(c, "linear")}});
    }
    return plan;
}

CriterionOutcome run_criterion(const Criterion& c) {
    CriterionOutcome o;
    o.id = c.id;
    o.title = c.title;
    const auto t0 = std::chrono::steady_clock::now();
    const std::string prefix = (c.id < 10 ? "c0" : "c") + std::to_string(c.id) + "_";
    for (const auto& cfg : c.configs) {
        ScenarioResult r;
        try {
            r = run_scenario(cfg);
        } catch (const Error& e) {
            r.checks.push_back({"error", false, e.what()});
        }
        for (auto& ch : r.checks) ch.name = prefix + c.title + "/" + cfg.output_dir + "/" + ch.name;
        for (auto& t : r.tables) t.name = prefix + t.name + "_" + cfg.output_dir;
        o.result.merge(std::move(r));
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return o;
}

}  // namespace lmc
