#include "lmc/rate_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lmc/errors.hpp"
#include "lmc/generator.hpp"
#include "lmc/rng.hpp"

namespace lmc {

namespace {

Vec random_direction(int dim, Rng& rng) {
    if (dim == 1) return Vec::Constant(1, uniform01(rng) < 0.5 ? -1.0 : 1.0);
    std::normal_distribution<double> n01;
    Vec e(dim);
    do {
        for (int i = 0; i < dim; ++i) e(i) = n01(rng);
    } while (e.norm() < 1e-12);
    return e / e.norm();
}

Vec random_point(int dim, double half_width, Rng& rng) {
    Vec x(dim);
    for (int i = 0; i < dim; ++i) x(i) = half_width * (2.0 * uniform01(rng) - 1.0);
    return x;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    g.back() = hi;
    return g;
}

double integrate_from_zero(const std::function<double(double)>& f, double r, const char* what) {
    if (r <= 0.0) return 0.0;
    // The rule may sample the endpoint itself, where the integrand can be infinite.
    auto guarded = [&](double s) { return s > 0.0 ? f(s) : 0.0; };
    const auto res = quad::integrate_interval(guarded, 0.0, r, 1e-12);
    if (!std::isfinite(res.value))
        throw CertificateError(std::string("integral ") + what + " is not finite");
    return res.value;
}

}  // namespace

// ---------------------------------------------------------------- J and K

double JKCurve::J_at(double r) const {
    if (radii.empty()) throw ParameterError("empty J curve");
    std::vector<std::size_t> order(radii.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return radii[a] < radii[b]; });
    const double lo = radii[order.front()], hi = radii[order.back()];
    if (r < lo || r > hi || radii.size() == 1) return std::exp(log_prefactor) * std::pow(r, exponent);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const double a = radii[order[i]], b = radii[order[i + 1]];
        if (r <= b) {
            if (b == a) return J[order[i]];
            const double w = std::log(r / a) / std::log(b / a);
            return std::exp((1.0 - w) * std::log(J[order[i]]) + w * std::log(J[order[i + 1]]));
        }
    }
    return J[order.back()];
}

JKCurve estimate_J_K(const CouplingKernel& k, const std::vector<double>& radii,
                     const JKOptions& opts) {
    if (radii.empty()) throw ParameterError("J estimate needs at least one radius");
    for (double r : radii)
        if (!(r > 0.0 && r < k.kappa())) throw ParameterError("J radii must lie in (0, kappa)");
    const std::size_t n = std::max<std::size_t>(opts.pair_samples, 2);
    JKCurve out;
    out.radii = radii;
    // The same pair geometries (position, direction, distance fraction) are
    // reused at every radius, so the curves vary smoothly in r.
    struct Geometry {
        Vec x, e;
        double fraction;
    };
    std::vector<Geometry> geo;
    for (std::size_t s = 0; s < n; ++s) {
        Rng rng = make_stream(opts.seed, s, kAuxStream);
        const double fraction = s % 2 == 0 ? 1.0 : std::pow(0.25, uniform01(rng));
        Vec x = random_point(k.dim(), opts.half_width, rng);
        geo.push_back({std::move(x), random_direction(k.dim(), rng), fraction});
    }
    for (double r : radii) {
        double j = quad::kInf, mmin = quad::kInf, mmax = 0.0, kk = 0.0;
        for (const auto& g : geo) {
            const bool exact = g.fraction == 1.0;
            const Vec y = g.x - r * g.fraction * g.e;
            const double mass = k.mu_mass(g.x, y, 0.0, opts.quad).value;
            j = std::min(j, mass);
            if (exact) {
                mmin = std::min(mmin, mass);
                mmax = std::max(mmax, mass);
                const double first = k.mu_first_moment(g.x, y, 2.0, opts.quad).value;
                kk = std::max(kk, mass * r + first);
            }
        }
        out.J.push_back(j);
        out.mass_min.push_back(mmin);
        out.mass_max.push_back(mmax);
        out.K.push_back(kk);
    }
    if (radii.size() >= 2) {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < radii.size(); ++i) {
            lx.push_back(std::log(radii[i]));
            ly.push_back(std::log(out.J[i]));
        }
        const auto fit = stats::fit_line(lx, ly);
        out.exponent = fit.slope;
        out.log_prefactor = fit.intercept;
        out.fit_r2 = fit.r2;
    } else {
        out.log_prefactor = std::log(out.J[0]);
    }
    return out;
}

// ------------------------------------------------------ contraction rate

double RateCertificate::phi1(double r) const {
    return k1_star * std::pow(r, beta) + phi_slope * r;
}

double RateCertificate::g1(double r) const {
    const double top = std::min(r, 2.0 * l0);
    return integrate_from_zero([&](double s) { return 1.0 / comparison(s); }, top, "g1");
}

double RateCertificate::g2(double r) const {
    const double top = std::min(r, 2.0 * l0);
    return integrate_from_zero([&](double s) { return phi1(s) / s / comparison(s); }, top, "g2");
}

double RateCertificate::g(double r) const {
    if (degenerate) return 0.0;
    return g1(r) + 2.0 / c2 * g2(r);
}

double RateCertificate::psi(double r) const {
    if (r <= 0.0) return 0.0;
    const double edge = 2.0 * l0;
    const double inner = std::min(r, edge);
    double v = c1 * inner;
    if (inner > 0.0)
        v += quad::integrate_interval([&](double s) { return std::exp(-c2 * g(s)); }, 0.0, inner, 1e-9)
                 .value;
    if (r > edge) v += psi_d1(edge) * (r - edge);
    return v;
}

double RateCertificate::psi_d1(double r) const {
    return c1 + std::exp(-c2 * g(std::min(r, 2.0 * l0)));
}

RateCertificate assemble_certificate(double k1_star, double k2_eff, double l0, double beta,
                                     const PowerComparison& comparison, double phi_slope) {
    if (!(k2_eff > 0.0))
        throw CertificateError("far-range dissipativity rate is not positive after the diffusion term");
    if (l0 < 0.0) throw ParameterError("l0 must be nonnegative");
    RateCertificate c;
    c.k1_star = k1_star;
    c.k2_eff = k2_eff;
    c.l0 = l0;
    c.beta = beta;
    c.comparison = comparison;
    c.phi_slope = std::isnan(phi_slope) ? 0.5 * k2_eff : phi_slope;
    if (l0 == 0.0) {
        // Nothing to integrate: pure dissipativity.
        c.degenerate = true;
        c.c2 = 2.0 * k2_eff;
        c.c1 = 1.0;
        c.lambda = c.c2 / 2.0;
        c.C = 1.0;
        c.log_lambda = std::log(c.lambda);
        return c;
    }
    if (!(comparison.coeff > 0.0)) throw CertificateError("comparison function vanishes");
    if (comparison.exponent >= 1.0) throw CertificateError("integral g1 diverges at the origin");
    if (k1_star > 0.0 && beta <= comparison.exponent)
        throw CertificateError("integral g2 diverges at the origin");
    const double edge = 2.0 * l0;
    c.g1_end = c.g1(edge);
    c.g2_end = c.g2(edge);
    c.c2 = std::min(2.0 * k2_eff, 1.0 / c.g1_end);
    c.g_end = c.g1_end + 2.0 / c.c2 * c.g2_end;
    const double x = c.c2 * c.g_end;
    c.c1 = std::exp(-x);
    // c2 / (1 + e^x), written so large x does not overflow.
    c.lambda = c.c2 * std::exp(-x) / (1.0 + std::exp(-x));
    c.C = 0.5 * (1.0 + std::exp(x));
    c.log_lambda = std::log(c.c2) - x - std::log1p(std::exp(-x));
    c.log_C = x + std::log1p(std::exp(-x)) - std::log(2.0);
    return c;
}

RateCertificate contraction_certificate(const CouplingKernel& k, const DissipativityProfile& prof,
                                        const CertificateOptions& opts) {
    const auto& levy = k.levy();
    const auto& cf = k.coeff();
    const double kappa0 = opts.kappa0 > 0.0 ? opts.kappa0 : k.kappa();

    // J over the sampled radii plus one point just below kappa.
    std::vector<double> radii = opts.radii;
    const double near_kappa = k.kappa() * (1.0 - 1e-9);
    if (std::find(radii.begin(), radii.end(), near_kappa) == radii.end()) radii.push_back(near_kappa);
    JKCurve jk = estimate_J_K(k, radii, opts.jk);

    // A1 by sampling; a proof would need the supremum over all pairs.
    const double big_lambda = std::sqrt(static_cast<double>(k.dim())) * cf.lambda_nd();
    double a1 = 0.0;
    const auto pairs = distance_pairs(k.dim(), opts.a1_pairs, opts.a1_half_width, 1e-3,
                                      opts.a1_max_distance, opts.jk.seed + 1);
    try {
        for (const auto& [x, y] : pairs) {
            const double r = (x - y).norm();
            const double mass = k.mu_mass(x, y, 0.0, opts.jk.quad).value;
            const double first = k.mu_first_moment(x, y, quad::kInf, opts.jk.quad).value;
            a1 = std::max(a1, big_lambda * mass * std::min(r, kappa0) +
                                  (1.0 + 0.5 * big_lambda * big_lambda) * first);
        }
    } catch (const NumericError& e) {
        throw CertificateError(std::string("A1 is not finite: ") + e.what());
    }
    if (!std::isfinite(a1)) throw CertificateError("A1 is not finite");

    const double lip = cf.lip_sigma();
    double a2 = 0.0, extra = 0.0;
    if (lip > 0.0) {
        const auto mom = levy.moment_integrals();
        if (!mom.big_first_finite) throw CertificateError("first moment of large jumps diverges");
        a2 = mom.big_first + 0.5 * lip * mom.small_square;
        extra = lip * (a1 + a2);
    }
    const double k1_star = prof.k1 + (prof.l0 > 0.0 ? extra * std::pow(prof.l0, 1.0 - prof.beta) : 0.0);
    const double k2_eff = prof.k2 - extra;

    // Comparison exponent: 1 - alpha below one, beta / 2 otherwise.
    const double alpha = levy.coupling_measure().alpha();
    double expo = opts.comparison_exponent;
    if (expo < 0.0) expo = alpha < 1.0 ? 1.0 - alpha : 0.5 * prof.beta;

    PowerComparison comp{0.0, expo};
    double margin = quad::kInf;
    if (prof.l0 > 0.0) {
        const double edge = 2.0 * prof.l0;
        const double kap = k.kappa();
        auto bound = [&](double r) {
            const double m = std::min(kap, r);
            return jk.J_at(m) * m * m / (2.0 * r);
        };
        std::vector<double> grid;
        for (double r : jk.radii)
            if (r <= edge) grid.push_back(r);
        if (kap < edge)
            for (double r : log_grid(kap, edge, 40)) grid.push_back(r);
        else
            grid.push_back(edge);
        double coeff = quad::kInf;
        for (double r : grid) coeff = std::min(coeff, bound(r) / std::pow(r, expo));
        comp.coeff = coeff;
        for (double r : grid) margin = std::min(margin, bound(r) / comp(r));
    }

    RateCertificate cert = assemble_certificate(k1_star, k2_eff, prof.l0, prof.beta, comp);
    cert.jk = std::move(jk);
    cert.A1 = a1;
    cert.A2 = a2;
    cert.a1_half_width = opts.a1_half_width;
    cert.a1_max_distance = opts.a1_max_distance;
    cert.input = prof;
    cert.comparison_margin = margin;
    return cert;
}

// ---------------------------------------------------------- gradient rate

GradientCertificate::GradientCertificate(RadialPtr psi, std::function<double(double)> J,
                                         double eps_max, double constant)
    : psi_(std::move(psi)), J_(std::move(J)), eps_max_(eps_max), constant_(constant) {}

double GradientCertificate::lambda_psi(double eps) const {
    if (!(eps > 0.0 && eps <= eps_max_ * (1.0 + 1e-12)))
        throw ParameterError("lambda_psi needs 0 < eps <= eps_max");
    double sup = -quad::kInf;
    for (double r : log_grid(eps * 1e-10, eps, 400))
        sup = std::max(sup, J_(r) * r * r * psi_->d2(2.0 * r));
    return -sup;
}

double GradientCertificate::envelope(double t, double f_sup) const {
    if (!(t > 0.0)) throw ParameterError("envelope needs t > 0");
    // Running supremum along one grid gives lambda_psi at every grid point.
    const auto grid = log_grid(eps_max_ * 1e-14, eps_max_, 1400);
    double sup = -quad::kInf, best = quad::kInf;
    for (double r : grid) {
        sup = std::max(sup, J_(r) * r * r * psi_->d2(2.0 * r));
        const double lam = -sup;
        if (lam > 0.0) best = std::min(best, 1.0 / psi_->value(r) + 1.0 / (t * lam));
    }
    return constant_ * f_sup * best;
}

GradientCertificate gradient_rate_certificate(const LevyModel& levy, double theta,
                                              std::function<double(double)> J) {
    const double alpha = levy.alpha();
    if (alpha > 1.0) {
        if (!(theta > 0.0)) throw ParameterError("theta must be positive when alpha > 1");
        auto psi = std::make_shared<LogProfile>(theta);
        const double eps = 0.5 * psi->valid_limit();
        return GradientCertificate(psi, std::move(J), eps);
    }
    if (!(theta > 0.0 && theta < alpha)) throw ParameterError("theta must lie in (0, alpha)");
    return GradientCertificate(power_profile(theta), std::move(J), 1.0);
}

// ---------------------------------------------------------------- fitting

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& values, double t_lo,
                   double t_hi) {
    if (t.size() != values.size()) throw ParameterError("decay fit needs matching times and values");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(values[i] > 0.0)) throw ParameterError("decay fit needs positive values in the window");
        xs.push_back(t[i]);
        ys.push_back(std::log(values[i]));
    }
    if (xs.size() < 3) throw ParameterError("decay fit needs at least three points in the window");
    const auto f = stats::fit_line(xs, ys);
    return {-f.slope, f.intercept, f.r2, xs.size()};
}

namespace {

std::optional<DecayFit> fit_positive(const std::vector<double>& t, const std::vector<double>& v,
                                     double lo, double hi) {
    std::vector<double> tt, vv;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= lo && t[i] <= hi && v[i] > 0.0) {
            tt.push_back(t[i]);
            vv.push_back(v[i]);
        }
    if (tt.size() < 3) return std::nullopt;
    return fit_decay(tt, vv, lo, hi);
}

}  // namespace

DecayReport tv_and_w1_report(const CouplingKernel& k, const Vec& x0, const Vec& y0,
                             const SimConfig& sim, const std::vector<double>& grid, double t_lo,
                             double t_hi) {
    const CouplingEnsemble ens = coupling_time_ensemble(k, x0, y0, sim, grid);
    DecayReport rep;
    rep.curve = ens.curve;
    rep.branches = ens.branches;
    std::vector<double> times;
    for (const auto& p : ens.curve) {
        times.push_back(p.t);
        rep.w1_upper.push_back(p.mean_dist);
        rep.w1_lo.push_back(std::max(0.0, p.mean_dist - 1.96 * p.mean_dist_se));
        rep.w1_hi.push_back(p.mean_dist + 1.96 * p.mean_dist_se);
        rep.tv_upper.push_back(2.0 * p.survival);
        rep.tv_lo.push_back(2.0 * p.ci_lo);
        rep.tv_hi.push_back(2.0 * p.ci_hi);
    }
    rep.w1_fit = fit_positive(times, rep.w1_upper, t_lo, t_hi);
    rep.tv_fit = fit_positive(times, rep.tv_upper, t_lo, t_hi);
    if (k.dim() == 1) {
        std::vector<double> a, b;
        for (const auto& v : ens.x_final) a.push_back(v(0));
        for (const auto& v : ens.y_final) b.push_back(v(0));
        rep.w1_exact_horizon = stats::wasserstein1(a, b);
    }
    return rep;
}

// ------------------------------------------------------------- long run

LyapunovReport lyapunov_check(const CoefficientField& cf, const LevyModel& levy,
                              const std::vector<double>& radii, double tail_radius,
                              double scale) {
    const int dim = levy.dim();
    const auto f = soft_norm(dim, scale);
    std::vector<Vec> dirs;
    if (dim == 1) {
        dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    } else if (dim == 2) {
        for (int i = 0; i < 8; ++i) {
            const double a = 2.0 * M_PI * i / 8.0;
            Vec e(2);
            e << std::cos(a), std::sin(a);
            dirs.push_back(e);
        }
    } else {
        for (int i = 0; i < dim; ++i)
            for (double s : {1.0, -1.0}) {
                Vec e = Vec::Zero(dim);
                e(i) = s;
                dirs.push_back(e);
            }
    }
    LyapunovReport rep;
    rep.radii = radii;
    rep.tail_radius = tail_radius;
    GeneratorOptions gopts;
    std::vector<std::pair<double, double>> samples;   // (Lf, f) across the grid
    double worst_tail = -quad::kInf;
    for (double r : radii) {
        double wr = -quad::kInf, wl = -quad::kInf;
        for (const auto& e : dirs) {
            const Vec x = r * e;
            const double lf = generator_L(levy, cf, *f, x, gopts).value;
            const double fx = f->value(x);
            wr = std::max(wr, lf / fx);
            wl = std::max(wl, lf);
            samples.emplace_back(lf, fx);
        }
        rep.worst_ratio.push_back(wr);
        rep.worst_lf.push_back(wl);
        if (r >= tail_radius) worst_tail = std::max(worst_tail, wr);
    }
    rep.c4 = std::isfinite(worst_tail) ? -worst_tail : 0.0;
    rep.c5 = -quad::kInf;
    for (const auto& [lf, fx] : samples) rep.c5 = std::max(rep.c5, lf + rep.c4 * fx);
    rep.ok = rep.c4 > 0.0;
    return rep;
}

bool InvariantProbe::ok() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const PairTest& p) { return p.within_band; });
}

InvariantProbe invariant_measure_probe(const CouplingKernel& k, const std::vector<Vec>& starts,
                                       const SimConfig& sim, int n_perm, std::size_t energy_sample,
                                       std::size_t cauchy_paths) {
    const auto& cf = k.coeff();
    const auto& levy = k.levy();
    InvariantProbe out;
    out.starts = starts;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        SimConfig s = sim;
        std::uint64_t state = sim.seed + 0x9e3779b97f4a7c15ULL * (i + 1);
        s.seed = splitmix64(state);
        out.samples.push_back(marginal_endpoints(cf, levy, starts[i], s));
    }
    for (std::size_t a = 0; a < starts.size(); ++a)
        for (std::size_t b = a + 1; b < starts.size(); ++b) {
            InvariantProbe::PairTest pt;
            pt.a = a;
            pt.b = b;
            const std::uint64_t seed = sim.seed + 1000 + a * starts.size() + b;
            if (k.dim() == 1) {
                std::vector<double> u, v;
                for (const auto& p : out.samples[a]) u.push_back(p(0));
                for (const auto& p : out.samples[b]) v.push_back(p(0));
                pt.test = stats::energy_permutation_test(u, v, n_perm, seed);
            } else {
                const auto m = std::min({energy_sample, out.samples[a].size(), out.samples[b].size()});
                std::vector<Vec> u(out.samples[a].begin(), out.samples[a].begin() + static_cast<long>(m));
                std::vector<Vec> v(out.samples[b].begin(), out.samples[b].begin() + static_cast<long>(m));
                pt.test = stats::energy_permutation_test(u, v, n_perm, seed);
            }
            pt.within_band = pt.test.observed <= pt.test.quantile95;
            out.pairs.push_back(pt);
        }

    if (!starts.empty() && cauchy_paths > 0 && sim.horizon > 0.0) {
        const double h = sim.horizon;
        const std::vector<double> times{h / 16, h / 8, h / 4, h / 2, h};
        SimConfig s = sim;
        s.seed = sim.seed ^ 0x3c6ef372fe94f82bULL;
        const Recording rec{times, false};
        std::vector<std::vector<double>> at(times.size());
        for (std::size_t i = 0; i < cauchy_paths; ++i) {
            const auto p = simulate_marginal(cf, levy, starts.front(), s, i, rec);
            for (std::size_t j = 0; j < times.size(); ++j) {
                const auto it = std::find(p.times.begin(), p.times.end(), times[j]);
                at[j].push_back(p.states[static_cast<std::size_t>(it - p.times.begin())](0));
            }
        }
        for (std::size_t j = 0; j + 1 < times.size(); ++j) {
            out.cauchy_times.push_back(times[j]);
            out.cauchy_w1.push_back(stats::wasserstein1(at[j], at[j + 1]));
        }
    }
    return out;
}

}  // namespace lmc
