#include "lmc/generator.hpp"

#include <algorithm>
#include <cmath>

#include "lmc/errors.hpp"

namespace lmc {

namespace {

double safe_ratio(double num, double den) {
    return den > 0.0 ? num / den : quad::kInf;
}

// Radii where the support of the coupling measure itself starts or ends.
void append_own_support(const LevyModel& q0, const Vec& e, std::vector<double>& out) {
    const int d = q0.dim();
    q0.append_support_crossings(Mat::Identity(d, d), zeros(d), e, 0.0, out);
}

Mat2d stack(const Mat& top, const Mat& bottom) {
    Mat2d b(top.rows() + bottom.rows(), top.cols());
    b.topRows(top.rows()) = top;
    b.bottomRows(bottom.rows()) = bottom;
    return b;
}

}  // namespace

GeneratorValue generator_L(const LevyModel& levy, const CoefficientField& cf, const SmoothFn& f,
                           const Vec& x, const GeneratorOptions& opts) {
    if (x.size() != levy.dim() || cf.dim() != levy.dim())
        throw ParameterError("generator inputs disagree on dimension");
    const Mat sx = cf.diffusion(x);
    const Vec grad = f.grad(x);
    const Mat hess = f.hess(x);
    const double fx = f.value(x);
    const double inner = opts.inner_factor * levy.eta();
    const double tau = opts.taylor_switch;

    GeneratorValue out;
    out.value = grad.dot(cf.drift(x));

    auto integrand = [&](const Vec& z, double r) {
        const double q = levy.density_raw(z);
        if (q == 0.0) return 0.0;
        const Vec w = sx * z;
        if (r <= 1.0 && w.norm() < tau) return q * 0.5 * w.dot(hess * w);
        double v = f.value(x + w) - fx;
        if (r <= 1.0) v -= grad.dot(w);
        return q * v;
    };
    auto breaks = [&](const Vec& e, std::vector<double>& b) {
        b.push_back(safe_ratio(tau, (sx * e).norm()));
    };
    quad::Options qo = opts.quad;
    qo.r_floor = std::max(qo.r_floor, inner);
    const auto res = quad::integrate(levy.ray_domain(), integrand, breaks, qo);
    const double s = levy.small_ball_covariance_scale(inner);
    out.value += res.value + 0.5 * s * (sx.transpose() * hess * sx).trace();
    out.error = res.error;
    const double lam = cf.lambda_nd();
    out.inner_bound = f.hess_bound() * lam * lam * levy.small_ball_second_moment(inner);
    return out;
}

GeneratorValue coupling_generator(const CouplingKernel& k, const JointFn& h, const Vec& x,
                                  const Vec& y, const GeneratorOptions& opts) {
    const LevyModel& levy = k.levy();
    const LevyModel& q0 = levy.coupling_measure();
    const CoefficientField& cf = k.coeff();
    const int d = k.dim();
    if (x.size() != d || y.size() != d) throw ParameterError("point dimension mismatch");

    const AffineMap a = k.affine(x, y);
    const Mat sx = cf.diffusion(x);
    const Mat sy = cf.diffusion(y);
    const Mat2d b = stack(sx, sy);
    const Vec2d g = h.grad(x, y);
    const Vec gx = g.head(d);
    const Vec gy = g.tail(d);
    const Mat2d hess = h.hess(x, y);
    const double h0 = h.value(x, y);
    const double inner = opts.inner_factor * levy.eta();
    const double tau = opts.taylor_switch;

    GeneratorValue out;
    out.value = gx.dot(cf.drift(x)) + gy.dot(cf.drift(y));

    // Jump of (x, y) along the branch that moves y by sigma(y) w.
    auto branch = [&](const Vec& wx, const Vec& wy_pre, bool x_small, bool y_small) {
        const Vec wy = sy * wy_pre;
        double v = h.value(x + wx, y + wy) - h0;
        if (x_small) v -= gx.dot(wx);
        if (y_small) v -= gy.dot(wy);
        return v;
    };

    auto integrand = [&](const Vec& z, double r) {
        const double q = levy.density_raw(z);
        if (q == 0.0) return 0.0;
        const bool small = r <= 1.0;
        const Vec wx = sx * z;
        double total = 0.0;
        double mp = 0.0, mi = 0.0;
        if (!a.identity) {
            mp = k.mu_density(a, z, false);
            mi = k.mu_density(a, z, true);
            if (mp > 0.0) {
                const Vec pz = a.psi(z);
                total += 0.5 * mp * branch(wx, pz, small, pz.norm() <= 1.0);
            }
            if (mi > 0.0) {
                const Vec pz = a.psi_inverse(z);
                total += 0.5 * mi * branch(wx, pz, small, pz.norm() <= 1.0);
            }
        }
        if (r < inner) return total;
        const double weight = q - 0.5 * mp - 0.5 * mi;
        if (weight <= 0.0) return total;
        const Vec2d w = b * z;
        double v;
        if (small && w.norm() < tau)
            v = 0.5 * w.dot(hess * w);
        else
            v = branch(wx, z, small, small);
        return total + weight * v;
    };
    auto breaks = [&](const Vec& e, std::vector<double>& out_b) {
        out_b.push_back(inner);
        out_b.push_back(safe_ratio(tau, (b * e).norm()));
        append_own_support(q0, e, out_b);
        if (a.identity) return;
        k.append_mu_breaks(a, false, e, 0.0, out_b);
        k.append_mu_breaks(a, true, e, 0.0, out_b);
        quad::append_sphere_roots(a.m, a.v, e, 1.0, out_b);
        quad::append_sphere_roots(a.m_inv, a.v_inv, e, 1.0, out_b);
    };
    quad::Options qo = opts.quad;
    if (a.identity) qo.r_floor = std::max(qo.r_floor, inner);
    const auto res = quad::integrate(levy.ray_domain(), integrand, breaks, qo);
    const double s = levy.small_ball_covariance_scale(inner);
    out.value += res.value + 0.5 * s * (b.transpose() * hess * b).trace();
    out.error = res.error;
    const double lam = cf.lambda_nd();
    out.inner_bound = h.hess_bound() * 2.0 * lam * lam * levy.small_ball_second_moment(inner);
    return out;
}

RadialBreakdown coupling_generator_radial(const CouplingKernel& k, const RadialFn& f, const Vec& x,
                                          const Vec& y, const GeneratorOptions& opts) {
    const LevyModel& levy = k.levy();
    const LevyModel& q0 = levy.coupling_measure();
    const CoefficientField& cf = k.coeff();
    const int d = k.dim();
    const Vec u = x - y;
    const double r = u.norm();
    if (r == 0.0) throw DomainError("radial coupling generator needs x != y");

    const AffineMap a = k.affine(x, y);
    const Mat sx = cf.diffusion(x);
    const Mat sy = cf.diffusion(y);
    const Mat diff = sx - sy;
    const double diff_norm = hs_norm(diff);
    const double f1 = f.d1(r);
    const double f2 = f.d2(r);
    const double fr = f.value(r);
    const double inner = opts.inner_factor * levy.eta();
    const double tau = opts.taylor_switch;
    const quad::RayDomain mu_dom = k.mu_domain();

    RadialBreakdown out;
    out.drift = f1 / r * (cf.drift(x) - cf.drift(y)).dot(u);

    auto mu_breaks = [&](const Vec& e, std::vector<double>& b, bool inverse) {
        append_own_support(q0, e, b);
        k.append_mu_breaks(a, inverse, e, 0.0, b);
    };

    if (diff_norm > 0.0) {
        quad::Options qo = opts.quad;
        qo.r_ceiling = std::min(qo.r_ceiling, 1.0);
        const Vec du = diff.transpose() * u;
        auto g = [&](const Vec& z, double) {
            const double m = k.mu_density(a, z, false) + k.mu_density(a, z, true);
            return m == 0.0 ? 0.0 : m * du.dot(z);
        };
        auto br = [&](const Vec& e, std::vector<double>& b) {
            mu_breaks(e, b, false);
            mu_breaks(e, b, true);
        };
        const auto res = quad::integrate(mu_dom, g, br, qo);
        out.compensator = -f1 / (2.0 * r) * res.value;
        out.error += std::abs(f1 / (2.0 * r)) * res.error;
    }

    {
        const Mat lin = sx - sy * a.m;
        const Vec off = u - sy * a.v;
        auto g = [&](const Vec& z, double) {
            const double m = k.mu_density(a, z, false);
            return m == 0.0 ? 0.0 : 0.5 * m * (f.value((lin * z + off).norm()) - fr);
        };
        auto br = [&](const Vec& e, std::vector<double>& b) {
            mu_breaks(e, b, false);
            quad::append_sphere_roots(lin, off, e, 0.0, b);
        };
        const auto res = quad::integrate(mu_dom, g, br, opts.quad);
        out.coalesce = res.value;
        out.error += res.error;
    }
    {
        const Mat lin = sx - sy * a.m_inv;
        const Vec off = u - sy * a.v_inv;
        auto g = [&](const Vec& z, double) {
            const double m = k.mu_density(a, z, true);
            return m == 0.0 ? 0.0 : 0.5 * m * (f.value((lin * z + off).norm()) - fr);
        };
        auto br = [&](const Vec& e, std::vector<double>& b) {
            mu_breaks(e, b, true);
            quad::append_sphere_roots(lin, off, e, 0.0, b);
        };
        const auto res = quad::integrate(mu_dom, g, br, opts.quad);
        out.reflect = res.value;
        out.error += res.error;
    }

    if (diff_norm > 0.0) {
        const Vec e_u = u / r;
        const Mat proj = e_u * e_u.transpose();
        const Mat hf = f2 * proj + f1 / r * (Mat::Identity(d, d) - proj);
        auto g = [&](const Vec& z, double rz) {
            const double q = levy.density_raw(z);
            if (q == 0.0) return 0.0;
            const double weight = q - 0.5 * k.mu_density(a, z, false) - 0.5 * k.mu_density(a, z, true);
            if (weight <= 0.0) return 0.0;
            const Vec w = diff * z;
            double v;
            if (rz <= 1.0 && w.norm() < tau * r) {
                v = 0.5 * w.dot(hf * w);
            } else {
                v = f.value((u + w).norm()) - fr;
                if (rz <= 1.0) v -= f1 / r * u.dot(w);
            }
            return weight * v;
        };
        auto br = [&](const Vec& e, std::vector<double>& b) {
            b.push_back(safe_ratio(tau * r, (diff * e).norm()));
            mu_breaks(e, b, false);
            mu_breaks(e, b, true);
            quad::append_sphere_roots(diff, u, e, 0.0, b);
        };
        quad::Options qo = opts.quad;
        qo.r_floor = std::max(qo.r_floor, inner);
        const auto res = quad::integrate(levy.ray_domain(), g, br, qo);
        const double s = levy.small_ball_covariance_scale(inner);
        out.synchronous = res.value + 0.5 * s * (diff.transpose() * hf * diff).trace();
        out.error += res.error;
    }

    out.total = out.drift + out.compensator + out.coalesce + out.reflect + out.synchronous;
    return out;
}

double coalesce_closed_form(const CouplingKernel& k, const RadialFn& f, const Vec& x, const Vec& y,
                            const GeneratorOptions& opts) {
    const double r = (x - y).norm();
    const double mass = k.mu_mass(x, y, 0.0, opts.quad).value;
    return 0.5 * mass * (f.value(r - std::min(r, k.kappa())) - f.value(r));
}

MarginalityReport marginality_suite(const CouplingKernel& k, const std::vector<SmoothPtr>& f_list,
                                    const std::vector<SmoothPtr>& g_list,
                                    const std::vector<PointPair>& points,
                                    const GeneratorOptions& opts) {
    if (f_list.size() != g_list.size()) throw ParameterError("test function lists differ in length");
    MarginalityReport rep;
    const int d = k.dim();
    for (std::size_t i = 0; i < f_list.size(); ++i) {
        const JointPtr h = direct_sum(f_list[i], g_list[i], d);
        for (const auto& [x, y] : points) {
            MarginalityRow row;
            row.f_index = static_cast<int>(i);
            row.x = x;
            row.y = y;
            row.coupled = coupling_generator(k, *h, x, y, opts).value;
            row.lf = f_list[i] ? generator_L(k.levy(), k.coeff(), *f_list[i], x, opts).value : 0.0;
            row.lg = g_list[i] ? generator_L(k.levy(), k.coeff(), *g_list[i], y, opts).value : 0.0;
            row.rel_error =
                std::abs(row.coupled - row.lf - row.lg) / (1.0 + std::abs(row.lf) + std::abs(row.lg));
            rep.max_rel_error = std::max(rep.max_rel_error, row.rel_error);
            rep.rows.push_back(std::move(row));
        }
    }
    return rep;
}

DriftBoundReport drift_bound_check(const CouplingKernel& k, const RadialFn& f, const Vec& x,
                                   const Vec& y, double radius, const GeneratorOptions& opts) {
    if (!(radius >= 1.0)) throw ParameterError("cut-off radius must be at least 1");
    const LevyModel& levy = k.levy();
    const CoefficientField& cf = k.coeff();
    const MomentIntegrals mom = levy.moment_integrals(opts.quad);
    const bool infinite = std::isinf(radius);
    if (infinite && !mom.big_first_finite)
        throw ParameterError("R = inf needs a finite first moment of the large jumps");

    DriftBoundReport rep;
    rep.radius = radius;
    rep.terms = coupling_generator_radial(k, f, x, y, opts);
    rep.lhs = rep.terms.total;
    rep.lhs_error = rep.terms.error;

    const int d = k.dim();
    const double r = (x - y).norm();
    const double rk = std::min(r, k.kappa());
    const double mass = k.mu_mass(x, y, 0.0, opts.quad).value;
    const double diff_norm = hs_norm(cf.diffusion(x) - cf.diffusion(y));
    const double lam = std::sqrt(static_cast<double>(d)) * cf.lambda_nd();

    rep.theta0 = 0.5 * mass * (f.value(r + rk) + f.value(r - rk) - 2.0 * f.value(r));
    rep.drift = rep.terms.drift;

    if (diff_norm > 0.0) {
        double big = 0.0;
        if (infinite) {
            big = mom.big_first;
        } else if (radius > 1.0) {
            quad::Options qo = opts.quad;
            qo.r_floor = 1.0;
            qo.r_ceiling = radius;
            big = quad::integrate(
                      levy.ray_domain(), [&](const Vec& z, double rz) { return rz * levy.density_raw(z); },
                      nullptr, qo)
                      .value;
        }
        rep.theta_inner = lam * mass * rk + diff_norm / (2.0 * r) * mom.small_square +
                          (1.0 + 0.5 * lam * lam) * k.mu_first_moment(x, y, radius, opts.quad).value +
                          big;
        if (!infinite) {
            quad::Options qo = opts.quad;
            qo.r_floor = radius;
            const double scale = (1.0 + lam * lam) * diff_norm;
            rep.theta_outer =
                2.0 * quad::integrate(
                          levy.ray_domain(),
                          [&](const Vec& z, double rz) {
                              const double q = levy.density_raw(z);
                              return q == 0.0 ? 0.0 : q * f.value(scale * rz);
                          },
                          nullptr, qo)
                          .value;
        }
    }
    rep.rhs = rep.theta0 + rep.drift + f.d1(r) * diff_norm * rep.theta_inner + rep.theta_outer;
    rep.slack = rep.rhs - rep.lhs;
    return rep;
}

}  // namespace lmc
