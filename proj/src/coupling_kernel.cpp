#include "lmc/coupling_kernel.hpp"

#include <algorithm>
#include <cmath>

#include "lmc/errors.hpp"

namespace lmc {

Vec clipped_difference(const Vec& x, const Vec& y, double kappa) {
    Vec u = x - y;
    const double r = u.norm();
    if (r > kappa) u *= kappa / r;
    return u;
}

CouplingKernel::CouplingKernel(const LevyModel& levy, const CoefficientField& coeff, double kappa)
    : levy_(levy), coeff_(coeff), kappa_(kappa) {
    if (!(kappa > 0.0)) throw ParameterError("kappa must be positive");
    if (levy.dim() != coeff.dim())
        throw ParameterError("Levy model and coefficients disagree on dimension");
}

AffineMap CouplingKernel::affine(const Vec& x, const Vec& y) const {
    AffineMap a;
    const int d = dim();
    a.distance = (x - y).norm();
    if (a.distance == 0.0) {
        a.identity = true;
        return a;
    }
    a.identity = false;
    const Vec c = clipped_difference(x, y, kappa_);
    if (coeff_.constant_diffusion()) {
        const Mat sinv = coeff_.diffusion_inverse(y);
        a.m = Mat::Identity(d, d);
        a.m_inv = Mat::Identity(d, d);
        a.v = sinv * c;
        a.v_inv = -a.v;
        a.det = 1.0;
        return a;
    }
    const Mat sx = coeff_.diffusion(x);
    const Mat sy = coeff_.diffusion(y);
    const Mat sxi = coeff_.diffusion_inverse(x);
    const Mat syi = coeff_.diffusion_inverse(y);
    if (!syi.allFinite() || !sxi.allFinite())
        throw StructuralError("diffusion matrix is not invertible at the coupled pair");
    a.m = syi * sx;
    a.v = syi * c;
    a.m_inv = sxi * sy;
    a.v_inv = -(sxi * c);
    a.det = std::abs(a.m.determinant());
    if (!(a.det > 0.0)) throw StructuralError("coupling map is singular");
    return a;
}

Vec CouplingKernel::psi(const Vec& x, const Vec& y, const Vec& z) const {
    return affine(x, y).psi(z);
}

Vec CouplingKernel::psi_inverse(const Vec& x, const Vec& y, const Vec& z) const {
    return affine(x, y).psi_inverse(z);
}

double CouplingKernel::mu_density(const AffineMap& a, const Vec& z, bool inverse,
                                  double trunc) const {
    const LevyModel& q0 = levy_.coupling_measure();
    const double own = q0.density_truncated(z, trunc);
    if (own == 0.0 || a.identity) return own;
    const Vec w = inverse ? Vec(a.m_inv * z + a.v_inv) : Vec(a.m * z + a.v);
    const double image = q0.density_truncated(w, trunc);
    const double factor = inverse ? 1.0 / a.det : a.det;
    return std::min(own, image * factor);
}

std::pair<double, double> CouplingKernel::rho(const AffineMap& a, const Vec& z,
                                              double trunc) const {
    const double q = levy_.density_truncated(z, trunc);
    if (!(q > 0.0)) throw DomainError("thinning ratio undefined where the Levy density vanishes");
    const double r1 = std::clamp(mu_density(a, z, false, trunc) / q, 0.0, 1.0);
    const double r2 = std::clamp(mu_density(a, z, true, trunc) / q, 0.0, 1.0);
    return {r1, r2};
}

std::pair<double, double> CouplingKernel::rho(const Vec& x, const Vec& y, const Vec& z) const {
    if (z.squaredNorm() == 0.0) throw DomainError("thinning ratio undefined at z = 0");
    return rho(affine(x, y), z, 0.0);
}

ThinningDecision CouplingKernel::thin(const AffineMap& a, const Mat& sigma_y, const Vec& z,
                                      double u, double trunc) const {
    ThinningDecision out;
    if (a.identity) {
        out.branch = Branch::Synchronize;
        out.y_jump = sigma_y * z;
        return out;
    }
    const auto [r1, r2] = rho(a, z, trunc);
    if (u <= 0.5 * r1) {
        out.branch = Branch::Coalesce;
        out.y_jump = sigma_y * a.psi(z);
    } else if (u <= 0.5 * (r1 + r2)) {
        out.branch = Branch::Reflect;
        out.y_jump = sigma_y * a.psi_inverse(z);
    } else {
        out.branch = Branch::Synchronize;
        out.y_jump = sigma_y * z;
    }
    return out;
}

void CouplingKernel::append_mu_breaks(const AffineMap& a, bool inverse, const Vec& e,
                                      double trunc, std::vector<double>& out) const {
    if (a.identity) return;
    const LevyModel& q0 = levy_.coupling_measure();
    const Mat& m = inverse ? a.m_inv : a.m;
    const Vec& v = inverse ? a.v_inv : a.v;
    const double factor = inverse ? 1.0 / a.det : a.det;
    q0.append_support_crossings(m, v, e, trunc, out);
    // |m z + v| = factor^{1/(d+alpha)} |z| is where the minimum switches branch.
    quad::append_cone_roots(m, v, e, std::pow(factor, 1.0 / (q0.dim() + q0.alpha())), out);
    quad::append_sphere_roots(m, v, e, 0.0, out);
}

quad::Result CouplingKernel::integrate_mu(const AffineMap& a, bool inverse,
                                          const std::function<double(const Vec&, double)>& weight,
                                          double trunc, quad::Options opts) const {
    opts.r_floor = std::max(opts.r_floor, trunc);
    auto f = [&](const Vec& z, double r) {
        const double m = mu_density(a, z, inverse, trunc);
        return m == 0.0 ? 0.0 : m * weight(z, r);
    };
    auto breaks = [&](const Vec& e, std::vector<double>& out) {
        append_mu_breaks(a, inverse, e, trunc, out);
    };
    return quad::integrate(mu_domain(), f, breaks, opts);
}

namespace {

// Accepts errors up to ten times the looser of the two requested tolerances.
void require_converged(const quad::Result& r, const char* what, const quad::Options& opts) {
    const double rel = std::max(1e-6, 10.0 * std::max(opts.rel_tol, opts.angle_rel_tol));
    if (!std::isfinite(r.value) || r.error > rel * std::abs(r.value) + 1e-12)
        throw NumericError(std::string(what) + " quadrature did not converge", r.error);
}

}  // namespace

quad::Result CouplingKernel::mu_mass(const Vec& x, const Vec& y, double trunc,
                                     const quad::Options& opts) const {
    const AffineMap a = affine(x, y);
    if (a.identity && trunc == 0.0) throw DomainError("coupling mass is infinite at x = y");
    auto r = integrate_mu(a, false, [](const Vec&, double) { return 1.0; }, trunc, opts);
    require_converged(r, "coupling mass", opts);
    return r;
}

quad::Result CouplingKernel::mu_inverse_mass(const Vec& x, const Vec& y, double trunc,
                                             const quad::Options& opts) const {
    const AffineMap a = affine(x, y);
    if (a.identity && trunc == 0.0) throw DomainError("coupling mass is infinite at x = y");
    auto r = integrate_mu(a, true, [](const Vec&, double) { return 1.0; }, trunc, opts);
    require_converged(r, "coupling mass", opts);
    return r;
}

quad::Result CouplingKernel::mu_first_moment(const Vec& x, const Vec& y, double radius,
                                             const quad::Options& base) const {
    const AffineMap a = affine(x, y);
    if (a.identity) throw DomainError("coupling moment needs x != y");
    quad::Options opts = base;
    opts.r_ceiling = std::min(opts.r_ceiling, radius);
    auto w = [](const Vec&, double r) { return r; };
    auto r1 = integrate_mu(a, false, w, 0.0, opts);
    auto r2 = integrate_mu(a, true, w, 0.0, opts);
    quad::Result out{r1.value + r2.value, r1.error + r2.error};
    require_converged(out, "coupling first moment", opts);
    return out;
}

double CouplingKernel::pushforward_identity_check(
    const Vec& x, const Vec& y, const std::vector<std::function<double(const Vec&)>>& hs,
    const quad::Options& opts) const {
    const AffineMap a = affine(x, y);
    if (a.identity) throw DomainError("pushforward check needs x != y");
    const double mass = integrate_mu(a, false, [](const Vec&, double) { return 1.0; }, 0.0, opts).value;
    double worst = 0.0;
    for (const auto& h : hs) {
        const double lhs =
            integrate_mu(a, false, [&](const Vec& z, double) { return h(a.psi(z)); }, 0.0, opts).value;
        const double rhs =
            integrate_mu(a, true, [&](const Vec& z, double) { return h(z); }, 0.0, opts).value;
        const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-9 * mass});
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
}

}  // namespace lmc
