#include "lmc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "lmc/errors.hpp"

namespace lmc::quad {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

void append_quadratic_roots(double qa, double qb, double qc, std::vector<double>& out) {
    // qa r^2 + qb r + qc = 0, positive roots only.
    constexpr double tiny = 1e-300;
    if (std::abs(qa) < 1e-14 * (std::abs(qb) + std::abs(qc)) || std::abs(qa) < tiny) {
        if (std::abs(qb) > tiny) {
            const double r = -qc / qb;
            if (r > 0.0) out.push_back(r);
        }
        return;
    }
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    // Numerically stable pair.
    const double q = -0.5 * (qb + std::copysign(sq, qb));
    double r1 = q / qa;
    double r2 = (q != 0.0) ? qc / q : -qb / (2.0 * qa);
    if (r1 > 0.0) out.push_back(r1);
    if (r2 > 0.0 && r2 != r1) out.push_back(r2);
}

// Globally adaptive bisection: the piece with the largest Kronrod error
// estimate is split until the total error meets either tolerance.
double adaptive_gk(const std::function<double(double)>& h, double a, double b, double rel_tol,
                   double abs_tol, unsigned max_depth, double* err) {
    struct Piece {
        double a, b, value, error;
        unsigned depth;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    auto eval = [&](double lo, double hi, unsigned depth) {
        double e = 0.0;
        const double v = GK::integrate(h, lo, hi, 0, 0.0, &e);
        return Piece{lo, hi, v, e, depth};
    };
    std::priority_queue<Piece> heap;
    heap.push(eval(a, b, 0));
    double value = heap.top().value;
    double error = heap.top().error;
    const std::size_t max_pieces = std::size_t{8} << std::min(max_depth, 12u);
    while (std::isfinite(value) && error > std::max(abs_tol, rel_tol * std::abs(value)) &&
           heap.size() < max_pieces) {
        const Piece p = heap.top();
        if (p.depth >= 3 * max_depth) break;
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        const Piece l = eval(p.a, m, p.depth + 1);
        const Piece r = eval(m, p.b, p.depth + 1);
        value += l.value + r.value - p.value;
        error += l.error + r.error - p.error;
        heap.push(l);
        heap.push(r);
    }
    // Re-sum to shed the drift of the running updates.
    value = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    *err = error;
    return value;
}

}  // namespace

void append_sphere_roots(const Mat& a, const Vec& c, const Vec& e, double rho,
                         std::vector<double>& out) {
    const Vec ae = a * e;
    append_quadratic_roots(ae.squaredNorm(), 2.0 * ae.dot(c), c.squaredNorm() - rho * rho, out);
}

void append_cone_roots(const Mat& a, const Vec& c, const Vec& e, double k,
                       std::vector<double>& out) {
    const Vec ae = a * e;
    append_quadratic_roots(ae.squaredNorm() - k * k, 2.0 * ae.dot(c), c.squaredNorm(), out);
}

void append_plane_root(const Mat& a, const Vec& c, const Vec& e, int i, double level,
                       std::vector<double>& out) {
    const double slope = (a * e)(i);
    if (slope == 0.0) return;
    const double r = (level - c(i)) / slope;
    if (r > 0.0) out.push_back(r);
}

Result integrate_interval(const std::function<double(double)>& g, double a, double b,
                          double rel_tol, unsigned max_depth, double abs_tol) {
    Result res;
    if (!(b > a)) return res;
    if (std::isinf(b)) {
        // r = exp(s): algebraic tails become exponential ones.
        boost::math::quadrature::exp_sinh<double> integrator(9);
        auto h = [&](double s) {
            const double r = std::exp(s);
            if (!std::isfinite(r)) return 0.0;
            return g(r) * r;
        };
        double err = 0.0;
        double l1 = 0.0;
        res.value = integrator.integrate(h, std::log(a), kInf, rel_tol, &err, &l1);
        res.error = err;
        return res;
    }
    if (a == 0.0) {
        // Double-exponential rule copes with power singularities at the origin.
        boost::math::quadrature::tanh_sinh<double> integrator(10);
        double err = 0.0;
        double l1 = 0.0;
        res.value = integrator.integrate(g, 0.0, b, rel_tol, &err, &l1);
        res.error = err;
        return res;
    }
    // Nodes are placed on [0,1] and mapped, so narrow intervals far from the
    // origin do not lose their abscissae to rounding.
    double err = 0.0;
    if (b / a > 2.0) {
        const double la = std::log(a);
        const double span = std::log(b) - la;
        auto h = [&](double t) {
            const double r = std::exp(la + t * span);
            return g(r) * r * span;
        };
        res.value = adaptive_gk(h, 0.0, 1.0, rel_tol, abs_tol, max_depth, &err);
    } else {
        const double span = b - a;
        auto h = [&](double t) { return g(a + t * span) * span; };
        res.value = adaptive_gk(h, 0.0, 1.0, rel_tol, abs_tol, max_depth, &err);
    }
    res.error = err;
    return res;
}

namespace {

Result integrate_ray(const RayDomain& dom, const RayIntegrand& f, const RayBreaks& breaks,
                     const Options& opts, const Vec& e, std::vector<double>& scratch) {
    Result res;
    const double hi = std::min(dom.extent(e), opts.r_ceiling);
    const double lo = opts.r_floor;
    if (!(hi > lo)) return res;

    scratch.clear();
    scratch.push_back(1.0);
    if (breaks) breaks(e, scratch);
    std::vector<double> knots;
    knots.reserve(scratch.size() + 2);
    knots.push_back(lo);
    for (double r : scratch)
        if (r > lo && r < hi && std::isfinite(r)) knots.push_back(r);
    knots.push_back(hi);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    const int d = dom.dim;
    const double jac_pow = d - 1;
    Vec z(d);
    auto g = [&](double r) {
        // Below this radius every integrable power law contributes nothing.
        if (r < 1e-200) return 0.0;
        z = r * e;
        const double v = f(z, r);
        return jac_pow == 0 ? v : v * std::pow(r, jac_pow);
    };
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i];
        const double b = knots[i + 1];
        const Result piece = integrate_interval(g, a, b, opts.rel_tol, opts.max_depth, opts.abs_tol);
        res.value += piece.value;
        res.error += piece.error;
    }
    return res;
}

}  // namespace

Result integrate(const RayDomain& dom, const RayIntegrand& f, const RayBreaks& breaks,
                 const Options& opts) {
    std::vector<double> scratch;
    Result total;
    if (dom.dim == 1) {
        Vec e(1);
        for (double dir : dom.directions_1d) {
            e(0) = dir;
            const Result r = integrate_ray(dom, f, breaks, opts, e, scratch);
            total.value += r.value;
            total.error += r.error;
        }
        return total;
    }
    if (dom.dim == 2) {
        Vec e(2);
        double inner_err = 0.0;
        auto ray = [&](double theta) {
            e(0) = std::cos(theta);
            e(1) = std::sin(theta);
            const Result r = integrate_ray(dom, f, breaks, opts, e, scratch);
            inner_err = std::max(inner_err, r.error);
            return r.value;
        };
        for (const auto& [a, b] : dom.sectors) {
            double err = 0.0;
            total.value +=
                adaptive_gk(ray, a, b, opts.angle_rel_tol, opts.abs_tol, opts.max_depth, &err);
            total.error += err + inner_err * (b - a);
        }
        return total;
    }
    throw ParameterError("quadrature supports dimensions 1 and 2 only");
}

}  // namespace lmc::quad
