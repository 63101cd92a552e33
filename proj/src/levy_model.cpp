#include "lmc/levy_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lmc/errors.hpp"

namespace lmc {

std::string_view to_string(Support s) {
    switch (s) {
        case Support::FullSpace: return "FullSpace";
        case Support::Ball: return "Ball";
        case Support::HalfSlab: return "HalfSlab";
        case Support::Slab: return "Slab";
    }
    return "?";
}

Support parse_support(std::string_view name) {
    if (name == "FullSpace") return Support::FullSpace;
    if (name == "Ball") return Support::Ball;
    if (name == "HalfSlab") return Support::HalfSlab;
    if (name == "Slab") return Support::Slab;
    throw ConfigError("unknown support variant '" + std::string(name) + "'");
}

double sphere_area(int dim) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

double sphere_abs_moment(int dim, double p) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * (dim - 1)) * std::tgamma(0.5 * (p + 1.0)) /
           std::tgamma(0.5 * (dim + p));
}

LevyModel::LevyModel(int dim, double alpha, double c0, double eta, Support support)
    : dim_(dim), alpha_(alpha), c0_(c0), eta_(eta), support_(support) {
    if (dim < 1 || dim > kMaxDim)
        throw ParameterError("dimension must lie in [1," + std::to_string(kMaxDim) + "]");
    if (!(alpha > 0.0 && alpha < 2.0)) throw ParameterError("alpha must lie in (0,2)");
    if (!(c0 > 0.0) || !std::isfinite(c0)) throw ParameterError("c0 must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw ParameterError("eta must lie in (0,1]");
    // int (1 ^ |z|^2) nu(dz) from the closed forms.
    const double rho = support == Support::FullSpace ? 1.0 : eta;
    const double integrability = small_ball_second_moment(rho) + tail_mass(rho);
    if (!std::isfinite(integrability))
        throw ParameterError("Levy measure fails int (1 ^ |z|^2) nu(dz) < inf");
}

bool LevyModel::contains(const LevyModel& o) const {
    if (o.dim_ != dim_ || o.c0_ > c0_) return false;
    // A lighter exponent is still dominated when the sub-measure lives in the unit ball.
    const bool bounded = o.support_ == Support::Ball || (dim_ == 1 && o.support_ != Support::FullSpace);
    if (o.alpha_ > alpha_ || (o.alpha_ < alpha_ && !bounded)) return false;
    switch (support_) {
        case Support::FullSpace: return true;
        case Support::Ball: return o.support_ == Support::Ball && o.eta_ <= eta_;
        case Support::HalfSlab: return o.support_ == Support::HalfSlab && o.eta_ <= eta_;
        case Support::Slab:
            return o.support_ != Support::FullSpace && o.eta_ <= eta_;
    }
    return false;
}

void LevyModel::set_coupling_measure(const LevyModel& sub) {
    if (!contains(sub))
        throw ParameterError("coupling sub-measure " + sub.describe() + " is not dominated by " +
                             describe());
    sub_ = std::make_shared<const LevyModel>(sub);
}

bool LevyModel::in_support(const Vec& z) const {
    switch (support_) {
        case Support::FullSpace: return true;
        case Support::Ball: return z.squaredNorm() <= eta_ * eta_;
        case Support::HalfSlab: return z(0) > 0.0 && z(0) <= eta_;
        case Support::Slab: return std::abs(z(0)) <= eta_;
    }
    return false;
}

double LevyModel::density_raw(const Vec& z) const {
    if (!in_support(z)) return 0.0;
    const double r2 = z.squaredNorm();
    return c0_ * std::pow(r2, -0.5 * (dim_ + alpha_));
}

double LevyModel::density(const Vec& z) const {
    if (z.size() != dim_) throw DomainError("point dimension does not match the model");
    if (z.squaredNorm() == 0.0) throw DomainError("density has a pole at z = 0");
    return density_raw(z);
}

double LevyModel::density_truncated(const Vec& z, double trunc) const {
    if (z.squaredNorm() <= trunc * trunc) return 0.0;
    return density_raw(z);
}

double LevyModel::ray_extent(const Vec& e) const {
    switch (support_) {
        case Support::FullSpace: return quad::kInf;
        case Support::Ball: return eta_;
        case Support::HalfSlab: return e(0) > 0.0 ? eta_ / e(0) : 0.0;
        case Support::Slab: return e(0) != 0.0 ? eta_ / std::abs(e(0)) : quad::kInf;
    }
    return 0.0;
}

quad::RayDomain LevyModel::ray_domain() const {
    quad::RayDomain dom;
    dom.dim = dim_;
    dom.extent = [this](const Vec& e) { return ray_extent(e); };
    constexpr double h = 0.5 * std::numbers::pi;
    if (dim_ == 1) {
        dom.directions_1d = support_ == Support::HalfSlab ? std::vector<double>{1.0}
                                                           : std::vector<double>{1.0, -1.0};
    } else if (support_ == Support::HalfSlab) {
        dom.sectors = {{-h, 0.0}, {0.0, h}};
    } else {
        dom.sectors = {{-h, 0.0}, {0.0, h}, {h, 2.0 * h}, {2.0 * h, 3.0 * h}};
    }
    return dom;
}

void LevyModel::append_support_crossings(const Mat& a, const Vec& c, const Vec& e, double trunc,
                                         std::vector<double>& out) const {
    switch (support_) {
        case Support::FullSpace: break;
        case Support::Ball: quad::append_sphere_roots(a, c, e, eta_, out); break;
        case Support::HalfSlab:
            quad::append_plane_root(a, c, e, 0, 0.0, out);
            quad::append_plane_root(a, c, e, 0, eta_, out);
            break;
        case Support::Slab:
            quad::append_plane_root(a, c, e, 0, -eta_, out);
            quad::append_plane_root(a, c, e, 0, eta_, out);
            break;
    }
    if (trunc > 0.0) quad::append_sphere_roots(a, c, e, trunc, out);
}

double LevyModel::tail_mass(double delta) const {
    if (!(delta > 0.0)) return quad::kInf;
    const double omega = sphere_area(dim_);
    const double lo = std::pow(delta, -alpha_);
    switch (support_) {
        case Support::FullSpace: return c0_ * omega * lo / alpha_;
        case Support::Ball:
            if (delta >= eta_) return 0.0;
            return c0_ * omega * (lo - std::pow(eta_, -alpha_)) / alpha_;
        case Support::Slab:
        case Support::HalfSlab: {
            if (delta >= eta_ && dim_ == 1) return 0.0;
            if (delta > eta_)
                throw ParameterError("slab tail mass is implemented for delta <= eta only");
            const double m =
                c0_ / alpha_ * (omega * lo - std::pow(eta_, -alpha_) * sphere_abs_moment(dim_, alpha_));
            return support_ == Support::Slab ? m : 0.5 * m;
        }
    }
    return 0.0;
}

double LevyModel::small_ball_second_moment(double rho) const {
    if (support_ != Support::FullSpace && rho > eta_)
        throw ParameterError("small-ball moment needs rho <= eta");
    const double m = c0_ * sphere_area(dim_) * std::pow(rho, 2.0 - alpha_) / (2.0 - alpha_);
    return support_ == Support::HalfSlab ? 0.5 * m : m;
}

double LevyModel::small_ball_covariance_scale(double rho) const {
    return small_ball_second_moment(rho) / dim_;
}

MomentIntegrals LevyModel::moment_integrals(const quad::Options& base) const {
    MomentIntegrals out;
    const auto dom = ray_domain();
    // Quadrature down to a small radius, closed form inside it.
    const double floor = 1e-6 * eta_;
    quad::Options inner = base;
    inner.r_floor = floor;
    inner.r_ceiling = 1.0;
    auto sq = quad::integrate(
        dom, [this](const Vec& z, double r) { return r * r * density_raw(z); }, nullptr, inner);
    out.small_square = sq.value + small_ball_second_moment(floor);
    out.residual = sq.error;

    if (support_ == Support::FullSpace && alpha_ <= 1.0) {
        out.big_first = quad::kInf;
        out.big_first_finite = false;
    } else {
        quad::Options outer = base;
        outer.r_floor = 1.0;
        outer.r_ceiling = quad::kInf;
        auto bf = quad::integrate(
            dom, [this](const Vec& z, double r) { return r * density_raw(z); }, nullptr, outer);
        out.big_first = bf.value;
        out.residual += bf.error;
    }
    const double scale = std::max(1.0, std::abs(out.small_square) +
                                           (out.big_first_finite ? std::abs(out.big_first) : 0.0));
    if (!std::isfinite(out.residual) || out.residual > 1e-6 * scale)
        throw NumericError("moment quadrature did not converge", out.residual);
    return out;
}

Vec LevyModel::compensator_drift(double trunc) const {
    Vec out = zeros(dim_);
    if (symmetric() || trunc >= 1.0) return out;
    if (dim_ == 1) {
        const double hi = std::min(1.0, eta_);
        if (trunc >= hi) return out;
        double v;
        if (alpha_ == 1.0)
            v = std::log(hi / trunc);
        else
            v = (std::pow(hi, 1.0 - alpha_) - std::pow(trunc, 1.0 - alpha_)) / (1.0 - alpha_);
        out(0) = -c0_ * v;
        return out;
    }
    quad::Options opts;
    opts.r_floor = trunc;
    opts.r_ceiling = 1.0;
    auto res = quad::integrate(
        ray_domain(), [this](const Vec& z, double) { return z(0) * density_raw(z); }, nullptr,
        opts);
    out(0) = -res.value;
    return out;
}

namespace {

Vec uniform_direction(int dim, Rng& rng) {
    Vec e(dim);
    if (dim == 1) {
        e(0) = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        return e;
    }
    std::normal_distribution<double> n01;
    double nrm = 0.0;
    do {
        for (int i = 0; i < dim; ++i) e(i) = n01(rng);
        nrm = e.norm();
    } while (nrm == 0.0);
    return e / nrm;
}

}  // namespace

Vec LevyModel::sample_size(double trunc, Rng& rng) const {
    const double a = alpha_;
    if (support_ == Support::Ball) {
        const double lo = std::pow(trunc, -a);
        const double hi = std::pow(eta_, -a);
        for (;;) {
            const double u = uniform01(rng);
            const double r = std::pow(lo - u * (lo - hi), -1.0 / a);
            Vec e = uniform_direction(dim_, rng);
            if (r > trunc && r <= eta_) return r * e;
        }
    }
    for (;;) {
        const double r = trunc * std::pow(uniform01(rng), -1.0 / a);
        Vec e = uniform_direction(dim_, rng);
        if (support_ == Support::HalfSlab) e(0) = std::abs(e(0));
        Vec z = r * e;
        if (in_support(z) && r > trunc) return z;
    }
}

std::vector<Jump> LevyModel::sample_jumps(double horizon, double trunc, Rng& rng) const {
    if (support_ != Support::FullSpace && trunc >= eta_)
        throw ParameterError("truncation must be below eta: empty jump support");
    if (!(trunc > 0.0)) throw ParameterError("truncation must be positive");
    std::vector<Jump> jumps;
    if (!(horizon > 0.0)) return jumps;
    std::poisson_distribution<long> count(tail_mass(trunc) * horizon);
    const long n = count(rng);
    jumps.reserve(static_cast<std::size_t>(n));
    std::vector<double> times(static_cast<std::size_t>(n));
    for (auto& t : times) t = horizon * uniform01(rng);
    std::sort(times.begin(), times.end());
    for (double t : times) jumps.push_back({t, sample_size(trunc, rng)});
    return jumps;
}

std::string LevyModel::describe() const {
    std::ostringstream os;
    os << to_string(support_) << "(d=" << dim_ << ", alpha=" << alpha_ << ", c0=" << c0_
       << ", eta=" << eta_ << ")";
    return os.str();
}

}  // namespace lmc
