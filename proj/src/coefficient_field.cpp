#include "lmc/coefficient_field.hpp"

#include <cmath>
#include <sstream>

#include <boost/random/sobol.hpp>

#include "lmc/errors.hpp"
#include "lmc/rng.hpp"

namespace lmc {

CoefficientField::CoefficientField(int dim, VecFn drift, MatFn diffusion, MatFn diffusion_inverse,
                                   double lambda_nd, double lip_sigma, bool diagonal,
                                   bool constant_diffusion, std::string name)
    : dim_(dim),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      inverse_(std::move(diffusion_inverse)),
      lambda_(lambda_nd),
      lip_(lip_sigma),
      diagonal_(diagonal),
      constant_(constant_diffusion),
      name_(std::move(name)) {
    if (dim < 1 || dim > kMaxDim) throw ParameterError("coefficient dimension out of range");
    if (!(lambda_nd >= 1.0)) throw ParameterError("non-degeneracy constant must be >= 1");
    if (!(lip_sigma >= 0.0)) throw ParameterError("Lipschitz constant must be >= 0");
}

double PresetSpec::get(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

namespace {

void reject_unknown(const PresetSpec& spec, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : spec.params) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known)
            throw ConfigError("preset '" + spec.name + "' has no parameter '" + key + "'");
    }
}

struct DriftPreset {
    CoefficientField::VecFn fn;
    std::optional<DissipativityProfile> profile;
    std::string label;
};

DriftPreset build_drift(int dim, const PresetSpec& s) {
    const double root_d = std::sqrt(static_cast<double>(dim));
    if (s.name == "zero") {
        reject_unknown(s, {});
        return {[dim](const Vec&) { return zeros(dim); }, std::nullopt, "zero"};
    }
    if (s.name == "linear") {
        reject_unknown(s, {"k"});
        const double k = s.get("k", 1.0);
        if (!(k > 0.0)) throw ParameterError("linear drift needs k > 0");
        return {[k](const Vec& x) -> Vec { return -k * x; }, DissipativityProfile{0.0, k, 0.0, 1.0},
                "linear"};
    }
    if (s.name == "sin_perturbed") {
        reject_unknown(s, {"k", "a"});
        const double k = s.get("k", 1.0);
        const double a = s.get("a", 1.0);
        if (!(k > 0.0) || !(a >= 0.0)) throw ParameterError("sin_perturbed needs k > 0, a >= 0");
        auto fn = [k, a](const Vec& x) -> Vec { return -k * x + a * x.array().sin().matrix(); };
        return {fn, DissipativityProfile{a + k, 0.5 * k, 4.0 * a * root_d / k, 1.0}, "sin_perturbed"};
    }
    if (s.name == "sign_perturbed") {
        reject_unknown(s, {"k", "a"});
        const double k = s.get("k", 1.0);
        const double a = s.get("a", 0.5);
        if (!(k > 0.0) || !(a >= 0.0)) throw ParameterError("sign_perturbed needs k > 0, a >= 0");
        auto fn = [k, a](const Vec& x) -> Vec {
            Vec out = -k * x;
            for (int i = 0; i < x.size(); ++i) out(i) += a * ((x(i) > 0) - (x(i) < 0));
            return out;
        };
        return {fn, DissipativityProfile{2.0 * a * root_d, 0.5 * k, 4.0 * a * root_d / k, 0.0},
                "sign_perturbed"};
    }
    if (s.name == "holder") {
        reject_unknown(s, {"k", "a", "beta"});
        const double k = s.get("k", 1.0);
        const double a = s.get("a", 1.0);
        const double beta = s.get("beta", 0.5);
        if (!(k > 0.0) || !(a >= 0.0) || !(beta > 0.0 && beta < 1.0))
            throw ParameterError("holder drift needs k > 0, a >= 0, beta in (0,1)");
        auto fn = [k, a, beta](const Vec& x) -> Vec {
            Vec out = -k * x;
            for (int i = 0; i < x.size(); ++i)
                out(i) += a * std::copysign(std::pow(std::abs(x(i)), beta), x(i));
            return out;
        };
        const double k1 = a * std::pow(2.0, 1.0 - beta) * std::pow(dim, 0.5 * (1.0 - beta));
        const double l0 = k1 > 0.0 ? std::pow(2.0 * k1 / k, 1.0 / (1.0 - beta)) : 0.0;
        return {fn, DissipativityProfile{k1, 0.5 * k, l0, beta}, "holder"};
    }
    throw ConfigError("unknown drift preset '" + s.name + "'");
}

}  // namespace

CoefficientField make_coefficients(int dim, const PresetSpec& drift, const PresetSpec& diffusion) {
    DriftPreset dp = build_drift(dim, drift);
    std::string label = dp.label + "/" + diffusion.name;

    auto finish = [&](CoefficientField cf) {
        if (dp.profile) cf.set_profile(*dp.profile);
        return cf;
    };

    if (diffusion.name == "constant") {
        reject_unknown(diffusion, {"scale"});
        const double s = diffusion.get("scale", 1.0);
        if (!(s > 0.0)) throw ParameterError("constant diffusion needs scale > 0");
        const Mat m = s * Mat::Identity(dim, dim);
        const Mat mi = (1.0 / s) * Mat::Identity(dim, dim);
        return finish(CoefficientField(
            dim, dp.fn, [m](const Vec&) { return m; }, [mi](const Vec&) { return mi; },
            std::max(s, 1.0 / s), 0.0, true, true, label));
    }
    if (diffusion.name == "diag_sin") {
        reject_unknown(diffusion, {"a"});
        const double a = diffusion.get("a", 2.0);
        if (!(a > 1.0)) throw ParameterError("diag_sin diffusion needs a > 1");
        auto sig = [a](const Vec& x) -> Mat { return (a + x.array().sin()).matrix().asDiagonal(); };
        auto inv = [a](const Vec& x) -> Mat {
            return (1.0 / (a + x.array().sin())).matrix().asDiagonal();
        };
        return finish(CoefficientField(dim, dp.fn, sig, inv, std::max(a + 1.0, 1.0 / (a - 1.0)),
                                       1.0, true, false, label));
    }
    if (diffusion.name == "rotation") {
        reject_unknown(diffusion, {"scale", "eps"});
        if (dim < 2) throw ParameterError("rotation diffusion needs dimension >= 2");
        const double s = diffusion.get("scale", 1.0);
        const double eps = diffusion.get("eps", 0.3);
        if (!(s > 0.0) || !(eps >= 0.0)) throw ParameterError("rotation needs scale > 0, eps >= 0");
        auto rot = [dim, eps](const Vec& x) -> Mat {
            Mat r = Mat::Identity(dim, dim);
            const double th = eps * std::sin(x(0));
            r(0, 0) = std::cos(th);
            r(0, 1) = -std::sin(th);
            r(1, 0) = std::sin(th);
            r(1, 1) = std::cos(th);
            return r;
        };
        auto sig = [rot, s](const Vec& x) -> Mat { return s * rot(x); };
        auto inv = [rot, s](const Vec& x) -> Mat { return rot(x).transpose() / s; };
        return finish(CoefficientField(dim, dp.fn, sig, inv, std::max(s, 1.0 / s),
                                       std::sqrt(2.0) * s * eps, false, false, label));
    }
    throw ConfigError("unknown diffusion preset '" + diffusion.name + "'");
}

std::vector<PresetInfo> drift_catalog() {
    return {
        {"zero", "", "b = 0 (no restoring force)"},
        {"linear", "k > 0 (default 1)", "b(x) = -k x"},
        {"sin_perturbed", "k > 0 (1), a >= 0 (1)", "b(x) = -k x + a sin(x), beta = 1"},
        {"sign_perturbed", "k > 0 (1), a >= 0 (0.5)", "b(x) = -k x + a sgn(x), beta = 0"},
        {"holder", "k > 0 (1), a >= 0 (1), beta in (0,1) (0.5)",
         "b(x) = -k x + a sgn(x)|x|^beta"},
    };
}

std::vector<PresetInfo> diffusion_catalog() {
    return {
        {"constant", "scale > 0 (1)", "sigma = scale I (additive noise)"},
        {"diag_sin", "a > 1 (2)", "sigma(x) = diag(a + sin x_i), diagonal"},
        {"rotation", "scale > 0 (1), eps >= 0 (0.3), d >= 2",
         "sigma(x) = scale R(eps sin x_1), non-diagonal"},
    };
}

namespace {

std::string point_str(const Vec& x) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
    os << ")";
    return os.str();
}

}  // namespace

StructureReport verify_structure(const CoefficientField& cf, const std::vector<Vec>& grid,
                                 const std::vector<PointPair>& pairs) {
    if (grid.empty()) throw ParameterError("structure check needs a nonempty grid");
    StructureReport rep;
    const int d = cf.dim();
    const double lam = cf.lambda_nd();
    for (const Vec& x : grid) {
        const Mat s = cf.diffusion(x);
        Eigen::JacobiSVD<Mat> svd(s);
        const auto sv = svd.singularValues();
        const double smax = sv(0);
        const double smin = sv(d - 1);
        if (!(smin > 0.0) || !std::isfinite(smax))
            throw StructuralError("diffusion matrix is singular at " + point_str(x));
        rep.max_upper = std::max(rep.max_upper, smax);
        rep.max_inverse = std::max(rep.max_inverse, 1.0 / smin);
        if (smax > lam * (1.0 + 1e-12) || 1.0 / smin > lam * (1.0 + 1e-12)) {
            if (rep.nondegenerate_ok || rep.violations.size() < 8)
                rep.violations.push_back("non-degeneracy fails at " + point_str(x));
            rep.nondegenerate_ok = false;
        }
        const Mat prod = s * cf.diffusion_inverse(x);
        const double res = (prod - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
        rep.inverse_residual = std::max(rep.inverse_residual, res);
        if (res > 1e-10) {
            rep.inverse_ok = false;
            rep.violations.push_back("inverse mismatch at " + point_str(x));
        }
    }
    for (const auto& [x, y] : pairs) {
        const double dist = (x - y).norm();
        if (dist == 0.0) continue;
        const double ratio = hs_norm(cf.diffusion(x) - cf.diffusion(y)) / dist;
        rep.max_lipschitz = std::max(rep.max_lipschitz, ratio);
    }
    if (rep.max_lipschitz > cf.lip_sigma() * (1.0 + 1e-9) + 1e-14) {
        rep.lipschitz_ok = false;
        std::ostringstream os;
        os << "Lipschitz ratio " << rep.max_lipschitz << " exceeds " << cf.lip_sigma();
        rep.violations.push_back(os.str());
    }
    return rep;
}

DissipativityReport dissipativity_check(const CoefficientField& cf, const DissipativityProfile& p,
                                        const std::vector<PointPair>& pairs) {
    DissipativityReport rep;
    for (const auto& [x, y] : pairs) {
        const Vec u = x - y;
        const double r = u.norm();
        if (r == 0.0) continue;
        const double lhs = (cf.drift(x) - cf.drift(y)).dot(u) / r;
        const double scale = 1e-12 * (1.0 + std::abs(lhs));
        if (r < p.l0) {
            ++rep.near_pairs;
            rep.near_violation = std::max(rep.near_violation, lhs - p.k1 * std::pow(r, p.beta) - scale);
        } else {
            ++rep.far_pairs;
            rep.far_violation = std::max(rep.far_violation, lhs + p.k2 * r - scale);
        }
    }
    return rep;
}

std::vector<Vec> sobol_grid(int dim, std::size_t n, double half_width) {
    boost::random::sobol eng(static_cast<std::size_t>(dim));
    const double span = static_cast<double>(eng.max()) + 1.0;
    std::vector<Vec> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Vec x(dim);
        for (int i = 0; i < dim; ++i) x(i) = half_width * (2.0 * (static_cast<double>(eng()) / span) - 1.0);
        out.push_back(x);
    }
    return out;
}

std::vector<PointPair> distance_pairs(int dim, std::size_t n, double half_width, double min_dist,
                                      double max_dist, std::uint64_t seed) {
    const auto base = sobol_grid(dim, n, half_width);
    Rng rng = make_stream(seed, 0, kAuxStream);
    std::normal_distribution<double> n01;
    std::vector<PointPair> out;
    out.reserve(n);
    const double step = n > 1 ? std::log(max_dist / min_dist) / static_cast<double>(n - 1) : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        Vec e(dim);
        do {
            for (int i = 0; i < dim; ++i) e(i) = n01(rng);
        } while (e.norm() == 0.0);
        e.normalize();
        const double dist = min_dist * std::exp(step * static_cast<double>(k));
        out.emplace_back(base[k], base[k] + dist * e);
    }
    return out;
}

}  // namespace lmc
