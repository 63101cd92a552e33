#pragma once

#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "lmc/linalg.hpp"

namespace lmc::quad {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Options {
    double rel_tol = 1e-10;        // along each ray
    double angle_rel_tol = 1e-8;   // over the angle (d = 2)
    // Absolute floor for both levels, so integrands that cancel to rounding
    // noise do not drive refinement to max_depth.
    double abs_tol = 1e-13;
    unsigned max_depth = 15;
    // Integration runs over r_floor < |z| <= r_ceiling.
    double r_floor = 0.0;
    double r_ceiling = kInf;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
};

// A region that is star-shaped with respect to the origin: along each unit
// direction e it covers the radii (0, extent(e)].  In d = 1 the directions are
// +1 and -1; in d = 2 they are parametrised by the angle, split into sectors.
struct RayDomain {
    int dim = 1;
    std::function<double(const Vec&)> extent;
    std::vector<double> directions_1d;                 // d = 1 only
    std::vector<std::pair<double, double>> sectors;    // d = 2 only
};

// f(z) for z = r e on the ray; r = |z| is passed to avoid recomputation.
using RayIntegrand = std::function<double(const Vec& z, double r)>;
// Appends radii along direction e at which the integrand is not smooth.
using RayBreaks = std::function<void(const Vec& e, std::vector<double>& out)>;

// Integrates f(z) dz over the domain using polar coordinates, adaptive
// Gauss-Kronrod along each ray (log-radius where the ray spans scales) and
// adaptive Gauss-Kronrod over the angle in d = 2.
Result integrate(const RayDomain& domain, const RayIntegrand& f, const RayBreaks& breaks,
                 const Options& opts);

// One-dimensional adaptive integral on [a, b]; b may be +inf.
Result integrate_interval(const std::function<double(double)>& g, double a, double b,
                          double rel_tol = 1e-10, unsigned max_depth = 15,
                          double abs_tol = 0.0);

// Positive roots r of |A (r e) + c|^2 = k^2 r^2 (when radial) or = rho^2.
void append_sphere_roots(const Mat& a, const Vec& c, const Vec& e, double rho,
                         std::vector<double>& out);
void append_cone_roots(const Mat& a, const Vec& c, const Vec& e, double k,
                       std::vector<double>& out);
// Positive root of (A (r e) + c)_i = level.
void append_plane_root(const Mat& a, const Vec& c, const Vec& e, int i, double level,
                       std::vector<double>& out);

}  // namespace lmc::quad
