#pragma once

#include <vector>

#include "lmc/coupling_kernel.hpp"
#include "lmc/test_functions.hpp"

namespace lmc {

struct GeneratorOptions {
    quad::Options quad;
    // Below inner_factor * eta the jump integral is replaced by its quadratic part.
    double inner_factor = 1e-6;
    // Second-order expansion is used once the jump displacement drops below this.
    double taylor_switch = 1e-5;
};

struct GeneratorValue {
    double value = 0.0;
    double error = 0.0;         // accumulated quadrature error estimate
    double inner_bound = 0.0;   // bound on the contribution of the innermost ball
};

GeneratorValue generator_L(const LevyModel& levy, const CoefficientField& cf, const SmoothFn& f,
                           const Vec& x, const GeneratorOptions& opts = {});

GeneratorValue coupling_generator(const CouplingKernel& k, const JointFn& h, const Vec& x,
                                  const Vec& y, const GeneratorOptions& opts = {});

struct RadialBreakdown {
    double drift = 0.0;          // f'(r)/r <b(x)-b(y), x-y>
    double compensator = 0.0;    // small-jump cross term from sigma(x)-sigma(y)
    double coalesce = 0.0;       // mu_Psi branch
    double reflect = 0.0;        // mu_{Psi^{-1}} branch
    double synchronous = 0.0;    // remaining jumps
    double total = 0.0;
    double error = 0.0;
};

RadialBreakdown coupling_generator_radial(const CouplingKernel& k, const RadialFn& f, const Vec& x,
                                          const Vec& y, const GeneratorOptions& opts = {});

// Closed form of the coalescing branch: half the mass times f(r - r^kappa) - f(r).
double coalesce_closed_form(const CouplingKernel& k, const RadialFn& f, const Vec& x, const Vec& y,
                            const GeneratorOptions& opts = {});

struct MarginalityRow {
    int f_index = 0;
    Vec x;
    Vec y;
    double coupled = 0.0;
    double lf = 0.0;
    double lg = 0.0;
    double rel_error = 0.0;
};

struct MarginalityReport {
    double max_rel_error = 0.0;
    std::vector<MarginalityRow> rows;
};

// Pairs f_list[i] with g_list[i] and evaluates both sides at every point pair.
MarginalityReport marginality_suite(const CouplingKernel& k, const std::vector<SmoothPtr>& f_list,
                                    const std::vector<SmoothPtr>& g_list,
                                    const std::vector<PointPair>& points,
                                    const GeneratorOptions& opts = {});

struct DriftBoundReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double radius = 0.0;
    double theta0 = 0.0;
    double drift = 0.0;
    double theta_inner = 0.0;   // multiplied by f'(r) ||sigma(x)-sigma(y)||_HS in rhs
    double theta_outer = 0.0;
    double lhs_error = 0.0;
    RadialBreakdown terms;
};

// Compares the radial coupling generator against the analytic upper bound
// with cut-off radius R >= 1 (R may be +inf when large jumps have a first moment).
DriftBoundReport drift_bound_check(const CouplingKernel& k, const RadialFn& f, const Vec& x,
                                   const Vec& y, double radius, const GeneratorOptions& opts = {});

}  // namespace lmc
