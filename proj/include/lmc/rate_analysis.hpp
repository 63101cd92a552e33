#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "lmc/coupling_kernel.hpp"
#include "lmc/simulator.hpp"
#include "lmc/statistics.hpp"
#include "lmc/test_functions.hpp"

namespace lmc {

// ---------------------------------------------------------------- J and K

struct JKOptions {
    std::size_t pair_samples = 8;   // per radius; half sit exactly at the radius
    double half_width = 2.0;        // positions drawn from [-w, w]^d
    std::uint64_t seed = 7;
    quad::Options quad{1e-7, 1e-4};
};

struct JKCurve {
    std::vector<double> radii;
    std::vector<double> J;          // min coalescence mass over pairs at distance <= r
    std::vector<double> mass_min;   // min / max over pairs at distance exactly r
    std::vector<double> mass_max;
    std::vector<double> K;          // max of mass r + first moment on |z| <= 2, at distance r
    double exponent = 0.0;          // slope of log J against log r
    double log_prefactor = 0.0;
    double fit_r2 = 0.0;

    // Log-log interpolation inside the sampled range, fitted power law outside.
    double J_at(double r) const;
};

JKCurve estimate_J_K(const CouplingKernel& k, const std::vector<double>& radii,
                     const JKOptions& opts = {});

// ------------------------------------------------------ contraction rate

// Concave comparison function c r^e with e in [0, 1).
struct PowerComparison {
    double coeff = 0.0;
    double exponent = 0.0;
    double operator()(double r) const { return coeff * std::pow(r, exponent); }
};

struct RateCertificate {
    JKCurve jk;
    double A1 = 0.0;                 // sampled supremum (not a proof)
    double A2 = 0.0;
    double a1_half_width = 0.0;      // box the A1 pairs were drawn from
    double a1_max_distance = 0.0;
    DissipativityProfile input;
    double k1_star = 0.0;            // near-range coefficient after the diffusion term
    double k2_eff = 0.0;             // far-range rate after the diffusion term
    double phi_slope = 0.0;          // linear coefficient of the near-range bound
    double l0 = 0.0;
    double beta = 1.0;
    PowerComparison comparison;
    double comparison_margin = 0.0;  // min over the check grid of bound / comparison
    double g1_end = 0.0, g2_end = 0.0, g_end = 0.0;
    double c1 = 1.0, c2 = 0.0, lambda = 0.0, C = 1.0;
    // Logs survive where lambda underflows and C overflows.
    double log_lambda = 0.0, log_C = 0.0;
    bool degenerate = false;         // l0 = 0

    double phi1(double r) const;
    double g1(double r) const;
    double g2(double r) const;
    double g(double r) const;
    double psi(double r) const;
    double psi_d1(double r) const;
};

// Assembles (c1, c2, lambda, C, psi) from an effective profile and a
// comparison function; g1 and g2 are integrated numerically.  The near-range
// bound is k1_star r^beta + phi_slope r, with phi_slope = k2_eff / 2 when NaN.
RateCertificate assemble_certificate(double k1_star, double k2_eff, double l0, double beta,
                                     const PowerComparison& comparison,
                                     double phi_slope = std::numeric_limits<double>::quiet_NaN());

struct CertificateOptions {
    std::vector<double> radii{0.1, 0.05, 0.025, 0.0125};
    JKOptions jk;
    std::size_t a1_pairs = 24;
    double a1_half_width = 2.0;
    double a1_max_distance = 4.0;
    double kappa0 = 0.0;             // 0 means the coupling threshold
    // Exponent of the comparison function; negative picks the default.
    double comparison_exponent = -1.0;
};

RateCertificate contraction_certificate(const CouplingKernel& k, const DissipativityProfile& prof,
                                        const CertificateOptions& opts = {});

// ---------------------------------------------------------- gradient rate

class GradientCertificate {
  public:
    GradientCertificate(RadialPtr psi, std::function<double(double)> J, double eps_max,
                        double constant = 1.0);

    const RadialFn& psi() const { return *psi_; }
    double eps_max() const { return eps_max_; }
    // -sup over 0 < r <= eps of J(r) r^2 psi''(2r), searched on a log grid.
    double lambda_psi(double eps) const;
    // C |f| inf over eps of [1/psi(eps) + 1/(t lambda_psi(eps))].
    double envelope(double t, double f_sup = 1.0) const;

  private:
    RadialPtr psi_;
    std::function<double(double)> J_;
    double eps_max_;
    double constant_;
};

// Log-family profile for alpha > 1, power profile for alpha <= 1.
GradientCertificate gradient_rate_certificate(const LevyModel& levy, double theta,
                                              std::function<double(double)> J);

// ---------------------------------------------------------------- fitting

struct DecayFit {
    double rate = 0.0;        // positive for decay
    double intercept = 0.0;   // log value at t = 0
    double r2 = 0.0;
    std::size_t points = 0;
};

// Least squares of log value against t over [t_lo, t_hi].
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& values, double t_lo,
                   double t_hi);

struct DecayReport {
    std::vector<SurvivalPoint> curve;
    std::vector<double> w1_upper, w1_lo, w1_hi;
    std::vector<double> tv_upper, tv_lo, tv_hi;
    std::optional<DecayFit> w1_fit;
    std::optional<DecayFit> tv_fit;
    // Exact empirical W1 between the two marginals at the horizon (d = 1 only).
    double w1_exact_horizon = std::numeric_limits<double>::quiet_NaN();
    BranchCounts branches;
};

DecayReport tv_and_w1_report(const CouplingKernel& k, const Vec& x0, const Vec& y0,
                             const SimConfig& sim, const std::vector<double>& grid, double t_lo,
                             double t_hi);

// ------------------------------------------------------------- long run

struct LyapunovReport {
    std::vector<double> radii;
    std::vector<double> worst_ratio;   // max over directions of Lf / f
    std::vector<double> worst_lf;      // max over directions of Lf
    double tail_radius = 0.0;
    double c4 = 0.0;
    double c5 = 0.0;
    bool ok = false;
};

// f = scale sqrt(1 + |x|^2); c4 = -max Lf/f beyond tail_radius,
// c5 = max (Lf + c4 f) over the grid.
LyapunovReport lyapunov_check(const CoefficientField& cf, const LevyModel& levy,
                              const std::vector<double>& radii, double tail_radius = 2.0,
                              double scale = 1.0);

struct InvariantProbe {
    std::vector<Vec> starts;
    std::vector<std::vector<Vec>> samples;
    struct PairTest {
        std::size_t a = 0, b = 0;
        stats::PermutationResult test;
        bool within_band = false;
    };
    std::vector<PairTest> pairs;
    // W1 (first coordinate) between empirical laws at t and 2t from starts[0].
    std::vector<double> cauchy_times;
    std::vector<double> cauchy_w1;
    bool ok() const;
};

// Independent endpoints at sim.horizon from each start (distinct seeds), with
// a permutation energy test for every pair of starts.
InvariantProbe invariant_measure_probe(const CouplingKernel& k, const std::vector<Vec>& starts,
                                       const SimConfig& sim, int n_perm = 200,
                                       std::size_t energy_sample = 2000,
                                       std::size_t cauchy_paths = 2000);

}  // namespace lmc
