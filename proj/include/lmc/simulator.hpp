#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "lmc/coupling_kernel.hpp"
#include "lmc/statistics.hpp"

namespace lmc {

struct SimConfig {
    double horizon = 1.0;
    double dt_max = 0.01;
    double trunc = 1e-3;
    // Negative means the default 1e-9 (1 + |x0 - y0|).
    double coalesce_tol = -1.0;
    std::uint64_t seed = 1;
    std::size_t n_paths = 1000;
    // Distance whose first exceedance is recorded; infinite disables it.
    double exit_radius = std::numeric_limits<double>::infinity();

    void validate(const LevyModel& levy) const;
    double resolved_tol(const Vec& x0, const Vec& y0) const;
};

struct MarginalPath {
    std::vector<double> times;
    std::vector<Vec> states;
};

struct BranchCounts {
    std::size_t coalesce = 0;
    std::size_t reflect = 0;
    std::size_t synchronize = 0;
};

struct CoupledPath {
    std::vector<double> times;
    std::vector<Vec> x_states;
    std::vector<Vec> y_states;
    double coupling_time = std::numeric_limits<double>::infinity();
    std::optional<double> exit_time;
    BranchCounts branches;
    bool coupled() const { return std::isfinite(coupling_time); }
};

// Observation grid: states are recorded at these times (0 and horizon are
// always included).  With record_jumps the post-jump states are kept too.
struct Recording {
    std::vector<double> grid;
    bool record_jumps = false;
};

MarginalPath simulate_marginal(const CoefficientField& cf, const LevyModel& levy, const Vec& x0,
                               const SimConfig& sim, std::size_t path_index = 0,
                               const Recording& rec = {});

CoupledPath simulate_coupled(const CouplingKernel& k, const Vec& x0, const Vec& y0,
                             const SimConfig& sim, std::size_t path_index = 0,
                             const Recording& rec = {});

// Jump event seen by the coupling at a frozen pre-jump pair.
struct JumpEvent {
    Branch branch;
    Vec x_before, y_before, x_after, y_after;
};
// Applies one thinned jump at (x, y) with size z and uniform u, using the
// same arithmetic as simulate_coupled.
JumpEvent coupled_jump(const CouplingKernel& k, const Vec& x, const Vec& y, const Vec& z, double u,
                       double trunc);

struct LawConsistencyReport {
    std::vector<double> mean_z;   // per coordinate
    std::vector<double> var_z;
    stats::PermutationResult energy;
    std::size_t n_paths = 0;
    std::size_t energy_sample = 0;
    bool moments_ok = false;
    bool energy_ok = false;
    bool ok() const { return moments_ok && energy_ok; }
};

// Compares Y_horizon from coupled paths with X_horizon from independent
// marginal paths started at y0 (z-scores within 4, energy distance within
// the permutation mean plus 4 standard deviations).
LawConsistencyReport marginal_law_consistency(const CouplingKernel& k, const Vec& x0,
                                              const Vec& y0, const SimConfig& sim,
                                              std::size_t energy_sample = 2000, int n_perm = 200);

struct SurvivalPoint {
    double t = 0.0;
    double survival = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double mean_dist = 0.0;
    double mean_dist_se = 0.0;
};

struct CouplingEnsemble {
    std::vector<SurvivalPoint> curve;
    std::vector<double> coupling_times;   // per path, +inf when not coupled
    std::vector<Vec> x_final;
    std::vector<Vec> y_final;
    BranchCounts branches;
};

CouplingEnsemble coupling_time_ensemble(const CouplingKernel& k, const Vec& x0, const Vec& y0,
                                        const SimConfig& sim, const std::vector<double>& grid);

// Endpoint samples of independent marginal paths (one per path index).
std::vector<Vec> marginal_endpoints(const CoefficientField& cf, const LevyModel& levy,
                                    const Vec& x0, const SimConfig& sim);

}  // namespace lmc
