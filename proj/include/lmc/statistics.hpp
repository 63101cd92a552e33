#pragma once

#include <cstdint>
#include <vector>

#include "lmc/linalg.hpp"

namespace lmc::stats {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;    // unbiased
    double fourth = 0.0;      // central fourth moment
    std::size_t n = 0;
};

Moments moments(const std::vector<double>& xs);

// z-scores for equality of means and of variances between two samples.
struct MomentComparison {
    double mean_z = 0.0;
    double var_z = 0.0;
};
MomentComparison compare_moments(const std::vector<double>& a, const std::vector<double>& b);

// Two-sample energy distance (V-statistic) 2E|X-Y| - E|X-X'| - E|Y-Y'|.
double energy_distance(const std::vector<double>& a, const std::vector<double>& b);
double energy_distance(const std::vector<Vec>& a, const std::vector<Vec>& b);

struct PermutationResult {
    double observed = 0.0;
    double perm_mean = 0.0;
    double perm_sd = 0.0;
    double quantile95 = 0.0;
    double p_value = 1.0;
};

PermutationResult energy_permutation_test(const std::vector<double>& a,
                                          const std::vector<double>& b, int n_perm,
                                          std::uint64_t seed);
PermutationResult energy_permutation_test(const std::vector<Vec>& a, const std::vector<Vec>& b,
                                          int n_perm, std::uint64_t seed);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};
// Wilson score interval for k successes out of n.
Interval wilson(std::size_t k, std::size_t n, double z = 1.96);

// L1 distance between empirical distribution functions (exact W1 in one dimension).
double wasserstein1(std::vector<double> a, std::vector<double> b);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lmc::stats
