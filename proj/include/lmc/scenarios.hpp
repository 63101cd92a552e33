#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lmc/config.hpp"
#include "lmc/coupling_kernel.hpp"
#include "lmc/report.hpp"

namespace lmc {

// Model pieces built from a config; the kernel refers to the other two, so
// the bundle stays where it was constructed.
struct Bench {
    LevyModel levy;
    CoefficientField cf;
    CouplingKernel k;
    explicit Bench(const ExperimentConfig& cfg);
    Bench(const Bench&) = delete;
    Bench& operator=(const Bench&) = delete;
};

// Runs one scenario (full_suite included) and returns its checks and tables.
ScenarioResult run_scenario(const ExperimentConfig& cfg);

struct Criterion {
    int id = 0;
    std::string title;
    std::vector<ExperimentConfig> configs;
};

// The pinned acceptance configurations, criteria 1 to 10.
std::vector<Criterion> acceptance_plan(std::uint64_t seed);

struct CriterionOutcome {
    int id = 0;
    std::string title;
    ScenarioResult result;
    double seconds = 0.0;
};

CriterionOutcome run_criterion(const Criterion& c);

}  // namespace lmc
