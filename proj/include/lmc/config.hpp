#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmc/coefficient_field.hpp"
#include "lmc/levy_model.hpp"
#include "lmc/simulator.hpp"

namespace lmc {

struct ModelConfig {
    int dim = 1;
    double alpha = 0.5;
    double c0 = 1.0;
    double eta = 1.0;
    Support support = Support::Ball;
};

// Scenario parameters are numbers or lists of numbers; scalars are stored as
// one-element lists.
class ScenarioParams {
  public:
    void set(const std::string& key, std::vector<double> v) { values_[key] = std::move(v); }
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    double get(const std::string& key, double fallback) const;
    std::vector<double> list(const std::string& key, std::vector<double> fallback) const;
    // Throws ConfigError naming the first key outside `allowed`.
    void require_known(const std::string& scenario, const std::vector<std::string>& allowed) const;
    const std::map<std::string, std::vector<double>>& values() const { return values_; }

  private:
    std::map<std::string, std::vector<double>> values_;
};

struct ExperimentConfig {
    std::string scenario;
    ModelConfig model;
    PresetSpec drift{"linear", {}};
    PresetSpec diffusion{"constant", {}};
    double kappa = 0.5;
    SimConfig sim;
    ScenarioParams params;
    std::string output_dir = "lmc_out";
};

const std::vector<std::string>& scenario_names();

// Parses and validates; errors carry line and column (syntax) or the
// offending key and constraint (validation).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace lmc
