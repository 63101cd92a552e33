#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lmc/config.hpp"
#include "lmc/errors.hpp"
#include "lmc/report.hpp"
#include "lmc/scenarios.hpp"

#ifndef LMC_VERSION
#define LMC_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void print_presets() {
    std::cout << "models (jump-size support):\n";
    for (auto s : {lmc::Support::FullSpace, lmc::Support::Ball, lmc::Support::HalfSlab, lmc::Support::Slab})
        std::cout << "  " << lmc::to_string(s) << "\n";
    std::cout << "  parameters: dim in {1,2,3}, alpha in (0,2), c0 > 0, eta in (0,1]\n";
    std::cout << "drift presets:\n";
    for (const auto& p : lmc::drift_catalog())
        std::cout << "  " << p.name << "  [" << p.params << "]  " << p.note << "\n";
    std::cout << "diffusion presets:\n";
    for (const auto& p : lmc::diffusion_catalog())
        std::cout << "  " << p.name << "  [" << p.params << "]  " << p.note << "\n";
    std::cout << "scenarios:\n";
    for (const auto& s : lmc::scenario_names()) std::cout << "  " << s << "\n";
}

int run(const std::string& path, const std::optional<std::uint64_t>& seed, const std::string& out) {
    lmc::ExperimentConfig cfg = lmc::load_config(path);
    if (seed) cfg.sim.seed = *seed;
    if (!out.empty()) cfg.output_dir = out;
    lmc::validate(cfg);

    const lmc::ScenarioResult result = lmc::run_scenario(cfg);

    fs::create_directories(cfg.output_dir);
    nlohmann::json manifest{{"version", LMC_VERSION},
                            {"created_utc", utc_now()},
                            {"config_path", path},
                            {"config", lmc::to_json(cfg)}};
    std::ofstream(fs::path(cfg.output_dir) / "manifest.json") << manifest.dump(2) << "\n";
    for (const auto& t : result.tables) lmc::write_csv(cfg.output_dir, t);
    const std::string text = lmc::report_text(cfg.scenario, result);
    std::ofstream(fs::path(cfg.output_dir) / "report.txt") << text;
    std::cout << text;
    return result.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled pure-jump SDE experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    auto* run_cmd = app.add_subcommand("run", "Run the scenario described by a config file");
    run_cmd->add_option("config", config_path, "Experiment config (JSON)")->required();
    run_cmd->add_option("--seed", seed, "Override sim.seed");
    run_cmd->add_option("--out", out_dir, "Override output.dir");
    auto* presets_cmd = app.add_subcommand("presets", "List models, coefficient presets and scenarios");

    CLI11_PARSE(app, argc, argv);
    try {
        if (presets_cmd->parsed()) {
            print_presets();
            return 0;
        }
        return run(config_path, seed, out_dir);
    } catch (const lmc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
