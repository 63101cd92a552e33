#include "lmc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "lmc/errors.hpp"

namespace lmc {

using nlohmann::json;

double ScenarioParams::get(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second.size() != 1) throw ConfigError("scenario parameter '" + key + "' must be a number");
    return it->second.front();
}

std::vector<double> ScenarioParams::list(const std::string& key, std::vector<double> fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

void ScenarioParams::require_known(const std::string& scenario,
                                   const std::vector<std::string>& allowed) const {
    for (const auto& [key, v] : values_)
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("scenario '" + scenario + "' has no parameter '" + key + "'");
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{
        "marginality",  "pushforward",   "drift_bound", "coalescence", "law_consistency",
        "j_exponent",   "coupling_decay", "tv_decay",   "gradient_rate", "invariant_probe",
        "full_suite"};
    return names;
}

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [key, v] : obj.items()) {
        const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; });
        if (!known) throw ConfigError("unknown key '" + where + "." + key + "'");
    }
}

double number(const json& obj, const char* key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
    return v.get<double>();
}

std::uint64_t unsigned_number(const json& obj, const char* key, const std::string& where,
                              std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
        throw ConfigError("'" + where + "." + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

PresetSpec preset(const json& obj, const std::string& where, const std::string& fallback) {
    PresetSpec p{fallback, {}};
    if (obj.is_string()) {
        p.name = obj.get<std::string>();
        return p;
    }
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be a name or an object");
    for (const auto& [key, v] : obj.items()) {
        if (key == "name") {
            if (!v.is_string()) throw ConfigError("'" + where + ".name' must be a string");
            p.name = v.get<std::string>();
        } else {
            if (!v.is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
            p.params[key] = v.get<double>();
        }
    }
    return p;
}

std::string location(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte is one past the offending character.
        const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
        throw ConfigError("config parse error at " + location(text, at) + ": " + e.what());
    }
    only_keys(root, "config",
              {"scenario", "model", "coefficients", "coupling", "sim", "scenario_params", "output"});
    ExperimentConfig cfg;
    if (!root.contains("scenario") || !root["scenario"].is_string())
        throw ConfigError("'scenario' must be given as a string");
    cfg.scenario = root["scenario"].get<std::string>();

    if (root.contains("model")) {
        const auto& m = root["model"];
        only_keys(m, "model", {"dim", "alpha", "c0", "eta", "support"});
        cfg.model.dim = static_cast<int>(number(m, "dim", "model", cfg.model.dim));
        if (m.contains("dim") && !m["dim"].is_number_integer())
            throw ConfigError("'model.dim' must be an integer");
        cfg.model.alpha = number(m, "alpha", "model", cfg.model.alpha);
        cfg.model.c0 = number(m, "c0", "model", cfg.model.c0);
        cfg.model.eta = number(m, "eta", "model", cfg.model.eta);
        if (m.contains("support")) {
            if (!m["support"].is_string()) throw ConfigError("'model.support' must be a string");
            cfg.model.support = parse_support(m["support"].get<std::string>());
        }
    }
    if (root.contains("coefficients")) {
        const auto& c = root["coefficients"];
        only_keys(c, "coefficients", {"drift", "diffusion"});
        if (c.contains("drift")) cfg.drift = preset(c["drift"], "coefficients.drift", "linear");
        if (c.contains("diffusion"))
            cfg.diffusion = preset(c["diffusion"], "coefficients.diffusion", "constant");
    }
    if (root.contains("coupling")) {
        const auto& c = root["coupling"];
        only_keys(c, "coupling", {"kappa"});
        cfg.kappa = number(c, "kappa", "coupling", cfg.kappa);
    }
    if (root.contains("sim")) {
        const auto& s = root["sim"];
        only_keys(s, "sim", {"horizon", "delta", "dt_max", "n_paths", "seed", "coalesce_tol"});
        cfg.sim.horizon = number(s, "horizon", "sim", cfg.sim.horizon);
        cfg.sim.trunc = number(s, "delta", "sim", cfg.sim.trunc);
        cfg.sim.dt_max = number(s, "dt_max", "sim", cfg.sim.dt_max);
        cfg.sim.n_paths = unsigned_number(s, "n_paths", "sim", cfg.sim.n_paths);
        cfg.sim.seed = unsigned_number(s, "seed", "sim", cfg.sim.seed);
        cfg.sim.coalesce_tol = number(s, "coalesce_tol", "sim", cfg.sim.coalesce_tol);
    }
    if (root.contains("scenario_params")) {
        const auto& p = root["scenario_params"];
        if (!p.is_object()) throw ConfigError("'scenario_params' must be an object");
        for (const auto& [key, v] : p.items()) {
            if (v.is_number()) {
                cfg.params.set(key, {v.get<double>()});
            } else if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
                cfg.params.set(key, v.get<std::vector<double>>());
            } else {
                throw ConfigError("'scenario_params." + key + "' must be a number or a list of numbers");
            }
        }
    }
    if (root.contains("output")) {
        const auto& o = root["output"];
        only_keys(o, "output", {"dir"});
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) throw ConfigError("'output.dir' must be a string");
            cfg.output_dir = o["dir"].get<std::string>();
        }
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate(const ExperimentConfig& cfg) {
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), cfg.scenario) == names.end())
        throw ConfigError("unknown scenario '" + cfg.scenario + "'");
    const auto& m = cfg.model;
    if (m.dim < 1 || m.dim > 3) throw ParameterError("dim must lie in {1,2,3}");
    if (!(m.alpha > 0.0 && m.alpha < 2.0)) throw ParameterError("alpha must lie in (0,2)");
    if (!(m.c0 > 0.0) || !std::isfinite(m.c0)) throw ParameterError("c0 must be positive");
    if (!(m.eta > 0.0 && m.eta <= 1.0)) throw ParameterError("eta must lie in (0,1]");
    if (!(cfg.kappa > 0.0) || !std::isfinite(cfg.kappa)) throw ParameterError("kappa must be positive");
    const auto& s = cfg.sim;
    if (!(s.horizon >= 0.0) || !std::isfinite(s.horizon)) throw ParameterError("horizon must be nonnegative");
    if (!(s.trunc > 0.0 && s.trunc < m.eta)) throw ParameterError("delta must lie in (0,eta)");
    if (!(s.dt_max > 0.0)) throw ParameterError("dt_max must be positive");
    if (s.n_paths < 1) throw ParameterError("n_paths must be at least 1");
    // Builds the presets once so their own parameter checks run now.
    (void)make_coefficients(m.dim, cfg.drift, cfg.diffusion);
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["scenario"] = cfg.scenario;
    j["model"] = {{"dim", cfg.model.dim},
                  {"alpha", cfg.model.alpha},
                  {"c0", cfg.model.c0},
                  {"eta", cfg.model.eta},
                  {"support", std::string(to_string(cfg.model.support))}};
    auto preset_json = [](const PresetSpec& p) {
        json o{{"name", p.name}};
        for (const auto& [k, v] : p.params) o[k] = v;
        return o;
    };
    j["coefficients"] = {{"drift", preset_json(cfg.drift)}, {"diffusion", preset_json(cfg.diffusion)}};
    j["coupling"] = {{"kappa", cfg.kappa}};
    j["sim"] = {{"horizon", cfg.sim.horizon},   {"delta", cfg.sim.trunc},
                {"dt_max", cfg.sim.dt_max},     {"n_paths", cfg.sim.n_paths},
                {"seed", cfg.sim.seed},         {"coalesce_tol", cfg.sim.coalesce_tol}};
    json params = json::object();
    for (const auto& [k, v] : cfg.params.values()) {
        if (v.size() == 1)
            params[k] = v.front();
        else
            params[k] = v;
    }
    j["scenario_params"] = params;
    j["output"] = {{"dir", cfg.output_dir}};
    return j;
}

}  // namespace lmc
