#include "lmc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lmc/errors.hpp"

namespace lmc {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt(std::size_t v) { return std::to_string(v); }

bool ScenarioResult::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void ScenarioResult::merge(ScenarioResult other) {
    for (auto& c : other.checks) checks.push_back(std::move(c));
    for (auto& t : other.tables) tables.push_back(std::move(t));
}

namespace {

std::string escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += escape(cells[i]);
    }
    return line;
}

}  // namespace

std::string csv_text(const Table& t) {
    std::string out = "# schema=1\n" + join(t.columns) + "\n";
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size())
            throw ParameterError("table '" + t.name + "' row width does not match its header");
        out += join(row) + "\n";
    }
    return out;
}

void write_csv(const std::string& dir, const Table& t) {
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / (t.name + ".csv"), std::ios::binary);
    if (!out) throw ConfigError("cannot write table '" + t.name + "' into '" + dir + "'");
    out << csv_text(t);
}

std::string report_text(const std::string& title, const ScenarioResult& r) {
    std::ostringstream os;
    os << title << "\n";
    std::size_t passed = 0;
    for (const auto& c : r.checks) {
        os << (c.pass ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty()) os << "  " << c.detail;
        os << "\n";
        passed += c.pass;
    }
    os << passed << "/" << r.checks.size() << " checks passed\n";
    return os.str();
}

}  // namespace lmc
