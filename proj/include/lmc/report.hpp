#pragma once

#include <string>
#include <vector>

namespace lmc {

// Shortest round-trip decimal form; identical bits give identical text.
std::string fmt(double v);
std::string fmt(std::size_t v);

struct Table {
    std::string name;                          // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ScenarioResult {
    std::vector<Check> checks;
    std::vector<Table> tables;
    bool pass() const;
    void merge(ScenarioResult other);
};

// "# schema=1", header row, then the rows.
std::string csv_text(const Table& t);
void write_csv(const std::string& dir, const Table& t);
std::string report_text(const std::string& title, const ScenarioResult& r);

}  // namespace lmc
