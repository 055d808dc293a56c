#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hotcat/config.hpp"

namespace hotcat {

struct RunContext {
    std::filesystem::path out_dir = ".";
    std::filesystem::path base_dir = ".";  // relative fit inputs resolve here
    unsigned jobs = 0;
    bool check = false;  // compare against existing files instead of writing
};

struct RunReport {
    std::string config;  // serialized config echo
    std::vector<std::string> outputs;
    std::map<std::string, double> diagnostics;
    double runtime_s = 0;
    std::vector<std::string> mismatches;  // --check only
    std::string to_json() const;
};

RunReport run(const RunConfig& config, const RunContext& ctx = {});

// columns of a CSV with a header row
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    int column(const std::string& name) const;  // -1 when absent
};
CsvTable read_csv(const std::filesystem::path& path);

// temp file + rename
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace hotcat
