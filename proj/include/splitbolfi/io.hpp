#ifndef SPLITBOLFI_IO_HPP
#define SPLITBOLFI_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitbolfi/posterior.hpp"
#include "splitbolfi/simulators/daycare.hpp"

namespace splitbolfi {

// Fixed-format double so that repeated runs produce byte-identical files.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

[[nodiscard]] inline std::string csv_row(const std::vector<std::string>& fields) {
    std::string row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) row += ',';
        row += fields[i];
    }
    row += '\n';
    return row;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

[[nodiscard]] inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

[[nodiscard]] inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

// Observed-data summary file: a header naming each summary and one row of
// values.
inline void write_summary_csv(const std::filesystem::path& path,
                              const std::vector<std::string>& names,
                              const std::vector<double>& values) {
    if (names.size() != values.size()) {
        throw std::invalid_argument("write_summary_csv: size mismatch");
    }
    std::string content = csv_row(names);
    std::vector<std::string> fields;
    fields.reserve(values.size());
    for (double v : values) fields.push_back(format_double(v));
    content += csv_row(fields);
    write_text_file(path, content);
}

[[nodiscard]] inline std::vector<double> load_summary_csv(const std::filesystem::path& path,
                                                          const std::vector<std::string>& expected_names) {
    std::istringstream in(read_text_file(path));
    std::string header, row;
    if (!std::getline(in, header) || !std::getline(in, row)) {
        throw std::runtime_error("summary file too short: " + path.string());
    }
    const auto names = split_csv_line(header);
    if (!expected_names.empty() && names != expected_names) {
        throw std::runtime_error("summary header mismatch in " + path.string());
    }
    const auto fields = split_csv_line(row);
    if (fields.size() != names.size()) {
        throw std::runtime_error("summary row/header mismatch in " + path.string());
    }
    std::vector<double> values;
    values.reserve(fields.size());
    for (const auto& f : fields) values.push_back(std::stod(f));
    return values;
}

// Daycare snapshots: one row per (time point, child) with binary strain
// indicators.
inline void write_snapshots_csv(const std::filesystem::path& path,
                                const std::vector<DaycareSimulator::Snapshot>& snapshots,
                                int n_children, int n_strains) {
    std::vector<std::string> header{"time", "child"};
    for (int s = 0; s < n_strains; ++s) header.push_back("strain_" + std::to_string(s));
    std::string content = csv_row(header);
    for (std::size_t t = 0; t < snapshots.size(); ++t) {
        for (int i = 0; i < n_children; ++i) {
            std::vector<std::string> fields{std::to_string(t), std::to_string(i)};
            for (int s = 0; s < n_strains; ++s) {
                fields.push_back(snapshots[t][i * n_strains + s] ? "1" : "0");
            }
            content += csv_row(fields);
        }
    }
    write_text_file(path, content);
}

[[nodiscard]] inline std::vector<DaycareSimulator::Snapshot> load_snapshots_csv(
    const std::filesystem::path& path, int n_children, int n_strains) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty snapshot file");
    const auto header = split_csv_line(line);
    if (header.size() != static_cast<std::size_t>(2 + n_strains)) {
        throw std::runtime_error("snapshot header does not match strain count");
    }
    std::vector<DaycareSimulator::Snapshot> snapshots;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        const auto t = static_cast<std::size_t>(std::stoul(fields.at(0)));
        const int child = std::stoi(fields.at(1));
        if (t >= snapshots.size()) {
            snapshots.resize(t + 1, DaycareSimulator::Snapshot(n_children * n_strains, 0));
        }
        for (int s = 0; s < n_strains; ++s) {
            snapshots[t][child * n_strains + s] =
                static_cast<std::uint8_t>(std::stoi(fields.at(2 + s)) != 0);
        }
    }
    return snapshots;
}

// MarginalProxy CSV: theta, mu, density.
[[nodiscard]] inline std::string proxy_csv(const std::string& parameter,
                                           const MarginalProxy& proxy) {
    std::string content;
    for (std::size_t i = 0; i < proxy.grid.size(); ++i) {
        content += csv_row({parameter, format_double(proxy.grid[i]), format_double(proxy.mu[i]),
                            format_double(proxy.density[i])});
    }
    return content;
}

}  // namespace splitbolfi

#endif  // SPLITBOLFI_IO_HPP
