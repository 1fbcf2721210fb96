// io.hpp: CSV and plot-data emission. All numbers are printed with 12
// significant digits, '.' as decimal separator and '\n' line ends, so output
// is byte-identical across runs for identical inputs.

#pragma once

#include "stirap/integrator.hpp"
#include "stirap/network.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stirap::io {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// One table: named columns of equal length.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

inline void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << num(row[i]);
        os << '\n';
    }
}

// t,P0,P1,Pe for three-level runs, t,P0,P1,Pe,Pr with the reference state.
template <int N>
Table trajectory_table(const Trajectory<N>& traj) {
    static_assert(N == 3 || N == 4, "single-node trajectories only");
    Table t;
    t.header = {"t", "P0", "P1", "Pe"};
    if constexpr (N == 4) t.header.push_back("Pr");
    for (std::size_t i = 0; i < traj.size(); ++i) {
        std::vector<double> row{traj.times[i]};
        for (int k = 0; k < N; ++k) row.push_back(traj.populations[i](k));
        t.add(std::move(row));
    }
    return t;
}

// Joint trajectory folded onto node-level labels: P_j = <j m|rho|j m> + <m j|rho|m j>.
inline Table trajectory_table(const Trajectory<6>& traj) {
    Table t;
    t.header = {"t", "P0", "P1", "Pe"};
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& p = traj.populations[i];
        std::vector<double> row{traj.times[i]};
        for (int k = 0; k < 3; ++k) row.push_back(p(joint::kLeft + k) + p(joint::kRight + k));
        t.add(std::move(row));
    }
    return t;
}

// Plot-ready file: a '#' header block naming the axes and parameters, a blank
// line, then whitespace-separated columns.
struct PlotData {
    std::string title;
    std::string x_label;
    std::vector<std::string> series;
    std::vector<std::pair<std::string, std::string>> parameters;
    Table table;  // first column is x, then one column per series
};

inline void write_plot_data(std::ostream& os, const PlotData& p) {
    os << "# title: " << p.title << '\n';
    os << "# x: " << p.x_label << '\n';
    os << "# series:";
    for (const auto& s : p.series) os << ' ' << s;
    os << '\n';
    for (const auto& [k, v] : p.parameters) os << "# param " << k << " = " << v << '\n';
    os << "# columns:";
    for (const auto& h : p.table.header) os << ' ' << h;
    os << "\n\n";
    for (const auto& row : p.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << num(row[i]);
        os << '\n';
    }
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    return f;
}

inline void save_csv(const std::filesystem::path& path, const Table& t) {
    auto f = open_output(path);
    write_csv(f, t);
    if (!f) throw std::runtime_error("cannot write " + path.string());
}

inline void emit_plot_data(const PlotData& p, const std::filesystem::path& path) {
    auto f = open_output(path);
    write_plot_data(f, p);
    if (!f) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace stirap::io
