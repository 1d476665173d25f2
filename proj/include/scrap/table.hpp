#pragma once

// Column table written as CSV, with fixed formatting so identical runs give
// identical bytes: 12 significant digits, LF line endings.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <locale>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "scrap/dynamics.hpp"
#include "scrap/errors.hpp"

namespace scrap {

struct Table {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& c) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == c) return i;
        throw Error(ErrorKind::InvalidArgument, "table " + name + " has no column " + c);
    }
    std::vector<double> values(const std::string& c) const {
        const std::size_t k = column(c);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[k]);
        return out;
    }
};

inline void write_csv(std::ostream& os, const Table& t) {
    std::ostringstream body;
    body.imbue(std::locale::classic());
    body << std::setprecision(12);
    for (std::size_t i = 0; i < t.columns.size(); ++i) body << (i ? "," : "") << t.columns[i];
    body << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) body << ',';
            if (std::isnan(row[i])) body << "nan";
            else body << row[i];
        }
        body << '\n';
    }
    os << body.str();
}

inline void write_csv_file(const std::string& path, const Table& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
    write_csv(out, t);
}

/// Trajectory as a table: t_ns, P_<label>..., A_k..., mu_k..., norm.
inline Table trajectory_table(const std::string& name, const TrajectoryResult& r) {
    Table t;
    t.name = name;
    const std::size_t n = r.populations.empty() ? 0 : r.populations.front().size();
    t.columns.push_back("t_ns");
    for (std::size_t i = 0; i < n; ++i) t.columns.push_back("P_" + (i < r.labels.size() ? r.labels[i] : std::to_string(i)));
    const bool adiabatic = !r.adiabatic_populations.empty();
    if (adiabatic) {
        for (std::size_t i = 0; i < n; ++i) t.columns.push_back("A_" + std::to_string(i));
        for (std::size_t i = 0; i < n; ++i) t.columns.push_back("mu_" + std::to_string(i));
    }
    t.columns.push_back("norm");
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        std::vector<double> row{r.times[k]};
        row.insert(row.end(), r.populations[k].begin(), r.populations[k].end());
        if (adiabatic) {
            row.insert(row.end(), r.adiabatic_populations[k].begin(), r.adiabatic_populations[k].end());
            row.insert(row.end(), r.eigenvalues[k].begin(), r.eigenvalues[k].end());
        }
        row.push_back(r.norms[k]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Keeps every `stride`-th row (and the last) to bound plot and file sizes.
inline Table thin(const Table& t, std::size_t max_rows) {
    if (t.rows.size() <= max_rows || max_rows < 2) return t;
    Table out{t.name, t.columns, {}};
    const std::size_t stride = (t.rows.size() + max_rows - 2) / (max_rows - 1);
    for (std::size_t i = 0; i < t.rows.size(); i += stride) out.rows.push_back(t.rows[i]);
    if ((t.rows.size() - 1) % stride != 0) out.rows.push_back(t.rows.back());
    return out;
}

}  // namespace scrap
