// CSV ingestion/serialization for curves and observations, and the JSON
// significance report. The curve CSV is self-describing: the header row
// carries the design points, each data row a curve. Lines starting with '#'
// are metadata comments (e.g. the generator seed).
#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmc/grid_curves.hpp"
#include "fmc/reconstruction.hpp"
#include "fmc/significance.hpp"

namespace fmc {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, long line_no) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw io_error("malformed numeric field '" + s + "'", line_no);
    }
}

}  // namespace detail

struct CsvTable {
    GridPtr grid;
    std::vector<std::string> row_ids;
    std::vector<std::vector<double>> rows;           // raw values, n x m
    std::map<std::string, std::string> metadata;     // from '# key=value' comments
};

/// Shared reader for curve and observation files.
inline CsvTable read_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    CsvTable table;
    std::string line;
    long line_no = 0;
    bool have_header = false;
    std::vector<double> points;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                while (!key.empty() && key.front() == ' ') key.erase(key.begin());
                while (!key.empty() && key.back() == ' ') key.pop_back();
                table.metadata[key] = line.substr(eq + 1);
            }
            continue;
        }
        auto fields = detail::split_csv(line);
        if (!have_header) {
            if (fields.size() < 4 || fields[0] != "t")
                throw io_error("expected header 't,<t_1>,...,<t_m>' with m >= 3", line_no);
            for (size_t j = 1; j < fields.size(); ++j)
                points.push_back(detail::parse_double(fields[j], line_no));
            const int m = static_cast<int>(points.size());
            table.grid = make_grid(m);
            for (int j = 0; j < m; ++j)
                if (std::abs(points[j] - table.grid->points[j]) > 1e-9)
                    throw io_error("design points must be uniform on [0,1]; point " +
                                       std::to_string(j + 1) + " is " + format_double(points[j]),
                                   line_no);
            have_header = true;
            continue;
        }
        if (fields.size() != points.size() + 1)
            throw io_error("expected " + std::to_string(points.size() + 1) + " fields, got " +
                               std::to_string(fields.size()),
                           line_no);
        std::vector<double> row(points.size());
        for (size_t j = 0; j < points.size(); ++j) {
            row[j] = detail::parse_double(fields[j + 1], line_no);
            if (!std::isfinite(row[j])) throw io_error("non-finite value", line_no);
        }
        table.row_ids.push_back(fields[0]);
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw io_error("missing header row in " + path, line_no);
    if (table.rows.empty()) throw io_error("no data rows in " + path, line_no);
    return table;
}

/// Curves are shift-normalized at ingestion.
inline CurveSample read_curves_csv(const std::string& path) {
    CsvTable table = read_table_csv(path);
    CurveSample sample;
    sample.grid = table.grid;
    for (auto& row : table.rows)
        sample.curves.push_back(normalize_shift(Curve{table.grid, std::move(row)}));
    return sample;
}

inline Observations read_observations_csv(const std::string& path) {
    CsvTable table = read_table_csv(path);
    Observations obs;
    obs.grid = table.grid;
    obs.values = std::move(table.rows);
    if (auto it = table.metadata.find("sigma"); it != table.metadata.end())
        obs.sigma = detail::parse_double(it->second, 0);
    return obs;
}

inline void write_table_csv(const std::string& path, const GridPtr& grid,
                            const std::vector<std::vector<double>>& rows,
                            const std::vector<std::string>& row_ids,
                            const std::map<std::string, std::string>& metadata = {}) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    for (const auto& [k, v] : metadata) out << "# " << k << "=" << v << "\n";
    out << "t";
    for (double t : grid->points) out << "," << format_double(t);
    out << "\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        out << row_ids[i];
        for (double v : rows[i]) out << "," << format_double(v);
        out << "\n";
    }
}

inline void write_curves_csv(const std::string& path, const CurveSample& sample,
                             const std::map<std::string, std::string>& metadata = {},
                             const std::string& id_prefix = "curve_") {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> ids;
    for (size_t i = 0; i < sample.curves.size(); ++i) {
        rows.push_back(sample.curves[i].values);
        ids.push_back(id_prefix + std::to_string(i));
    }
    write_table_csv(path, sample.grid, rows, ids, metadata);
}

inline void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << "curve,mode\n";
    for (size_t i = 0; i < labels.size(); ++i) out << "curve_" << i << "," << labels[i] << "\n";
}

/// JSON view of a significance report plus run provenance. Key order is
/// alphabetical (nlohmann object), so identical runs serialize identically.
inline nlohmann::json report_json(const SignificanceReport& rep, const ModeSet& modes, long n, int m,
                                  double h, double alpha, double M, const std::string& m_source,
                                  const nlohmann::json& config_echo) {
    nlohmann::json j;
    j["n"] = n;
    j["m"] = m;
    j["h"] = h;
    j["alpha"] = alpha;
    j["M"] = M;
    j["M_source"] = m_source;
    j[rep.tilde ? "C1_tilde" : "C1"] = rep.C1;
    j[rep.tilde ? "C2_tilde" : "C2"] = rep.C2;
    j["beta3"] = rep.beta3;
    j["threshold"] = rep.threshold;
    j["merge_radius"] = modes.merge_radius;
    j["ignored_nonconverged"] = modes.ignored_nonconverged;
    j["excluded_saddles"] = modes.excluded_saddles;
    j["config"] = config_echo;
    auto arr = nlohmann::json::array();
    for (size_t k = 0; k < modes.modes.size(); ++k) {
        nlohmann::json mj;
        mj["index"] = k;
        mj["delta"] = rep.decisions[k].delta;
        mj["density"] = modes.modes[k].attained_density;
        mj["significant"] = rep.decisions[k].significant;
        mj["ball_radius"] = rep.decisions[k].ball_radius;
        mj["localization_radius"] = rep.decisions[k].localization;
        arr.push_back(std::move(mj));
    }
    j["modes"] = arr;
    return j;
}

}  // namespace fmc
