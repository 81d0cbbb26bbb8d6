#include "qra/csvio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace qra::csv {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& field) {
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    while (begin < end && *begin == ' ') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) throw ParseError("bad number: '" + field + "'");
    if (!std::isfinite(v)) throw ParseError("non-finite number: '" + field + "'");
    return v;
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace qra::csv

namespace qra {

namespace {

std::vector<std::vector<std::string>> read_rows(const std::string& path,
                                                std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file '" + path + "'");
    header = csv::split_line(line);
    std::vector<std::vector<std::string>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        rows.push_back(csv::split_line(line));
        if (rows.back().size() != header.size()) {
            throw ParseError(path + ": row " + std::to_string(lineno) + ": field count mismatch");
        }
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");
    return rows;
}

}  // namespace

void save_point_matrix_csv(const std::string& path, const PointForecastMatrix& m) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    save_point_matrix_csv(out, m);
}

void save_point_matrix_csv(std::ostream& out, const PointForecastMatrix& m) {
    out << "datetime";
    for (const std::string& name : m.forecaster_names()) out << "," << name;
    out << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out << format_timestamp(m.stamps()[i]);
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out << "," << csv::format_double(m.values()(static_cast<Eigen::Index>(i),
                                                        static_cast<Eigen::Index>(j)));
        }
        out << "\n";
    }
}

PointForecastMatrix load_point_matrix_csv(const std::string& path) {
    std::vector<std::string> header;
    const auto rows = read_rows(path, header);
    if (header.empty() || header[0] != "datetime") {
        throw ParseError(path + ": first column must be 'datetime'");
    }
    std::vector<std::string> names(header.begin() + 1, header.end());
    if (names.empty()) throw ParseError(path + ": no forecaster columns");
    std::vector<Timestamp> stamps;
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        stamps.push_back(parse_timestamp(rows[i][0]));
        for (std::size_t j = 0; j < names.size(); ++j) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                csv::parse_double(rows[i][j + 1]);
        }
    }
    return PointForecastMatrix(std::move(stamps), std::move(names), std::move(values));
}

namespace {

std::string level_header(double level) {
    const double percent = level * 100.0;
    const double rounded = std::round(percent);
    char buf[32];
    if (std::abs(percent - rounded) < 1e-9) {
        std::snprintf(buf, sizeof(buf), "q%02d", static_cast<int>(rounded));
    } else {
        std::snprintf(buf, sizeof(buf), "q%g", percent);
    }
    return buf;
}

double level_from_header(const std::string& h) {
    if (h.size() < 2 || h[0] != 'q') throw ParseError("bad quantile header: '" + h + "'");
    return csv::parse_double(h.substr(1)) / 100.0;
}

}  // namespace

void save_surface_csv(const std::string& path, const QuantileForecastSurface& s) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    save_surface_csv(out, s);
}

void save_surface_csv(std::ostream& out, const QuantileForecastSurface& s) {
    out << "datetime";
    for (double level : s.grid().levels()) out << "," << level_header(level);
    out << "\n";
    for (std::size_t i = 0; i < s.rows(); ++i) {
        out << format_timestamp(s.stamps()[i]);
        for (std::size_t j = 0; j < s.grid().size(); ++j) {
            out << "," << csv::format_double(s.values()(static_cast<Eigen::Index>(i),
                                                        static_cast<Eigen::Index>(j)));
        }
        out << "\n";
    }
}

QuantileForecastSurface load_surface_csv(const std::string& path) {
    std::vector<std::string> header;
    const auto rows = read_rows(path, header);
    if (header.empty() || header[0] != "datetime") {
        throw ParseError(path + ": first column must be 'datetime'");
    }
    std::vector<double> levels;
    for (std::size_t j = 1; j < header.size(); ++j) levels.push_back(level_from_header(header[j]));
    std::vector<Timestamp> stamps;
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(levels.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        stamps.push_back(parse_timestamp(rows[i][0]));
        for (std::size_t j = 0; j < levels.size(); ++j) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                csv::parse_double(rows[i][j + 1]);
        }
    }
    return QuantileForecastSurface(std::move(stamps), QuantileGrid(std::move(levels)),
                                   std::move(values));
}

HourlyTimeSeries load_actuals_csv(const std::string& path, const std::string& column) {
    std::vector<std::string> header;
    const auto rows = read_rows(path, header);
    std::ptrdiff_t col = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == column) col = static_cast<std::ptrdiff_t>(j);
    }
    if (col < 0) throw ParseError(path + ": missing column '" + column + "'");
    std::vector<Timestamp> stamps;
    std::vector<double> values;
    for (const auto& row : rows) {
        stamps.push_back(parse_timestamp(row[0]));
        values.push_back(csv::parse_double(row[static_cast<std::size_t>(col)]));
    }
    return HourlyTimeSeries(std::move(stamps), std::move(values), "EUR/MWh");
}

}  // namespace qra
