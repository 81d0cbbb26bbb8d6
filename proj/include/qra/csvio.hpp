#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qra/core.hpp"

namespace qra::csv {

std::vector<std::string> split_line(const std::string& line);
double parse_double(const std::string& field);  // throws ParseError
/// Shortest decimal that round-trips the exact double.
std::string format_double(double v);

}  // namespace qra::csv

namespace qra {

/// `datetime` column plus one column per forecaster label.
void save_point_matrix_csv(const std::string& path, const PointForecastMatrix& m);
void save_point_matrix_csv(std::ostream& out, const PointForecastMatrix& m);
PointForecastMatrix load_point_matrix_csv(const std::string& path);

/// `datetime` column plus one column per grid level, headers q01..q99 (or
/// q<percent> for non-integer percents).
void save_surface_csv(const std::string& path, const QuantileForecastSurface& s);
void save_surface_csv(std::ostream& out, const QuantileForecastSurface& s);
QuantileForecastSurface load_surface_csv(const std::string& path);

/// Single-column actual prices ("datetime,price_da"), accepted by `evaluate`.
HourlyTimeSeries load_actuals_csv(const std::string& path, const std::string& column = "price_da");

}  // namespace qra
