#pragma once

#include <string>
#include <vector>

#include "msbridge/calibration.hpp"
#include "msbridge/measures.hpp"

namespace msb::io {

// CSV with an optional header line. Numbers are written with 17
// significant digits so that every value round-trips.

std::string g17(double x);

DiscreteMeasure read_measure(const std::string& path);                  // point,weight
JointMeasure read_joint(const std::string& path);                       // x,y,weight
std::vector<CallQuote> read_quotes(const std::string& path);            // strike,price
std::vector<double> read_function(const std::string& path, const Grid& grid);  // point,value

void write_measure(const std::string& path, const DiscreteMeasure& m);
void write_joint(const std::string& path, const JointMeasure& j);
void write_function(const std::string& path, const Grid& grid, const std::vector<double>& values,
                    const std::string& value_name);

/// Rows of numeric cells; the first line is skipped when it is not numeric.
std::vector<std::vector<double>> read_table(const std::string& path, std::size_t columns);

void write_text(const std::string& path, const std::string& text);

}  // namespace msb::io
