#pragma once

#include <string>
#include <vector>

#include "voltvar/metrics.hpp"

namespace voltvar {

/// Static SVG line chart: each requested column becomes one polyline over
/// the table's first column (the x axis). Output is deterministic for
/// identical input. Throws std::runtime_error for unknown columns or an
/// empty table.
std::string render_line_chart(const CsvTable& table, const std::vector<std::string>& columns,
                              const std::string& title = "");

} // namespace voltvar
