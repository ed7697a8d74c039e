#include "voltvar/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace voltvar {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Round axis bounds to a tidy tick step.
std::pair<double, double> pad_range(double lo, double hi) {
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    }
    double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

} // namespace

std::string render_line_chart(const CsvTable& table, const std::vector<std::string>& columns,
                              const std::string& title) {
    if (table.rows.empty()) throw std::runtime_error("plot: table has no data rows");
    if (columns.empty()) throw std::runtime_error("plot: no columns requested");

    std::vector<int> col_idx;
    for (const auto& name : columns) {
        int i = table.column_index(name);
        if (i < 0) throw std::runtime_error("plot: unknown column '" + name + "'");
        col_idx.push_back(i);
    }

    const double width = 960, height = 540;
    const double ml = 70, mr = 24, mt = title.empty() ? 24 : 44, mb = 46;

    double x_lo = table.rows.front()[0], x_hi = x_lo;
    double y_lo = table.rows.front()[col_idx[0]], y_hi = y_lo;
    for (const auto& row : table.rows) {
        x_lo = std::min(x_lo, row[0]);
        x_hi = std::max(x_hi, row[0]);
        for (int ci : col_idx) {
            y_lo = std::min(y_lo, row[ci]);
            y_hi = std::max(y_hi, row[ci]);
        }
    }
    std::tie(x_lo, x_hi) = pad_range(x_lo, x_hi);
    std::tie(y_lo, y_hi) = pad_range(y_lo, y_hi);

    auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           << "font-size=\"16\">" << title << "</text>\n";

    // Axes + ticks.
    os << "<g stroke=\"#333\" stroke-width=\"1\">";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb << "\"/>";
    os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr << "\" y2=\""
       << height - mb << "\"/>";
    os << "</g>\n";
    os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (int k = 0; k <= 5; ++k) {
        double xv = x_lo + (x_hi - x_lo) * k / 5.0;
        double yv = y_lo + (y_hi - y_lo) * k / 5.0;
        os << "<text x=\"" << num(px(xv)) << "\" y=\"" << height - mb + 16 << "\" text-anchor=\"middle\">"
           << num(xv) << "</text>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
           << "</text>\n";
        os << "<line x1=\"" << ml << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << width - mr << "\" y2=\""
           << num(py(yv)) << "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
    }
    os << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 8
       << "\" text-anchor=\"middle\">" << table.columns[0] << "</text>\n";
    os << "</g>\n";

    for (size_t s = 0; s < col_idx.size(); ++s) {
        os << "<polyline fill=\"none\" stroke=\"" << kPalette[s % 6] << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& row : table.rows) os << num(px(row[0])) << "," << num(py(row[col_idx[s]])) << " ";
        os << "\"/>\n";
    }

    if (col_idx.size() >= 2) {
        double lx = width - mr - 180, ly = mt + 10;
        os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
        for (size_t s = 0; s < col_idx.size(); ++s) {
            double y = ly + 18.0 * s;
            os << "<line x1=\"" << lx << "\" y1=\"" << y << "\" x2=\"" << lx + 24 << "\" y2=\"" << y
               << "\" stroke=\"" << kPalette[s % 6] << "\" stroke-width=\"2\"/>";
            os << "<text x=\"" << lx + 30 << "\" y=\"" << y + 4 << "\">" << columns[s] << "</text>\n";
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace voltvar
