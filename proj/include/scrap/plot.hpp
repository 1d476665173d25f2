#pragma once

// Minimal SVG line charts drawn from table columns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include "scrap/errors.hpp"
#include "scrap/table.hpp"

namespace scrap {

struct PlotSpec {
    std::string file;  // output name, e.g. "populations.svg"
    std::string table;
    std::string title;
    std::string x_column;
    std::vector<std::string> y_columns;
    std::string x_label;
    std::string y_label;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline const char* series_color(std::size_t i) {
    static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    return palette[i % 8];
}

}  // namespace detail

inline std::string render_svg(const Table& t, const PlotSpec& spec) {
    const double width = 640, height = 400, left = 70, right = 150, top = 40, bottom = 50;
    const double pw = width - left - right, ph = height - top - bottom;
    const auto x = t.values(spec.x_column);
    std::vector<std::vector<double>> ys;
    for (const auto& c : spec.y_columns) ys.push_back(t.values(c));

    double xmin = x.empty() ? 0.0 : *std::min_element(x.begin(), x.end());
    double xmax = x.empty() ? 1.0 : *std::max_element(x.begin(), x.end());
    double ymin = INFINITY, ymax = -INFINITY;
    for (const auto& y : ys)
        for (double v : y)
            if (std::isfinite(v)) {
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }
    if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double v) { return top + (ymax - v) / (ymax - ymin) * ph; };

    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << detail::svg_escape(spec.title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 4.0, yv = ymin + (ymax - ymin) * k / 4.0;
        os << "<text x=\"" << sx(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
       << detail::svg_escape(spec.x_label) << "</text>\n";
    os << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << detail::svg_escape(spec.y_label) << "</text>\n";
    for (std::size_t s = 0; s < ys.size(); ++s) {
        os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << detail::series_color(s) << "\" points=\"";
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (std::isfinite(ys[s][i])) os << sx(x[i]) << "," << sy(ys[s][i]) << " ";
        }
        os << "\"/>\n";
        const double ly = top + 14 + 16.0 * static_cast<double>(s);
        os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
           << "\" stroke=\"" << detail::series_color(s) << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << left + pw + 35 << "\" y=\"" << ly + 4 << "\">" << detail::svg_escape(spec.y_columns[s])
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline void write_svg_file(const std::string& path, const Table& t, const PlotSpec& spec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
    out << render_svg(t, spec);
}

}  // namespace scrap
