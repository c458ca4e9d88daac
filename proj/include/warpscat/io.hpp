#pragma once

// CSV and SVG emission. Numbers are printed with std::to_chars: shortest
// round-trip form, independent of any locale, so identical runs produce
// byte-identical files. CSV: comma separator, '.' decimal, one header row,
// LF endings, a leading '#' comment recording the constants in force.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace warpscat::io {

inline std::string num(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string num(std::int64_t v) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string num(int v) { return num(static_cast<std::int64_t>(v)); }

inline std::string yesno(bool v) { return v ? "yes" : "no"; }

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::vector<std::string>& add_row() {
        rows.emplace_back();
        rows.back().reserve(columns.size());
        return rows.back();
    }
};

inline void write_csv(const std::filesystem::path& path, const std::string& header_comment,
                      const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << "\n";
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw std::runtime_error("csv row width mismatch in '" + path.string() + "'");
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

struct Series {
    std::string label;
    std::vector<double> x, y;
};

namespace detail {

inline std::string fixed2(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

}  // namespace detail

// Minimal static line chart; a convenience view of the CSV, not a contract.
inline void write_svg(const std::filesystem::path& path, const std::string& title,
                      const std::vector<Series>& series) {
    const double width = 720.0, height = 440.0;
    const double ml = 64.0, mr = 18.0, mt = 40.0, mb = 44.0;
    static const char* palette[] = {"#1f6fb2", "#c24d2c", "#3a7d44", "#8054a0", "#b08b2e"};

    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    bool first = true;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (first) {
                x_lo = x_hi = s.x[i];
                y_lo = y_hi = s.y[i];
                first = false;
            }
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;
    if (y_hi <= y_lo) y_hi = y_lo + 1.0;
    const double pad = 0.04 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const auto px = [&](double x) {
        return ml + (x - x_lo) / (x_hi - x_lo) * (width - ml - mr);
    };
    const auto py = [&](double y) {
        return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb);
    };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << ml << "\" y=\"24\" font-family=\"monospace\" font-size=\"15\">"
        << title << "</text>\n"
        << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr
        << "\" height=\"" << height - mt - mb
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double fx = x_lo + (x_hi - x_lo) * i / 4.0;
        const double fy = y_lo + (y_hi - y_lo) * i / 4.0;
        out << "<text x=\"" << detail::fixed2(px(fx)) << "\" y=\"" << height - mb + 18.0
            << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">"
            << detail::fixed2(fx) << "</text>\n"
            << "<text x=\"" << ml - 6.0 << "\" y=\"" << detail::fixed2(py(fy) + 4.0)
            << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">"
            << detail::fixed2(fy) << "</text>\n";
    }

    std::size_t color = 0;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << palette[color % 5]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            out << detail::fixed2(px(s.x[i])) << "," << detail::fixed2(py(s.y[i])) << " ";
        }
        out << "\"/>\n";
        if (!s.label.empty())
            out << "<text x=\"" << width - mr - 8.0 << "\" y=\""
                << mt + 18.0 + 16.0 * static_cast<double>(color)
                << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\" fill=\""
                << palette[color % 5] << "\">" << s.label << "</text>\n";
        ++color;
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace warpscat::io
