#include "taseplab/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "taseplab/errors.hpp"

namespace taseplab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter& CsvWriter::begin_row() {
    rows_.emplace_back();
    return *this;
}
CsvWriter& CsvWriter::col(double v) {
    rows_.back().push_back(format_double(v));
    return *this;
}
CsvWriter& CsvWriter::col(std::int64_t v) {
    rows_.back().push_back(std::to_string(v));
    return *this;
}
CsvWriter& CsvWriter::col(std::uint64_t v) {
    rows_.back().push_back(std::to_string(v));
    return *this;
}
CsvWriter& CsvWriter::col(int v) {
    rows_.back().push_back(std::to_string(v));
    return *this;
}
CsvWriter& CsvWriter::col(const std::string& v) {
    rows_.back().push_back(v);
    return *this;
}

std::string CsvWriter::str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += header_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw validation_error("CsvWriter: cannot open " + path);
    f << str();
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw validation_error("CsvTable: no column named " + name);
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
    const std::size_t idx = column(name);
    std::vector<double> out;
    for (const auto& row : rows) out.push_back(std::stod(row.at(idx)));
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw validation_error("read_csv: cannot open " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            table.header = cells;
            first = false;
        } else {
            table.rows.push_back(cells);
        }
    }
    return table;
}

void svg_plot_from_csv(const std::string& csv_path, const std::string& svg_path, const std::string& x_col,
                       const std::vector<std::string>& y_cols, const std::string& title) {
    const CsvTable table = read_csv(csv_path);
    const std::vector<double> xs = table.numeric_column(x_col);
    if (xs.empty()) throw validation_error("svg_plot_from_csv: no data rows");

    const int W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = xs[0], xmax = xs[0], ymin = 0.0, ymax = 0.0;
    bool yinit = false;
    std::vector<std::vector<double>> series;
    for (const auto& name : y_cols) {
        series.push_back(table.numeric_column(name));
        for (double v : series.back()) {
            if (!yinit) { ymin = ymax = v; yinit = true; }
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    for (double v : xs) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad; ymax += pad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title << "</text>\n"
        << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
        << "' stroke='black'/>\n"
        << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb << "' stroke='black'/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 4.0, yv = ymin + (ymax - ymin) * k / 4.0;
        svg << "<text x='" << px(xv) << "' y='" << H - mb + 18 << "' text-anchor='middle' font-size='11'>"
            << format_double(xv).substr(0, 8) << "</text>\n"
            << "<text x='" << ml - 6 << "' y='" << py(yv) + 4 << "' text-anchor='end' font-size='11'>"
            << format_double(yv).substr(0, 8) << "</text>\n";
    }
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    for (std::size_t s = 0; s < series.size(); ++s) {
        svg << "<polyline fill='none' stroke='" << colors[s % 4] << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < xs.size(); ++i) svg << px(xs[i]) << ',' << py(series[s][i]) << ' ';
        svg << "'/>\n<text x='" << W - mr - 8 << "' y='" << mt + 16 * (s + 1) << "' text-anchor='end' fill='"
            << colors[s % 4] << "' font-size='12'>" << y_cols[s] << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream f(svg_path, std::ios::binary);
    if (!f) throw validation_error("svg_plot_from_csv: cannot open " + svg_path);
    f << svg.str();
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace taseplab
