#ifndef TASEPLAB_CSVIO_HPP
#define TASEPLAB_CSVIO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace taseplab {

// Tabular output with byte-stable formatting (%.17g for doubles), so a rerun
// with the same seed reproduces files exactly.

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvWriter& begin_row();
    CsvWriter& col(double v);
    CsvWriter& col(std::int64_t v);
    CsvWriter& col(std::uint64_t v);
    CsvWriter& col(int v);
    CsvWriter& col(const std::string& v);

    std::string str() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    std::vector<double> numeric_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// Minimal polyline plot of one CSV column against another; reads the CSV
// back from disk so plots depend only on published data.
void svg_plot_from_csv(const std::string& csv_path, const std::string& svg_path, const std::string& x_col,
                       const std::vector<std::string>& y_cols, const std::string& title);

std::uint64_t fnv1a64(const std::string& text);

} // namespace taseplab

#endif
