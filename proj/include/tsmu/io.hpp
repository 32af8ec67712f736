#pragma once

/**
 * @file
 * Byte-deterministic result emission: shortest round-trip decimals, CSV
 * tables, JSON documents, polyline SVG charts and atomic file writes.
 */

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tsmu {

/// Shortest decimal that parses back to exactly `v`; "nan", "inf", "-inf"
/// for non-finite values.
[[nodiscard]] std::string format_double(double v);

/// Writes to a sibling temporary file, then renames it over `path`.
/// Throws std::runtime_error on I/O failure.
void write_atomic(const std::filesystem::path &path, std::string_view content);

/// Fixed-order JSON text (keys sorted, two-space indent, trailing newline).
[[nodiscard]] std::string dump_json(const nlohmann::json &doc);

/// Comma-separated table with a header row and '\n' line ends.
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> header);

    /// Starts a new row; cells are then appended with the add overloads.
    CsvTable &row();
    CsvTable &add(double v);
    CsvTable &add(std::size_t v);
    CsvTable &add(std::string_view v);
    /// Empty cell.
    CsvTable &blank();

    [[nodiscard]] std::string str() const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct SvgSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Line chart with one polyline per series, axes labelled by their ranges.
[[nodiscard]] std::string svg_line_chart(const std::string &title, const std::string &x_label,
                                         const std::string &y_label,
                                         const std::vector<SvgSeries> &series);

} // namespace tsmu
