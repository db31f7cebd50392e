// csv.hpp: Minimal CSV writer with round-trip float formatting

#pragma once

#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace kmsorder {

using CsvCell = std::variant<double, long long, std::string>;

// 17 significant digits, so every double survives a text round trip.
std::string format_double(double v);
std::string csv_escape(const std::string& s);

class CsvWriter {
public:
    // Throws kmsorder::Error when the file cannot be opened.
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<CsvCell>& cells);
    std::size_t rows() const { return rows_; }

private:
    std::ofstream out_;
    std::size_t columns_;
    std::size_t rows_ = 0;
};

}  // namespace kmsorder
