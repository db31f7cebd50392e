#include "kmsorder/csv.hpp"

#include <cmath>
#include <cstdio>

#include "kmsorder/error.hpp"

namespace kmsorder {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
    if (!out_) throw Error("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << csv_escape(header[i]);
    out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
    if (cells.size() != columns_) throw Error("csv row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        if (const auto* d = std::get_if<double>(&cells[i])) out_ << format_double(*d);
        else if (const auto* n = std::get_if<long long>(&cells[i])) out_ << *n;
        else out_ << csv_escape(std::get<std::string>(cells[i]));
    }
    out_ << '\n';
    out_.flush();
    ++rows_;
}

}  // namespace kmsorder
