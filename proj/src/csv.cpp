#include "oce/csv.hpp"

#include <cstdio>
#include <stdexcept>

#include "oce/version.hpp"

namespace oce {

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_num(std::int64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    return buf;
}

CsvFile::CsvFile(const std::filesystem::path& path, std::uint64_t seed,
                 const std::vector<std::string>& columns,
                 const std::vector<std::string>& extra_comments)
    : out_(path), width_(columns.size()) {
    if (!out_) {
        throw std::runtime_error("cannot open CSV output: " + path.string());
    }
    out_ << "# seed=" << seed << " version=" << k_version << "\n";
    for (const auto& c : extra_comments) out_ << "# " << c << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
    }
    out_ << "\n";
}

void CsvFile::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) {
        throw std::runtime_error("CSV row width mismatch");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out_ << cells[i] << (i + 1 < cells.size() ? "," : "");
    }
    out_ << "\n";
}

} // namespace oce
