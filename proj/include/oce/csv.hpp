#ifndef OCE_CSV_HPP
#define OCE_CSV_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace oce {

/// %.17g rendering: round-trips doubles and is byte-stable across reruns.
std::string csv_num(double v);
std::string csv_num(std::int64_t v);

/// Column-oriented CSV writer. Every file carries "# seed=<s> version=<v>"
/// (plus optional extra comments) above the header row; rows are written in
/// call order, so identical inputs produce byte-identical files.
class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, std::uint64_t seed,
            const std::vector<std::string>& columns,
            const std::vector<std::string>& extra_comments = {});

    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::size_t width_;
};

} // namespace oce

#endif
