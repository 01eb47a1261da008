#ifndef SRSGROUP_IO_HPP
#define SRSGROUP_IO_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace srsgroup {

// Deterministic number formatting for CSV output. All writers in this
// project go through format_double so that reruns are byte identical.
std::string format_double(double v);

// Minimal CSV writer with a fixed header. Throws std::runtime_error if
// the file cannot be opened or a row has the wrong arity.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void write_row(const std::vector<std::string>& cells);
    void write_row(const std::vector<double>& values);
    void close();

private:
    std::ofstream out_;
    std::size_t columns_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const; // -1 when absent
};

CsvTable read_csv(const std::string& path);

// FNV-1a, used for config and artifact hashing in manifests.
std::uint64_t fnv1a64(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace srsgroup

#endif
