#include "eepc/csvio.hpp"

#include <cstdio>
#include <stdexcept>

namespace eepc {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void CsvWriter::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
        throw std::invalid_argument("CsvWriter: cell count does not match header");
    rows_.push_back(std::move(cells));
}

std::string CsvWriter::str() const {
    std::string out;
    auto append_line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    append_line(columns_);
    for (const auto& row : rows_) append_line(row);
    return out;
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open for writing: " + path);
    file << str();
    if (!file) throw std::runtime_error("write failed: " + path);
}

}  // namespace eepc
