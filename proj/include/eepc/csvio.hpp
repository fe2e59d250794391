#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace eepc {

// Doubles are serialized with 17 significant digits, enough to round-trip
// exactly.
std::string format_double(double value);

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(std::vector<std::string> cells);
    const std::vector<std::string>& columns() const { return columns_; }
    std::string str() const;
    void write(const std::string& path) const;

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(long v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "1" : "0"; }
inline std::string cell(const char* v) { return v; }
inline std::string cell(const std::string& v) { return v; }

}  // namespace eepc
