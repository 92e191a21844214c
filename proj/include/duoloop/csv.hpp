#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace duoloop {

/// Rectangular numeric table with named columns.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::initializer_list<double> values);
};

/// Format one CSV cell.  Finite values use 12 significant digits (stable
/// across reruns of the same build); infinities render as "inf"/"-inf".
std::string format_csv_value(double value);

/// Serialize a table to CSV text (header row + one line per data row).
std::string to_csv(const Table& table);

/// Write text to `path` atomically: the payload lands in a temporary file
/// in the same directory first and is renamed into place, so readers never
/// observe a half-written file.
void write_text_atomic(const std::string& text,
                       const std::filesystem::path& path);

void write_csv(const Table& table, const std::filesystem::path& path);

}  // namespace duoloop
