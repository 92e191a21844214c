#include "duoloop/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "duoloop/errors.hpp"

namespace duoloop {

void Table::add_row(std::initializer_list<double> values) {
  if (values.size() != columns.size()) {
    throw InvalidParameterError("table '" + name + "': row has " +
                                std::to_string(values.size()) +
                                " values, expected " +
                                std::to_string(columns.size()));
  }
  rows.emplace_back(values);
}

std::string format_csv_value(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_csv_value(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_text_atomic(const std::string& text,
                       const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  const fs::path dir = path.parent_path().empty() ? fs::path(".")
                                                  : path.parent_path();
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = dir / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot open '" + tmp.string() + "' for writing");
    }
    out << text;
    if (!out.flush()) {
      throw Error("write to '" + tmp.string() + "' failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error("rename '" + tmp.string() + "' -> '" + path.string() +
                "' failed: " + ec.message());
  }
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  write_text_atomic(to_csv(table), path);
}

}  // namespace duoloop
