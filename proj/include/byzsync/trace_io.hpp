#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "byzsync/simulation.hpp"

namespace byzsync {

/// Shortest text that always reads back to the same double (17 significant
/// digits).
std::string format_double(double v);

/// Rows of cells written with a header line. Numbers go through
/// format_double so output is byte-stable.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  CsvWriter& cell(double v);
  CsvWriter& cell(std::string_view s);
  void end_row();

 private:
  std::ostream& out_;
  std::size_t width_;
  std::size_t col_ = 0;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const;  // throws InvalidArgument
  bool has_column(std::string_view name) const;
};

void write_trace(std::ostream& out, const SimulationTrace& trace);
void write_trace(const std::string& path, const SimulationTrace& trace);

/// Numeric CSV with a header. Throws SchemaError on ragged or non-numeric
/// rows.
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

}  // namespace byzsync
