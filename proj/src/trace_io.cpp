#include "byzsync/trace_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "byzsync/error.hpp"

namespace byzsync {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_double(v))); }

CsvWriter& CsvWriter::cell(std::string_view s) {
  if (col_ >= width_) throw Error(ErrorCode::DimensionMismatch, "CSV row longer than its header");
  out_ << (col_ ? "," : "") << s;
  ++col_;
  return *this;
}

void CsvWriter::end_row() {
  if (col_ != width_) throw Error(ErrorCode::DimensionMismatch, "CSV row shorter than its header");
  out_ << '\n';
  col_ = 0;
}

std::size_t CsvTable::column(std::string_view name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(ErrorCode::InvalidArgument, "no CSV column named " + std::string(name));
  return static_cast<std::size_t>(it - columns.begin());
}

bool CsvTable::has_column(std::string_view name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

void write_trace(std::ostream& out, const SimulationTrace& trace) {
  CsvWriter w(out, trace.columns);
  for (const auto& r : trace.rows) {
    for (double v : r) w.cell(v);
    w.end_row();
  }
}

void write_trace(const std::string& path, const SimulationTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  write_trace(out, trace);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::SchemaError, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.columns = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.columns.size()) {
      throw Error(ErrorCode::SchemaError, "line " + std::to_string(lineno) + " has the wrong number of cells");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size()) {
        throw Error(ErrorCode::SchemaError, "line " + std::to_string(lineno) + ": '" + c + "' is not a number");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot open " + path);
  return read_csv(in);
}

}  // namespace byzsync
