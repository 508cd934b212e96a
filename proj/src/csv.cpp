#include "maxent/csv.hpp"

#include "maxent/errors.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

namespace maxent {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Matrix parse_csv(const std::string& text, bool has_header) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool skipped_header = !has_header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream fields(t);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const std::string f = trim(field);
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size() || errno == ERANGE) {
        throw InvalidInput("csv line " + std::to_string(line_no) + ": cannot parse '" + f + "'");
      }
      row.push_back(v);
    }
    if (t.back() == ',') {
      throw InvalidInput("csv line " + std::to_string(line_no) + ": empty trailing field");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InvalidInput("csv line " + std::to_string(line_no) + ": expected " +
                         std::to_string(rows.front().size()) + " fields, found " +
                         std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("csv input has no data rows");

  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

Matrix read_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), has_header);
}

std::string format_real(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return buf;
}

void write_csv_row(std::ostream& out, const Vector& row, int digits) {
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (j > 0) out << ',';
    out << format_real(row[j], digits);
  }
  out << '\n';
}

void write_csv(std::ostream& out, const Matrix& rows, int digits) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) write_csv_row(out, rows.row(i).transpose(), digits);
}

}  // namespace maxent
