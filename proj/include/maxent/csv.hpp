#pragma once

#include "maxent/numerics.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace maxent {

/// Reads a numeric CSV, one vector per row. Blank lines and lines starting
/// with '#' are skipped; with `has_header` the first remaining line is too.
/// Throws InvalidInput on ragged rows or unparsable fields.
Matrix read_csv(const std::filesystem::path& path, bool has_header = false);
Matrix parse_csv(const std::string& text, bool has_header = false);

/// "%.*g" text with the given significant digits; 17 digits round-trip.
std::string format_real(double value, int digits = 17);

void write_csv_row(std::ostream& out, const Vector& row, int digits = 17);
void write_csv(std::ostream& out, const Matrix& rows, int digits = 17);

}  // namespace maxent
