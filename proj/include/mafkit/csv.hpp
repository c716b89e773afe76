#pragma once

#include <mafkit/panel.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mafkit {

//! Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

//! Reads a panel: a header row of unique series names, an optional first
//! column named "t" holding the time index, then one row of decimal reals per
//! time step. Errors carry the 1-based line and column.
TimeSeriesPanel parse_csv(std::istream& in, const std::string& source = "<stream>");
TimeSeriesPanel ingest_csv(const std::filesystem::path& path, bool standardize = false);

//! Writes a header and the rows of a matrix, optionally preceded by a "t" column.
void write_matrix_csv(std::ostream& out, const std::vector<std::string>& header, MatrixRef values,
                      const Vector* time = nullptr);

//! Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace mafkit
