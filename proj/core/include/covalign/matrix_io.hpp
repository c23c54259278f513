// covalign/matrix_io.hpp
//
// Headerless matrix CSV: d lines of d comma-separated decimals. Values are
// written in the shortest form that parses back to the same double, so a
// write/read cycle is lossless.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "covalign/linalg.hpp"

namespace covalign {

/// Shortest round-trip decimal for v.
std::string format_double(double v);

void write_matrix_csv(std::ostream& out, const SymMatrix& m);
void write_matrix_csv(const std::filesystem::path& path, const SymMatrix& m);

/// Throws FileFormat on ragged rows, unparseable fields, non-square shape or
/// asymmetry beyond 1e−9 relative.
SymMatrix read_matrix_csv(std::istream& in);
SymMatrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace covalign
