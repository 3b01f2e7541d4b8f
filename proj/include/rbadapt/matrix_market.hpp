#pragma once

#include <rbadapt/types.hpp>

#include <filesystem>
#include <istream>

namespace rbadapt {

// Reads a real (or integer) Matrix Market file in coordinate or array layout.
// Symmetric and skew-symmetric storage is expanded to the full pattern. Duplicate
// coordinate entries are summed. Throws IoError if the file cannot be opened and
// ParseError (with 1-based line number) on malformed content.
SparseMatrix read_matrix_market(const std::filesystem::path& path);
SparseMatrix read_matrix_market(std::istream& in);

// Writes coordinate real general with 17 significant digits.
void write_matrix_market(const SparseMatrix& matrix, const std::filesystem::path& path);

}  // namespace rbadapt
