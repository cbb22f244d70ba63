#pragma once

#include "romkit/types.hpp"

#include <filesystem>

namespace romkit {

// Reads "coordinate" (general or symmetric storage) or "array" real/integer
// Matrix Market files. Symmetric storage is expanded to a full matrix.
SparseMatrix read_matrix_market(const std::filesystem::path& path);

// A vector stored as an n x 1 (or 1 x n) Matrix Market matrix.
Vector read_matrix_market_vector(const std::filesystem::path& path);

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& a);
void write_matrix_market(const std::filesystem::path& path, const Vector& v);

} // namespace romkit
