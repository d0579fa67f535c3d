#pragma once

#include <string>

#include "tracekit/types.hpp"

namespace tracekit::io {

/// Reads a whitespace-separated edge list ("u v" per line, '#' comments) and
/// returns the symmetric 0/1 adjacency matrix with zero diagonal.  Duplicate
/// edges and self loops are dropped; 0- versus 1-based indexing is detected
/// from the minimum index seen.
SparseMatrix read_edge_list(const std::string& path);

/// Reads a sparse symmetric matrix in Matrix Market coordinate format.
SparseMatrix read_matrix_market(const std::string& path);

}  // namespace tracekit::io
