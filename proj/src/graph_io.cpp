#include "tracekit/graph_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

namespace tracekit::io {

namespace {

bool is_blank_or_comment(const std::string& line, char comment) {
    for (char ch : line) {
        if (std::isspace(static_cast<unsigned char>(ch))) continue;
        return ch == comment;
    }
    return true;
}

}  // namespace

SparseMatrix read_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open edge list: " + path);

    std::vector<std::pair<int64_t, int64_t>> edges;
    int64_t min_idx = std::numeric_limits<int64_t>::max();
    int64_t max_idx = -1;
    std::string line;
    while (std::getline(in, line)) {
        if (is_blank_or_comment(line, '#')) continue;
        std::istringstream ls(line);
        int64_t u, v;
        if (!(ls >> u >> v)) throw IoError("malformed edge list line: " + line);
        if (u < 0 || v < 0) throw IoError("negative vertex index in " + path);
        edges.emplace_back(u, v);
        min_idx = std::min({min_idx, u, v});
        max_idx = std::max({max_idx, u, v});
    }
    if (edges.empty()) throw IoError("edge list has no edges: " + path);

    const int64_t offset = (min_idx == 0) ? 0 : 1;
    const Index n = static_cast<Index>(max_idx - offset + 1);

    std::set<std::pair<int64_t, int64_t>> unique;
    for (auto [u, v] : edges) {
        u -= offset;
        v -= offset;
        if (u == v) continue;  // zero diagonal
        unique.insert({std::min(u, v), std::max(u, v)});
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * unique.size());
    for (auto [u, v] : unique) {
        triplets.emplace_back(static_cast<Index>(u), static_cast<Index>(v), 1.0);
        triplets.emplace_back(static_cast<Index>(v), static_cast<Index>(u), 1.0);
    }
    SparseMatrix adj(n, n);
    adj.setFromTriplets(triplets.begin(), triplets.end());
    adj.makeCompressed();
    return adj;
}

SparseMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix market file: " + path);

    std::string banner;
    if (!std::getline(in, banner) || banner.rfind("%%MatrixMarket", 0) != 0)
        throw IoError("missing MatrixMarket banner in " + path);
    std::istringstream bs(banner);
    std::string tag, object, format, field, symmetry;
    bs >> tag >> object >> format >> field >> symmetry;
    std::transform(format.begin(), format.end(), format.begin(), ::tolower);
    std::transform(field.begin(), field.end(), field.begin(), ::tolower);
    std::transform(symmetry.begin(), symmetry.end(), symmetry.begin(), ::tolower);
    if (object != "matrix" || format != "coordinate")
        throw IoError("only coordinate matrices are supported: " + path);
    if (field != "real" && field != "integer" && field != "pattern")
        throw IoError("unsupported field type '" + field + "' in " + path);
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general")
        throw IoError("unsupported symmetry '" + symmetry + "' in " + path);
    const bool pattern = field == "pattern";

    std::string line;
    Index rows = 0, cols = 0;
    int64_t nnz = 0;
    while (std::getline(in, line)) {
        if (is_blank_or_comment(line, '%')) continue;
        std::istringstream ls(line);
        if (!(ls >> rows >> cols >> nnz)) throw IoError("malformed size line in " + path);
        break;
    }
    if (rows != cols) throw DimensionError("matrix market file is not square: " + path);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(symmetric ? 2 * nnz : nnz));
    int64_t seen = 0;
    while (seen < nnz && std::getline(in, line)) {
        if (is_blank_or_comment(line, '%')) continue;
        std::istringstream ls(line);
        Index i, j;
        double val = 1.0;
        if (!(ls >> i >> j)) throw IoError("malformed entry in " + path);
        if (!pattern && !(ls >> val)) throw IoError("missing value in " + path);
        --i;
        --j;
        triplets.emplace_back(i, j, val);
        if (symmetric && i != j) triplets.emplace_back(j, i, val);
        ++seen;
    }
    if (seen != nnz) throw IoError("truncated matrix market file: " + path);

    SparseMatrix m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();

    if (!symmetric) {
        SparseMatrix diff = SparseMatrix(m.transpose()) - m;
        diff.makeCompressed();
        const double scale = m.nonZeros() ? m.coeffs().abs().maxCoeff() : 0.0;
        if (diff.nonZeros() &&
            diff.coeffs().abs().maxCoeff() > 1e-12 * std::max(1.0, scale))
            throw ParameterError("matrix market file is not symmetric: " + path);
    }
    return m;
}

}  // namespace tracekit::io
