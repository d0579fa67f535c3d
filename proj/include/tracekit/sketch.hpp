#pragma once

#include <cstdint>

#include "tracekit/types.hpp"

namespace tracekit::sketch {

enum class ProbeKind { Gaussian, Rademacher };

/// Role tags used to derive independent substreams from one user seed, so
/// that every estimator's output is a pure function of (seed, parameters).
enum class ProbeRole : uint64_t {
    RangeFinder = 1,     // probes feeding the low-rank phase
    ResidualTrace = 2,   // probes feeding a Hutchinson phase
    FrobeniusSketch = 3, // probes feeding a Frobenius norm over-estimate
    SecondSketch = 4,    // the middle block of the single pass estimator
};

/// Counter-based probe generator: entry (row, col) of the stream is a pure
/// function of (seed, kind, row, col).  Columns are therefore independent of
/// the block sizes in which they are drawn, and disjoint column ranges can
/// be generated concurrently.
class ProbeStream {
public:
    ProbeStream(uint64_t seed, Index n, ProbeKind kind)
        : seed_(seed), n_(n), kind_(kind) {}

    /// Columns [next, next+cols) of the stream; advances the cursor.
    Matrix draw_block(Index cols);

    /// Single stream entry, exposed for the substream contract tests.
    static double entry(uint64_t seed, ProbeKind kind, Index row, Index col);

    /// Uniform (0,1) variate keyed the same way; used by sparse fixtures.
    static double uniform_entry(uint64_t seed, Index row, Index col);

    /// Stream whose columns are independent of every other role's columns.
    static ProbeStream substream(uint64_t seed, ProbeRole role, Index n,
                                 ProbeKind kind = ProbeKind::Gaussian);

    Index dim() const { return n_; }
    ProbeKind kind() const { return kind_; }
    Index next_column_index() const { return next_col_; }

private:
    uint64_t seed_;
    Index n_;
    ProbeKind kind_;
    Index next_col_ = 0;
};

}  // namespace tracekit::sketch
