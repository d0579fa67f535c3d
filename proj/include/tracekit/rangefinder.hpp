#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tracekit/linop.hpp"
#include "tracekit/sketch.hpp"
#include "tracekit/types.hpp"

namespace tracekit::rangefinder {

/// Incremental orthonormal basis for the randomized range of A together with
/// the running quantities behind the matvec-cost objective
///   mtilde(r) = 2r + C * (|Q^T A Q|_F^2 - 2 |A Q|_F^2),
/// which shares its argmin with m(r) = 2r + C |A_rest^(r)|_F^2.
class RangeState {
public:
    RangeState(Index n, double sample_constant);

    /// Absorbs a probe block column by column: deflates each column against
    /// the current basis, orthonormalizes it, applies A once more to extend
    /// the running sums, and appends one mtilde entry per surviving column.
    /// Columns numerically inside range(Q) (below 1e-12 of their pre-deflation
    /// norm) are discarded; returns the number of surviving columns.  A return
    /// of zero is the degenerate-block signal: A is numerically low rank and
    /// trest1 already exact.
    Index advance(const linop::MatrixFreeOperator& a,
                  const Eigen::Ref<const Matrix>& probes);

    /// Stopping rule on the mtilde history: for b == 1 the last two
    /// differences must both be positive; for b > 1 the last value must
    /// exceed the value b columns earlier.  False while the history is too
    /// short.
    bool should_stop(Index b) const;

    Index rank() const { return rank_; }
    int64_t matvecs_used() const { return 2 * rank_; }
    /// Probes that deflated to numerical zero; each cost one matvec but did
    /// not extend the basis.
    int64_t discarded_probes() const { return discarded_; }
    /// Everything the operator was actually charged: 2 rank + discarded.
    int64_t matvecs_spent() const { return 2 * rank_ + discarded_; }
    double trest1() const { return trest1_; }
    double frob_aq2() const { return frob_aq2_; }
    double frob_qaq2() const { return frob_qaq2_; }
    double sample_constant() const { return c_; }
    const std::vector<std::pair<Index, double>>& mtilde_history() const {
        return history_;
    }
    /// Rank of the smallest mtilde seen so far.
    Index argmin_rank() const;

    /// The current orthonormal basis (a copy of the active columns).
    Matrix basis() const { return q_.leftCols(rank_); }

private:
    void reserve(Index cols);

    Index n_;
    double c_;
    Matrix q_;
    Index rank_ = 0;
    int64_t discarded_ = 0;
    double trest1_ = 0.0;
    double frob_aq2_ = 0.0;
    double frob_qaq2_ = 0.0;
    std::vector<std::pair<Index, double>> history_;
};

/// The stopping rule on a raw (rank, mtilde) history; see
/// RangeState::should_stop.
bool should_stop_rule(const std::vector<std::pair<Index, double>>& history, Index b);

enum class StopReason { Minimum, Degenerate, RankCap };

struct RangeResult {
    RangeState state;
    StopReason reason;
};

/// Drives the range finder column by column until the stopping rule fires, a
/// probe deflates to numerical zero, or the rank cap ceil(n/2) is reached.
/// Per-column granularity makes the result independent of how probes are
/// batched, so a block size only affects matvec scheduling, never the output.
RangeResult run_to_minimum(const linop::MatrixFreeOperator& a, double sample_constant,
                           sketch::ProbeStream& probes);

}  // namespace tracekit::rangefinder
