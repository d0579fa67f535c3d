#include "tracekit/rangefinder.hpp"

#include <algorithm>
#include <cmath>

namespace tracekit::rangefinder {

RangeState::RangeState(Index n, double sample_constant) : n_(n), c_(sample_constant) {
    if (n < 1) throw DimensionError("RangeState: dimension must be positive");
    q_.resize(n, 0);
}

void RangeState::reserve(Index cols) {
    if (q_.cols() >= cols) return;
    Index cap = std::max<Index>(8, q_.cols() * 2);
    cap = std::min(std::max(cap, cols), n_);
    Matrix grown(n_, cap);
    grown.leftCols(rank_) = q_.leftCols(rank_);
    q_.swap(grown);
}

Index RangeState::advance(const linop::MatrixFreeOperator& a,
                          const Eigen::Ref<const Matrix>& probes) {
    if (probes.rows() != n_) throw DimensionError("advance: probe rows mismatch");
    if (probes.cols() < 1) throw ParameterError("advance: need at least one probe");

    Index accepted = 0;
    for (Index j = 0; j < probes.cols(); ++j) {
        Vector y = a.apply_vec(probes.col(j));
        const double pre_norm = y.norm();

        auto q = q_.leftCols(rank_);
        if (rank_ > 0) y -= q * (q.transpose() * y);
        // Second Gram-Schmidt pass on heavy cancellation.
        if (rank_ > 0 && y.norm() < pre_norm * M_SQRT1_2) {
            y -= q * (q.transpose() * y);
        }
        const double post_norm = y.norm();
        if (post_norm <= 1e-12 * pre_norm) {  // numerically in range(Q)
            ++discarded_;
            continue;
        }

        y /= post_norm;
        const Vector w = a.apply_vec(y);
        const double diag = y.dot(w);
        trest1_ += diag;
        frob_aq2_ += w.squaredNorm();
        // New row/column of Q^T A Q: off-diagonal block twice by symmetry.
        if (rank_ > 0) frob_qaq2_ += 2.0 * (q.transpose() * w).squaredNorm();
        frob_qaq2_ += diag * diag;

        reserve(rank_ + 1);
        q_.col(rank_) = y;
        ++rank_;
        ++accepted;
        history_.emplace_back(rank_, 2.0 * static_cast<double>(rank_) +
                                         c_ * (frob_qaq2_ - 2.0 * frob_aq2_));
    }
    return accepted;
}

bool should_stop_rule(const std::vector<std::pair<Index, double>>& history, Index b) {
    if (b < 1) throw ParameterError("should_stop: block size must be >= 1");
    const Index h = static_cast<Index>(history.size());
    if (b == 1) {
        if (h < 3) return false;
        const double m0 = history[h - 3].second;
        const double m1 = history[h - 2].second;
        const double m2 = history[h - 1].second;
        return m2 > m1 && m1 > m0;
    }
    if (h < b + 1) return false;
    return history[h - 1].second > history[h - 1 - b].second;
}

bool RangeState::should_stop(Index b) const { return should_stop_rule(history_, b); }

Index RangeState::argmin_rank() const {
    if (history_.empty()) return 0;
    auto it = std::min_element(
        history_.begin(), history_.end(),
        [](const auto& a, const auto& b) { return a.second < b.second; });
    return it->first;
}

RangeResult run_to_minimum(const linop::MatrixFreeOperator& a, double sample_constant,
                           sketch::ProbeStream& probes) {
    RangeState state(a.dim(), sample_constant);
    const Index cap = (a.dim() + 1) / 2;
    while (true) {
        if (state.advance(a, probes.draw_block(1)) == 0)
            return {std::move(state), StopReason::Degenerate};
        if (state.should_stop(1)) return {std::move(state), StopReason::Minimum};
        if (state.rank() >= cap) return {std::move(state), StopReason::RankCap};
    }
}

}  // namespace tracekit::rangefinder
