#pragma once

#include <cstdint>
#include <optional>

#include "tracekit/linop.hpp"
#include "tracekit/sketch.hpp"
#include "tracekit/types.hpp"

namespace tracekit::estimators {

/// Uniform estimator output with exact matvec accounting.
/// matvecs_total = matvecs_lowrank + matvecs_hutchinson always holds;
/// base_matvecs carries the raw-operator count for composite operators
/// (B^3 triangle counting and the like) and is absent (-1) when the
/// per-column base cost is data dependent.
struct TraceReport {
    double estimate = 0.0;
    int64_t matvecs_total = 0;
    int64_t matvecs_lowrank = 0;
    int64_t matvecs_hutchinson = 0;
    int64_t rank_used = 0;
    std::optional<double> frob_overestimate;
    int64_t base_matvecs = -1;
    uint64_t seed = 0;
    int64_t budget_used = 0;  // effective budget after rounding, 0 if adaptive
};

enum class Mode { Guaranteed, Practical };

/// Parameters of the adaptive estimators.  Guaranteed mode requires ell > 0
/// (the sample floor); practical mode forces ell = 0 and omits the floor.
/// frob_probes overrides the number of probes used for the Frobenius norm
/// over-estimate in guaranteed mode (0 picks ceil(10 log(2/delta))).
struct AdaptiveConfig {
    double eps;
    double delta;
    double ell = 0.0;
    Index block = 1;
    uint64_t seed = 0;
    Mode mode = Mode::Practical;
    Index frob_probes = 0;

    void validate() const;
};

/// Plain stochastic trace estimator: mean of m quadratic forms.
TraceReport hutchinson(const linop::MatrixFreeOperator& a, int64_t m,
                       sketch::ProbeKind kind, uint64_t seed);

/// Estimate from caller-supplied probe columns; test hook and building block.
double hutchinson_quadratic(const linop::MatrixFreeOperator& a,
                            const Eigen::Ref<const Matrix>& probes);

/// Fixed-budget two-phase estimator: randomized range capture on m/3 probes
/// plus stochastic estimation of the deflated remainder.  Budgets that are
/// not multiples of 3 are rounded down and recorded in the report.
TraceReport hutch_pp(const linop::MatrixFreeOperator& a, int64_t m, uint64_t seed,
                     sketch::ProbeKind kind = sketch::ProbeKind::Gaussian);

/// Adaptive estimator with the guaranteed (1 - 2 delta) error bound: range
/// finding to the cost minimum, a fresh-probe Frobenius over-estimate, then
/// fresh-probe trace estimation subject to the ell sample floor.
TraceReport prototype_adaptive(const linop::MatrixFreeOperator& a,
                               const AdaptiveConfig& cfg);

/// Practical adaptive estimator: the Frobenius probes double as trace probes,
/// growing one column at a time until the over-estimated sample count M_k
/// drops to k.
TraceReport a_hutch_pp(const linop::MatrixFreeOperator& a, const AdaptiveConfig& cfg);

/// One-pass estimator on three probe blocks with the QR-stabilized
/// pseudoinverse evaluation.  Requires c1 < c2, c1 + c2 + c3 = 1, and at
/// least one column per block.
TraceReport single_pass_hutch_pp(const linop::MatrixFreeOperator& a, int64_t m,
                                 double c1, double c2, double c3, uint64_t seed);

inline TraceReport single_pass_hutch_pp(const linop::MatrixFreeOperator& a,
                                        int64_t m, uint64_t seed) {
    return single_pass_hutch_pp(a, m, 0.32, 0.35, 0.33, seed);
}

/// One-pass estimator for PSD operators through the stabilized Nystrom
/// approximation; odd budgets are rounded down and recorded.
TraceReport nystrom_pp(const linop::MatrixFreeOperator& a, int64_t m, uint64_t seed);

}  // namespace tracekit::estimators
