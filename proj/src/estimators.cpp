#include "tracekit/estimators.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

#include "tracekit/nystrom.hpp"
#include "tracekit/rangefinder.hpp"
#include "tracekit/special.hpp"

namespace tracekit::estimators {

using sketch::ProbeKind;
using sketch::ProbeRole;
using sketch::ProbeStream;

void AdaptiveConfig::validate() const {
    if (!(eps > 0.0)) throw ParameterError("AdaptiveConfig: eps must be > 0");
    if (!(delta > 0.0 && delta < 1.0))
        throw ParameterError("AdaptiveConfig: delta must lie in (0,1)");
    if (block < 1) throw ParameterError("AdaptiveConfig: block must be >= 1");
    if (mode == Mode::Guaranteed && !(ell > 0.0))
        throw ParameterError("AdaptiveConfig: guaranteed mode requires ell > 0");
    if (mode == Mode::Practical && ell != 0.0)
        throw ParameterError("AdaptiveConfig: practical mode forces ell = 0");
    if (frob_probes < 0) throw ParameterError("AdaptiveConfig: frob_probes must be >= 0");
}

namespace {

// Snapshot of the wrapped operator's raw counter; -1 marks "not static",
// in which case reports fall back to the measured delta (exact as long as
// the caller does not share the operator across concurrent estimators).
struct BaseCounter {
    explicit BaseCounter(const linop::MatrixFreeOperator& a)
        : op(a), before(a.base_matvec_count()) {}

    int64_t delta_or_static(int64_t columns_applied) const {
        const int64_t cost = op.base_cost_per_column();
        if (cost > 0) return cost * columns_applied;
        return op.base_matvec_count() - before;
    }

    const linop::MatrixFreeOperator& op;
    int64_t before;
};

double frob2(const Eigen::Ref<const Matrix>& m) { return m.squaredNorm(); }

// Applies come in fixed-size chunks so large probe counts stay bounded in
// memory; the chunk size is a constant, keeping results deterministic.
constexpr Index kProbeChunk = 512;

// Mean quadratic form over m columns drawn from the stream.
double hutchinson_stream(const linop::MatrixFreeOperator& a, ProbeStream& stream,
                         int64_t m) {
    double sum = 0.0;
    int64_t drawn = 0;
    while (drawn < m) {
        const Index cols = static_cast<Index>(std::min<int64_t>(kProbeChunk, m - drawn));
        const Matrix x = stream.draw_block(cols);
        const Matrix ax = a.apply(x);
        for (Index j = 0; j < cols; ++j) sum += x.col(j).dot(ax.col(j));
        drawn += cols;
    }
    return sum / static_cast<double>(m);
}

}  // namespace

double hutchinson_quadratic(const linop::MatrixFreeOperator& a,
                            const Eigen::Ref<const Matrix>& probes) {
    if (probes.cols() < 1) throw ParameterError("hutchinson: need at least one probe");
    double sum = 0.0;
    for (Index j0 = 0; j0 < probes.cols(); j0 += kProbeChunk) {
        const Index cols = std::min<Index>(kProbeChunk, probes.cols() - j0);
        const auto x = probes.middleCols(j0, cols);
        const Matrix ax = a.apply(x);
        for (Index j = 0; j < cols; ++j) sum += x.col(j).dot(ax.col(j));
    }
    return sum / static_cast<double>(probes.cols());
}

TraceReport hutchinson(const linop::MatrixFreeOperator& a, int64_t m,
                       ProbeKind kind, uint64_t seed) {
    if (m < 1) throw ParameterError("hutchinson: m must be >= 1");
    BaseCounter base(a);
    ProbeStream stream = ProbeStream::substream(seed, ProbeRole::ResidualTrace,
                                                a.dim(), kind);
    TraceReport rep;
    rep.estimate = hutchinson_stream(a, stream, m);
    rep.matvecs_total = rep.matvecs_hutchinson = m;
    rep.base_matvecs = base.delta_or_static(m);
    rep.seed = seed;
    rep.budget_used = m;
    return rep;
}

TraceReport hutch_pp(const linop::MatrixFreeOperator& a, int64_t m, uint64_t seed,
                     ProbeKind kind) {
    if (m < 3) throw ParameterError("hutch_pp: m must be >= 3");
    const int64_t m_eff = m - (m % 3);
    const Index s = static_cast<Index>(m_eff / 3);
    if (s > a.dim())
        throw ParameterError("hutch_pp: budget exceeds 3n; compute the trace directly");
    BaseCounter base(a);

    ProbeStream range_stream =
        ProbeStream::substream(seed, ProbeRole::RangeFinder, a.dim(), kind);
    const Matrix omega = range_stream.draw_block(s);
    const Matrix y = a.apply(omega);
    Eigen::HouseholderQR<Matrix> qr(y);
    const Matrix q = qr.householderQ() * Matrix::Identity(a.dim(), s);
    const Matrix aq = a.apply(q);
    const double trest1 = (q.transpose() * aq).trace();

    ProbeStream hutch_stream =
        ProbeStream::substream(seed, ProbeRole::ResidualTrace, a.dim(), kind);
    const Matrix psi = hutch_stream.draw_block(s);
    const Matrix deflated = psi - q * (q.transpose() * psi);
    const Matrix a_deflated = a.apply(deflated);
    double trest2 = 0.0;
    for (Index j = 0; j < s; ++j) trest2 += deflated.col(j).dot(a_deflated.col(j));
    trest2 /= static_cast<double>(s);

    TraceReport rep;
    rep.estimate = trest1 + trest2;
    rep.matvecs_lowrank = 2 * s;
    rep.matvecs_hutchinson = s;
    rep.matvecs_total = 3 * s;
    rep.rank_used = s;
    rep.base_matvecs = base.delta_or_static(3 * s);
    rep.seed = seed;
    rep.budget_used = m_eff;
    return rep;
}

namespace {

// Number of probes for the guaranteed-mode Frobenius sketch.
Index default_frob_probes(double delta) {
    return static_cast<Index>(std::ceil(10.0 * std::log(2.0 / delta)));
}

}  // namespace

TraceReport prototype_adaptive(const linop::MatrixFreeOperator& a,
                               const AdaptiveConfig& cfg) {
    cfg.validate();
    if (cfg.mode != Mode::Guaranteed)
        throw ParameterError("prototype_adaptive: requires guaranteed mode");
    BaseCounter base(a);

    const special::TailConstants tc{cfg.eps, cfg.delta, cfg.ell};
    const double c_const = special::sample_constant(tc);

    ProbeStream range_stream =
        ProbeStream::substream(cfg.seed, ProbeRole::RangeFinder, a.dim());
    auto range = rangefinder::run_to_minimum(a, c_const, range_stream);
    const Index r = range.state.rank();

    TraceReport rep;
    rep.seed = cfg.seed;
    rep.rank_used = r;
    rep.matvecs_lowrank = range.state.matvecs_spent();

    if (range.reason == rangefinder::StopReason::Degenerate) {
        // A is numerically low rank; trest1 is already exact and the
        // remainder phases are skipped (M = 0).
        rep.estimate = range.state.trest1();
        rep.frob_overestimate = 0.0;
        rep.matvecs_total = rep.matvecs_lowrank;
        rep.base_matvecs = base.delta_or_static(rep.matvecs_total);
        return rep;
    }

    const auto a_rest = linop::rest_operator(linop::borrow(a), range.state.basis());

    const Index k = cfg.frob_probes > 0 ? cfg.frob_probes
                                        : default_frob_probes(cfg.delta);
    const auto alpha = special::alpha_k(k, cfg.delta);
    ProbeStream frob_stream =
        ProbeStream::substream(cfg.seed, ProbeRole::FrobeniusSketch, a.dim());
    const Matrix sketch_probes = frob_stream.draw_block(k);
    const double frob_over =
        frob2(a_rest->apply(sketch_probes)) / (static_cast<double>(k) * alpha.value);

    const int64_t floor_m = special::min_samples_floor(cfg.delta, cfg.ell);
    const int64_t m_probes = std::max<int64_t>(
        floor_m, static_cast<int64_t>(std::ceil(c_const * frob_over)));

    ProbeStream trace_stream =
        ProbeStream::substream(cfg.seed, ProbeRole::ResidualTrace, a.dim());
    const double trest2 = hutchinson_stream(*a_rest, trace_stream, m_probes);

    rep.estimate = range.state.trest1() + trest2;
    rep.frob_overestimate = frob_over;
    rep.matvecs_hutchinson = k + m_probes;
    rep.matvecs_total = rep.matvecs_lowrank + rep.matvecs_hutchinson;
    rep.base_matvecs = base.delta_or_static(rep.matvecs_total);
    return rep;
}

TraceReport a_hutch_pp(const linop::MatrixFreeOperator& a, const AdaptiveConfig& cfg) {
    cfg.validate();
    if (cfg.mode != Mode::Practical)
        throw ParameterError("a_hutch_pp: requires practical mode");
    BaseCounter base(a);

    const special::TailConstants tc{cfg.eps, cfg.delta, 0.0};
    const double c_const = special::sample_constant(tc);

    ProbeStream range_stream =
        ProbeStream::substream(cfg.seed, ProbeRole::RangeFinder, a.dim());
    auto range = rangefinder::run_to_minimum(a, c_const, range_stream);
    const Index r = range.state.rank();

    TraceReport rep;
    rep.seed = cfg.seed;
    rep.rank_used = r;
    rep.matvecs_lowrank = range.state.matvecs_spent();

    if (range.reason == rangefinder::StopReason::Degenerate) {
        rep.estimate = range.state.trest1();
        rep.frob_overestimate = 0.0;
        rep.matvecs_total = rep.matvecs_lowrank;
        rep.base_matvecs = base.delta_or_static(rep.matvecs_total);
        return rep;
    }

    const auto a_rest = linop::rest_operator(linop::borrow(a), range.state.basis());

    // The Frobenius probes double as trace probes.  Growing the sketch one
    // column at a time makes the stop index independent of the configured
    // block size, which therefore only affects matvec scheduling.
    ProbeStream frob_stream =
        ProbeStream::substream(cfg.seed, ProbeRole::FrobeniusSketch, a.dim());
    int64_t k = 0;
    double frob_c2 = 0.0;   // |C^(k)|_F^2
    double psi_dot_c = 0.0; // tr(Psi^(k)T C^(k))
    double m_k = std::numeric_limits<double>::infinity();
    double alpha_last = 1.0;
    while (m_k > static_cast<double>(k)) {
        ++k;
        alpha_last = special::alpha_k(k, cfg.delta).value;
        const Matrix psi = frob_stream.draw_block(1);
        const Matrix c = a_rest->apply(psi);
        frob_c2 += c.squaredNorm();
        psi_dot_c += psi.col(0).dot(c.col(0));
        m_k = c_const * frob_c2 / (static_cast<double>(k) * alpha_last);
    }

    rep.estimate = range.state.trest1() + psi_dot_c / static_cast<double>(k);
    rep.frob_overestimate = frob_c2 / (static_cast<double>(k) * alpha_last);
    rep.matvecs_hutchinson = k;
    rep.matvecs_total = rep.matvecs_lowrank + k;
    rep.base_matvecs = base.delta_or_static(rep.matvecs_total);
    return rep;
}

TraceReport single_pass_hutch_pp(const linop::MatrixFreeOperator& a, int64_t m,
                                 double c1, double c2, double c3, uint64_t seed) {
    if (!(c1 > 0.0 && c2 > 0.0 && c3 > 0.0))
        throw ParameterError("single_pass_hutch_pp: split constants must be positive");
    if (!(c1 < c2))
        throw ParameterError("single_pass_hutch_pp: requires c1 < c2");
    if (std::abs(c1 + c2 + c3 - 1.0) > 1e-12)
        throw ParameterError("single_pass_hutch_pp: split constants must sum to 1");

    const Index n1 = static_cast<Index>(std::floor(c1 * static_cast<double>(m)));
    const Index n2 = static_cast<Index>(std::floor(c2 * static_cast<double>(m)));
    const Index n3 = static_cast<Index>(m) - n1 - n2;
    if (n1 < 1 || n2 < 1 || n3 < 1)
        throw ParameterError("single_pass_hutch_pp: budget too small for the split");
    if (n2 > a.dim())
        throw ParameterError("single_pass_hutch_pp: sketch width exceeds n");
    BaseCounter base(a);

    const Index n = a.dim();
    ProbeStream omega_s = ProbeStream::substream(seed, ProbeRole::RangeFinder, n);
    ProbeStream psi_s = ProbeStream::substream(seed, ProbeRole::SecondSketch, n);
    ProbeStream phi_s = ProbeStream::substream(seed, ProbeRole::ResidualTrace, n);

    Matrix probes(n, n1 + n2 + n3);
    probes.leftCols(n1) = omega_s.draw_block(n1);
    probes.middleCols(n1, n2) = psi_s.draw_block(n2);
    probes.rightCols(n3) = phi_s.draw_block(n3);
    const Matrix products = a.apply(probes);  // one pass over A

    const auto omega = probes.leftCols(n1);
    const auto phi = probes.rightCols(n3);
    const auto x = products.leftCols(n1);
    const auto y = products.middleCols(n1, n2);
    const auto z = products.rightCols(n3);

    // Stable evaluation of Y (Omega^T Y)^+ X^T: thin QR of (Omega^T Y)^T,
    // then S = Y Qr and Zc = X R^-1 give the factored form S Zc^T.
    const Matrix b = omega.transpose() * y;  // n1 x n2
    Eigen::HouseholderQR<Matrix> qr(b.transpose());
    const Matrix qthin = qr.householderQ() * Matrix::Identity(n2, n1);
    const Matrix rfac =
        qr.matrixQR().topRows(n1).triangularView<Eigen::Upper>();

    double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n1; ++i) {
        rmax = std::max(rmax, std::abs(rfac(i, i)));
        rmin = std::min(rmin, std::abs(rfac(i, i)));
    }
    if (!(rmin > 0.0) || rmax / rmin > 1e12)
        throw RankDeficiencyError(
            "single_pass_hutch_pp: Omega^T Y is numerically rank deficient; "
            "increase c2 or use nystrom_pp");

    const Matrix s_fac = y * qthin;  // n x n1
    const Matrix zc = rfac.transpose()
                          .triangularView<Eigen::Lower>()
                          .solve(x.transpose())
                          .transpose();  // X R^-1, n x n1

    const double tr_low = (s_fac.array() * zc.array()).sum();
    const double tr_phi_z = (phi.array() * z.array()).sum();
    const Matrix sp = s_fac.transpose() * phi;
    const Matrix zp = zc.transpose() * phi;
    const double tr_residual =
        (tr_phi_z - (sp.array() * zp.array()).sum()) / static_cast<double>(n3);

    TraceReport rep;
    rep.estimate = tr_low + tr_residual;
    rep.matvecs_lowrank = n1 + n2;
    rep.matvecs_hutchinson = n3;
    rep.matvecs_total = n1 + n2 + n3;
    rep.rank_used = n1;
    rep.base_matvecs = base.delta_or_static(rep.matvecs_total);
    rep.seed = seed;
    rep.budget_used = m;
    return rep;
}

TraceReport nystrom_pp(const linop::MatrixFreeOperator& a, int64_t m, uint64_t seed) {
    if (m < 2) throw ParameterError("nystrom_pp: m must be >= 2");
    const int64_t m_eff = m - (m % 2);
    const Index half = static_cast<Index>(m_eff / 2);
    if (half > a.dim())
        throw ParameterError("nystrom_pp: budget exceeds 2n; compute the trace directly");
    BaseCounter base(a);

    const Index n = a.dim();
    ProbeStream omega_s = ProbeStream::substream(seed, ProbeRole::RangeFinder, n);
    ProbeStream phi_s = ProbeStream::substream(seed, ProbeRole::ResidualTrace, n);

    Matrix probes(n, 2 * half);
    probes.leftCols(half) = omega_s.draw_block(half);
    probes.rightCols(half) = phi_s.draw_block(half);
    const Matrix products = a.apply(probes);  // one pass over A

    const auto nys = nystrom::nystrom_factor_from_products(
        probes.leftCols(half), products.leftCols(half));

    const auto phi = probes.rightCols(half);
    const auto y = products.rightCols(half);
    const double tr_phi_y = (phi.array() * y.array()).sum();
    const Matrix ut_phi = nys.u.transpose() * phi;
    const double tr_phi_approx =
        (nys.lambda.asDiagonal() * ut_phi).cwiseProduct(ut_phi).sum();
    const double tr_residual =
        (tr_phi_y - tr_phi_approx) / static_cast<double>(half);

    TraceReport rep;
    rep.estimate = nys.trace() + tr_residual;
    rep.matvecs_lowrank = half;
    rep.matvecs_hutchinson = half;
    rep.matvecs_total = 2 * half;
    rep.rank_used = half;
    rep.base_matvecs = base.delta_or_static(rep.matvecs_total);
    rep.seed = seed;
    rep.budget_used = m_eff;
    return rep;
}

}  // namespace tracekit::estimators
