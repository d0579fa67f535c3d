#include "tracekit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tracekit/parallel.hpp"

namespace tracekit::experiments {

std::string estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Hutchinson: return "hutchinson";
        case EstimatorKind::HutchPP: return "hutch_pp";
        case EstimatorKind::PrototypeAdaptive: return "prototype_adaptive";
        case EstimatorKind::AHutchPP: return "a_hutch_pp";
        case EstimatorKind::SinglePassHutchPP: return "single_pass_hutch_pp";
        case EstimatorKind::NystromPP: return "nystrom_pp";
    }
    return "unknown";
}

std::optional<EstimatorKind> estimator_from_name(const std::string& name) {
    for (EstimatorKind k :
         {EstimatorKind::Hutchinson, EstimatorKind::HutchPP,
          EstimatorKind::PrototypeAdaptive, EstimatorKind::AHutchPP,
          EstimatorKind::SinglePassHutchPP, EstimatorKind::NystromPP}) {
        if (estimator_name(k) == name) return k;
    }
    return std::nullopt;
}

void ExperimentSpec::validate() const {
    if (repeats < 1) throw ConfigError("experiment: repeats must be >= 1");
    if (budgets.empty() == exponents.empty())
        throw ConfigError("experiment: exactly one of budgets / exponents must be set");
    if (!(delta > 0.0 && delta < 1.0))
        throw ConfigError("experiment: delta must lie in (0,1)");
    for (int64_t m : budgets)
        if (m < 1) throw ConfigError("experiment: budgets must be positive");
    const bool adaptive = estimator == EstimatorKind::AHutchPP ||
                          estimator == EstimatorKind::PrototypeAdaptive;
    if (!exponents.empty() && !adaptive)
        throw ConfigError("experiment: tolerance sweeps need an adaptive estimator");
    if (!budgets.empty() && adaptive)
        throw ConfigError("experiment: adaptive estimators sweep tolerances, not budgets");
}

namespace {

bool needs_psd(EstimatorKind kind) {
    return kind == EstimatorKind::NystromPP || kind == EstimatorKind::SinglePassHutchPP;
}

ResultRow make_row(const Fixture& fx, const std::string& estimator, double p_or_m,
                   int trial, const estimators::TraceReport& rep) {
    ResultRow row;
    row.fixture_id = fx.id;
    row.estimator = estimator;
    row.p_or_m = p_or_m;
    row.trial = trial;
    row.estimate = rep.estimate;
    row.truth = fx.truth;
    if (fx.truth && *fx.truth != 0.0)
        row.rel_error = std::abs(rep.estimate - *fx.truth) / std::abs(*fx.truth);
    row.matvecs_total = rep.matvecs_total;
    row.matvecs_lowrank = rep.matvecs_lowrank;
    row.matvecs_hutchinson = rep.matvecs_hutchinson;
    row.rank_used = rep.rank_used;
    row.seed = rep.seed;
    return row;
}

estimators::TraceReport run_budget_estimator(EstimatorKind kind,
                                             const linop::MatrixFreeOperator& op,
                                             int64_t m, uint64_t seed) {
    switch (kind) {
        case EstimatorKind::Hutchinson:
            return estimators::hutchinson(op, m, sketch::ProbeKind::Gaussian, seed);
        case EstimatorKind::HutchPP:
            return estimators::hutch_pp(op, m, seed);
        case EstimatorKind::SinglePassHutchPP:
            return estimators::single_pass_hutch_pp(op, m, seed);
        case EstimatorKind::NystromPP:
            return estimators::nystrom_pp(op, m, seed);
        default:
            throw ConfigError("estimator is not budget driven");
    }
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const Fixture fx = build_fixture(spec.fixture);
    if (needs_psd(spec.estimator) && !fx.psd)
        throw ConfigError("experiment: " + estimator_name(spec.estimator) +
                          " requires a PSD fixture, got " + fx.id);
    if (!spec.exponents.empty() && !fx.truth)
        throw ConfigError("experiment: tolerance sweeps need a fixture with known trace");

    const bool tolerance_sweep = !spec.exponents.empty();
    const int rows_per_trial =
        tolerance_sweep ? (spec.include_hutchinson ? 3 : 2) : 1;
    const size_t points = tolerance_sweep ? spec.exponents.size() : spec.budgets.size();
    std::vector<ResultRow> rows(points * spec.repeats * rows_per_trial);

    const int threads =
        spec.threads > 0
            ? spec.threads
            : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    // One operator instance per worker: counters stay private to a trial.
    std::vector<linop::OperatorPtr> ops(threads);
    for (auto& op : ops) op = fx.make_operator();

    parallel_for(
        static_cast<int64_t>(points * spec.repeats), threads,
        [&](int64_t job, int worker) {
            const size_t point = static_cast<size_t>(job) / spec.repeats;
            const int trial = static_cast<int>(job % spec.repeats);
            const uint64_t trial_seed = spec.seed + static_cast<uint64_t>(trial);
            const auto& op = *ops[worker];
            const size_t base_idx =
                (point * spec.repeats + trial) * static_cast<size_t>(rows_per_trial);

            if (!tolerance_sweep) {
                const int64_t m = spec.budgets[point];
                const auto rep = run_budget_estimator(spec.estimator, op, m, trial_seed);
                rows[base_idx] = make_row(fx, estimator_name(spec.estimator),
                                          static_cast<double>(m), trial, rep);
                return;
            }

            const int p = spec.exponents[point];
            estimators::AdaptiveConfig cfg;
            cfg.eps = std::abs(*fx.truth) / std::pow(2.0, p);
            cfg.delta = spec.delta;
            cfg.seed = trial_seed;
            estimators::TraceReport adaptive_rep;
            if (spec.estimator == EstimatorKind::PrototypeAdaptive) {
                cfg.mode = estimators::Mode::Guaranteed;
                cfg.ell = spec.ell > 0.0 ? spec.ell : 0.5;
                adaptive_rep = estimators::prototype_adaptive(op, cfg);
            } else {
                cfg.mode = estimators::Mode::Practical;
                cfg.ell = 0.0;
                adaptive_rep = estimators::a_hutch_pp(op, cfg);
            }
            rows[base_idx] = make_row(fx, estimator_name(spec.estimator),
                                      static_cast<double>(p), trial, adaptive_rep);

            // Paired protocol: Hutch++ afterwards with the adaptive budget
            // rounded down to a multiple of three.
            const int64_t paired =
                std::max<int64_t>(3, adaptive_rep.matvecs_total -
                                         adaptive_rep.matvecs_total % 3);
            const auto hpp = estimators::hutch_pp(op, paired, trial_seed);
            rows[base_idx + 1] =
                make_row(fx, "hutch_pp", static_cast<double>(p), trial, hpp);

            if (spec.include_hutchinson) {
                const auto hu = estimators::hutchinson(
                    op, paired, sketch::ProbeKind::Gaussian, trial_seed);
                rows[base_idx + 2] =
                    make_row(fx, "hutchinson", static_cast<double>(p), trial, hu);
            }
        });

    return rows;
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "fixture,estimator,p_or_m,trial,estimate,truth,rel_error,"
           "matvecs_total,matvecs_lowrank,matvecs_hutchinson,rank_used,seed\n";
    for (const auto& r : rows) {
        out << r.fixture_id << ',' << r.estimator << ',' << fmt17(r.p_or_m) << ','
            << r.trial << ',' << fmt17(r.estimate) << ','
            << (r.truth ? fmt17(*r.truth) : "") << ','
            << (r.rel_error ? fmt17(*r.rel_error) : "") << ',' << r.matvecs_total
            << ',' << r.matvecs_lowrank << ',' << r.matvecs_hutchinson << ','
            << r.rank_used << ',' << r.seed << '\n';
    }
    return out.str();
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write csv: " + path);
    out << to_csv(rows);
}

std::string FailureTable::to_csv() const {
    std::ostringstream out;
    out << "eps_fraction";
    for (double d : deltas) out << ",delta=" << fmt17(d);
    out << '\n';
    for (size_t i = 0; i < eps_fractions.size(); ++i) {
        out << fmt17(eps_fractions[i]);
        for (size_t j = 0; j < deltas.size(); ++j) out << ',' << fmt17(fraction[i][j]);
        out << '\n';
    }
    return out.str();
}

FailureTable failure_table(const FixtureSpec& fixture,
                           const std::vector<double>& eps_fractions,
                           const std::vector<double>& deltas, int repeats,
                           uint64_t seed, int threads) {
    if (repeats < 1) throw ConfigError("failure_table: repeats must be >= 1");
    if (eps_fractions.empty() || deltas.empty())
        throw ConfigError("failure_table: need at least one eps and one delta");
    for (double e : eps_fractions)
        if (!std::isfinite(e) || !(e > 0.0))
            throw ConfigError("failure_table: eps fractions must be finite and positive");
    for (double d : deltas)
        if (!(d > 0.0 && d < 1.0))
            throw ConfigError("failure_table: deltas must lie in (0,1)");

    const Fixture fx = build_fixture(fixture);
    if (!fx.truth) throw ConfigError("failure_table: fixture trace is unknown");
    const double truth = *fx.truth;

    const int worker_count =
        threads > 0 ? threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::vector<linop::OperatorPtr> ops(worker_count);
    for (auto& op : ops) op = fx.make_operator();

    FailureTable table;
    table.fixture_id = fx.id;
    table.eps_fractions = eps_fractions;
    table.deltas = deltas;
    table.repeats = repeats;
    table.fraction.assign(eps_fractions.size(),
                          std::vector<double>(deltas.size(), 0.0));

    for (size_t i = 0; i < eps_fractions.size(); ++i) {
        const double eps = eps_fractions[i] * std::abs(truth);
        for (size_t j = 0; j < deltas.size(); ++j) {
            std::atomic<int64_t> failures{0};
            parallel_for(repeats, worker_count, [&](int64_t trial, int worker) {
                estimators::AdaptiveConfig cfg;
                cfg.eps = eps;
                cfg.delta = deltas[j];
                cfg.seed = seed + static_cast<uint64_t>(trial);
                cfg.mode = estimators::Mode::Practical;
                const auto rep = estimators::a_hutch_pp(*ops[worker], cfg);
                if (std::abs(rep.estimate - truth) > eps)
                    failures.fetch_add(1, std::memory_order_relaxed);
            });
            table.fraction[i][j] =
                static_cast<double>(failures.load()) / static_cast<double>(repeats);
        }
    }
    return table;
}

}  // namespace tracekit::experiments
