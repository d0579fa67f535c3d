#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tracekit/estimators.hpp"
#include "tracekit/fixtures.hpp"
#include "tracekit/types.hpp"

namespace tracekit::experiments {

enum class EstimatorKind {
    Hutchinson,
    HutchPP,
    PrototypeAdaptive,
    AHutchPP,
    SinglePassHutchPP,
    NystromPP,
};

std::string estimator_name(EstimatorKind kind);
std::optional<EstimatorKind> estimator_from_name(const std::string& name);

/// One experiment: a fixture, an estimator, and either a budget sweep (m
/// values) or a tolerance sweep (exponents p with eps = |tr(A)| / 2^p).
/// Tolerance sweeps run the paired protocol: the adaptive estimator first,
/// then Hutch++ with the adaptive matvec total rounded down to a multiple of
/// three (and optionally plain Hutchinson at the same budget).
struct ExperimentSpec {
    FixtureSpec fixture;
    EstimatorKind estimator = EstimatorKind::AHutchPP;
    std::vector<int64_t> budgets;
    std::vector<int> exponents;
    double delta = 0.05;
    double ell = 0.0;  // > 0 selects the guaranteed mode for the prototype
    int repeats = 100;
    uint64_t seed = 0;
    bool include_hutchinson = false;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

struct ResultRow {
    std::string fixture_id;
    std::string estimator;
    double p_or_m = 0.0;
    int trial = 0;
    double estimate = 0.0;
    std::optional<double> truth;
    std::optional<double> rel_error;
    int64_t matvecs_total = 0;
    int64_t matvecs_lowrank = 0;
    int64_t matvecs_hutchinson = 0;
    int64_t rank_used = 0;
    uint64_t seed = 0;
};

/// Runs the experiment; rows are ordered by sweep point, then trial, then
/// estimator within the paired protocol, so reruns are byte identical.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

/// Serializes rows with 17 significant digits; empty fields where truth is
/// unknown.
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::string to_csv(const std::vector<ResultRow>& rows);

/// Empirical failure fractions |estimate - truth| > eps for the adaptive
/// estimator over a grid of (eps, delta) pairs; eps values are fractions of
/// |tr(A)| and must be finite and positive.  The fixture must have a known
/// trace.
struct FailureTable {
    std::string fixture_id;
    std::vector<double> eps_fractions;
    std::vector<double> deltas;
    std::vector<std::vector<double>> fraction;  // [eps][delta]
    int repeats = 0;

    std::string to_csv() const;
};

FailureTable failure_table(const FixtureSpec& fixture,
                           const std::vector<double>& eps_fractions,
                           const std::vector<double>& deltas, int repeats,
                           uint64_t seed, int threads = 0);

}  // namespace tracekit::experiments
