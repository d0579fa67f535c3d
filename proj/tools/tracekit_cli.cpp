// Command line harness for the trace estimation toolkit: one-shot estimates,
// paired error sweeps, and empirical failure tables, all emitting CSV.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tracekit/estimators.hpp"
#include "tracekit/experiments.hpp"
#include "tracekit/fixtures.hpp"

namespace tx = tracekit;
namespace ex = tracekit::experiments;

namespace {

struct FixtureOptions {
    std::string name = "synthetic_algebraic";
    int64_t n = 1000;
    double decay = 1.0;
    std::string path;
    int64_t iters = 0;
    int64_t mesh_k = 50;
    uint64_t seed = 0;

    ex::FixtureSpec to_spec() const {
        const auto kind = ex::fixture_kind_from_name(name);
        if (!kind) throw tx::ConfigError("unknown fixture: " + name);
        ex::FixtureSpec spec;
        spec.kind = *kind;
        spec.n = n;
        spec.decay = decay;
        spec.path = path;
        spec.iters = iters;
        spec.mesh_k = mesh_k;
        spec.seed = seed;
        return spec;
    }
};

void add_fixture_flags(CLI::App* cmd, FixtureOptions& fx) {
    cmd->add_option("--fixture", fx.name, "fixture kind (see `fixtures list`)");
    cmd->add_option("--n", fx.n, "dimension for synthetic/tridiag/sprandn fixtures");
    cmd->add_option("--decay", fx.decay, "decay parameter: c (algebraic) or s (exponential)");
    cmd->add_option("--path,--matrix-file", fx.path, "edge list or MatrixMarket file");
    cmd->add_option("--iters", fx.iters, "Lanczos iterations (0 = fixture default)");
    cmd->add_option("--mesh-k", fx.mesh_k, "Poisson mesh size");
    cmd->add_option("--fixture-seed", fx.seed, "seed of the fixture randomness");
}

ex::ExperimentSpec spec_from_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tx::ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw tx::ConfigError(std::string("config parse error: ") + e.what());
    }

    ex::ExperimentSpec spec;
    const auto jf = j.value("fixture", nlohmann::json::object());
    FixtureOptions fx;
    fx.name = jf.value("kind", fx.name);
    fx.n = jf.value("n", fx.n);
    fx.decay = jf.value("decay", fx.decay);
    fx.path = jf.value("path", fx.path);
    fx.iters = jf.value("iters", fx.iters);
    fx.mesh_k = jf.value("mesh_k", fx.mesh_k);
    fx.seed = jf.value("seed", fx.seed);
    spec.fixture = fx.to_spec();

    const std::string est = j.value("estimator", std::string("a_hutch_pp"));
    const auto kind = ex::estimator_from_name(est);
    if (!kind) throw tx::ConfigError("unknown estimator: " + est);
    spec.estimator = *kind;
    spec.budgets = j.value("budgets", std::vector<int64_t>{});
    spec.exponents = j.value("exponents", std::vector<int>{});
    spec.delta = j.value("delta", spec.delta);
    spec.ell = j.value("ell", spec.ell);
    spec.repeats = j.value("repeats", spec.repeats);
    spec.seed = j.value("seed", spec.seed);
    spec.include_hutchinson = j.value("include_hutchinson", spec.include_hutchinson);
    spec.threads = j.value("threads", spec.threads);
    return spec;
}

void print_report(const ex::Fixture& fx, const std::string& estimator,
                  const tx::estimators::TraceReport& rep) {
    std::printf("fixture:            %s\n", fx.id.c_str());
    std::printf("estimator:          %s\n", estimator.c_str());
    std::printf("estimate:           %.17g\n", rep.estimate);
    if (fx.truth) {
        std::printf("true trace:         %.17g\n", *fx.truth);
        if (*fx.truth != 0.0)
            std::printf("relative error:     %.6g\n",
                        std::abs(rep.estimate - *fx.truth) / std::abs(*fx.truth));
    }
    std::printf("matvecs total:      %lld\n", static_cast<long long>(rep.matvecs_total));
    std::printf("  low-rank phase:   %lld\n", static_cast<long long>(rep.matvecs_lowrank));
    std::printf("  hutchinson phase: %lld\n",
                static_cast<long long>(rep.matvecs_hutchinson));
    std::printf("rank used:          %lld\n", static_cast<long long>(rep.rank_used));
    if (rep.base_matvecs >= 0)
        std::printf("base matvecs:       %lld\n", static_cast<long long>(rep.base_matvecs));
    if (rep.frob_overestimate)
        std::printf("frob over-estimate: %.6g\n", *rep.frob_overestimate);
    std::printf("seed:               %llu\n", static_cast<unsigned long long>(rep.seed));
}

int run(int argc, char** argv) {
    CLI::App app{"tracekit: matrix-free stochastic trace estimation"};
    app.require_subcommand(1);

    // estimate
    auto* est_cmd = app.add_subcommand("estimate", "one-shot trace estimate");
    FixtureOptions est_fx;
    add_fixture_flags(est_cmd, est_fx);
    std::string est_name = "a_hutch_pp";
    double eps = 0.0, eps_fraction = 0.0, delta = 0.05, ell = 0.0;
    int64_t budget = 0, block = 1;
    uint64_t seed = 0;
    est_cmd->add_option("--estimator", est_name, "estimator name");
    est_cmd->add_option("--eps", eps, "absolute tolerance (adaptive estimators)");
    est_cmd->add_option("--eps-fraction", eps_fraction,
                        "tolerance as a fraction of the known trace");
    est_cmd->add_option("--delta", delta, "failure probability");
    est_cmd->add_option("--ell", ell, "slack parameter (guaranteed mode)");
    est_cmd->add_option("--budget", budget, "matvec budget (fixed-budget estimators)");
    est_cmd->add_option("--block", block, "probe block size");
    est_cmd->add_option("--seed", seed, "estimator seed");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "error sweep, CSV output");
    FixtureOptions sweep_fx;
    add_fixture_flags(sweep_cmd, sweep_fx);
    std::string sweep_est = "a_hutch_pp";
    std::vector<int64_t> budgets;
    std::vector<int> exponents;
    std::string config_path, output = "sweep.csv";
    int repeats = 100, threads = 0;
    double sweep_delta = 0.05, sweep_ell = 0.0;
    uint64_t sweep_seed = 0;
    bool include_hutchinson = false;
    sweep_cmd->add_option("--config", config_path, "JSON config mirroring the spec");
    sweep_cmd->add_option("--estimator", sweep_est, "estimator name");
    sweep_cmd->add_option("--budgets", budgets, "budget sweep (fixed-budget estimators)");
    sweep_cmd->add_option("--exponents", exponents,
                          "tolerance exponents p, eps = |tr|/2^p (adaptive)");
    sweep_cmd->add_option("--delta", sweep_delta, "failure probability");
    sweep_cmd->add_option("--ell", sweep_ell, "slack parameter for the prototype");
    sweep_cmd->add_option("--repeats", repeats, "trials per sweep point");
    sweep_cmd->add_option("--seed", sweep_seed, "base seed (per-trial seeds are seed+i)");
    sweep_cmd->add_option("--output", output, "CSV output path");
    sweep_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
    sweep_cmd->add_flag("--include-hutchinson", include_hutchinson,
                        "also run plain Hutchinson at the paired budget");

    // failure-table
    auto* table_cmd = app.add_subcommand("failure-table", "empirical failure fractions");
    FixtureOptions table_fx;
    add_fixture_flags(table_cmd, table_fx);
    std::vector<double> eps_fracs{0.1, 0.01};
    std::vector<double> deltas{0.1, 0.05, 0.01};
    int table_repeats = 1000, table_threads = 0;
    uint64_t table_seed = 0;
    std::string table_output;
    table_cmd->add_option("--eps-fractions", eps_fracs, "eps as fractions of |tr(A)|");
    table_cmd->add_option("--deltas", deltas, "failure probabilities");
    table_cmd->add_option("--repeats", table_repeats, "repeats per cell");
    table_cmd->add_option("--seed", table_seed, "base seed");
    table_cmd->add_option("--output", table_output, "CSV output path (default stdout)");
    table_cmd->add_option("--threads", table_threads, "worker threads (0 = hardware)");

    // fixtures
    auto* fixtures_cmd = app.add_subcommand("fixtures", "fixture utilities");
    auto* list_cmd = fixtures_cmd->add_subcommand("list", "list fixture kinds");

    CLI11_PARSE(app, argc, argv);

    if (est_cmd->parsed()) {
        const auto fixture = ex::build_fixture(est_fx.to_spec());
        const auto op = fixture.make_operator();
        const auto kind = ex::estimator_from_name(est_name);
        if (!kind) throw tx::ConfigError("unknown estimator: " + est_name);

        tx::estimators::TraceReport rep;
        if (*kind == ex::EstimatorKind::AHutchPP ||
            *kind == ex::EstimatorKind::PrototypeAdaptive) {
            tx::estimators::AdaptiveConfig cfg;
            if (eps_fraction > 0.0) {
                if (!fixture.truth)
                    throw tx::ConfigError("--eps-fraction needs a fixture with known trace");
                cfg.eps = eps_fraction * std::abs(*fixture.truth);
            } else if (eps > 0.0) {
                cfg.eps = eps;
            } else {
                throw tx::ConfigError("adaptive estimators need --eps or --eps-fraction");
            }
            cfg.delta = delta;
            cfg.block = block;
            cfg.seed = seed;
            if (*kind == ex::EstimatorKind::PrototypeAdaptive) {
                cfg.mode = tx::estimators::Mode::Guaranteed;
                cfg.ell = ell > 0.0 ? ell : 0.5;
                rep = tx::estimators::prototype_adaptive(*op, cfg);
            } else {
                cfg.mode = tx::estimators::Mode::Practical;
                rep = tx::estimators::a_hutch_pp(*op, cfg);
            }
        } else {
            if (budget < 1)
                throw tx::ConfigError("fixed-budget estimators need --budget");
            rep = [&] {
                switch (*kind) {
                    case ex::EstimatorKind::Hutchinson:
                        return tx::estimators::hutchinson(
                            *op, budget, tx::sketch::ProbeKind::Gaussian, seed);
                    case ex::EstimatorKind::HutchPP:
                        return tx::estimators::hutch_pp(*op, budget, seed);
                    case ex::EstimatorKind::SinglePassHutchPP:
                        return tx::estimators::single_pass_hutch_pp(*op, budget, seed);
                    default:
                        return tx::estimators::nystrom_pp(*op, budget, seed);
                }
            }();
        }
        print_report(fixture, est_name, rep);
        return 0;
    }

    if (sweep_cmd->parsed()) {
        ex::ExperimentSpec spec;
        if (!config_path.empty()) {
            spec = spec_from_json(config_path);
        } else {
            spec.fixture = sweep_fx.to_spec();
            const auto kind = ex::estimator_from_name(sweep_est);
            if (!kind) throw tx::ConfigError("unknown estimator: " + sweep_est);
            spec.estimator = *kind;
            spec.budgets = budgets;
            spec.exponents = exponents;
            spec.delta = sweep_delta;
            spec.ell = sweep_ell;
            spec.repeats = repeats;
            spec.seed = sweep_seed;
            spec.include_hutchinson = include_hutchinson;
            spec.threads = threads;
        }
        const auto rows = ex::run_experiment(spec);
        ex::write_csv(rows, output);
        std::printf("wrote %zu rows to %s\n", rows.size(), output.c_str());
        return 0;
    }

    if (table_cmd->parsed()) {
        const auto table = ex::failure_table(table_fx.to_spec(), eps_fracs, deltas,
                                             table_repeats, table_seed, table_threads);
        const std::string csv = table.to_csv();
        if (table_output.empty()) {
            std::fputs(csv.c_str(), stdout);
        } else {
            std::ofstream out(table_output, std::ios::binary);
            if (!out) throw tx::IoError("cannot write " + table_output);
            out << csv;
            std::printf("wrote failure table to %s\n", table_output.c_str());
        }
        return 0;
    }

    if (list_cmd->parsed() || fixtures_cmd->parsed()) {
        std::puts("synthetic_algebraic    eigenvalues 1/i^c       (--n, --decay, --fixture-seed)");
        std::puts("synthetic_exponential  eigenvalues exp(-i/s)   (--n, --decay, --fixture-seed)");
        std::puts("graph_triangles        tr(B^3) on an edge list (--path)");
        std::puts("estrada                tr(exp(B)) on an edge list (--path, --iters)");
        std::puts("logdet_sprandn         log-det of I + sparse rank-1 sum (--n, --iters)");
        std::puts("logdet_matrix          log-det of a MatrixMarket SPD matrix (--path, --iters)");
        std::puts("inverse_tridiag        tr(tridiag(-1,4,-1)^-1) (--n)");
        std::puts("inverse_poisson        tr(Poisson^-1) on a k x k mesh (--mesh-k)");
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const tx::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const tx::ParameterError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const tx::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const tx::DimensionError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const tx::DomainError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const tx::SolverError& e) {
        std::fprintf(stderr, "numerical error: %s (residual %.3g)\n", e.what(),
                     e.final_residual());
        return 3;
    } catch (const tx::NotPsdError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const tx::RankDeficiencyError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    }
}
