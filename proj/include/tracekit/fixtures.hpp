#pragma once

#include <functional>
#include <optional>
#include <string>

#include "tracekit/linop.hpp"
#include "tracekit/types.hpp"

namespace tracekit::experiments {

enum class FixtureKind {
    SyntheticAlgebraic,    // eigenvalues 1/i^c on a seeded orthogonal basis
    SyntheticExponential,  // eigenvalues exp(-i/s)
    GraphTriangles,        // A = B^3 for an edge-list adjacency B
    Estrada,               // A = exp(B), Lanczos-backed
    LogdetSprandn,         // A = log(B), B = I + sparse rank-1 sum
    LogdetMatrix,          // A = log(B) for a Matrix Market B
    InverseTridiag,        // A = tridiag(-1,4,-1)^-1, direct solves
    InversePoisson,        // A = (5-point Poisson)^-1, CG solves
};

struct FixtureSpec {
    FixtureKind kind = FixtureKind::SyntheticAlgebraic;
    Index n = 1000;       // dimension for synthetic / tridiag / sprandn analogue
    double decay = 1.0;   // c (algebraic) or s (exponential)
    std::string path;     // edge list or matrix market file
    Index iters = 0;      // Lanczos iterations; 0 picks the per-fixture default
    Index mesh_k = 50;    // Poisson mesh size (dimension mesh_k^2)
    uint64_t seed = 0;    // fixture randomness (orthogonal basis, sprandn)
};

/// A resolved fixture: operator factory (fresh counters per call, so worker
/// threads can hold independent instances), the exact trace when computable
/// at desk scale, and whether the operator is PSD (gates Nystrom++ and the
/// single pass estimator).
struct Fixture {
    std::string id;
    std::optional<double> truth;
    bool psd = false;
    std::function<linop::OperatorPtr()> make_operator;
};

Fixture build_fixture(const FixtureSpec& spec);

std::string fixture_kind_name(FixtureKind kind);
std::optional<FixtureKind> fixture_kind_from_name(const std::string& name);

}  // namespace tracekit::experiments
