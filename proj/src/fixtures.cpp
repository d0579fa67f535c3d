#include "tracekit/fixtures.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

#include "tracekit/graph_io.hpp"
#include "tracekit/lanczos.hpp"
#include "tracekit/sketch.hpp"

namespace tracekit::experiments {

namespace {

constexpr Index kDenseTruthLimit = 2000;
constexpr Index kGraphTruthLimit = 6000;

Vector dense_spectrum(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

// tr(B^3) = <B^2, B> for symmetric sparse B.
double sparse_cube_trace(const SparseMatrix& b) {
    const SparseMatrix b2 = SparseMatrix(b * b);
    double total = 0.0;
    for (int k = 0; k < b.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(b, k); it; ++it) {
            total += it.value() * b2.coeff(it.row(), it.col());
        }
    }
    return total;
}

// Desk-scale analogue of the sparse rank-one-sum log-det matrix:
// B = I + sum_{j<=40} (10/j^2) x_j x_j^T + sum_{40<j<=100} (1/j^2) x_j x_j^T
// with sparse Gaussian vectors x_j of density 0.025.
Matrix sprandn_logdet_base(Index n, uint64_t seed) {
    const double density = 0.025;
    Matrix b = Matrix::Identity(n, n);
    std::vector<std::pair<Index, double>> nz;
    for (Index j = 0; j < 100; ++j) {
        nz.clear();
        for (Index i = 0; i < n; ++i) {
            if (sketch::ProbeStream::uniform_entry(seed, i, j) < density) {
                nz.emplace_back(i, sketch::ProbeStream::entry(
                                       seed + 1, sketch::ProbeKind::Gaussian, i, j));
            }
        }
        const double w = (j < 40) ? 10.0 / ((j + 1.0) * (j + 1.0))
                                  : 1.0 / ((j + 1.0) * (j + 1.0));
        for (const auto& [r, vr] : nz)
            for (const auto& [c, vc] : nz) b(r, c) += w * vr * vc;
    }
    return b;
}

SparseMatrix poisson_5pt(Index k) {
    const Index n = k * k;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<size_t>(5 * n));
    auto idx = [k](Index i, Index j) { return i * k + j; };
    for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) {
            t.emplace_back(idx(i, j), idx(i, j), 4.0);
            if (i > 0) t.emplace_back(idx(i, j), idx(i - 1, j), -1.0);
            if (i + 1 < k) t.emplace_back(idx(i, j), idx(i + 1, j), -1.0);
            if (j > 0) t.emplace_back(idx(i, j), idx(i, j - 1), -1.0);
            if (j + 1 < k) t.emplace_back(idx(i, j), idx(i, j + 1), -1.0);
        }
    }
    SparseMatrix p(n, n);
    p.setFromTriplets(t.begin(), t.end());
    p.makeCompressed();
    return p;
}

Index resolve_iters(const FixtureSpec& spec) {
    if (spec.iters > 0) return spec.iters;
    switch (spec.kind) {
        case FixtureKind::Estrada:
            return 30;
        case FixtureKind::LogdetSprandn:
            return 25;
        case FixtureKind::LogdetMatrix:
            return 35;
        default:
            return 30;
    }
}

}  // namespace

std::string fixture_kind_name(FixtureKind kind) {
    switch (kind) {
        case FixtureKind::SyntheticAlgebraic: return "synthetic_algebraic";
        case FixtureKind::SyntheticExponential: return "synthetic_exponential";
        case FixtureKind::GraphTriangles: return "graph_triangles";
        case FixtureKind::Estrada: return "estrada";
        case FixtureKind::LogdetSprandn: return "logdet_sprandn";
        case FixtureKind::LogdetMatrix: return "logdet_matrix";
        case FixtureKind::InverseTridiag: return "inverse_tridiag";
        case FixtureKind::InversePoisson: return "inverse_poisson";
    }
    return "unknown";
}

std::optional<FixtureKind> fixture_kind_from_name(const std::string& name) {
    for (FixtureKind k :
         {FixtureKind::SyntheticAlgebraic, FixtureKind::SyntheticExponential,
          FixtureKind::GraphTriangles, FixtureKind::Estrada, FixtureKind::LogdetSprandn,
          FixtureKind::LogdetMatrix, FixtureKind::InverseTridiag,
          FixtureKind::InversePoisson}) {
        if (fixture_kind_name(k) == name) return k;
    }
    return std::nullopt;
}

Fixture build_fixture(const FixtureSpec& spec) {
    Fixture fx;
    std::ostringstream id;

    switch (spec.kind) {
        case FixtureKind::SyntheticAlgebraic:
        case FixtureKind::SyntheticExponential: {
            if (spec.n < 8) throw ParameterError("fixture: n must be >= 8");
            const bool algebraic = spec.kind == FixtureKind::SyntheticAlgebraic;
            Vector lambda(spec.n);
            for (Index i = 0; i < spec.n; ++i) {
                const double idx = static_cast<double>(i + 1);
                lambda(i) = algebraic ? std::pow(idx, -spec.decay)
                                      : std::exp(-idx / spec.decay);
            }
            fx.truth = lambda.sum();
            fx.psd = true;
            id << (algebraic ? "synthetic_algebraic(c=" : "synthetic_exponential(s=")
               << spec.decay << ",n=" << spec.n << ")";
            fx.make_operator = [spec, lambda]() {
                return linop::synthetic_spectrum_operator(spec.n, lambda, spec.seed);
            };
            break;
        }
        case FixtureKind::GraphTriangles: {
            const SparseMatrix adj = io::read_edge_list(spec.path);
            if (adj.rows() <= kGraphTruthLimit) fx.truth = sparse_cube_trace(adj);
            fx.psd = false;  // odd power of an indefinite adjacency
            id << "graph_triangles(" << spec.path << ",n=" << adj.rows() << ")";
            const std::string path = spec.path;
            fx.make_operator = [path]() {
                return linop::polynomial_operator(
                    linop::sparse_operator(io::read_edge_list(path)), 3);
            };
            break;
        }
        case FixtureKind::Estrada: {
            const SparseMatrix adj = io::read_edge_list(spec.path);
            const Index iters = resolve_iters(spec);
            if (adj.rows() <= kDenseTruthLimit)
                fx.truth = dense_spectrum(Matrix(adj)).array().exp().sum();
            fx.psd = true;
            id << "estrada(" << spec.path << ",iters=" << iters << ")";
            const std::string path = spec.path;
            fx.make_operator = [path, iters]() {
                return lanczos::function_operator(
                    linop::sparse_operator(io::read_edge_list(path)),
                    lanczos::SpectralFunction::exp(), iters);
            };
            break;
        }
        case FixtureKind::LogdetSprandn: {
            if (spec.n < 8) throw ParameterError("fixture: n must be >= 8");
            const Index iters = resolve_iters(spec);
            const Matrix b = sprandn_logdet_base(spec.n, spec.seed);
            const Vector eig = dense_spectrum(b);
            if (eig.minCoeff() <= 0.0)
                throw DomainError("logdet_sprandn: base matrix is not positive definite");
            fx.truth = eig.array().log().sum();
            fx.psd = true;  // eigenvalues of B are >= 1
            id << "logdet_sprandn(n=" << spec.n << ",iters=" << iters << ")";
            fx.make_operator = [spec, iters]() {
                return lanczos::function_operator(
                    linop::dense_operator(sprandn_logdet_base(spec.n, spec.seed)),
                    lanczos::SpectralFunction::log(), iters);
            };
            break;
        }
        case FixtureKind::LogdetMatrix: {
            const SparseMatrix b = io::read_matrix_market(spec.path);
            const Index iters = resolve_iters(spec);
            if (b.rows() <= kDenseTruthLimit) {
                const Vector eig = dense_spectrum(Matrix(b));
                if (eig.minCoeff() <= 0.0)
                    throw DomainError("logdet_matrix: matrix is not positive definite");
                fx.truth = eig.array().log().sum();
            }
            fx.psd = false;  // log(B) may be indefinite
            id << "logdet_matrix(" << spec.path << ",iters=" << iters << ")";
            const std::string path = spec.path;
            fx.make_operator = [path, iters]() {
                return lanczos::function_operator(
                    linop::sparse_operator(io::read_matrix_market(path)),
                    lanczos::SpectralFunction::log(), iters);
            };
            break;
        }
        case FixtureKind::InverseTridiag: {
            if (spec.n < 8) throw ParameterError("fixture: n must be >= 8");
            // Eigenvalues of tridiag(-1,4,-1) are 4 - 2cos(k pi/(n+1)).
            double truth = 0.0;
            for (Index k = 1; k <= spec.n; ++k) {
                truth += 1.0 / (4.0 - 2.0 * std::cos(k * M_PI / (spec.n + 1.0)));
            }
            fx.truth = truth;
            fx.psd = true;
            id << "inverse_tridiag(n=" << spec.n << ")";
            fx.make_operator = [spec]() {
                return linop::inverse_tridiagonal_operator(
                    Vector::Constant(spec.n, 4.0), Vector::Constant(spec.n - 1, -1.0));
            };
            break;
        }
        case FixtureKind::InversePoisson: {
            if (spec.mesh_k < 2) throw ParameterError("fixture: mesh_k must be >= 2");
            // Tensor-product eigenvalues of the 5-point operator.
            double truth = 0.0;
            const double denom = static_cast<double>(spec.mesh_k) + 1.0;
            for (Index i = 1; i <= spec.mesh_k; ++i) {
                for (Index j = 1; j <= spec.mesh_k; ++j) {
                    truth += 1.0 / (4.0 - 2.0 * std::cos(i * M_PI / denom) -
                                    2.0 * std::cos(j * M_PI / denom));
                }
            }
            fx.truth = truth;
            fx.psd = true;
            id << "inverse_poisson(mesh=" << spec.mesh_k << "x" << spec.mesh_k << ")";
            fx.make_operator = [spec]() {
                return linop::inverse_cg_operator(
                    linop::sparse_operator(poisson_5pt(spec.mesh_k)), 1e-10);
            };
            break;
        }
    }

    fx.id = id.str();
    return fx;
}

}  // namespace tracekit::experiments
