#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>

#include "tracekit/types.hpp"

namespace tracekit::linop {

/// A symmetric n x n operator visible only through block matrix products.
///
/// The matvec counter advances by exactly one unit per column applied and is
/// the only mutable state; instances are otherwise immutable and safe for
/// concurrent applies.  Composite operators (polynomial powers, deflations,
/// Lanczos matrix functions, implicit inverses) forward base_matvec_count()
/// to the innermost wrapped operator so that callers can account for raw
/// products separately from products with the composite.
class MatrixFreeOperator {
public:
    virtual ~MatrixFreeOperator() = default;

    Index dim() const { return dim_; }

    /// Y = A X for an n x s block; advances the counter by s.
    Matrix apply(const Eigen::Ref<const Matrix>& block) const;

    /// Single-column convenience around apply().
    Vector apply_vec(const Eigen::Ref<const Vector>& x) const;

    int64_t matvec_count() const { return count_.load(std::memory_order_relaxed); }

    /// Counter of the innermost wrapped operator (this one if not composite).
    virtual int64_t base_matvec_count() const { return matvec_count(); }

    /// Raw base matvecs needed per column, when statically known; 0 when the
    /// cost is data dependent (e.g. an inner CG solve).
    virtual int64_t base_cost_per_column() const { return 1; }

    /// Exact trace when the construction knows it (synthetic spectra).
    std::optional<double> known_trace() const { return known_trace_; }

protected:
    explicit MatrixFreeOperator(Index dim);

    virtual void apply_block(const Eigen::Ref<const Matrix>& X,
                             Eigen::Ref<Matrix> Y) const = 0;

    void set_known_trace(double t) { known_trace_ = t; }

private:
    Index dim_;
    mutable std::atomic<int64_t> count_{0};
    std::optional<double> known_trace_;
};

using OperatorPtr = std::shared_ptr<const MatrixFreeOperator>;

/// Wraps a dense symmetric matrix.  Inputs asymmetric beyond roundoff are
/// symmetrized as (M + M^T)/2; non-square input is a dimension error.
OperatorPtr dense_operator(const Matrix& m);

/// Wraps a sparse symmetric matrix (graph adjacencies, Matrix Market reads).
OperatorPtr sparse_operator(const SparseMatrix& m);

/// A = U diag(eigenvalues) U^T with U the orthogonal factor of a seeded
/// Gaussian matrix, sign-fixed so the factorization is deterministic per
/// seed.  The exact trace (sum of the eigenvalues) is recorded as metadata.
OperatorPtr synthetic_spectrum_operator(Index n, const Vector& eigenvalues,
                                        uint64_t seed);

/// A = B^degree; one product with A costs degree products with B.
OperatorPtr polynomial_operator(OperatorPtr base, int degree);

/// A = B^-1 for symmetric positive definite tridiagonal B given by its
/// diagonal and off-diagonal bands; solves are direct (LDL^T sweep).
OperatorPtr inverse_tridiagonal_operator(const Vector& diag, const Vector& offdiag);

/// A = B^-1 with conjugate-gradient solves to relative residual tol and at
/// most 10n iterations; non-convergence raises a solver error carrying the
/// final residual.
OperatorPtr inverse_cg_operator(OperatorPtr base, double tol = 1e-10);

/// The doubly deflated residual (I - QQ^T) A (I - QQ^T), applied with exactly
/// one base matvec per column.  Q must have orthonormal columns.
OperatorPtr rest_operator(OperatorPtr base, const Matrix& q_basis);

/// A as a dense matrix, via application to the identity (n matvecs).
/// Diagnostic/test helper; not meant for production-size operators.
Matrix densify(const MatrixFreeOperator& op);

/// Non-owning handle for building short-lived compositions (deflations of a
/// caller-owned operator).  The referenced operator must outlive the handle.
inline OperatorPtr borrow(const MatrixFreeOperator& op) {
    return OperatorPtr(&op, [](const MatrixFreeOperator*) {});
}

}  // namespace tracekit::linop
