#pragma once

#include "tracekit/linop.hpp"
#include "tracekit/types.hpp"

namespace tracekit::nystrom {

/// Stabilized Nystrom approximation of a PSD operator in eigenpair form,
/// A ~ U diag(lambda) U^T with lambda >= 0 entrywise and the applied shift
/// recorded.
struct NystromFactors {
    Matrix u;        // n x k, orthonormal columns
    Vector lambda;   // length k, non-negative
    double shift_nu; // stabilization shift that was removed again
    Index probe_count;

    double trace() const { return lambda.sum(); }
    Matrix apply(const Eigen::Ref<const Matrix>& x) const {
        return u * (lambda.asDiagonal() * (u.transpose() * x));
    }
};

/// Shifted, factored Nystrom approximation from k probe columns (k matvecs):
/// Y = A Omega, nu = sqrt(n) eps(|Y|_2), Cholesky of Omega^T (Y + nu Omega),
/// triangular solve, thin SVD, shift removal with an explicit floor at zero.
/// A must be symmetric PSD; violations surface as a Cholesky failure carrying
/// the offending pivot index.
NystromFactors nystrom_factor(const linop::MatrixFreeOperator& a,
                              const Eigen::Ref<const Matrix>& omega);

/// Same factorization from a precomputed product Y = A Omega, for callers
/// that batch their matvecs (single-pass estimators).
NystromFactors nystrom_factor_from_products(const Eigen::Ref<const Matrix>& omega,
                                            const Eigen::Ref<const Matrix>& y);

/// Frobenius norm of A - U diag(lambda) U^T against a densified A.
/// Diagnostic for the tail-bound checks; test-scale only.
double nystrom_error_check(const Matrix& a_dense, const NystromFactors& factors);

}  // namespace tracekit::nystrom
