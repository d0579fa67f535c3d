#pragma once

#include <optional>

#include "tracekit/linop.hpp"
#include "tracekit/types.hpp"

namespace tracekit::lanczos {

/// f applied to Ritz values; log variants reject non-positive arguments.
struct SpectralFunction {
    enum class Kind { Exp, Log, ShiftedLog };
    Kind kind = Kind::Exp;
    double shift = 0.0;

    static SpectralFunction exp() { return {Kind::Exp, 0.0}; }
    static SpectralFunction log() { return {Kind::Log, 0.0}; }
    static SpectralFunction shifted_log(double lambda) { return {Kind::ShiftedLog, lambda}; }

    double operator()(double t) const;
};

/// Orthonormal Lanczos basis with the tridiagonal coefficients.  The residual
/// pair (residual_beta, residual_v) completes the three-term recurrence
///   B V = V T + residual_beta * residual_v * e_j^T
/// and is zero after an exact breakdown.
struct KrylovDecomposition {
    Matrix v;             // n x j orthonormal basis
    Vector alpha;         // length j diagonal of T
    Vector beta;          // length j-1 off-diagonal of T
    std::optional<Index> breakdown_at;
    double residual_beta = 0.0;
    Vector residual_v;
};

/// Lanczos tridiagonalization with full reorthogonalization at every step;
/// stops early on breakdown (beta below 1e-14 times the running norm scale).
KrylovDecomposition lanczos_decompose(const linop::MatrixFreeOperator& b,
                                      const Vector& x, Index iters);

/// Approximates f(B) x as |x| * V f(T) e_1, evaluating f(T) through the
/// eigendecomposition of the tridiagonal T (implicit-shift QL, in repo).
Vector lanczos_fx(const linop::MatrixFreeOperator& b, const SpectralFunction& fn,
                  const Vector& x, Index iters);

/// Eigendecomposition of a symmetric tridiagonal matrix; returns eigenvalues
/// in d and eigenvectors as columns of z.
void tridiag_eigen(const Vector& diag, const Vector& offdiag, Vector& d, Matrix& z);

/// f(B) as a matrix-free operator with a fixed Lanczos iteration count.
linop::OperatorPtr function_operator(linop::OperatorPtr base,
                                     const SpectralFunction& fn, Index iters);

}  // namespace tracekit::lanczos
