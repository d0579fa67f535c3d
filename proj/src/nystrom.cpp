#include "tracekit/nystrom.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace tracekit::nystrom {

namespace {

// Lower Cholesky with explicit pivot reporting.
Matrix cholesky_lower(const Matrix& m) {
    const Index k = m.rows();
    Matrix l = Matrix::Zero(k, k);
    for (Index j = 0; j < k; ++j) {
        const double pivot = m(j, j) - l.row(j).head(j).squaredNorm();
        if (!(pivot > 0.0))
            throw NotPsdError("nystrom_factor: matrix is not positive semidefinite "
                              "(Cholesky pivot " + std::to_string(j) + ")", j);
        l(j, j) = std::sqrt(pivot);
        for (Index i = j + 1; i < k; ++i) {
            l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
        }
    }
    return l;
}

}  // namespace

NystromFactors nystrom_factor_from_products(const Eigen::Ref<const Matrix>& omega,
                                            const Eigen::Ref<const Matrix>& y) {
    if (omega.rows() != y.rows() || omega.cols() != y.cols())
        throw DimensionError("nystrom_factor: Omega and A*Omega shapes differ");
    const Index n = omega.rows();
    const Index k = omega.cols();
    if (k < 1) throw ParameterError("nystrom_factor: need at least one probe");

    // Stabilization shift: sqrt(n) times the floating-point spacing at |Y|_2.
    Eigen::JacobiSVD<Matrix> norm_svd(y);
    const double y_norm2 = norm_svd.singularValues()(0);
    const double spacing =
        std::nextafter(y_norm2, std::numeric_limits<double>::infinity()) - y_norm2;
    const double nu = std::sqrt(static_cast<double>(n)) * spacing;

    const Matrix y_nu = y + nu * omega;
    Matrix gram = omega.transpose() * y_nu;
    gram = 0.5 * (gram + gram.transpose().eval());
    const Matrix l = cholesky_lower(gram);

    // B = Y_nu L^-T, so that B B^T is the Nystrom approximation of A + nu I.
    Matrix b = l.triangularView<Eigen::Lower>()
                   .solve(y_nu.transpose())
                   .transpose();

    Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU);
    NystromFactors factors;
    factors.u = svd.matrixU();
    factors.lambda =
        (svd.singularValues().array().square() - nu).max(0.0).matrix();
    factors.shift_nu = nu;
    factors.probe_count = k;
    return factors;
}

NystromFactors nystrom_factor(const linop::MatrixFreeOperator& a,
                              const Eigen::Ref<const Matrix>& omega) {
    return nystrom_factor_from_products(omega, a.apply(omega));
}

double nystrom_error_check(const Matrix& a_dense, const NystromFactors& factors) {
    if (a_dense.rows() != factors.u.rows() || a_dense.rows() != a_dense.cols())
        throw DimensionError("nystrom_error_check: dimension mismatch");
    const Matrix approx =
        factors.u * factors.lambda.asDiagonal() * factors.u.transpose();
    return (a_dense - approx).norm();
}

}  // namespace tracekit::nystrom
