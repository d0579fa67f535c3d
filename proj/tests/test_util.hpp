#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "tracekit/linop.hpp"
#include "tracekit/types.hpp"

namespace test_util {

using tracekit::Index;
using tracekit::Matrix;
using tracekit::Vector;

// Deterministic dense symmetric test matrix.
inline Matrix random_symmetric(Index n, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix m(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) m(i, j) = dist(gen);
    return 0.5 * (m + m.transpose());
}

// PSD matrix with prescribed positive eigenvalues on a random basis.
inline Matrix random_psd(Index n, const Vector& eigenvalues, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix g(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) g(i, j) = dist(gen);
    const Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    return q * eigenvalues.asDiagonal() * q.transpose();
}

inline Vector sorted_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

// |<u, A v> - <v, A u>| <= 1e-10 |A u| |v| over random pairs.
inline bool passes_symmetry_check(const tracekit::linop::MatrixFreeOperator& op,
                                  unsigned seed = 1234, int pairs = 20) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    const Index n = op.dim();
    for (int t = 0; t < pairs; ++t) {
        Vector u(n), v(n);
        for (Index i = 0; i < n; ++i) {
            u(i) = dist(gen);
            v(i) = dist(gen);
        }
        u.normalize();
        v.normalize();
        const Vector au = op.apply_vec(u);
        const Vector av = op.apply_vec(v);
        const double lhs = std::abs(u.dot(av) - v.dot(au));
        if (lhs > 1e-10 * au.norm() * v.norm() + 1e-300) return false;
    }
    return true;
}

}  // namespace test_util
