#include "tracekit/linop.hpp"

#include <Eigen/QR>

#include <cmath>
#include <string>
#include <utility>

#include "tracekit/sketch.hpp"

namespace tracekit::linop {

MatrixFreeOperator::MatrixFreeOperator(Index dim) : dim_(dim) {
    if (dim < 1) throw DimensionError("operator dimension must be positive");
}

Matrix MatrixFreeOperator::apply(const Eigen::Ref<const Matrix>& block) const {
    if (block.rows() != dim_)
        throw DimensionError("apply: block has " + std::to_string(block.rows()) +
                             " rows, operator dimension is " + std::to_string(dim_));
    Matrix out(dim_, block.cols());
    apply_block(block, out);
    count_.fetch_add(block.cols(), std::memory_order_relaxed);
    return out;
}

Vector MatrixFreeOperator::apply_vec(const Eigen::Ref<const Vector>& x) const {
    return apply(Eigen::Ref<const Matrix>(x)).col(0);
}

namespace {

class DenseOperator final : public MatrixFreeOperator {
public:
    explicit DenseOperator(Matrix m)
        : MatrixFreeOperator(m.rows()), m_(std::move(m)) {}

protected:
    void apply_block(const Eigen::Ref<const Matrix>& x,
                     Eigen::Ref<Matrix> y) const override {
        y.noalias() = m_ * x;
    }

private:
    Matrix m_;
};

class SparseOperator final : public MatrixFreeOperator {
public:
    explicit SparseOperator(SparseMatrix m)
        : MatrixFreeOperator(m.rows()), m_(std::move(m)) {}

protected:
    void apply_block(const Eigen::Ref<const Matrix>& x,
                     Eigen::Ref<Matrix> y) const override {
        y = m_ * x;
    }

private:
    SparseMatrix m_;
};

class SyntheticSpectrumOperator final : public MatrixFreeOperator {
public:
    SyntheticSpectrumOperator(Matrix u, Vector lambda)
        : MatrixFreeOperator(u.rows()), u_(std::move(u)), lambda_(std::move(lambda)) {
        set_known_trace(lambda_.sum());
    }

protected:
    void apply_block(const Eigen::Ref<const Matrix>& x,
                     Eigen::Ref<Matrix> y) const override {
        Matrix t = u_.transpose() * x;
        t.array().colwise() *= lambda_.array();
        y.noalias() = u_ * t;
    }

private:
    Matrix u_;
    Vector lambda_;
};

class PolynomialOperator final : public MatrixFreeOperator {
public:
    PolynomialOperator(OperatorPtr base, int degree)
        : MatrixFreeOperator(base->dim()), base_(std::move(base)), degree_(degree) {}

    int64_t base_matvec_count() const override { return base_->base_matvec_count(); }
    int64_t base_cost_per_column() const override {
        const int64_t inner = base_->base_cost_per_column();
        return inner == 0 ? 0 : degree_ * inner;
    }

protected:
    void apply_block(const Eigen::Ref<const Matrix>& x,
                     Eigen::Ref<Matrix> y) const override {
        Matrix t = base_->apply(x);
        for (int i = 1; i < degree_; ++i) t = base_->apply(t);
        y = t;
    }

private:
    OperatorPtr base_;
    int degree_;
};

class InverseTridiagonalOperator final : public MatrixFreeOperator {
public:
    InverseTridiagonalOperator(const Vector& diag, const Vector& off)
        : MatrixFreeOperator(diag.size()), l_(off.size()), d_(diag.size()) {
        // LDL^T factorization of the symmetric tridiagonal matrix.
        d_(0) = diag(0);
        if (d_(0) <= 0.0) throw NotPsdError("tridiagonal matrix is not positive definite", 0);
        for (Index i = 0; i + 1 < diag.size(); ++i) {
            l_(i) = off(i) / d_(i);
            d_(i + 1) = diag(i + 1) - l_(i) * off(i);
            if (d_(i + 1) <= 0.0)
                throw NotPsdError("tridiagonal matrix is not positive definite", i + 1);
        }
    }

protected:
    void apply_block(const Eigen::Ref<const Matrix>& x,
                     Eigen::Ref<Matrix> y) const override {
        const Index n = dim();
        for (Index j = 0; j < x.cols(); ++j) {
            // Forward sweep L z = x, scale by D, back sweep L^T y = z.
            Vector z = x.col(j);
            for (Index i = 1; i < n; ++i) z(i) -= l_(i - 1) * z(i - 1);
            z.array() /= d_.array();
            for (Index i = n - 2; i >= 0; --i) z(i) -= l_(i) * z(i + 1);
            y.col(j) = z;
        }
    }

private:
    Vector l_;
    Vector d_;
};

class InverseCgOperator final : public MatrixFreeOperator {
public:
    InverseCgOperator(OperatorPtr base, double tol)
        : MatrixFreeOperator(base->dim()), base_(std::move(base)), tol_(tol) {
        if (!(tol_ > 0.0)) throw ParameterError("inverse_cg_operator: tol must be > 0");
    }

    int64_t base_matvec_count() const override { return base_->base_matvec_count(); }
    int64_t base_cost_per_column() const override { return 0; }  // data dependent

protected:
    void apply_block(const Eigen::Ref<const Matrix>& x,
                     Eigen::Ref<Matrix> y) const override {
        for (Index j = 0; j < x.cols(); ++j) y.col(j) = solve(x.col(j));
    }

private:
    Vector solve(const Vector& rhs) const {
        const double rhs_norm = rhs.norm();
        Vector z = Vector::Zero(dim());
        if (rhs_norm == 0.0) return z;
        Vector r = rhs;
        Vector p = r;
        double rs = r.squaredNorm();
        const int64_t max_iters = 10 * dim();
        for (int64_t it = 0; it < max_iters; ++it) {
            const Vector ap = base_->apply_vec(p);
            const double p_ap = p.dot(ap);
            if (!(p_ap > 0.0))
                throw SolverError("cg: operator is not positive definite",
                                  std::sqrt(rs) / rhs_norm);
            const double alpha = rs / p_ap;
            z += alpha * p;
            r -= alpha * ap;
            const double rs_next = r.squaredNorm();
            if (std::sqrt(rs_next) <= tol_ * rhs_norm) return z;
            p = r + (rs_next / rs) * p;
            rs = rs_next;
        }
        throw SolverError("cg: no convergence within 10n iterations",
                          std::sqrt(rs) / rhs_norm);
    }

    OperatorPtr base_;
    double tol_;
};

class RestOperator final : public MatrixFreeOperator {
public:
    RestOperator(OperatorPtr base, Matrix q)
        : MatrixFreeOperator(base->dim()), base_(std::move(base)), q_(std::move(q)) {}

    int64_t base_matvec_count() const override { return base_->base_matvec_count(); }
    int64_t base_cost_per_column() const override { return base_->base_cost_per_column(); }

protected:
    void apply_block(const Eigen::Ref<const Matrix>& x,
                     Eigen::Ref<Matrix> y) const override {
        if (q_.cols() == 0) {
            y = base_->apply(x);
            return;
        }
        Matrix t = x - q_ * (q_.transpose() * x);
        t = base_->apply(t);
        y = t - q_ * (q_.transpose() * t);
    }

private:
    OperatorPtr base_;
    Matrix q_;
};

}  // namespace

OperatorPtr dense_operator(const Matrix& m) {
    if (m.rows() != m.cols())
        throw DimensionError("dense_operator: matrix must be square");
    return std::make_shared<DenseOperator>(Matrix(0.5 * (m + m.transpose())));
}

OperatorPtr sparse_operator(const SparseMatrix& m) {
    if (m.rows() != m.cols())
        throw DimensionError("sparse_operator: matrix must be square");
    SparseMatrix a = m;
    a.makeCompressed();
    SparseMatrix diff = SparseMatrix(a.transpose()) - a;
    diff.makeCompressed();
    const double scale = a.nonZeros() ? a.coeffs().abs().maxCoeff() : 0.0;
    if (diff.nonZeros() &&
        diff.coeffs().abs().maxCoeff() > 1e-12 * std::max(1.0, scale))
        throw ParameterError("sparse_operator: matrix is not symmetric");
    return std::make_shared<SparseOperator>(std::move(a));
}

OperatorPtr synthetic_spectrum_operator(Index n, const Vector& eigenvalues,
                                        uint64_t seed) {
    if (n < 1) throw DimensionError("synthetic_spectrum_operator: n must be >= 1");
    if (eigenvalues.size() != n)
        throw DimensionError("synthetic_spectrum_operator: need n eigenvalues");
    if (!eigenvalues.allFinite())
        throw ParameterError("synthetic_spectrum_operator: eigenvalues must be finite");

    sketch::ProbeStream stream(seed, n, sketch::ProbeKind::Gaussian);
    Matrix g = stream.draw_block(n);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix u = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix signs of U's columns so the factorization is unique per seed.
    for (Index j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) u.col(j) = -u.col(j);
    }
    return std::make_shared<SyntheticSpectrumOperator>(std::move(u), eigenvalues);
}

OperatorPtr polynomial_operator(OperatorPtr base, int degree) {
    if (degree < 1) throw ParameterError("polynomial_operator: degree must be >= 1");
    return std::make_shared<PolynomialOperator>(std::move(base), degree);
}

OperatorPtr inverse_tridiagonal_operator(const Vector& diag, const Vector& offdiag) {
    if (diag.size() < 1) throw DimensionError("inverse_tridiagonal_operator: empty diagonal");
    if (offdiag.size() != diag.size() - 1)
        throw DimensionError("inverse_tridiagonal_operator: off-diagonal must have n-1 entries");
    return std::make_shared<InverseTridiagonalOperator>(diag, offdiag);
}

OperatorPtr inverse_cg_operator(OperatorPtr base, double tol) {
    return std::make_shared<InverseCgOperator>(std::move(base), tol);
}

OperatorPtr rest_operator(OperatorPtr base, const Matrix& q_basis) {
    if (q_basis.cols() > 0) {
        if (q_basis.rows() != base->dim())
            throw DimensionError("rest_operator: basis rows must match operator dimension");
        const Matrix gram = q_basis.transpose() * q_basis;
        const double defect =
            (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
        if (defect > 1e-12)
            throw ParameterError("rest_operator: basis is not orthonormal");
    }
    return std::make_shared<RestOperator>(std::move(base), q_basis);
}

Matrix densify(const MatrixFreeOperator& op) {
    return op.apply(Matrix::Identity(op.dim(), op.dim()));
}

}  // namespace tracekit::linop
