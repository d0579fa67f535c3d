#include "tracekit/lanczos.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace tracekit::lanczos {

double SpectralFunction::operator()(double t) const {
    switch (kind) {
        case Kind::Exp:
            return std::exp(t);
        case Kind::Log:
            if (!(t > 0.0))
                throw DomainError("lanczos: log of non-positive Ritz value " +
                                  std::to_string(t));
            return std::log(t);
        case Kind::ShiftedLog: {
            const double arg = shift + t;
            if (!(arg > 0.0))
                throw DomainError("lanczos: log of non-positive shifted Ritz value " +
                                  std::to_string(arg));
            return std::log(arg);
        }
    }
    return 0.0;
}

void tridiag_eigen(const Vector& diag, const Vector& offdiag, Vector& d, Matrix& z) {
    const Index n = diag.size();
    if (offdiag.size() != n - 1 && !(n == 1 && offdiag.size() == 0))
        throw DimensionError("tridiag_eigen: off-diagonal must have n-1 entries");

    d = diag;
    Vector e = Vector::Zero(n);
    e.head(n - 1) = offdiag.head(n - 1);
    z = Matrix::Identity(n, n);
    if (n == 1) return;

    // Implicit-shift QL with Wilkinson shift (EISPACK tql2 lineage).
    const double eps = std::numeric_limits<double>::epsilon();
    for (Index l = 0; l < n; ++l) {
        Index iter = 0;
        Index m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d(m)) + std::abs(d(m + 1));
                if (std::abs(e(m)) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw SolverError("tridiag_eigen: QL iteration did not converge",
                                      std::abs(e(l)));
                double g = (d(l + 1) - d(l)) / (2.0 * e(l));
                double r = std::hypot(g, 1.0);
                g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (Index i = m - 1; i >= l; --i) {
                    double f = s * e(i);
                    const double b = c * e(i);
                    r = std::hypot(f, g);
                    e(i + 1) = r;
                    if (r == 0.0) {
                        d(i + 1) -= p;
                        e(m) = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d(i + 1) - p;
                    r = (d(i) - g) * s + 2.0 * c * b;
                    p = s * r;
                    d(i + 1) = g + p;
                    g = c * r - b;
                    for (Index k = 0; k < n; ++k) {
                        f = z(k, i + 1);
                        z(k, i + 1) = s * z(k, i) + c * f;
                        z(k, i) = c * z(k, i) - s * f;
                    }
                }
                if (underflow) continue;
                d(l) -= p;
                e(l) = g;
                e(m) = 0.0;
            }
        } while (m != l);
    }
}

KrylovDecomposition lanczos_decompose(const linop::MatrixFreeOperator& b,
                                      const Vector& x, Index iters) {
    if (iters < 1) throw ParameterError("lanczos: iters must be >= 1");
    if (x.size() != b.dim()) throw DimensionError("lanczos: vector/operator mismatch");
    const double nx = x.norm();
    if (nx == 0.0) throw ParameterError("lanczos: starting vector is zero");

    const Index n = b.dim();
    const Index jmax = std::min<Index>(iters, n);
    Matrix v(n, jmax);
    Vector alpha(jmax), beta(jmax > 1 ? jmax - 1 : 0);
    v.col(0) = x / nx;

    KrylovDecomposition out;
    double scale = 0.0;
    Index j = 0;
    for (; j < jmax; ++j) {
        Vector w = b.apply_vec(v.col(j));
        alpha(j) = v.col(j).dot(w);
        w -= alpha(j) * v.col(j);
        if (j > 0) w -= beta(j - 1) * v.col(j - 1);

        // Full reorthogonalization, second pass on heavy cancellation.
        const auto basis = v.leftCols(j + 1);
        const double pre = w.norm();
        w -= basis * (basis.transpose() * w);
        if (w.norm() < pre * M_SQRT1_2) w -= basis * (basis.transpose() * w);

        const double bj = w.norm();
        scale = std::max(scale, std::abs(alpha(j)) + 2.0 * bj);
        if (bj <= 1e-14 * scale) {
            out.breakdown_at = j + 1;
            out.residual_beta = 0.0;
            out.residual_v = Vector::Zero(n);
            ++j;
            break;
        }
        if (j + 1 < jmax) {
            beta(j) = bj;
            v.col(j + 1) = w / bj;
        } else {
            out.residual_beta = bj;
            out.residual_v = w / bj;
        }
    }

    out.v = v.leftCols(j);
    out.alpha = alpha.head(j);
    out.beta = beta.head(j > 1 ? j - 1 : 0);
    return out;
}

Vector lanczos_fx(const linop::MatrixFreeOperator& b, const SpectralFunction& fn,
                  const Vector& x, Index iters) {
    const double nx = x.norm();
    if (x.size() != b.dim()) throw DimensionError("lanczos_fx: vector/operator mismatch");
    if (nx == 0.0) return Vector::Zero(b.dim());

    const KrylovDecomposition k = lanczos_decompose(b, x, iters);
    Vector d;
    Matrix z;
    tridiag_eigen(k.alpha, k.beta, d, z);

    Vector fd(d.size());
    for (Index i = 0; i < d.size(); ++i) fd(i) = fn(d(i));

    // f(T) e_1 = Z f(D) Z^T e_1.
    const Vector weights = fd.cwiseProduct(z.row(0).transpose());
    return nx * (k.v * (z * weights));
}

namespace {

class FunctionOperator final : public linop::MatrixFreeOperator {
public:
    FunctionOperator(linop::OperatorPtr base, SpectralFunction fn, Index iters)
        : MatrixFreeOperator(base->dim()),
          base_(std::move(base)),
          fn_(fn),
          iters_(iters) {}

    int64_t base_matvec_count() const override { return base_->base_matvec_count(); }
    int64_t base_cost_per_column() const override { return 0; }  // truncates on breakdown

protected:
    void apply_block(const Eigen::Ref<const Matrix>& x,
                     Eigen::Ref<Matrix> y) const override {
        for (Index j = 0; j < x.cols(); ++j)
            y.col(j) = lanczos_fx(*base_, fn_, x.col(j), iters_);
    }

private:
    linop::OperatorPtr base_;
    SpectralFunction fn_;
    Index iters_;
};

}  // namespace

linop::OperatorPtr function_operator(linop::OperatorPtr base,
                                     const SpectralFunction& fn, Index iters) {
    if (iters < 1) throw ParameterError("function_operator: iters must be >= 1");
    return std::make_shared<FunctionOperator>(std::move(base), fn, iters);
}

}  // namespace tracekit::lanczos
