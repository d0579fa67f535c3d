#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>
#include <vector>

#include "test_util.hpp"
#include "tracekit/graph_io.hpp"
#include "tracekit/linop.hpp"

using namespace tracekit;
using namespace tracekit::linop;
using test_util::passes_symmetry_check;
using test_util::random_symmetric;

TEST_CASE("dense operator") {
    Matrix d(2, 2);
    d << 2, 0, 0, 3;
    auto op = dense_operator(d);
    Vector x(2);
    x << 1, 1;
    const Vector y = op->apply_vec(x);
    CHECK(y(0) == 2.0);
    CHECK(y(1) == 3.0);

    auto zero = dense_operator(Matrix::Zero(2, 2));
    CHECK(zero->apply(Matrix::Random(2, 5)).cwiseAbs().maxCoeff() == 0.0);

    // Column-exact reproduction of a symmetrized Gaussian matrix.
    const Matrix m = random_symmetric(3, 99);
    auto op3 = dense_operator(m);
    const Matrix back = op3->apply(Matrix::Identity(3, 3));
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(dense_operator(Matrix::Zero(2, 3)), DimensionError);
    CHECK_THROWS_AS(op->apply(Matrix::Zero(3, 1)), DimensionError);
}

TEST_CASE("matvec counter advances by the number of columns") {
    auto op = dense_operator(random_symmetric(5, 1));
    CHECK(op->matvec_count() == 0);
    op->apply(Matrix::Zero(5, 3));
    CHECK(op->matvec_count() == 3);
    op->apply_vec(Vector::Zero(5));
    CHECK(op->matvec_count() == 4);
}

TEST_CASE("matvec counter is atomic under concurrent applies") {
    auto op = dense_operator(random_symmetric(16, 2));
    std::vector<std::thread> workers;
    for (int w = 0; w < 4; ++w) {
        workers.emplace_back([&] {
            for (int i = 0; i < 50; ++i) op->apply(Matrix::Ones(16, 2));
        });
    }
    for (auto& t : workers) t.join();
    CHECK(op->matvec_count() == 4 * 50 * 2);
}

TEST_CASE("synthetic spectrum operator") {
    auto ident = synthetic_spectrum_operator(4, Vector::Ones(4), 3);
    Vector e1 = Vector::Zero(4);
    e1(0) = 1.0;
    CHECK((ident->apply_vec(e1) - e1).norm() < 1e-12);

    // Trace metadata equals the eigenvalue sum; 1/i^2 partial sum oracle.
    const Index n = 1000;
    Vector lambda(n);
    double sum = 0.0;
    for (Index i = 0; i < n; ++i) {
        lambda(i) = 1.0 / ((i + 1.0) * (i + 1.0));
        sum += lambda(i);
    }
    auto op = synthetic_spectrum_operator(n, lambda, 17);
    REQUIRE(op->known_trace().has_value());
    CHECK(*op->known_trace() == doctest::Approx(sum).epsilon(1e-15));
    CHECK(std::abs(*op->known_trace() - 1.643935) < 1e-6);

    // Densified spectrum matches the requested eigenvalues.
    Vector spec(8);
    spec << 1, 2, 3, 4, 5, 6, 7, 8;
    auto op8 = synthetic_spectrum_operator(8, spec, 23);
    const Vector eig = test_util::sorted_eigenvalues(densify(*op8));
    CHECK((eig - spec).cwiseAbs().maxCoeff() < 1e-10);

    // Deterministic per seed.
    auto op8b = synthetic_spectrum_operator(8, spec, 23);
    CHECK((densify(*op8) - densify(*op8b)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("polynomial operator") {
    Matrix d(1, 1);
    d << 2;
    auto cube = polynomial_operator(dense_operator(d), 3);
    CHECK(cube->apply_vec(Vector::Ones(1))(0) == doctest::Approx(8.0));

    // Triangle graph K3: tr(B^3) = 6, one triangle.
    Matrix k3 = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
    auto b3 = polynomial_operator(dense_operator(k3), 3);
    CHECK(densify(*b3).trace() == doctest::Approx(6.0));

    // Path graph P3 has no triangles.
    Matrix p3 = Matrix::Zero(3, 3);
    p3(0, 1) = p3(1, 0) = p3(1, 2) = p3(2, 1) = 1.0;
    auto p3cube = polynomial_operator(dense_operator(p3), 3);
    CHECK(std::abs(densify(*p3cube).trace()) < 1e-12);

    CHECK_THROWS_AS(polynomial_operator(dense_operator(k3), 0), ParameterError);
}

TEST_CASE("polynomial operator base matvec accounting") {
    auto base = dense_operator(random_symmetric(6, 5));
    auto poly = polynomial_operator(base, 4);
    CHECK(poly->base_cost_per_column() == 4);
    poly->apply(Matrix::Ones(6, 3));
    poly->apply(Matrix::Ones(6, 2));
    CHECK(poly->matvec_count() == 5);
    CHECK(base->matvec_count() == 5 * 4);
    CHECK(poly->base_matvec_count() == 20);
}

TEST_CASE("tridiagonal inverse operator") {
    // B = 2I.
    auto half = inverse_tridiagonal_operator(Vector::Constant(2, 2.0), Vector::Zero(1));
    Vector x(2);
    x << 4, 6;
    const Vector z = half->apply_vec(x);
    CHECK(z(0) == doctest::Approx(2.0));
    CHECK(z(1) == doctest::Approx(3.0));

    // tridiag(-1,4,-1), n = 100, against residual and a dense solve.
    const Index n = 100;
    auto inv = inverse_tridiagonal_operator(Vector::Constant(n, 4.0),
                                            Vector::Constant(n - 1, -1.0));
    Matrix b = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        b(i, i) = 4.0;
        if (i + 1 < n) b(i, i + 1) = b(i + 1, i) = -1.0;
    }
    Vector e1 = Vector::Zero(n);
    e1(0) = 1.0;
    const Vector sol = inv->apply_vec(e1);
    CHECK((b * sol - e1).norm() / e1.norm() <= 1e-10);
    const Vector dense_sol = b.ldlt().solve(e1);
    CHECK((sol - dense_sol).norm() < 1e-10);

    CHECK_THROWS_AS(
        inverse_tridiagonal_operator(Vector::Constant(3, -1.0), Vector::Zero(2)),
        NotPsdError);
}

namespace {

Matrix poisson_dense(Index k) {
    const Index n = k * k;
    Matrix p = Matrix::Zero(n, n);
    auto idx = [k](Index i, Index j) { return i * k + j; };
    for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) {
            p(idx(i, j), idx(i, j)) = 4.0;
            if (i > 0) p(idx(i, j), idx(i - 1, j)) = -1.0;
            if (i + 1 < k) p(idx(i, j), idx(i + 1, j)) = -1.0;
            if (j > 0) p(idx(i, j), idx(i, j - 1)) = -1.0;
            if (j + 1 < k) p(idx(i, j), idx(i, j + 1)) = -1.0;
        }
    }
    return p;
}

}  // namespace

TEST_CASE("cg inverse operator on the 2-D Poisson matrix") {
    const Matrix p = poisson_dense(10);
    auto inv = inverse_cg_operator(dense_operator(p), 1e-10);
    const Vector rhs = Vector::Ones(100);
    const Vector z = inv->apply_vec(rhs);
    const Vector dense_sol = p.ldlt().solve(rhs);
    CHECK((z - dense_sol).norm() < 1e-8 * dense_sol.norm());
    CHECK(inv->base_cost_per_column() == 0);
    CHECK(inv->base_matvec_count() > inv->matvec_count());
}

TEST_CASE("cg failure carries the final residual") {
    // An indefinite matrix breaks positive definiteness mid-iteration.
    Matrix ind = Matrix::Zero(4, 4);
    ind.diagonal() << 1.0, -2.0, 3.0, -4.0;
    auto inv = inverse_cg_operator(dense_operator(ind), 1e-12);
    CHECK_THROWS_AS(inv->apply_vec(Vector::Ones(4)), SolverError);
}

TEST_CASE("rest operator") {
    const Matrix a = random_symmetric(6, 31);
    auto base = dense_operator(a);

    // r = 0: identical action.
    auto rest0 = rest_operator(base, Matrix(6, 0));
    const Vector x = Vector::LinSpaced(6, -1.0, 1.0);
    CHECK((rest0->apply_vec(x) - base->apply_vec(x)).norm() < 1e-14);

    // Full basis: zero operator.
    auto restn = rest_operator(base, Matrix::Identity(6, 6));
    CHECK(restn->apply_vec(x).norm() < 1e-12 * x.norm());

    // Deflating the top-2 eigenvectors leaves {0, 0, lambda_3..lambda_6}.
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    Matrix top2(6, 2);
    top2.col(0) = es.eigenvectors().col(5);
    top2.col(1) = es.eigenvectors().col(4);
    auto rest2 = rest_operator(base, top2);
    const Vector eig = test_util::sorted_eigenvalues(densify(*rest2));
    Vector expected(6);
    expected << es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2),
        es.eigenvalues()(3), 0.0, 0.0;
    std::sort(expected.data(), expected.data() + 6);
    CHECK((eig - expected).cwiseAbs().maxCoeff() < 1e-10);

    CHECK_THROWS_AS(rest_operator(base, Matrix::Identity(5, 2)), DimensionError);
    CHECK_THROWS_AS(rest_operator(base, Matrix::Ones(6, 2)), ParameterError);
}

TEST_CASE("rest operator uses exactly one base matvec per column") {
    const Matrix a = random_symmetric(8, 12);
    auto base = dense_operator(a);
    Eigen::HouseholderQR<Matrix> qr(Matrix(random_symmetric(8, 13)));
    const Matrix q = (qr.householderQ() * Matrix::Identity(8, 3)).eval();
    auto rest = rest_operator(base, q);
    const int64_t before = base->matvec_count();
    rest->apply(Matrix::Ones(8, 5));
    CHECK(base->matvec_count() - before == 5);
    CHECK(rest->matvec_count() == 5);

    // tr(A_rest) = tr(A) - tr(Q^T A Q).
    const double tr_rest = densify(*rest).trace();
    const double expected = a.trace() - (q.transpose() * a * q).trace();
    CHECK(tr_rest == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("rest operator is idempotent on deflated vectors") {
    const Matrix a = random_symmetric(7, 44);
    auto base = dense_operator(a);
    Eigen::HouseholderQR<Matrix> qr(Matrix(random_symmetric(7, 45)));
    const Matrix q = (qr.householderQ() * Matrix::Identity(7, 2)).eval();
    auto rest = rest_operator(base, q);

    Vector x = Vector::LinSpaced(7, 0.3, 2.0);
    x -= q * (q.transpose() * x);  // already orthogonal to range(Q)
    const Vector once = rest->apply_vec(x);
    const Vector deflated_once = once - q * (q.transpose() * once);
    CHECK((once - deflated_once).norm() <= 1e-12 * once.norm() + 1e-300);
}

TEST_CASE("every concrete operator passes the randomized symmetry check") {
    CHECK(passes_symmetry_check(*dense_operator(random_symmetric(20, 3))));
    Vector lambda = Vector::LinSpaced(20, 0.05, 2.0);
    CHECK(passes_symmetry_check(*synthetic_spectrum_operator(20, lambda, 5)));
    CHECK(passes_symmetry_check(
        *polynomial_operator(dense_operator(random_symmetric(20, 6)), 3)));
    CHECK(passes_symmetry_check(*inverse_tridiagonal_operator(
        Vector::Constant(20, 4.0), Vector::Constant(19, -1.0))));
    const Matrix p = poisson_dense(4);
    CHECK(passes_symmetry_check(*inverse_cg_operator(dense_operator(p), 1e-12)));
    Eigen::HouseholderQR<Matrix> qr(Matrix(random_symmetric(20, 7)));
    const Matrix q = (qr.householderQ() * Matrix::Identity(20, 4)).eval();
    CHECK(passes_symmetry_check(
        *rest_operator(dense_operator(random_symmetric(20, 8)), q)));
}

namespace {

std::string write_temp(const std::string& name, const std::string& contents) {
    const std::string path = std::string("/tmp/") + name;
    std::ofstream out(path);
    out << contents;
    return path;
}

}  // namespace

TEST_CASE("edge list reader") {
    // 1-based triangle plus duplicate edge, self loop and comments.
    const auto path = write_temp("tk_k3.txt",
                                 "# triangle\n"
                                 "1 2\n2 3\n3 1\n2 1\n2 2\n");
    const SparseMatrix adj = tracekit::io::read_edge_list(path);
    CHECK(adj.rows() == 3);
    CHECK(adj.nonZeros() == 6);
    CHECK(Matrix(adj).diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(Matrix(adj).sum() == doctest::Approx(6.0));

    // 0-based detection.
    const auto path0 = write_temp("tk_p3.txt", "0 1\n1 2\n");
    const SparseMatrix p3 = tracekit::io::read_edge_list(path0);
    CHECK(p3.rows() == 3);
    CHECK(Matrix(p3).sum() == doctest::Approx(4.0));

    CHECK_THROWS_AS(tracekit::io::read_edge_list("/tmp/definitely_missing_tk.txt"),
                    IoError);
}

TEST_CASE("matrix market reader") {
    const auto path = write_temp("tk_mm.mtx",
                                 "%%MatrixMarket matrix coordinate real symmetric\n"
                                 "% comment\n"
                                 "3 3 4\n"
                                 "1 1 2.0\n"
                                 "2 2 3.0\n"
                                 "3 3 4.0\n"
                                 "2 1 -1.0\n");
    const SparseMatrix m = tracekit::io::read_matrix_market(path);
    CHECK(m.rows() == 3);
    CHECK(Matrix(m)(0, 1) == doctest::Approx(-1.0));
    CHECK(Matrix(m)(1, 0) == doctest::Approx(-1.0));
    CHECK(Matrix(m).trace() == doctest::Approx(9.0));

    auto op = sparse_operator(m);
    CHECK(passes_symmetry_check(*op));

    const auto bad = write_temp("tk_bad.mtx",
                                "%%MatrixMarket matrix coordinate real general\n"
                                "2 2 2\n"
                                "1 2 1.0\n"
                                "2 1 5.0\n");
    CHECK_THROWS_AS(tracekit::io::read_matrix_market(bad), ParameterError);
}
