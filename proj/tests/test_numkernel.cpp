#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bloch/numkernel.hpp"
#include "oracles.hpp"

using namespace bloch;

namespace {

HermitianPencil appendix_pencil(double ka) {
    // Bloch matrices of the two-element bar, E = A = rho = a = 1
    const Complex z = std::polar(1.0, ka);
    Matrix K(2, 2), M(2, 2);
    K << Complex(4, 0), 2.0 * (-1.0 - std::conj(z)),
         2.0 * (-1.0 - z), Complex(4, 0);
    M << Complex(4, 0) / 12.0, (1.0 + std::conj(z)) / 12.0,
         (1.0 + z) / 12.0, Complex(4, 0) / 12.0;
    return {K, M};
}

} // namespace

TEST_CASE("diagonal pencil") {
    HermitianPencil p{Matrix::Zero(2, 2), Matrix::Identity(2, 2)};
    p.K(0, 0) = 1.0;
    p.K(1, 1) = 4.0;
    auto sol = eig_hermitian_gen(p);
    CHECK(sol.omega2[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.omega2[1] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::abs(sol.vectors(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(sol.vectors(1, 1)) == doctest::Approx(1.0));
    CHECK(sol.vectors(0, 0).real() > 0); // gauge
    CHECK(sol.vectors(1, 1).real() > 0);
}

TEST_CASE("two-element bar pencil at k = 0 and ka = pi") {
    auto sol0 = eig_hermitian_gen(appendix_pencil(0.0));
    CHECK(std::abs(sol0.omega2[0]) < 1e-10);
    CHECK(sol0.omega2[1] == doctest::Approx(48.0).epsilon(1e-12));

    auto solpi = eig_hermitian_gen(appendix_pencil(M_PI));
    CHECK(solpi.omega2[0] == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(solpi.omega2[1] == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("random pencils match characteristic-polynomial roots") {
    std::mt19937 rng(7101);
    for (int trial = 0; trial < 100; ++trial) {
        for (int n : {2, 3}) {
            auto [K, M] = oracles::random_pencil(n, rng);
            HermitianPencil p{K, M};
            auto sol = eig_hermitian_gen(p);
            auto ref = oracles::charpoly_eigenvalues(K, M);
            const double scale = std::abs(ref.front()) + std::abs(ref.back());
            for (int i = 0; i < n; ++i)
                CHECK(std::abs(sol.omega2[i] - ref[i]) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("M-orthonormality and residual bounds") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        auto [K, M] = oracles::random_pencil(8, rng);
        HermitianPencil p{K, M};
        auto sol = eig_hermitian_gen(p);
        Matrix gram = sol.vectors.adjoint() * M * sol.vectors;
        CHECK((gram - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-10);
        for (int j = 0; j < 8; ++j) {
            Vector r = K * sol.vectors.col(j) - sol.omega2[j] * (M * sol.vectors.col(j));
            CHECK(r.norm() <= 1e-10 * (K.norm() + std::abs(sol.omega2[j]) * M.norm()));
        }
    }
}

TEST_CASE("validation errors") {
    Matrix K(2, 2), M(2, 2);
    K << 1.0, Complex(0, 1), Complex(0, 1), 1.0; // not Hermitian
    M = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(eig_hermitian_gen({K, M}), NotHermitian);

    K = Matrix::Identity(2, 2);
    M << 1.0, 0.0, 0.0, -1.0; // indefinite
    CHECK_THROWS_AS(eig_hermitian_gen({K, M}), MassNotSpd);

    M = Matrix::Identity(2, 2);
    K(0, 0) = std::nan("");
    CHECK_THROWS_AS(eig_hermitian_gen({K, M}), NonFiniteInput);
}

TEST_CASE("degenerate eigenvalues: deterministic and M-orthonormal") {
    HermitianPencil p{Matrix::Identity(4, 4) * 3.0, Matrix::Identity(4, 4)};
    auto a = eig_hermitian_gen(p);
    auto b = eig_hermitian_gen(p);
    CHECK((a.vectors - b.vectors).norm() == 0.0);
    Matrix gram = a.vectors.adjoint() * a.vectors;
    CHECK((gram - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("thin_svd basics") {
    std::mt19937 rng(11);
    Vector v = oracles::random_complex(6, 1, rng);
    Vector w = oracles::random_complex(9, 1, rng);
    Matrix A = v * w.transpose();
    auto svd = thin_svd(A);
    CHECK(svd.sigma[1] <= 1e-12 * svd.sigma[0]);

    auto id = thin_svd(Matrix::Identity(5, 5));
    for (int i = 0; i < 5; ++i) CHECK(id.sigma[i] == doctest::Approx(1.0).epsilon(1e-12));

    Matrix B = oracles::random_complex(12, 7, rng);
    auto s = thin_svd(B);
    Matrix rec = s.U * s.sigma.asDiagonal() * s.V.adjoint();
    CHECK((rec - B).norm() <= 1e-10 * s.sigma[0]);
    CHECK((s.U.adjoint() * s.U - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((s.V.adjoint() * s.V - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() <= 1e-10);
    for (int i = 1; i < 7; ++i) CHECK(s.sigma[i] <= s.sigma[i - 1]);
}

TEST_CASE("singular values equal Gram eigenvalue square roots") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix A = oracles::random_complex(10, 6, rng);
        auto s = thin_svd(A);
        Matrix G = A.adjoint() * A;
        HermitianPencil p{G, Matrix::Identity(6, 6)};
        auto sol = eig_hermitian_gen(p);
        for (int i = 0; i < 6; ++i) {
            const double ref = std::sqrt(std::max(0.0, sol.omega2[5 - i]));
            CHECK(std::abs(s.sigma[i] - ref) <= 1e-9 * s.sigma[0]);
        }
    }
}

TEST_CASE("two-element-bar band-1 manifold has real rank 3") {
    // Realified eigenvector samples (1, 0, cos(ka/2), sin(ka/2)) in R^4
    const int m = 50;
    Matrix S(4, m);
    for (int i = 0; i < m; ++i) {
        const double k = -M_PI + 2.0 * M_PI * (i + 0.5) / m;
        S(0, i) = 1.0;
        S(1, i) = 0.0;
        S(2, i) = std::cos(k / 2.0);
        S(3, i) = std::sin(k / 2.0);
    }
    auto s = thin_svd(S);
    int above = 0;
    for (int i = 0; i < s.sigma.size(); ++i)
        if (s.sigma[i] > 1e-12 * s.sigma[0]) ++above;
    CHECK(above == 3);
}

TEST_CASE("orthonormalize_against") {
    Matrix basis(3, 1);
    basis << 1.0, 0.0, 0.0;
    Vector v(3);
    v << 1.0, 0.0, 0.0;
    CHECK(!orthonormalize_against(v, basis).has_value());

    v << 1.0, 1.0, 0.0;
    auto w = orthonormalize_against(v, basis);
    REQUIRE(w.has_value());
    CHECK(std::abs((*w)[0]) <= 1e-14);
    CHECK(std::abs((*w)[1] - 1.0) <= 1e-14);

    std::mt19937 rng(99);
    Matrix B(8, 0);
    for (int j = 0; j < 5; ++j) { // grow an orthonormal basis column by column
        auto nj = orthonormalize_against(oracles::random_complex(8, 1, rng), B);
        REQUIRE(nj.has_value());
        B.conservativeResize(8, j + 1);
        B.col(j) = *nj;
    }
    for (int trial = 0; trial < 20; ++trial) {
        Vector r = oracles::random_complex(8, 1, rng);
        auto w2 = orthonormalize_against(r, B);
        REQUIRE(w2.has_value());
        CHECK((B.adjoint() * *w2).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(std::abs(w2->norm() - 1.0) <= 1e-12);
    }
}

TEST_CASE("orthonormalize_against with M-weighted inner product") {
    std::mt19937 rng(5);
    auto [K, M] = oracles::random_pencil(6, rng);
    (void)K;
    auto sol = eig_hermitian_gen(HermitianPencil{Matrix::Identity(6, 6), M});
    Matrix basis = sol.vectors.leftCols(3); // M-orthonormal by construction
    Vector v = oracles::random_complex(6, 1, rng);
    auto w = orthonormalize_against(v, basis, InnerProduct::MWeighted, &M);
    REQUIRE(w.has_value());
    CHECK((basis.adjoint() * M * *w).cwiseAbs().maxCoeff() <= 1e-11);
    CHECK(std::abs(std::sqrt(std::abs(w->dot(M * *w))) - 1.0) <= 1e-11);
}
