#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "bloch/affine.hpp"
#include "oracles.hpp"

using namespace bloch;

TEST_CASE("two-element bar family matches the hand decomposition") {
    auto fam = appendix_family();
    CHECK(fam.dim() == 2);
    CHECK(fam.term_count() == 2);

    Matrix K0(2, 2), K1(2, 2), M0(2, 2), M1(2, 2);
    K0 << 4, -2, -2, 4;
    K1 << 0, 0, -2, 0;
    M0 << 4.0 / 12, 1.0 / 12, 1.0 / 12, 4.0 / 12;
    M1 << 0, 0, 1.0 / 12, 0;

    for (const auto& t : fam.terms()) {
        if (t.exp.alpha == std::array<int, 2>{0, 0}) {
            CHECK((t.K - K0).norm() <= 1e-14);
            CHECK((t.M - M0).norm() <= 1e-14);
        } else if (t.exp.alpha == std::array<int, 2>{1, 0}) {
            CHECK((t.K - K1).norm() <= 1e-14);
            CHECK((t.M - M1).norm() <= 1e-14);
        } else if (t.exp.alpha == std::array<int, 2>{-1, 0}) {
            CHECK((t.K - K1.adjoint()).norm() <= 1e-14);
            CHECK((t.M - M1.adjoint()).norm() <= 1e-14);
        } else {
            FAIL("unexpected exponent in two-element bar family");
        }
    }
}

TEST_CASE("evaluation at k = 0 and ka = pi") {
    auto fam = appendix_family();
    auto p0 = fam.evaluate({0.0, 0.0});
    Matrix K0(2, 2);
    K0 << 4, -4, -4, 4;
    CHECK((p0.K - K0).norm() <= 1e-13);
    Vector ones(2);
    ones << 1.0, 1.0;
    CHECK((p0.K * ones).norm() <= 1e-13); // rigid-body mode

    auto ppi = fam.evaluate({M_PI, 0.0});
    CHECK(std::abs(ppi.K(0, 1)) <= 1e-13);
    CHECK(std::abs(ppi.K(1, 0)) <= 1e-13);
}

TEST_CASE("periodicity under reciprocal lattice shifts") {
    auto fam = appendix_family();
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> uk(-M_PI, M_PI);
    for (int t = 0; t < 20; ++t) {
        Wave k{uk(rng), 0.0};
        Wave ks = k + Wave{2.0 * M_PI, 0.0};
        auto a = fam.evaluate(k);
        auto b = fam.evaluate(ks);
        CHECK((a.K - b.K).cwiseAbs().maxCoeff() <= 1e-14 * a.K.norm());
        CHECK((a.M - b.M).cwiseAbs().maxCoeff() <= 1e-14 * a.M.norm());
    }
}

TEST_CASE("identity constraint yields a single-term family") {
    std::mt19937 rng(17);
    auto [K, M] = oracles::random_pencil(4, rng);
    std::vector<ConstraintRow> rows;
    for (Eigen::Index i = 0; i < 4; ++i) rows.push_back({i, {{0, 0}}});
    auto fam = build_from_constrained(K, M, rows, Lattice::line(1.0));
    CHECK(fam.term_count() == 0);
    CHECK((fam.terms()[0].K - K).norm() <= 1e-14 * K.norm());
}

TEST_CASE("Hermiticity at random real k") {
    auto fam = appendix_family(2.0, 1.0, 3.0, 1.5);
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> uk(-4.0, 4.0);
    for (int t = 0; t < 100; ++t) {
        auto p = fam.evaluate({uk(rng), 0.0});
        CHECK((p.K - p.K.adjoint()).norm() <= 1e-12 * p.K.norm());
        CHECK((p.M - p.M.adjoint()).norm() <= 1e-12 * p.M.norm());
    }
}

TEST_CASE("complex evaluation is holomorphic (finite-difference Cauchy-Riemann)") {
    auto fam = appendix_family();
    const double h = 1e-4;
    std::mt19937 rng(55);
    std::uniform_real_distribution<double> uk(-2.0, 2.0);
    for (int t = 0; t < 10; ++t) {
        CWave k{Complex(uk(rng), 0.3 * uk(rng)), Complex(0, 0)};
        auto at = [&](Complex kx) { return fam.evaluate_complex({kx, Complex(0, 0)}).first; };
        // d/d(conj k) = (d/dRe + i d/dIm)/2, entrywise central differences
        Matrix dre = (at(k[0] + h) - at(k[0] - h)) / (2 * h);
        Matrix dim = (at(k[0] + Complex(0, h)) - at(k[0] - Complex(0, h))) / (2 * h);
        Matrix cr = 0.5 * (dre + Complex(0, 1) * dim);
        CHECK(cr.cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, dre.norm()));
    }
}

TEST_CASE("closed-form eigenpairs satisfy the evaluated pencil") {
    auto fam = appendix_family();
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> uk(0.01, M_PI - 0.01);
    for (int t = 0; t < 25; ++t) {
        const double k = uk(rng);
        auto cf = appendix_closed_form(k);
        auto p = fam.evaluate({k, 0.0});
        const double scale = p.K.norm() + std::max(cf.omega2_1, cf.omega2_2) * p.M.norm();
        CHECK((p.K * cf.u1 - cf.omega2_1 * (p.M * cf.u1)).norm() <= 1e-12 * scale);
        CHECK((p.K * cf.u2 - cf.omega2_2 * (p.M * cf.u2)).norm() <= 1e-12 * scale);
    }
}

TEST_CASE("closed-form values at the zone center and edge") {
    auto c0 = appendix_closed_form(0.0, 2.0, 1.0);
    CHECK(c0.omega2_1 == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(c0.omega2_2 == doctest::Approx(48.0 * 4.0).epsilon(1e-13));
    auto ce = appendix_closed_form(M_PI, 1.0, 1.0);
    CHECK(ce.omega2_1 == doctest::Approx(12.0).epsilon(1e-13));
    CHECK(ce.omega2_2 == doctest::Approx(12.0).epsilon(1e-13));
}

TEST_CASE("congruence equivalence against direct per-k products") {
    auto [Kg, Mg] = appendix_global(1.3, 1.0, 0.7, 2.0);
    auto rows = appendix_constraints();
    auto lat = Lattice::line(2.0);
    auto fam = build_from_constrained(Kg, Mg, rows, lat);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> uk(-3.0, 3.0);
    for (int t = 0; t < 10; ++t) {
        Wave k{uk(rng), 0.0};
        Matrix T = constraint_matrix(rows, lat, k, fam.dim());
        Matrix Kd = T.adjoint() * Kg * T;
        Matrix Md = T.adjoint() * Mg * T;
        auto p = fam.evaluate(k);
        CHECK((p.K - Kd).cwiseAbs().maxCoeff() <= 1e-12 * Kd.norm());
        CHECK((p.M - Md).cwiseAbs().maxCoeff() <= 1e-12 * Md.norm());
    }
}

TEST_CASE("exponent overflow is rejected") {
    // two boundary rows with opposite exponents directly coupled
    Matrix K(2, 2), M(2, 2);
    K << 2, 1, 1, 2;
    M = Matrix::Identity(2, 2);
    std::vector<ConstraintRow> rows{{0, {{1, 0}}}, {1, {{-1, 0}}}};
    CHECK_THROWS_AS(build_from_constrained(K, M, rows, Lattice::line(1.0)), ExponentOverflow);
}

TEST_CASE("family invariant violations are rejected") {
    Matrix Z = Matrix::Zero(2, 2);
    Matrix I = Matrix::Identity(2, 2);
    // missing conjugate partner
    std::vector<FamilyTerm> terms{{{{0, 0}}, I, I}, {{{1, 0}}, I, Z}};
    CHECK_THROWS_AS(AffineFamily(Lattice::line(1.0), terms), Error);
    // two constant terms
    std::vector<FamilyTerm> terms2{{{{0, 0}}, I, I}, {{{0, 0}}, I, Z}};
    CHECK_THROWS_AS(AffineFamily(Lattice::line(1.0), terms2), Error);
}

TEST_CASE("JSON round trip") {
    auto fam = appendix_family(1.7, 1.0, 0.9, 1.1);
    auto j = fam.to_json();
    auto back = AffineFamily::from_json(j);
    REQUIRE(back.terms().size() == fam.terms().size());
    for (size_t i = 0; i < fam.terms().size(); ++i) {
        CHECK(back.terms()[i].exp == fam.terms()[i].exp);
        CHECK((back.terms()[i].K - fam.terms()[i].K).norm() == 0.0);
        CHECK((back.terms()[i].M - fam.terms()[i].M).norm() == 0.0);
    }
    CHECK(back.lattice().dim == 1);
    CHECK(back.lattice().period() == doctest::Approx(1.1));
}
