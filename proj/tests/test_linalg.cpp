#include <doctest.h>

#include "oracles.hpp"
#include "qpower/error.hpp"
#include "qpower/linalg.hpp"

using namespace qpower;

TEST_CASE("matmul") {
    Rng rng(1);
    const CMatrix a = oracle::random_matrix(2, 2, rng);

    SUBCASE("identity and annihilator") {
        CHECK(matmul(CMatrix::identity(2), a) == a);
        CHECK(max_abs(matmul(a, CMatrix(2, 2))) == 0.0);
    }
    SUBCASE("agrees with the elementwise-sum oracle") {
        const CMatrix x = oracle::random_matrix(3, 2, rng);
        CHECK(max_abs_diff(matmul(x, a), oracle::naive_matmul(x, a)) <= 1e-12);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(matmul(CMatrix(3, 2), CMatrix(3, 2)), DimensionError);
    }
}

TEST_CASE("hermitian") {
    const std::vector<double> d{1.5, -2.0, 3.0};
    const CMatrix diag = CMatrix::diagonal(d);
    CHECK(hermitian(diag) == diag);

    const CMatrix i1{{cplx{0.0, 1.0}}};
    CHECK(hermitian(i1)(0, 0) == cplx{0.0, -1.0});

    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix a = oracle::random_matrix(4, 3, rng);
        const CMatrix b = oracle::random_matrix(3, 5, rng);
        CHECK(max_abs_diff(hermitian(hermitian(a)), a) == 0.0);
        CHECK(max_abs_diff(hermitian(matmul(a, b)), matmul(hermitian(b), hermitian(a))) <= 1e-12);
    }
}

TEST_CASE("inverse_small") {
    CHECK(inverse_small(CMatrix::identity(3)) == CMatrix::identity(3));

    const std::vector<double> d{2.0, 4.0};
    const CMatrix inv = inverse_small(CMatrix::diagonal(d));
    CHECK(inv(0, 0) == cplx{0.5});
    CHECK(inv(1, 1) == cplx{0.25});
    CHECK(inv(0, 1) == cplx{});

    SUBCASE("diagonal inverse to 1e-14") {
        const std::vector<double> dd{3.0, 7.0, 0.1, 13.0, 1e3};
        const CMatrix di = inverse_small(CMatrix::diagonal(dd));
        for (std::size_t i = 0; i < dd.size(); ++i)
            CHECK(std::abs(di(i, i) - 1.0 / dd[i]) <= 1e-14 * std::abs(1.0 / dd[i]) + 1e-300);
    }

    SUBCASE("random well-conditioned residual") {
        Rng rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            CMatrix a = oracle::random_matrix(4, 4, rng);
            for (std::size_t i = 0; i < 4; ++i) a(i, i) += 4.0;  // diagonally dominant
            CHECK(max_abs_diff(matmul(a, inverse_small(a)), CMatrix::identity(4)) <= 1e-10);
        }
    }

    SUBCASE("errors") {
        CHECK_THROWS_AS(inverse_small(CMatrix{{1.0, 2.0}, {2.0, 4.0}}), SingularMatrixError);
        CHECK_THROWS_AS(inverse_small(CMatrix(2, 3)), DimensionError);
        CHECK_THROWS_AS(inverse_small(CMatrix::identity(9)), DimensionError);
        CHECK_THROWS_AS(inverse_small(CMatrix(2, 2)), SingularMatrixError);
    }

    SUBCASE("pivot tolerance is relative to the largest entry") {
        // Scaled far from unity but perfectly conditioned: must invert.
        const std::vector<double> tiny{1e-20, 2e-20};
        CHECK_NOTHROW(inverse_small(CMatrix::diagonal(tiny)));
        // Second pivot 1e-14 relative to max entry 1: below 1e-13.
        CHECK_THROWS_AS(inverse_small(CMatrix{{1.0, 1.0}, {1.0, 1.0 + 1e-14}}),
                        SingularMatrixError);
    }
}

TEST_CASE("trace") {
    CHECK(trace(CMatrix::identity(4)) == cplx{4.0});
    const std::vector<double> p{1.0, 2.5, 0.0, 4.0};
    CHECK(trace(CMatrix::diagonal(p)) == cplx{7.5});
    CHECK_THROWS_AS(trace(CMatrix(2, 3)), DimensionError);

    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix a = oracle::random_matrix(3, 5, rng);
        const CMatrix b = oracle::random_matrix(5, 3, rng);
        CHECK(std::abs(trace(matmul(a, b)) - trace(matmul(b, a))) <= 1e-12);
    }
}

TEST_CASE("Gram-Schmidt columns are orthonormal") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix q = orthonormalize_columns(oracle::random_matrix(8, 4, rng));
        CHECK(max_abs_diff(matmul(hermitian(q), q), CMatrix::identity(4)) <= 1e-10);
    }
}

TEST_CASE("constructor checks") {
    CHECK_THROWS_AS(CMatrix(2, 2, std::vector<cplx>(3)), DimensionError);
    CHECK(CMatrix(2, 2).all_finite());
    CMatrix m(1, 1);
    m(0, 0) = {std::nan(""), 0.0};
    CHECK_FALSE(m.all_finite());
}
