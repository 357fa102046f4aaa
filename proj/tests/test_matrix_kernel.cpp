// SPDX-License-Identifier: Apache-2.0

#include "riadof/matrix_kernel.hpp"

#include <doctest.h>

#include <stdexcept>
#include <vector>

using namespace riadof;

TEST_CASE("seeded Gaussian matrices are reproducible")
{
    RngStream a(11, Stream::Channel), b(11, Stream::Channel), c(11, Stream::Precoder), d(12, Stream::Channel);
    const ComplexMatrix A = random_complex_gaussian(4, 5, a);
    CHECK(A == random_complex_gaussian(4, 5, b));
    CHECK(A != random_complex_gaussian(4, 5, c));
    CHECK(A != random_complex_gaussian(4, 5, d));
    RngStream e(11, Stream::Channel);
    const ComplexMatrix empty = random_complex_gaussian(0, 5, e);
    CHECK(empty.rows() == 0);
    CHECK(empty.cols() == 5);
    CHECK_THROWS_AS(random_complex_gaussian(-1, 2, e), std::invalid_argument);
    CHECK(derive_seed(5, 0) != derive_seed(5, 1));
    CHECK(derive_seed(5, 1) == derive_seed(5, 1));
}

TEST_CASE("unit-variance complex entries")
{
    RngStream rng(3, Stream::Channel);
    const ComplexMatrix A = random_complex_gaussian(300, 300, rng);
    const double mean_power = A.squaredNorm() / static_cast<double>(A.size());
    CHECK(mean_power == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(A.mean()) < 0.02);
    // Real and imaginary parts each carry half the power.
    CHECK(A.real().squaredNorm() / static_cast<double>(A.size()) == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("square Gaussian matrices are full rank")
{
    for (std::uint64_t s = 0; s < 100; ++s) {
        RngStream rng(s, Stream::Channel);
        CHECK(numeric_rank(random_complex_gaussian(8, 8, rng)) == 8);
    }
}

TEST_CASE("stack and block diagonal")
{
    RngStream rng(1, Stream::Precoder);
    const ComplexMatrix A = random_complex_gaussian(2, 3, rng);
    const ComplexMatrix B = random_complex_gaussian(1, 3, rng);
    const ComplexMatrix S = stack({A, B});
    CHECK(S.rows() == 3);
    CHECK(S.cols() == 3);
    CHECK(S.topRows(2) == A);
    CHECK(S.bottomRows(1) == B);
    CHECK_THROWS_AS(stack({A, ComplexMatrix(1, 2)}), std::invalid_argument);

    const ComplexMatrix C = random_complex_gaussian(3, 1, rng);
    const ComplexMatrix D = block_diag({A, C});
    CHECK(D.rows() == 5);
    CHECK(D.cols() == 4);
    CHECK(D.topLeftCorner(2, 3) == A);
    CHECK(D.bottomRightCorner(3, 1) == C);
    CHECK(D.topRightCorner(2, 1).isZero(0.0));
    CHECK(D.bottomLeftCorner(3, 3).isZero(0.0));
    CHECK(block_diag({ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(3, 3)}) == ComplexMatrix::Identity(5, 5));
    CHECK(block_diag(std::vector<ComplexMatrix>{}).size() == 0);
}

TEST_CASE("numeric rank")
{
    CHECK(numeric_rank(ComplexMatrix::Identity(6, 6)) == 6);
    CHECK(numeric_rank(ComplexMatrix::Zero(4, 3)) == 0);
    CHECK(numeric_rank(ComplexMatrix(0, 0)) == 0);
    RngStream rng(9, Stream::Channel);
    for (int i = 0; i < 20; ++i) {
        const ComplexMatrix A = random_complex_gaussian(5, 5, rng);
        CHECK(numeric_rank(stack({A, A})) == numeric_rank(A));
        // Rank-3 product.
        const ComplexMatrix L = random_complex_gaussian(7, 3, rng) * random_complex_gaussian(3, 6, rng);
        CHECK(numeric_rank(L) == 3);
    }
    const Eigen::VectorXd s = singular_values(ComplexMatrix::Identity(3, 3) * 2.0);
    CHECK(s.size() == 3);
    CHECK(s(0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(numeric_rank(ComplexMatrix::Identity(2, 2), 0.0), std::invalid_argument);
}

TEST_CASE("left null basis")
{
    RngStream rng(4, Stream::Projector);
    const ComplexMatrix a = random_complex_gaussian(4, 1, rng);
    const ComplexMatrix B = left_null_basis(a);
    CHECK(B.rows() == 3);
    CHECK(B.cols() == 4);
    CHECK((B * a).norm() < 1e-12);
    CHECK((B * B.adjoint() - ComplexMatrix::Identity(3, 3)).norm() < 1e-12);

    CHECK(left_null_basis(random_complex_gaussian(5, 5, rng)).rows() == 0);

    const ComplexMatrix G = random_complex_gaussian(16, 24, rng);
    const ComplexMatrix Mix = random_complex_gaussian(6, 16, rng);
    const ComplexMatrix A = stack({G, Mix * G});
    CHECK(numeric_rank(A) == 16);
    const ComplexMatrix N = left_null_basis(A);
    CHECK(N.rows() == 6);
    CHECK((N * A).norm() / A.norm() < 1e-10);
    CHECK_THROWS_AS(left_null_basis(ComplexMatrix(0, 3)), std::invalid_argument);
}

TEST_CASE("common row space of overheard interference")
{
    RngStream rng(6, Stream::Projector);
    SUBCASE("two generic 16 x 24 blocks meet in 8 dimensions")
    {
        const std::vector<ComplexMatrix> G{random_complex_gaussian(16, 24, rng), random_complex_gaussian(16, 24, rng)};
        const CommonRowSpace c = common_row_space(G);
        CHECK(c.V.rows() == 8);
        CHECK(c.V.cols() == 24);
        CHECK(numeric_rank(c.V) == 8);
        REQUIRE(c.D.size() == 2);
        for (size_t j = 0; j < 2; ++j)
            CHECK(relative_norm(c.D[j] * G[j] - c.V, c.V) < 1e-10);
        // V lies in each row space: appending it leaves the rank at 16.
        CHECK(numeric_rank(stack({G[0], c.V})) == 16);
        CHECK(numeric_rank(stack({G[1], c.V})) == 16);
    }
    SUBCASE("identical blocks share their whole row space")
    {
        const ComplexMatrix G = random_complex_gaussian(3, 7, rng);
        const std::vector<ComplexMatrix> list{G, G};
        const CommonRowSpace c = common_row_space(list);
        CHECK(c.V.rows() == 3);
        CHECK(numeric_rank(stack({G, c.V})) == 3);
    }
    SUBCASE("three generic 8 x 12 blocks meet only in zero")
    {
        const std::vector<ComplexMatrix> G{random_complex_gaussian(8, 12, rng), random_complex_gaussian(8, 12, rng),
                                           random_complex_gaussian(8, 12, rng)};
        CHECK_THROWS_AS(common_row_space(G), EmptyIntersection);
    }
    SUBCASE("invalid input")
    {
        CHECK_THROWS_AS(common_row_space(std::vector<ComplexMatrix>{}), std::invalid_argument);
        const std::vector<ComplexMatrix> bad{ComplexMatrix::Identity(2, 3), ComplexMatrix::Identity(2, 4)};
        CHECK_THROWS_AS(common_row_space(bad), std::invalid_argument);
    }
}

TEST_CASE("exact solve")
{
    RngStream rng(8, Stream::Symbol);
    const ComplexMatrix y = random_complex_gaussian(4, 2, rng);
    CHECK((solve_exact(ComplexMatrix::Identity(4, 4), y) - y).norm() < 1e-14);

    const ComplexMatrix A = random_complex_gaussian(24, 24, rng);
    const ComplexMatrix x = random_complex_gaussian(24, 3, rng);
    CHECK(relative_norm(solve_exact(A, A * x) - x, x) < 1e-10);

    ComplexMatrix S = random_complex_gaussian(3, 3, rng);
    S.row(2) = S.row(0) + S.row(1);
    CHECK_THROWS_AS(solve_exact(S, random_complex_gaussian(3, 1, rng)), SingularSystem);
    CHECK_THROWS_AS(solve_exact(random_complex_gaussian(3, 2, rng), y), std::invalid_argument);
}

TEST_CASE("rank reports")
{
    RngStream rng(2, Stream::Channel);
    const ComplexMatrix A = random_complex_gaussian(5, 5, rng);
    const RankReport ok = assess_rank("A", A, 5, {{"annihilation", 1e-14}}, 42, 3);
    CHECK(ok.pass);
    CHECK(ok.observed_rank == 5);
    CHECK(ok.seed == 42);
    CHECK(ok.trial == 3);
    CHECK(ok.min_to_max_singular_ratio > 0.0);
    CHECK(ok.min_to_max_singular_ratio <= 1.0);

    CHECK_FALSE(assess_rank("A", A, 4, {}, 0, 0).pass);
    CHECK_FALSE(assess_rank("A", A, 5, {{"annihilation", 1e-6}}, 0, 0).pass);
    ComplexMatrix D = A;
    D.row(4) = D.row(0);
    const RankReport bad = assess_rank("D", D, 5, {}, 0, 0);
    CHECK_FALSE(bad.pass);
    CHECK(bad.observed_rank == 4);
}
