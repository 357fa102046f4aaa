// SPDX-License-Identifier: Apache-2.0
//
// Dense complex linear algebra for the precoder and projector constructions.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace riadof {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kRankTolerance = 1e-9;
inline constexpr double kResidualTolerance = 1e-10;

// Disjoint random streams. A stream is fully determined by (seed, stream, index).
enum class Stream : std::uint32_t {
    Channel = 1,
    Precoder = 2,
    Projector = 3,
    Symbol = 4,
    Combiner = 5,
};

class RngStream {
public:
    RngStream(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

    // One CN(0,1) draw: independent real and imaginary parts of variance 1/2.
    Complex complex_gaussian();

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

// Seed for a sub-experiment (trial, block) that does not collide with its siblings.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// i.i.d. CN(0,1) entries, drawn in row-major order.
ComplexMatrix random_complex_gaussian(Index rows, Index cols, RngStream& rng);

// Vertical concatenation; all blocks must share the column count.
ComplexMatrix stack(std::span<const ComplexMatrix> blocks);
ComplexMatrix stack(std::initializer_list<ComplexMatrix> blocks);

ComplexMatrix block_diag(std::span<const ComplexMatrix> blocks);
ComplexMatrix block_diag(std::initializer_list<ComplexMatrix> blocks);

// Singular values in decreasing order.
Eigen::VectorXd singular_values(const ComplexMatrix& A);

// Number of singular values at or above rel_tol * sigma_max; zero for an empty or zero matrix.
Index numeric_rank(const ComplexMatrix& A, double rel_tol = kRankTolerance);

// Orthonormal rows spanning the left null space of A; rows(A) - rank(A) rows.
ComplexMatrix left_null_basis(const ComplexMatrix& A, double rel_tol = kRankTolerance);

// ||A|| / ||reference|| in Frobenius norm; ||A|| when the reference is zero.
double relative_norm(const ComplexMatrix& A, const ComplexMatrix& reference);

class EmptyIntersection : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// V = D[j] * G[j] for every j: the intersection of the row spaces of G[0..].
struct CommonRowSpace {
    ComplexMatrix V;
    std::vector<ComplexMatrix> D;
};

// Solves through the left null space of the block-bidiagonal stack
//   [ G1        ]
//   [-G2  G2    ]
//   [    -G3 .. ]
//   [        -Gn]
// Throws EmptyIntersection when the row spaces meet only in zero.
CommonRowSpace common_row_space(std::span<const ComplexMatrix> G);

// x with A x = y for square nonsingular A; throws SingularSystem otherwise.
ComplexMatrix solve_exact(const ComplexMatrix& A, const ComplexMatrix& y);

struct RankReport {
    std::string label;
    Index claimed_rank = 0;
    Index observed_rank = 0;
    double min_to_max_singular_ratio = 0.0;
    std::vector<std::pair<std::string, double>> residual_norms;
    bool pass = false;
    std::uint64_t seed = 0;
    int trial = 0;
};

// Rank of A against the claim, plus the residuals gathered while building A.
RankReport assess_rank(std::string label, const ComplexMatrix& A, Index claimed_rank,
                       std::vector<std::pair<std::string, double>> residuals, std::uint64_t seed, int trial,
                       double rank_tol = kRankTolerance, double residual_tol = kResidualTolerance);

} // namespace riadof
