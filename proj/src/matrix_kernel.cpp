// SPDX-License-Identifier: Apache-2.0

#include "riadof/matrix_kernel.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace riadof {

namespace {

std::seed_seq make_seq(std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    return std::seed_seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                         static_cast<std::uint32_t>(b >> 32), static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
}

} // namespace

RngStream::RngStream(std::uint64_t seed, Stream stream, std::uint64_t index)
    : seed_(seed), normal_(0.0, std::sqrt(0.5))
{
    auto seq = make_seq(seed, static_cast<std::uint64_t>(stream), index);
    engine_.seed(seq);
}

Complex RngStream::complex_gaussian()
{
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {re, im};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    auto seq = make_seq(seed, index, 0x5eedULL);
    std::mt19937_64 g(seq);
    return g();
}

ComplexMatrix random_complex_gaussian(Index rows, Index cols, RngStream& rng)
{
    if (rows < 0 || cols < 0)
        throw std::invalid_argument("random_complex_gaussian: negative dimension");
    ComplexMatrix A(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c)
            A(r, c) = rng.complex_gaussian();
    return A;
}

ComplexMatrix stack(std::span<const ComplexMatrix> blocks)
{
    if (blocks.empty())
        return ComplexMatrix(0, 0);
    const Index cols = blocks.front().cols();
    Index rows = 0;
    for (const auto& b : blocks) {
        if (b.cols() != cols)
            throw std::invalid_argument("stack: column counts differ (" + std::to_string(b.cols()) + " vs " +
                                        std::to_string(cols) + ")");
        rows += b.rows();
    }
    ComplexMatrix out(rows, cols);
    Index r = 0;
    for (const auto& b : blocks) {
        out.middleRows(r, b.rows()) = b;
        r += b.rows();
    }
    return out;
}

ComplexMatrix stack(std::initializer_list<ComplexMatrix> blocks)
{
    return stack(std::span<const ComplexMatrix>(blocks.begin(), blocks.size()));
}

ComplexMatrix block_diag(std::span<const ComplexMatrix> blocks)
{
    Index rows = 0, cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    ComplexMatrix out = ComplexMatrix::Zero(rows, cols);
    Index r = 0, c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

ComplexMatrix block_diag(std::initializer_list<ComplexMatrix> blocks)
{
    return block_diag(std::span<const ComplexMatrix>(blocks.begin(), blocks.size()));
}

Eigen::VectorXd singular_values(const ComplexMatrix& A)
{
    if (A.size() == 0)
        return Eigen::VectorXd(0);
    Eigen::JacobiSVD<ComplexMatrix> svd(A);
    return svd.singularValues();
}

namespace {

Index rank_from(const Eigen::VectorXd& s, double rel_tol)
{
    if (s.size() == 0 || s(0) == 0.0)
        return 0;
    const double cut = rel_tol * s(0);
    Index r = 0;
    while (r < s.size() && s(r) >= cut)
        ++r;
    return r;
}

} // namespace

Index numeric_rank(const ComplexMatrix& A, double rel_tol)
{
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw std::invalid_argument("numeric_rank: rel_tol must lie in (0, 1)");
    return rank_from(singular_values(A), rel_tol);
}

ComplexMatrix left_null_basis(const ComplexMatrix& A, double rel_tol)
{
    if (A.rows() == 0)
        throw std::invalid_argument("left_null_basis: empty matrix");
    if (A.cols() == 0)
        return ComplexMatrix::Identity(A.rows(), A.rows());
    Eigen::JacobiSVD<ComplexMatrix> svd(A, Eigen::ComputeFullU);
    const Index r = rank_from(svd.singularValues(), rel_tol);
    // Columns r.. of U are orthogonal to the column space of A.
    return svd.matrixU().rightCols(A.rows() - r).adjoint();
}

double relative_norm(const ComplexMatrix& A, const ComplexMatrix& reference)
{
    const double ref = reference.norm();
    return ref > 0.0 ? A.norm() / ref : A.norm();
}

CommonRowSpace common_row_space(std::span<const ComplexMatrix> G)
{
    if (G.empty())
        throw std::invalid_argument("common_row_space: no matrices");
    const Index cols = G.front().cols();
    for (const auto& g : G)
        if (g.cols() != cols)
            throw std::invalid_argument("common_row_space: column counts differ");

    CommonRowSpace out;
    if (G.size() == 1) {
        out.V = G.front();
        out.D.push_back(ComplexMatrix::Identity(G.front().rows(), G.front().rows()));
        return out;
    }

    const auto count = static_cast<Index>(G.size());
    Index rows = 0;
    std::vector<Index> offset;
    for (const auto& g : G) {
        offset.push_back(rows);
        rows += g.rows();
    }
    ComplexMatrix phi = ComplexMatrix::Zero(rows, (count - 1) * cols);
    for (Index j = 0; j < count; ++j) {
        const auto& g = G[static_cast<size_t>(j)];
        if (j < count - 1)
            phi.block(offset[static_cast<size_t>(j)], j * cols, g.rows(), cols) = g;
        if (j > 0)
            phi.block(offset[static_cast<size_t>(j)], (j - 1) * cols, g.rows(), cols) = -g;
    }

    const ComplexMatrix null = left_null_basis(phi);
    if (null.rows() == 0)
        throw EmptyIntersection("common_row_space: row spaces intersect only in zero");
    for (Index j = 0; j < count; ++j)
        out.D.push_back(null.middleCols(offset[static_cast<size_t>(j)], G[static_cast<size_t>(j)].rows()));
    out.V = out.D.front() * G.front();
    return out;
}

ComplexMatrix solve_exact(const ComplexMatrix& A, const ComplexMatrix& y)
{
    if (A.rows() != A.cols())
        throw std::invalid_argument("solve_exact: matrix is not square");
    if (y.rows() != A.rows())
        throw std::invalid_argument("solve_exact: right-hand side has the wrong row count");
    if (numeric_rank(A) != A.rows())
        throw SingularSystem("solve_exact: matrix is singular at tolerance");
    return A.fullPivLu().solve(y);
}

RankReport assess_rank(std::string label, const ComplexMatrix& A, Index claimed_rank,
                       std::vector<std::pair<std::string, double>> residuals, std::uint64_t seed, int trial,
                       double rank_tol, double residual_tol)
{
    RankReport r;
    r.label = std::move(label);
    r.claimed_rank = claimed_rank;
    const Eigen::VectorXd s = singular_values(A);
    r.observed_rank = rank_from(s, rank_tol);
    r.min_to_max_singular_ratio = s.size() > 0 && s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
    r.residual_norms = std::move(residuals);
    r.seed = seed;
    r.trial = trial;
    r.pass = r.observed_rank == r.claimed_rank;
    for (const auto& [name, value] : r.residual_norms)
        if (!(value < residual_tol))
            r.pass = false;
    return r;
}

} // namespace riadof
