// SPDX-License-Identifier: Apache-2.0

#include "riadof/channel_model.hpp"

#include <array>
#include <bit>
#include <istream>
#include <ostream>
#include <string>

namespace riadof {

ChannelRealization ChannelRealization::generate(const SystemConfig& cfg, int T, std::uint64_t seed)
{
    validate(cfg);
    if (T < 1)
        throw std::invalid_argument("channel horizon must be at least one slot");
    ChannelRealization r;
    r.cfg_ = cfg;
    r.T_ = T;
    r.seed_ = seed;
    r.h_.reserve(static_cast<size_t>(T) * cfg.K * cfg.K);
    RngStream rng(seed, Stream::Channel);
    for (int t = 1; t <= T; ++t)
        for (int k = 0; k < cfg.K; ++k)
            for (int j = 0; j < cfg.K; ++j)
                r.h_.push_back(random_complex_gaussian(cfg.N, cfg.M, rng));
    return r;
}

size_t ChannelRealization::slot_index(int k, int j, int t) const
{
    if (k < 0 || k >= cfg_.K || j < 0 || j >= cfg_.K)
        throw std::out_of_range("channel index (" + std::to_string(k) + ", " + std::to_string(j) + ") out of range");
    if (t < 1 || t > T_)
        throw OutOfHorizon("slot " + std::to_string(t) + " outside [1, " + std::to_string(T_) + "]");
    return (static_cast<size_t>(t - 1) * cfg_.K + static_cast<size_t>(k)) * cfg_.K + static_cast<size_t>(j);
}

const ComplexMatrix& ChannelRealization::channel(int k, int j, int t) const { return h_[slot_index(k, j, t)]; }

void ChannelRealization::set(int k, int j, int t, ComplexMatrix H)
{
    if (H.rows() != cfg_.N || H.cols() != cfg_.M)
        throw std::invalid_argument("channel matrix must be N x M");
    h_[slot_index(k, j, t)] = std::move(H);
}

bool operator==(const ChannelRealization& a, const ChannelRealization& b)
{
    if (!(a.cfg_ == b.cfg_) || a.T_ != b.T_ || a.seed_ != b.seed_ || a.h_.size() != b.h_.size())
        return false;
    for (size_t i = 0; i < a.h_.size(); ++i)
        if (a.h_[i] != b.h_[i])
            return false;
    return true;
}

DelayedCsitView::DelayedCsitView(const ChannelRealization& real, int t, CsitAudit* audit)
    : real_(&real), t_(t), audit_(audit)
{
    if (t < 1 || t > real.horizon() + 1)
        throw OutOfHorizon("view slot " + std::to_string(t) + " outside [1, " + std::to_string(real.horizon() + 1) + "]");
}

const ComplexMatrix& DelayedCsitView::channel(int k, int j, int s) const
{
    if (s >= t_) {
        if (audit_)
            audit_->record_violation();
        throw CsitViolation("transmitter at slot " + std::to_string(t_) + " requested H(" + std::to_string(s) + ")");
    }
    if (s < 1)
        throw OutOfHorizon("slot " + std::to_string(s) + " precedes the first slot");
    const ComplexMatrix& H = real_->channel(k, j, s);
    if (audit_)
        audit_->record_grant();
    return H;
}

DelayedCsitView delayed_view(const ChannelRealization& real, int t, CsitAudit* audit) { return {real, t, audit}; }

std::vector<int> slot_range(int first, int count)
{
    std::vector<int> s(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
        s[static_cast<size_t>(i)] = first + i;
    return s;
}

namespace {

constexpr std::array<char, 8> kMagic{'R', 'I', 'A', 'D', 'O', 'F', 'H', '1'};

template <typename U>
void put_le(std::ostream& out, U v)
{
    std::array<char, sizeof(U)> bytes{};
    for (size_t i = 0; i < sizeof(U); ++i)
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in)
{
    std::array<unsigned char, sizeof(U)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in)
        throw std::runtime_error("channel file truncated");
    U v = 0;
    for (size_t i = 0; i < sizeof(U); ++i)
        v |= static_cast<U>(bytes[i]) << (8 * i);
    return v;
}

} // namespace

void dump_realization(const ChannelRealization& real, std::ostream& out)
{
    const SystemConfig& c = real.config();
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.M));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.N));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.K));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(real.horizon()));
    put_le<std::uint64_t>(out, real.seed());
    for (int t = 1; t <= real.horizon(); ++t)
        for (int k = 0; k < c.K; ++k)
            for (int j = 0; j < c.K; ++j) {
                const ComplexMatrix& H = real.channel(k, j, t);
                for (Index r = 0; r < H.rows(); ++r)
                    for (Index q = 0; q < H.cols(); ++q) {
                        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(H(r, q).real()));
                        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(H(r, q).imag()));
                    }
            }
}

ChannelRealization load_realization(std::istream& in)
{
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic)
        throw std::runtime_error("not a channel realization file");
    ChannelRealization r;
    r.cfg_.M = static_cast<int>(get_le<std::uint32_t>(in));
    r.cfg_.N = static_cast<int>(get_le<std::uint32_t>(in));
    r.cfg_.K = static_cast<int>(get_le<std::uint32_t>(in));
    r.T_ = static_cast<int>(get_le<std::uint32_t>(in));
    r.seed_ = get_le<std::uint64_t>(in);
    validate(r.cfg_);
    for (int t = 1; t <= r.T_; ++t)
        for (int k = 0; k < r.cfg_.K; ++k)
            for (int j = 0; j < r.cfg_.K; ++j) {
                ComplexMatrix H(r.cfg_.N, r.cfg_.M);
                for (Index a = 0; a < H.rows(); ++a)
                    for (Index b = 0; b < H.cols(); ++b) {
                        const double re = std::bit_cast<double>(get_le<std::uint64_t>(in));
                        const double im = std::bit_cast<double>(get_le<std::uint64_t>(in));
                        H(a, b) = {re, im};
                    }
                r.h_.push_back(std::move(H));
            }
    return r;
}

} // namespace riadof
