// SPDX-License-Identifier: Apache-2.0
//
// i.i.d. Rayleigh channel tables and the one-slot-delayed transmitter view of them.
// Slots are numbered from 1; users and transmitters from 0.

#pragma once

#include "riadof/dof_calculus.hpp"
#include "riadof/matrix_kernel.hpp"

#include <atomic>
#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace riadof {

class ChannelRealization {
public:
    // H_{kj}(t) for every receiver k, transmitter j and slot t in [1, T], each N x M with CN(0,1) entries.
    static ChannelRealization generate(const SystemConfig& cfg, int T, std::uint64_t seed);

    // Receiver-side access: current CSI is allowed.
    const ComplexMatrix& channel(int k, int j, int t) const;

    // Replaces one matrix; used to inject degenerate channels.
    void set(int k, int j, int t, ComplexMatrix H);

    const SystemConfig& config() const { return cfg_; }
    int horizon() const { return T_; }
    std::uint64_t seed() const { return seed_; }

    friend bool operator==(const ChannelRealization& a, const ChannelRealization& b);

private:
    friend ChannelRealization load_realization(std::istream& in);

    size_t slot_index(int k, int j, int t) const;

    SystemConfig cfg_;
    int T_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<ComplexMatrix> h_;
};

class OutOfHorizon : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// A transmitter asked for channel state of the current or a future slot.
class CsitViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Shared counters for every view handed to precoder builders.
class CsitAudit {
public:
    void record_grant() { granted_.fetch_add(1, std::memory_order_relaxed); }
    void record_violation() { violations_.fetch_add(1, std::memory_order_relaxed); }

    std::uint64_t granted() const { return granted_.load(); }
    std::uint64_t violations() const { return violations_.load(); }

private:
    std::atomic<std::uint64_t> granted_{0};
    std::atomic<std::uint64_t> violations_{0};
};

// What a transmitter knows at the start of slot t: H(s) for s <= t-1 only.
class DelayedCsitView {
public:
    DelayedCsitView(const ChannelRealization& real, int t, CsitAudit* audit = nullptr);

    // Throws CsitViolation when s >= t and OutOfHorizon when s is not a slot of the realization.
    const ComplexMatrix& channel(int k, int j, int s) const;

    int current_slot() const { return t_; }
    const SystemConfig& config() const { return real_->config(); }

private:
    const ChannelRealization* real_;
    int t_;
    CsitAudit* audit_;
};

DelayedCsitView delayed_view(const ChannelRealization& real, int t, CsitAudit* audit = nullptr);

template <typename S>
concept ChannelSource = requires(const S& s, int k, int j, int t) {
    { s.channel(k, j, t) } -> std::convertible_to<const ComplexMatrix&>;
};

// Bdiag{H_kj(t) : t in slots}
template <ChannelSource S>
ComplexMatrix aggregate(const S& source, int k, int j, std::span<const int> slots)
{
    std::vector<ComplexMatrix> blocks;
    blocks.reserve(slots.size());
    for (int t : slots)
        blocks.push_back(source.channel(k, j, t));
    return block_diag(blocks);
}

// Consecutive slots first, first+1, ..., first+count-1.
std::vector<int> slot_range(int first, int count);

// Binary layout, all little-endian: magic "RIADOFH1", u32 M, N, K, T, u64 seed,
// then for t = 1..T, k, j: N*M entries row-major as (re, im) f64 pairs.
void dump_realization(const ChannelRealization& real, std::ostream& out);
ChannelRealization load_realization(std::istream& in);

} // namespace riadof
