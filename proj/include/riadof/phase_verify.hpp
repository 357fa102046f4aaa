// SPDX-License-Identifier: Apache-2.0
//
// Precoder/projector construction for each transmission phase and Monte-Carlo
// verification of the rank conditions that make every phase decodable.
// Builders receive channel state only through DelayedCsitView.

#pragma once

#include "riadof/channel_model.hpp"
#include "riadof/dof_calculus.hpp"
#include "riadof/matrix_kernel.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace riadof {

using Residuals = std::vector<std::pair<std::string, double>>;

// ---------------------------------------------------------------------------------------------
// Phase 1, MAT-like: every scheduled transmitter sends fresh symbols; each receiver keeps a
// random selection of its observations, and the interference it overhears becomes order-2 symbols.

struct MatBlock {
    std::vector<int> users;        // scheduled pairs
    int first_slot = 1;
    int slots = 1;                 // 1 in the antenna-rich regime, n otherwise
    Index streams = 0;             // symbols per transmitter
    std::vector<ComplexMatrix> W;  // per position: (M*slots) x streams
    std::vector<ComplexMatrix> P;  // per position: observation selector
    // PG[a][b] = P_a * Hbar_{users[a], users[b]} * W_b
    std::vector<std::vector<ComplexMatrix>> PG;
};

// active_antennas <= M restricts every precoder to the first active_antennas antennas.
MatBlock build_mat_block(const SystemConfig& cfg, std::vector<int> users, int first_slot, const ChannelRealization& real,
                         CsitAudit* audit, RngStream& rng, int active_antennas = 0);

// Receiver users[a]: its own selected observations plus what every other receiver overheard from Tx users[a].
ComplexMatrix mat_decoding_stack(const MatBlock& block, size_t a);

// ---------------------------------------------------------------------------------------------
// Phase 1, two-stage RT-PIN: an interference-sensing stage of t1 slots, then t2 slots of
// redundancy confined to the common row space of each transmitter's overheard interference.

struct RtPinBlock {
    std::vector<int> users;
    int first_slot = 1;
    int t1 = 0;
    int t2 = 0;
    Index streams = 0;     // symbols per transmitter
    Index common_dim = 0;  // rows of V, predicted
    std::vector<ComplexMatrix> W_is;                 // per position: (M*t1) x streams
    std::vector<ComplexMatrix> V;                    // per position: common_dim x streams
    std::vector<ComplexMatrix> C;                    // per position: (M*t2) x common_dim
    std::vector<ComplexMatrix> W_rt;                 // per position: C * V
    std::vector<std::vector<ComplexMatrix>> B;       // B[k][j] = stack{G_is_kj, H_rt_kj * W_rt_j}
    std::vector<std::vector<ComplexMatrix>> Q;       // Q[k][j], k != j: left null basis of B[k][j]
    Residuals residuals;
};

RtPinBlock build_rtpin_block(const SystemConfig& cfg, int n, std::vector<int> users, int first_slot,
                             const ChannelRealization& real, CsitAudit* audit, RngStream& rng);

// Receiver position k, after nulling Tx position j, sees Tx position l through Q[k][j] * B[k][l].
ComplexMatrix rtpin_projected(const RtPinBlock& block, size_t k, size_t l, size_t j);

// The (n-1)^2 N t2 interference-free combinations of the symbols of Tx position k.
ComplexMatrix rtpin_decoding_stack(const RtPinBlock& block, size_t k);

// ---------------------------------------------------------------------------------------------
// Phase m: a leader sends its order-m symbols; a partner adds N t - M' more so that every
// non-scheduled receiver can null it and keep M' clean observations of the leader.

struct PhaseMBlock {
    std::vector<int> scheduled;
    int leader = 0;
    int partner = -1;              // -1 when the leader alone fills the receive space
    std::vector<int> others;       // non-scheduled receivers
    int first_slot = 1;
    int slots = 1;
    Index leader_streams = 0;
    Index partner_streams = 0;
    ComplexMatrix W_leader;        // (M*slots) x leader_streams
    ComplexMatrix W_partner;       // (M*slots) x partner_streams
    std::vector<ComplexMatrix> G_leader;   // per receiver
    std::vector<ComplexMatrix> G_partner;  // per receiver
    std::vector<ComplexMatrix> F;          // per receiver: annihilates G_partner; identity when the partner is silent
    Residuals residuals;
};

PhaseMBlock build_phase_m_block(const SystemConfig& cfg, int m, std::vector<int> scheduled, int leader, int partner,
                                int first_slot, const ChannelRealization& real, CsitAudit* audit, RngStream& rng);

// Scheduled receiver k: its own observations plus every non-scheduled receiver's nulled observations.
ComplexMatrix phase_m_decoding_stack(const PhaseMBlock& block, int k);

// Leader-only part: F_k G_k stacked with F_j G_j over the non-scheduled receivers.
ComplexMatrix phase_m_inner_matrix(const PhaseMBlock& block, int k);

// ---------------------------------------------------------------------------------------------
// Verification

class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct VerifyOptions {
    CsitAudit* audit = nullptr;
    std::function<void(ChannelRealization&)> tamper;  // applied to every trial's channels
    std::optional<std::filesystem::path> dump_dir;    // failing trials write their channels here
    double rank_tol = kRankTolerance;
    double residual_tol = kResidualTolerance;
};

std::vector<RankReport> verify_phase1_mat(const SystemConfig& cfg, int n, int trials, std::uint64_t seed,
                                          const VerifyOptions& opt = {});
std::vector<RankReport> verify_phase1_rtpin(const SystemConfig& cfg, int n, int trials, std::uint64_t seed,
                                            const VerifyOptions& opt = {});
std::vector<RankReport> verify_phase_m(const SystemConfig& cfg, int m, int trials, std::uint64_t seed,
                                       const VerifyOptions& opt = {});

struct RtPinConditions {
    bool equality_ok = false;   // (n-1)^2 N t2 = M t1
    bool inequality_ok = false; // M t1 <= ((n-1)^2 + 1) [(n-1)N - (n-2)M] t1
    int t1 = 0;
    int t2 = 0;
    Rational effective_antennas;
};

// With clamp the transmit dimension is capped at the RT-PIN limit and time-extended; without it M is used as is.
RtPinConditions check_appendix_c_conditions(const SystemConfig& cfg, int n, bool clamp = true);

struct VerifySummary {
    std::string kind;
    SystemConfig cfg;
    int index = 0;  // n or m
    int trials = 0;
    size_t reports = 0;
    size_t pass_count = 0;  // passing reports
    size_t trial_pass_count = 0;
    double min_singular_ratio_min = 0.0;
    double min_singular_ratio_median = 0.0;
    double max_residual = 0.0;
    std::vector<std::pair<int, std::uint64_t>> failed;  // (trial, channel seed)
    bool all_pass() const { return reports > 0 && pass_count == reports; }
};

VerifySummary summarize(std::string kind, const SystemConfig& cfg, int index, int trials, std::uint64_t seed,
                        const std::vector<RankReport>& reports);

// Channel seed used by the given trial.
std::uint64_t trial_seed(std::uint64_t seed, int trial);

} // namespace riadof
