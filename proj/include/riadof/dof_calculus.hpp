// SPDX-License-Identifier: Apache-2.0
//
// Exact sum-DoF formulas for the K-user MIMO interference channel with delayed CSIT:
// order-m delivery DoF (closed form and recursion), phase-1 scheduling schemes,
// their symbol ledgers, and the scheduling optimum. No floating point is used here.

#pragma once

#include "riadof/rational.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace riadof {

// (M, N, K): M antennas per transmitter, N per receiver, K transmitter/receiver pairs.
struct SystemConfig {
    int M = 1;
    int N = 1;
    int K = 2;

    friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

// Throws std::invalid_argument unless 1 <= N <= M and K >= 2.
void validate(const SystemConfig& cfg);

struct ClampedConfig {
    SystemConfig cfg;
    bool clamped = false; // M was reduced to K*N
};

// Validates, then reduces M to K*N when larger; the extra antennas carry nothing.
ClampedConfig clamp_antennas(const SystemConfig& cfg);

SystemConfig scaled(const SystemConfig& cfg, int c);

enum class Scheme { MatLike, RtPin };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& text);

// Phase-1 scheduling: n co-scheduled pairs delivered by the given scheme.
struct ScheduleChoice {
    int n = 2;
    Scheme scheme = Scheme::MatLike;

    friend bool operator==(const ScheduleChoice&, const ScheduleChoice&) = default;
};

// Throws std::invalid_argument unless MatLike has 2 <= n <= K and RtPin has 3 <= n <= K.
void validate(const ScheduleChoice& choice, const SystemConfig& cfg);

// ---------------------------------------------------------------------------------------------
// Order-m delivery

// DoF of delivering order-m symbols, 2 <= m <= K, by the two-regime closed form.
// Where both regimes apply (M/N integer) both are evaluated and must agree, else std::logic_error.
Rational d_order_m_closed(const SystemConfig& cfg, int m);

// Same quantity by the backward recursion from d_K = N.
Rational d_order_m_recursive(const SystemConfig& cfg, int m);

// The two regime expressions for A_m separately; empty when the regime does not cover m.
struct ClosedFormBranches {
    std::optional<Rational> low;  // m <= K - ceil(M/N) + 1
    std::optional<Rational> high; // m >= K - floor(M/N) + 1
};
ClosedFormBranches closed_form_branches(const SystemConfig& cfg, int m);

// Order-2 DoF of the (K,1,K) channel by its single-sum form.
Rational d2_miso_closed(int K);

struct MisoResult {
    Rational value;
    int n = 2;
};

// Sum DoF of the (K,1,K) channel: best of the two integers around 2*d_2, restricted to [2, K];
// ties go to the smaller count.
MisoResult d1_miso(int K);

// Order-(1,m) DoF, 2 <= m <= K-1.
Rational d_order_1m(const SystemConfig& cfg, int m);

struct DofBreakdown {
    int m = 2;
    Rational A;                                 // d_m = 1 / (1 - A)
    std::optional<Rational> theta;              // low regime only
    std::vector<std::pair<int, Rational>> delta; // (l, Delta_{m,l}), low regime only
    Rational B;                                 // A_m = B * A_{m+1} + C; B = 0, C = A_K at m = K
    Rational C;
    bool low_regime = false;
};

DofBreakdown dof_breakdown(const SystemConfig& cfg, int m);

// ---------------------------------------------------------------------------------------------
// Phase-1 schemes

// min{M, nN}
Rational effective_antennas_mat(const SystemConfig& cfg, int n);
// min{M, (1 + (n-1)^2) / (1 + (n-2)(n-1)) * N}; may be fractional.
Rational effective_antennas_rtpin(const SystemConfig& cfg, int n);
// min{M, N(K-m+1)}
Rational effective_antennas_phase_m(const SystemConfig& cfg, int m);

Rational d1_mat(int n, const SystemConfig& cfg);
Rational d1_rtpin(int n, const SystemConfig& cfg);
Rational d1(const ScheduleChoice& choice, const SystemConfig& cfg);

// RT-PIN versus MAT-like crossover in M/N.
Rational epsilon(int n);

// Slots spent per order-2 symbol generated in phase 1.
Rational ratio_r(const ScheduleChoice& choice, const SystemConfig& cfg);

struct BestChoice {
    Rational value;
    ScheduleChoice choice;
    bool clamped = false;
};

// Maximum over MAT-like n in [2,K] and RT-PIN n in [3,K]; ties prefer smaller n, then MatLike.
BestChoice d1_best(const SystemConfig& cfg);

// Every candidate with its value, in evaluation order.
std::vector<std::pair<ScheduleChoice, Rational>> d1_candidates(const SystemConfig& cfg);

// ---------------------------------------------------------------------------------------------
// Symbol ledgers

enum class LedgerKind { Phase1Mat, Phase1RtPin, PhaseM };

struct PhaseEntry {
    int m = 1;
    Rational sent;       // N_m (N_1 for phase 1)
    Rational slots;      // T_m
    Rational next_order; // N_{m+1} (N_2 for phase 1)
    Rational order_1m;   // N_{1,m}; zero for phase 1
};

// Counts for one phase summed over all C(K,n) or C(K,m) scheduled subsets.
struct SymbolLedger {
    LedgerKind kind = LedgerKind::Phase1Mat;
    int index = 2;                // n for phase 1, m for phase m
    Rational multiplicity;        // number of scheduled subsets
    Rational effective_antennas;  // M-tilde, M-hat or M-prime
    bool single_slot = false;     // antenna-rich regime: one-slot blocks with one stream per receive dimension
    int block_slots = 0;          // slots per subset block
    int t = 0;                    // phase m: K - m + 1
    int t1 = 0;                   // RT-PIN sensing stage, after time extension
    int t2 = 0;                   // RT-PIN redundancy stage, after time extension
    Rational leader_streams;      // phase m: symbols of the first transmitter per block
    Rational partner_streams;     // phase m: symbols of the second transmitter per block
    PhaseEntry counts;

    // Per-subset counts.
    PhaseEntry per_block() const;
};

SymbolLedger ledger_phase1_mat(int n, const SystemConfig& cfg);
SymbolLedger ledger_phase1_rtpin(int n, const SystemConfig& cfg);
SymbolLedger ledger_phase1(const ScheduleChoice& choice, const SystemConfig& cfg);
SymbolLedger ledger_phase_m(int m, const SystemConfig& cfg);

} // namespace riadof
