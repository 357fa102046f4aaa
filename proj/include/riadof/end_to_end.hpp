// SPDX-License-Identifier: Apache-2.0
//
// Noiseless end-to-end runs of the three-user schemes: every transmitted quantity is a row of
// coefficients over the vector of all private symbols, receivers observe channel-weighted sums of
// those rows, and each receiver decodes batch by batch from the highest order down to its own
// private symbols.

#pragma once

#include "riadof/channel_model.hpp"
#include "riadof/dof_calculus.hpp"
#include "riadof/matrix_kernel.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace riadof {

using RowVector = Eigen::RowVectorXcd;

enum class SymbolKind { Private, OrderM, Order1m, Overheard };

std::string to_string(SymbolKind k);

// u[origin | desired ; known]
struct SymbolId {
    int origin = 0;
    SymbolKind kind = SymbolKind::Private;
    std::vector<int> desired;  // sorted
    std::vector<int> known;    // sorted; disjoint from desired
    int index = 0;             // running index among symbols of the same origin and kind

    // Backward-decoding level: 1 for private, m for order-m, m + 1 for order-(1,m), 0 for overheard pieces.
    int order() const;
    std::string name() const;
};

// Raised when the executed block chaining does not match the ledger it was planned from.
class LedgerMismatch : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct PhaseCount {
    std::string phase;
    long long sent = 0;          // symbols transmitted
    long long slots = 0;
    long long generated = 0;     // next-order symbols created: order 2 after phase 1, order 3 after phase 2
    long long generated_1m = 0;  // order-(1,2) symbols created after phase 2

    friend bool operator==(const PhaseCount&, const PhaseCount&) = default;
};

// Integral chaining of phase 1, phase 2 and the two halves of phase 3 for a three-user configuration.
struct ChainPlan {
    SystemConfig cfg;
    ScheduleChoice choice;
    int phase1_repeats = 1;  // copies of the full phase-1 ledger (all subsets)
    int phase2_repeats = 1;  // copies of the full phase-2 ledger (all pairs and leaders)
    SymbolLedger phase1;
    SymbolLedger phase2;
    Rational d3;
    Rational d12;
    std::vector<PhaseCount> expected;  // phase1, phase2, phase3-I, phase3-II
    long long total_slots = 0;
    long long private_symbols = 0;
    Rational ratio;  // private symbols per slot
};

// Requires K = 3. Repeats are the smallest integers equating order-2 symbols generated and consumed.
ChainPlan chain_plan(const SystemConfig& cfg, const ScheduleChoice& choice);

// What one transmitter sends in one slot.
struct TxEmission {
    int tx = 0;
    std::vector<std::string> symbols;
    int antennas = 0;       // nonzero rows of the precoder
    int csit_through = 0;   // latest channel slot any sent symbol or precoder depends on; 0 for none
};

struct SlotPlan {
    int slot = 1;
    std::string phase;
    std::vector<TxEmission> emissions;
};

struct DecodeStepResult {
    int user = 0;
    std::string label;
    int order = 0;
    std::vector<std::string> symbols;
    std::vector<int> sources;    // slots whose observations were used; empty when solved from knowledge alone
    bool prerequisites_known = true;  // interference that had to be known beforehand was known
    bool ok = false;
    double residual = 0.0;
};

struct DecodingReport {
    std::string scheme;
    SystemConfig cfg;
    std::uint64_t seed = 0;
    int total_slots = 0;
    int private_symbols = 0;
    std::vector<int> intended;   // private symbols per user
    std::vector<int> recovered;  // per user, within the error threshold
    std::vector<double> user_error;  // ||x_hat - x|| / ||x|| over each user's own symbols
    double max_relative_error = 0.0;
    double error_threshold = 0.0;
    Rational ratio;
    int max_antennas_used = 0;
    double combiner_min_singular_ratio = 0.0;
    bool order_ok = false;   // decoding levels never increase along any user's schedule
    bool causal_ok = false;  // every emission depends only on earlier slots
    std::uint64_t csit_granted = 0;
    std::uint64_t csit_violations = 0;
    std::vector<PhaseCount> phases;
    std::vector<SlotPlan> slots;
    std::vector<DecodeStepResult> steps;
    std::vector<std::string> failures;
    bool pass = false;
};

struct RunOptions {
    CsitAudit* audit = nullptr;
    bool private_first = false;  // decode private symbols before anything else; must fail
    std::optional<std::filesystem::path> dump_dir;
};

// (3,1,3): three transmitters per slot in phase 1, 12 slots.
DecodingReport run_313(std::uint64_t seed, const RunOptions& opt = {});
// (3,1,3) restricted to two active transmitters per phase-1 slot and two antennas, 16 slots.
DecodingReport run_313_pair(std::uint64_t seed, const RunOptions& opt = {});
// (3,2,3): seven RT-PIN blocks chained with six rounds of order-2 delivery, 185 slots.
DecodingReport run_323(std::uint64_t seed, const RunOptions& opt = {});

struct AuditResult {
    bool ok = false;
    std::vector<std::string> mismatches;
    explicit operator bool() const { return ok; }
};

// Executed per-phase counts, total slots and private symbols against the chained ledgers.
AuditResult ledger_audit(const DecodingReport& report, const ChainPlan& expected);

// Plan used by each run_* function, by scheme name ("313", "313-pair", "323").
ChainPlan scheme_plan(const std::string& scheme);

} // namespace riadof
