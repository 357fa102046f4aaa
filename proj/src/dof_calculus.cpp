// SPDX-License-Identifier: Apache-2.0

#include "riadof/dof_calculus.hpp"

#include <stdexcept>

namespace riadof {

namespace {

void require_m(int m, int hi)
{
    if (m < 2 || m > hi)
        throw std::invalid_argument("order index m=" + std::to_string(m) + " outside [2, " + std::to_string(hi) + "]");
}

void require_n(int n, int lo, const SystemConfig& cfg)
{
    if (n < lo || n > cfg.K)
        throw std::invalid_argument("scheduled count n=" + std::to_string(n) + " outside [" + std::to_string(lo) + ", " +
                                    std::to_string(cfg.K) + "]");
}

// High-regime A_m: 1 - 1/N + (1/N) * sum_{l=m}^{K-1} (m-1)(K-l) / ((K-m+1)(l-1)(l+1)).
Rational a_high(const SystemConfig& c, int m)
{
    const int K = c.K;
    mpq_class sum = 0;
    for (long l = m; l <= K - 1; ++l)
        sum += mpq_class(K - l, (l - 1) * (l + 1));
    sum.canonicalize();
    const Rational s = Rational::from_mpq(sum) * Rational(m - 1, K - m + 1);
    return Rational(1) - Rational(1, c.N) + s / Rational(c.N);
}

// (M+N)(K-i)+N
Rational e_term(const SystemConfig& c, const Rational& M, int i)
{
    return (M + Rational(c.N)) * Rational(c.K - i) + Rational(c.N);
}

struct LowTerms {
    Rational theta;
    std::vector<std::pair<int, Rational>> delta;
    Rational a;
};

// Low-regime expansion around the last high-regime index L+1 = K - floor(M/N) + 1.
LowTerms a_low(const SystemConfig& c, int m)
{
    const int K = c.K;
    const Rational M(c.M);
    const Rational N(c.N);
    const int L = K - c.M / c.N;

    LowTerms out;
    // running = M^{l-m} * prod_{i=m}^{l-1} (K-i) / E(i)
    Rational running(1);
    Rational delta_sum(0);
    for (int l = m; l <= L; ++l) {
        const Rational e_l = e_term(c, M, l);
        const Rational lead = (M * Rational(K - l) * (Rational(1) - Rational(1) / (N * Rational(l + 1))) +
                               Rational(l) * (N - Rational(1)) * Rational(K - l + 1)) /
                              (Rational(l) * e_l);
        const Rational d = lead * Rational(m - 1, l - 1) * running;
        out.delta.emplace_back(l, d);
        delta_sum += d;
        running *= M * Rational(K - l) / e_l;
    }
    out.theta = Rational(m - 1, L) * running;
    out.a = a_high(c, L + 1) * out.theta + delta_sum;
    return out;
}

} // namespace

// ---------------------------------------------------------------------------------------------

void validate(const SystemConfig& cfg)
{
    if (cfg.N < 1)
        throw std::invalid_argument("N must be at least 1");
    if (cfg.M < cfg.N)
        throw std::invalid_argument("configuration requires N <= M");
    if (cfg.K < 2)
        throw std::invalid_argument("K must be at least 2");
}

ClampedConfig clamp_antennas(const SystemConfig& cfg)
{
    validate(cfg);
    ClampedConfig out{cfg, false};
    const long cap = static_cast<long>(cfg.K) * cfg.N;
    if (cfg.M > cap) {
        out.cfg.M = static_cast<int>(cap);
        out.clamped = true;
    }
    return out;
}

SystemConfig scaled(const SystemConfig& cfg, int c) { return {cfg.M * c, cfg.N * c, cfg.K}; }

std::string to_string(Scheme s) { return s == Scheme::MatLike ? "MatLike" : "RtPin"; }

Scheme parse_scheme(const std::string& text)
{
    if (text == "mat" || text == "MatLike" || text == "matlike" || text == "mat-like")
        return Scheme::MatLike;
    if (text == "rtpin" || text == "RtPin" || text == "rt-pin")
        return Scheme::RtPin;
    throw std::invalid_argument("unknown scheme '" + text + "'");
}

void validate(const ScheduleChoice& choice, const SystemConfig& cfg)
{
    require_n(choice.n, choice.scheme == Scheme::MatLike ? 2 : 3, cfg);
}

// ---------------------------------------------------------------------------------------------

ClosedFormBranches closed_form_branches(const SystemConfig& cfg, int m)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    require_m(m, c.K);
    const int f = c.M / c.N;
    const int ce = (c.M + c.N - 1) / c.N;
    ClosedFormBranches out;
    if (m <= c.K - ce + 1)
        out.low = a_low(c, m).a;
    if (m >= c.K - f + 1)
        out.high = a_high(c, m);
    return out;
}

Rational d_order_m_closed(const SystemConfig& cfg, int m)
{
    const ClosedFormBranches b = closed_form_branches(cfg, m);
    if (b.low && b.high && *b.low != *b.high)
        throw std::logic_error("closed form regimes disagree at m=" + std::to_string(m) + ": " + b.low->str() + " vs " +
                               b.high->str());
    const Rational A = b.low ? *b.low : *b.high;
    return Rational(1) / (Rational(1) - A);
}

Rational d_order_m_recursive(const SystemConfig& cfg, int m)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    require_m(m, c.K);
    const int K = c.K;
    const Rational N(c.N);
    Rational d = N;
    for (int i = K - 1; i >= m; --i) {
        const Rational Mp = effective_antennas_phase_m(c, i);
        // Both sides divided by C(K,i); C(K,i+1)/C(K,i) = (K-i)/(i+1).
        const Rational num = ((Mp + N) * Rational(K - i) + N) * Rational(i);
        const Rational den = Rational(K - i + 1) * Rational(i) + Mp * Rational(i - 1) * Rational(K - i) / d +
                             Mp / N * Rational(K - i, i + 1);
        d = num / den;
    }
    return d;
}

Rational d2_miso_closed(int K)
{
    if (K < 2)
        throw std::invalid_argument("K must be at least 2");
    mpq_class sum = 0;
    for (long l = 2; l <= K - 1; ++l)
        sum += mpq_class(K - l, l * l - 1);
    sum.canonicalize();
    return Rational(1) / (Rational(1) - Rational::from_mpq(sum) / Rational(K - 1));
}

MisoResult d1_miso(int K)
{
    const Rational d2 = d2_miso_closed(K);
    const Rational two_d2 = Rational(2) * d2;
    auto clamp_count = [K](const mpz_class& o) {
        if (o < 2)
            return 2;
        if (o > K)
            return K;
        return static_cast<int>(o.get_si());
    };
    const int lo = clamp_count(two_d2.floor());
    const int hi = clamp_count(two_d2.ceil());
    auto value = [&](int o) { return Rational(o) * Rational(o) / (Rational(1) + Rational(o) * Rational(o - 1) / d2); };
    MisoResult best{value(lo), lo};
    if (hi != lo) {
        const Rational v = value(hi);
        if (v > best.value)
            best = {v, hi};
    }
    return best;
}

Rational d_order_1m(const SystemConfig& cfg, int m)
{
    validate(cfg);
    require_m(m, cfg.K - 1);
    return Rational(cfg.N) * Rational(m + 1);
}

DofBreakdown dof_breakdown(const SystemConfig& cfg, int m)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    require_m(m, c.K);
    DofBreakdown out;
    out.m = m;
    const ClosedFormBranches b = closed_form_branches(c, m);
    if (b.low) {
        LowTerms t = a_low(c, m);
        out.theta = t.theta;
        out.delta = std::move(t.delta);
        out.low_regime = true;
    }
    out.A = Rational(1) - Rational(1) / d_order_m_closed(c, m);

    const int K = c.K;
    const Rational N(c.N);
    if (m == K) {
        out.B = Rational(0);
        out.C = out.A;
        return out;
    }
    const Rational Mp = effective_antennas_phase_m(c, m);
    const Rational e = e_term(c, Mp, m);
    out.B = Mp * Rational(m - 1) * Rational(K - m) / (Rational(m) * e);
    out.C = (Mp * Rational(K - m) + Rational(m) * (N - Rational(1)) * Rational(K - m + 1) -
             Mp * Rational(K - m) / (N * Rational(m + 1))) /
            (Rational(m) * e);
    return out;
}

// ---------------------------------------------------------------------------------------------

Rational effective_antennas_mat(const SystemConfig& cfg, int n)
{
    return min(Rational(cfg.M), Rational(n) * Rational(cfg.N));
}

Rational effective_antennas_rtpin(const SystemConfig& cfg, int n)
{
    const Rational cap = Rational(1 + (n - 1) * (n - 1), 1 + (n - 2) * (n - 1)) * Rational(cfg.N);
    return min(Rational(cfg.M), cap);
}

Rational effective_antennas_phase_m(const SystemConfig& cfg, int m)
{
    return min(Rational(cfg.M), Rational(cfg.N) * Rational(cfg.K - m + 1));
}

Rational d1_mat(int n, const SystemConfig& cfg)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    require_n(n, 2, c);
    const Rational Mt = effective_antennas_mat(c, n);
    const Rational d2 = d_order_m_recursive(c, 2);
    return Mt * Rational(n) / (Rational(1) + Mt * Rational(n - 1) / d2);
}

Rational d1_rtpin(int n, const SystemConfig& cfg)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    require_n(n, 3, c);
    const Rational Mh = effective_antennas_rtpin(c, n);
    const Rational N(c.N);
    const Rational d2 = d_order_m_recursive(c, 2);
    const Rational den = (Rational(n - 1) + Mh / (N * Rational(n - 1))) / Rational(n) + Mh * Rational(n - 2) / d2;
    return Mh * Rational(n - 1) / den;
}

Rational d1(const ScheduleChoice& choice, const SystemConfig& cfg)
{
    return choice.scheme == Scheme::MatLike ? d1_mat(choice.n, cfg) : d1_rtpin(choice.n, cfg);
}

Rational epsilon(int n)
{
    if (n < 3)
        throw std::invalid_argument("epsilon requires n >= 3");
    const long a = n - 1;
    const long num = n * a + n * a * a * a;
    const long den = 1 + 2 * a * a + (n - 2) * a * a * a;
    return Rational(num, den);
}

Rational ratio_r(const ScheduleChoice& choice, const SystemConfig& cfg)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    validate(choice, c);
    const int n = choice.n;
    if (choice.scheme == Scheme::MatLike)
        return Rational(1) / (effective_antennas_mat(c, n) * Rational(n - 1));
    const Rational Mh = effective_antennas_rtpin(c, n);
    const Rational N(c.N);
    return (Rational((n - 1) * (n - 1)) * N + Mh) / (Rational(n) * Rational(n - 1) * Rational(n - 2) * Mh * N);
}

std::vector<std::pair<ScheduleChoice, Rational>> d1_candidates(const SystemConfig& cfg)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    const Rational d2 = d_order_m_recursive(c, 2);
    const Rational N(c.N);
    std::vector<std::pair<ScheduleChoice, Rational>> out;
    for (int n = 2; n <= c.K; ++n) {
        const Rational Mt = effective_antennas_mat(c, n);
        out.push_back({{n, Scheme::MatLike}, Mt * Rational(n) / (Rational(1) + Mt * Rational(n - 1) / d2)});
        if (n >= 3) {
            const Rational Mh = effective_antennas_rtpin(c, n);
            const Rational den = (Rational(n - 1) + Mh / (N * Rational(n - 1))) / Rational(n) + Mh * Rational(n - 2) / d2;
            out.push_back({{n, Scheme::RtPin}, Mh * Rational(n - 1) / den});
        }
    }
    return out;
}

BestChoice d1_best(const SystemConfig& cfg)
{
    const ClampedConfig cc = clamp_antennas(cfg);
    const auto candidates = d1_candidates(cc.cfg);
    BestChoice best{candidates.front().second, candidates.front().first, cc.clamped};
    for (const auto& [choice, value] : candidates) {
        if (value > best.value) {
            best.value = value;
            best.choice = choice;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------------------------

PhaseEntry SymbolLedger::per_block() const
{
    return {counts.m, counts.sent / multiplicity, counts.slots / multiplicity, counts.next_order / multiplicity,
            counts.order_1m / multiplicity};
}

SymbolLedger ledger_phase1_mat(int n, const SystemConfig& cfg)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    require_n(n, 2, c);
    SymbolLedger L;
    L.kind = LedgerKind::Phase1Mat;
    L.index = n;
    L.multiplicity = binomial(c.K, n);
    L.effective_antennas = effective_antennas_mat(c, n);
    const Rational nn(n);
    L.single_slot = c.M >= n * c.N;
    L.block_slots = L.single_slot ? 1 : n;
    L.counts.m = 1;
    if (L.single_slot) {
        const Rational N(c.N);
        L.counts.sent = nn * nn * N;
        L.counts.slots = Rational(1);
        L.counts.next_order = nn * Rational(n - 1) * N;
    } else {
        const Rational& Mt = L.effective_antennas;
        L.counts.sent = Mt * nn * nn;
        L.counts.slots = nn;
        L.counts.next_order = Mt * Rational(n - 1) * nn;
    }
    L.counts.order_1m = Rational(0);
    L.counts.sent *= L.multiplicity;
    L.counts.slots *= L.multiplicity;
    L.counts.next_order *= L.multiplicity;
    return L;
}

SymbolLedger ledger_phase1_rtpin(int n, const SystemConfig& cfg)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    require_n(n, 3, c);
    SymbolLedger L;
    L.kind = LedgerKind::Phase1RtPin;
    L.index = n;
    L.multiplicity = binomial(c.K, n);
    L.effective_antennas = effective_antennas_rtpin(c, n);
    const Rational& Mh = L.effective_antennas;
    const Rational ext = Rational::from_mpq(mpq_class(Mh.denominator()));
    L.t1 = static_cast<int>((ext * Rational(c.N) * Rational((n - 1) * (n - 1))).to_int64());
    L.t2 = static_cast<int>((ext * Mh).to_int64());
    L.block_slots = L.t1 + L.t2;
    const Rational nn(n);
    L.counts.m = 1;
    L.counts.sent = nn * Mh * Rational(L.t1) * L.multiplicity;
    L.counts.slots = Rational(L.t1 + L.t2) * L.multiplicity;
    L.counts.next_order = nn * Rational(n - 1) * Rational(n - 2) * Rational(c.N) * Rational(L.t2) * L.multiplicity;
    L.counts.order_1m = Rational(0);
    return L;
}

SymbolLedger ledger_phase1(const ScheduleChoice& choice, const SystemConfig& cfg)
{
    return choice.scheme == Scheme::MatLike ? ledger_phase1_mat(choice.n, cfg) : ledger_phase1_rtpin(choice.n, cfg);
}

SymbolLedger ledger_phase_m(int m, const SystemConfig& cfg)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    require_m(m, c.K - 1);
    SymbolLedger L;
    L.kind = LedgerKind::PhaseM;
    L.index = m;
    L.multiplicity = binomial(c.K, m);
    L.effective_antennas = effective_antennas_phase_m(c, m);
    L.t = c.K - m + 1;
    const Rational N(c.N);
    const Rational t(L.t);
    const Rational mm(m);
    const Rational next_mult = binomial(c.K, m + 1);
    L.single_slot = c.M >= c.N * L.t;
    L.counts.m = m;
    if (L.single_slot) {
        // One transmitter per slot sends N*t streams; nothing to null.
        L.block_slots = 1;
        L.leader_streams = N * t;
        L.partner_streams = Rational(0);
        L.counts.sent = N * t * mm * L.multiplicity;
        L.counts.slots = mm * L.multiplicity;
        L.counts.next_order = N * Rational(m - 1) * Rational(m + 1) * next_mult;
        L.counts.order_1m = N * Rational(m + 1) * next_mult;
    } else {
        const Rational M(c.M);
        L.block_slots = L.t;
        L.leader_streams = M * t;
        L.partner_streams = N * t - M;
        L.counts.sent = (N * t + M * (t - Rational(1))) * mm * L.multiplicity;
        L.counts.slots = t * mm * L.multiplicity;
        L.counts.next_order = M * Rational(m - 1) * Rational(m + 1) * next_mult;
        L.counts.order_1m = M * Rational(m + 1) * next_mult;
    }
    return L;
}

} // namespace riadof
