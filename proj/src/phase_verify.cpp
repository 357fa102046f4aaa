// SPDX-License-Identifier: Apache-2.0

#include "riadof/phase_verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

namespace riadof {

namespace {

double max_of(double a, double b) { return std::isnan(b) ? b : std::max(a, b); }

std::string pos_label(const char* what, size_t a) { return std::string(what) + std::to_string(a); }

void maybe_dump(const VerifyOptions& opt, const std::string& kind, const ChannelRealization& real, int trial,
                const std::vector<RankReport>& trial_reports)
{
    if (!opt.dump_dir)
        return;
    const bool failed = std::any_of(trial_reports.begin(), trial_reports.end(), [](const RankReport& r) { return !r.pass; });
    if (!failed)
        return;
    std::filesystem::create_directories(*opt.dump_dir);
    const auto path = *opt.dump_dir / (kind + "_trial" + std::to_string(trial) + "_seed" + std::to_string(real.seed()) + ".bin");
    std::ofstream out(path, std::ios::binary);
    dump_realization(real, out);
}

} // namespace

std::uint64_t trial_seed(std::uint64_t seed, int trial) { return derive_seed(seed, static_cast<std::uint64_t>(trial)); }

// ---------------------------------------------------------------------------------------------

MatBlock build_mat_block(const SystemConfig& cfg, std::vector<int> users, int first_slot, const ChannelRealization& real,
                         CsitAudit* audit, RngStream& rng, int active_antennas)
{
    const int n = static_cast<int>(users.size());
    const int active = active_antennas > 0 ? std::min(active_antennas, cfg.M) : cfg.M;
    const SystemConfig eff{active, cfg.N, cfg.K};
    const SymbolLedger L = ledger_phase1_mat(n, eff);

    MatBlock b;
    b.users = std::move(users);
    b.first_slot = first_slot;
    b.slots = L.block_slots;
    const auto Mt = static_cast<Index>(L.effective_antennas.to_int64());
    b.streams = L.single_slot ? static_cast<Index>(n) * cfg.N : static_cast<Index>(n) * Mt;

    for (int a = 0; a < n; ++a) {
        ComplexMatrix W = ComplexMatrix::Zero(static_cast<Index>(cfg.M) * b.slots, b.streams);
        for (int s = 0; s < b.slots; ++s)
            W.middleRows(static_cast<Index>(s) * cfg.M, active) = random_complex_gaussian(active, b.streams, rng);
        b.W.push_back(std::move(W));
    }
    for (int a = 0; a < n; ++a)
        b.P.push_back(L.single_slot ? ComplexMatrix::Identity(cfg.N, cfg.N)
                                    : random_complex_gaussian(Mt, static_cast<Index>(n) * cfg.N, rng));

    const DelayedCsitView view = delayed_view(real, first_slot + b.slots, audit);
    const std::vector<int> slots = slot_range(first_slot, b.slots);
    b.PG.assign(static_cast<size_t>(n), std::vector<ComplexMatrix>(static_cast<size_t>(n)));
    for (int a = 0; a < n; ++a)
        for (int j = 0; j < n; ++j)
            b.PG[static_cast<size_t>(a)][static_cast<size_t>(j)] =
                b.P[static_cast<size_t>(a)] * aggregate(view, b.users[static_cast<size_t>(a)], b.users[static_cast<size_t>(j)], slots) *
                b.W[static_cast<size_t>(j)];
    return b;
}

ComplexMatrix mat_decoding_stack(const MatBlock& block, size_t a)
{
    std::vector<ComplexMatrix> rows;
    for (size_t b = 0; b < block.users.size(); ++b)
        rows.push_back(block.PG[b][a]);
    return stack(rows);
}

// ---------------------------------------------------------------------------------------------

RtPinBlock build_rtpin_block(const SystemConfig& cfg, int n, std::vector<int> users, int first_slot,
                             const ChannelRealization& real, CsitAudit* audit, RngStream& rng)
{
    const SymbolLedger L = ledger_phase1_rtpin(n, cfg);
    RtPinBlock b;
    b.users = std::move(users);
    b.first_slot = first_slot;
    b.t1 = L.t1;
    b.t2 = L.t2;
    b.streams = static_cast<Index>((L.effective_antennas * Rational(L.t1)).to_int64());
    b.common_dim = static_cast<Index>(n - 1) * cfg.N * b.t1 - static_cast<Index>(n - 2) * b.streams;
    if (b.common_dim <= 0)
        throw ConfigurationError("RT-PIN: overheard interference has no common row space");
    const auto nn = static_cast<size_t>(n);
    const Index M = cfg.M;
    const Index N = cfg.N;

    for (size_t j = 0; j < nn; ++j)
        b.W_is.push_back(random_complex_gaussian(M * b.t1, b.streams, rng));

    const std::vector<int> stage1 = slot_range(first_slot, b.t1);
    const std::vector<int> stage2 = slot_range(first_slot + b.t1, b.t2);

    // Redundancy precoders: only the sensing-stage channels are known when stage 2 starts.
    {
        const DelayedCsitView view = delayed_view(real, first_slot + b.t1, audit);
        for (size_t j = 0; j < nn; ++j) {
            std::vector<ComplexMatrix> overheard;
            for (size_t k = 0; k < nn; ++k)
                if (k != j)
                    overheard.push_back(aggregate(view, b.users[k], b.users[j], stage1) * b.W_is[j]);
            CommonRowSpace crs = common_row_space(overheard);
            double align = 0.0;
            for (size_t i = 0; i < overheard.size(); ++i)
                align = max_of(align, relative_norm(crs.D[i] * overheard[i] - crs.V, crs.V));
            b.residuals.emplace_back(pos_label("alignment_tx", j), align);
            b.residuals.emplace_back(pos_label("common_dim_gap_tx", j),
                                     std::abs(static_cast<double>(crs.V.rows() - b.common_dim)));
            b.V.push_back(std::move(crs.V));
        }
        for (size_t j = 0; j < nn; ++j) {
            b.C.push_back(random_complex_gaussian(M * b.t2, b.V[j].rows(), rng));
            b.W_rt.push_back(b.C[j] * b.V[j]);
        }
    }

    const DelayedCsitView view = delayed_view(real, first_slot + b.t1 + b.t2, audit);
    b.B.assign(nn, std::vector<ComplexMatrix>(nn));
    b.Q.assign(nn, std::vector<ComplexMatrix>(nn));
    for (size_t k = 0; k < nn; ++k)
        for (size_t j = 0; j < nn; ++j)
            b.B[k][j] = stack({aggregate(view, b.users[k], b.users[j], stage1) * b.W_is[j],
                               aggregate(view, b.users[k], b.users[j], stage2) * b.W_rt[j]});
    double annihilation = 0.0, orthonormality = 0.0, q_gap = 0.0;
    for (size_t k = 0; k < nn; ++k)
        for (size_t j = 0; j < nn; ++j) {
            if (k == j)
                continue;
            b.Q[k][j] = left_null_basis(b.B[k][j]);
            const ComplexMatrix& Q = b.Q[k][j];
            annihilation = max_of(annihilation, relative_norm(Q * b.B[k][j], b.B[k][j]));
            orthonormality = max_of(orthonormality, (Q * Q.adjoint() - ComplexMatrix::Identity(Q.rows(), Q.rows())).norm());
            q_gap = std::max(q_gap, std::abs(static_cast<double>(Q.rows() - N * b.t2)));
        }
    b.residuals.emplace_back("annihilation_Q", annihilation);
    b.residuals.emplace_back("orthonormality_Q", orthonormality);
    b.residuals.emplace_back("dimension_gap_Q", q_gap);
    return b;
}

ComplexMatrix rtpin_projected(const RtPinBlock& block, size_t k, size_t l, size_t j) { return block.Q[k][j] * block.B[k][l]; }

ComplexMatrix rtpin_decoding_stack(const RtPinBlock& block, size_t k)
{
    const size_t n = block.users.size();
    std::vector<ComplexMatrix> rows;
    for (size_t j = 0; j < n; ++j)
        if (j != k)
            rows.push_back(rtpin_projected(block, k, k, j));
    for (size_t l = 0; l < n; ++l)
        for (size_t j = 0; j < n; ++j)
            if (l != k && j != k && l != j)
                rows.push_back(rtpin_projected(block, l, k, j));
    return stack(rows);
}

// ---------------------------------------------------------------------------------------------

PhaseMBlock build_phase_m_block(const SystemConfig& cfg, int m, std::vector<int> scheduled, int leader, int partner,
                                int first_slot, const ChannelRealization& real, CsitAudit* audit, RngStream& rng)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    if (static_cast<int>(scheduled.size()) != m)
        throw std::invalid_argument("phase m: scheduled set must have m users");
    const SymbolLedger L = ledger_phase_m(m, c);
    PhaseMBlock b;
    b.scheduled = std::move(scheduled);
    b.leader = leader;
    b.first_slot = first_slot;
    b.slots = L.block_slots;
    b.leader_streams = static_cast<Index>(L.leader_streams.to_int64());
    b.partner_streams = static_cast<Index>(L.partner_streams.to_int64());
    b.partner = b.partner_streams > 0 ? partner : -1;
    auto in_set = [&](int u) { return std::find(b.scheduled.begin(), b.scheduled.end(), u) != b.scheduled.end(); };
    if (!in_set(leader) || (b.partner >= 0 && (!in_set(b.partner) || b.partner == leader)))
        throw std::invalid_argument("phase m: leader and partner must be distinct scheduled users");
    for (int u = 0; u < c.K; ++u)
        if (!in_set(u))
            b.others.push_back(u);

    const Index M = c.M;
    const Index N = c.N;
    b.W_leader = random_complex_gaussian(M * b.slots, b.leader_streams, rng);
    b.W_partner = random_complex_gaussian(M * b.slots, b.partner_streams, rng);

    const DelayedCsitView view = delayed_view(real, first_slot + b.slots, audit);
    const std::vector<int> slots = slot_range(first_slot, b.slots);
    double annihilation = 0.0, gap = 0.0;
    const auto clean = static_cast<Index>(L.effective_antennas.to_int64());
    for (int k = 0; k < c.K; ++k) {
        b.G_leader.push_back(aggregate(view, k, leader, slots) * b.W_leader);
        if (b.partner >= 0) {
            b.G_partner.push_back(aggregate(view, k, b.partner, slots) * b.W_partner);
            ComplexMatrix F = left_null_basis(b.G_partner.back());
            annihilation = max_of(annihilation, relative_norm(F * b.G_partner.back(), b.G_partner.back()));
            gap = std::max(gap, std::abs(static_cast<double>(F.rows() - clean)));
            b.F.push_back(std::move(F));
        } else {
            b.G_partner.push_back(ComplexMatrix(N * b.slots, 0));
            b.F.push_back(ComplexMatrix::Identity(N * b.slots, N * b.slots));
        }
    }
    b.residuals.emplace_back("annihilation_F", annihilation);
    b.residuals.emplace_back("dimension_gap_F", gap);
    return b;
}

ComplexMatrix phase_m_decoding_stack(const PhaseMBlock& block, int k)
{
    const auto kk = static_cast<size_t>(k);
    const Index cols = block.leader_streams + block.partner_streams;
    std::vector<ComplexMatrix> rows;
    ComplexMatrix own(block.G_leader[kk].rows(), cols);
    own << block.G_leader[kk], block.G_partner[kk];
    rows.push_back(std::move(own));
    for (int j : block.others) {
        const auto jj = static_cast<size_t>(j);
        ComplexMatrix clean = ComplexMatrix::Zero(block.F[jj].rows(), cols);
        clean.leftCols(block.leader_streams) = block.F[jj] * block.G_leader[jj];
        rows.push_back(std::move(clean));
    }
    return stack(rows);
}

ComplexMatrix phase_m_inner_matrix(const PhaseMBlock& block, int k)
{
    std::vector<ComplexMatrix> rows;
    rows.push_back(block.F[static_cast<size_t>(k)] * block.G_leader[static_cast<size_t>(k)]);
    for (int j : block.others)
        rows.push_back(block.F[static_cast<size_t>(j)] * block.G_leader[static_cast<size_t>(j)]);
    return stack(rows);
}

// ---------------------------------------------------------------------------------------------

std::vector<RankReport> verify_phase1_mat(const SystemConfig& cfg, int n, int trials, std::uint64_t seed,
                                          const VerifyOptions& opt)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    const SymbolLedger L = ledger_phase1_mat(n, c);
    std::vector<int> users(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        users[static_cast<size_t>(i)] = i;

    std::vector<RankReport> out;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t ts = trial_seed(seed, trial);
        ChannelRealization real = ChannelRealization::generate(c, L.block_slots, ts);
        if (opt.tamper)
            opt.tamper(real);
        RngStream rng(ts, Stream::Precoder);
        const MatBlock block = build_mat_block(c, users, 1, real, opt.audit, rng);
        std::vector<RankReport> trial_reports;
        for (size_t a = 0; a < users.size(); ++a) {
            const ComplexMatrix A = mat_decoding_stack(block, a);
            Residuals res{{"dimension_gap", std::abs(static_cast<double>(A.rows() - block.streams))}};
            trial_reports.push_back(assess_rank(pos_label("phase1-mat user ", a), A, block.streams, std::move(res), seed,
                                                trial, opt.rank_tol, opt.residual_tol));
        }
        maybe_dump(opt, "phase1-mat", real, trial, trial_reports);
        out.insert(out.end(), trial_reports.begin(), trial_reports.end());
    }
    return out;
}

std::vector<RankReport> verify_phase1_rtpin(const SystemConfig& cfg, int n, int trials, std::uint64_t seed,
                                            const VerifyOptions& opt)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    const RtPinConditions pre = check_appendix_c_conditions(c, n);
    if (!pre.equality_ok || !pre.inequality_ok)
        throw ConfigurationError("RT-PIN decodability conditions fail for this configuration");
    std::vector<int> users(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        users[static_cast<size_t>(i)] = i;

    std::vector<RankReport> out;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t ts = trial_seed(seed, trial);
        ChannelRealization real = ChannelRealization::generate(c, pre.t1 + pre.t2, ts);
        if (opt.tamper)
            opt.tamper(real);
        RngStream rng(ts, Stream::Precoder);
        const RtPinBlock block = build_rtpin_block(c, n, users, 1, real, opt.audit, rng);
        std::vector<RankReport> trial_reports;
        for (size_t k = 0; k < users.size(); ++k) {
            const ComplexMatrix A = rtpin_decoding_stack(block, k);
            Residuals res = block.residuals;
            const Index expected_rows = static_cast<Index>((n - 1) * (n - 1)) * c.N * block.t2;
            res.emplace_back("dimension_gap", std::abs(static_cast<double>(A.rows() - expected_rows)));
            trial_reports.push_back(assess_rank(pos_label("phase1-rtpin user ", k), A, block.streams, std::move(res), seed,
                                                trial, opt.rank_tol, opt.residual_tol));
        }
        maybe_dump(opt, "phase1-rtpin", real, trial, trial_reports);
        out.insert(out.end(), trial_reports.begin(), trial_reports.end());
    }
    return out;
}

std::vector<RankReport> verify_phase_m(const SystemConfig& cfg, int m, int trials, std::uint64_t seed, const VerifyOptions& opt)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    const SymbolLedger L = ledger_phase_m(m, c);
    std::vector<int> scheduled(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        scheduled[static_cast<size_t>(i)] = i;

    std::vector<RankReport> out;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t ts = trial_seed(seed, trial);
        ChannelRealization real = ChannelRealization::generate(c, L.block_slots, ts);
        if (opt.tamper)
            opt.tamper(real);
        RngStream rng(ts, Stream::Precoder);
        const PhaseMBlock block = build_phase_m_block(c, m, scheduled, 0, 1, 1, real, opt.audit, rng);
        std::vector<RankReport> trial_reports;
        for (int k : block.scheduled) {
            const ComplexMatrix A = phase_m_decoding_stack(block, k);
            trial_reports.push_back(assess_rank("phase-m user " + std::to_string(k), A,
                                                block.leader_streams + block.partner_streams, block.residuals, seed, trial,
                                                opt.rank_tol, opt.residual_tol));
            const ComplexMatrix inner = phase_m_inner_matrix(block, k);
            trial_reports.push_back(assess_rank("phase-m inner user " + std::to_string(k), inner, block.leader_streams, {},
                                                seed, trial, opt.rank_tol, opt.residual_tol));
        }
        maybe_dump(opt, "phase-m", real, trial, trial_reports);
        out.insert(out.end(), trial_reports.begin(), trial_reports.end());
    }
    return out;
}

RtPinConditions check_appendix_c_conditions(const SystemConfig& cfg, int n, bool clamp)
{
    validate(cfg);
    if (n < 3 || n > cfg.K)
        throw std::invalid_argument("RT-PIN requires 3 <= n <= K");
    RtPinConditions out;
    out.effective_antennas = clamp ? effective_antennas_rtpin(cfg, n) : Rational(cfg.M);
    const Rational& Me = out.effective_antennas;
    const Rational ext = Rational::from_mpq(mpq_class(Me.denominator()));
    const Rational N(cfg.N);
    const Rational sq((n - 1) * (n - 1));
    const Rational t1 = ext * N * sq;
    const Rational t2 = ext * Me;
    out.t1 = static_cast<int>(t1.to_int64());
    out.t2 = static_cast<int>(t2.to_int64());
    out.equality_ok = sq * N * t2 == Me * t1;
    out.inequality_ok = Me * t1 <= (sq + Rational(1)) * (Rational(n - 1) * N - Rational(n - 2) * Me) * t1;
    return out;
}

VerifySummary summarize(std::string kind, const SystemConfig& cfg, int index, int trials, std::uint64_t seed,
                        const std::vector<RankReport>& reports)
{
    VerifySummary s;
    s.kind = std::move(kind);
    s.cfg = cfg;
    s.index = index;
    s.trials = trials;
    s.reports = reports.size();
    std::vector<double> ratios;
    std::set<int> failed_trials;
    for (const auto& r : reports) {
        if (r.pass)
            ++s.pass_count;
        else
            failed_trials.insert(r.trial);
        ratios.push_back(r.min_to_max_singular_ratio);
        for (const auto& [name, value] : r.residual_norms)
            if (name.rfind("dimension_gap", 0) != 0 && name.rfind("common_dim_gap", 0) != 0)
                s.max_residual = max_of(s.max_residual, value);
    }
    s.trial_pass_count = static_cast<size_t>(trials) - failed_trials.size();
    for (int t : failed_trials)
        s.failed.emplace_back(t, trial_seed(seed, t));
    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        s.min_singular_ratio_min = ratios.front();
        const size_t h = ratios.size() / 2;
        s.min_singular_ratio_median = ratios.size() % 2 ? ratios[h] : 0.5 * (ratios[h - 1] + ratios[h]);
    }
    return s;
}

} // namespace riadof
