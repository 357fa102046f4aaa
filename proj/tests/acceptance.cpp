// SPDX-License-Identifier: Apache-2.0
//
// One PASS/FAIL line per acceptance criterion; exit status 1 when any criterion fails.

#include "riadof/dof_calculus.hpp"
#include "riadof/end_to_end.hpp"
#include "riadof/phase_verify.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace riadof;

namespace {

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    // Records a failed check; the first few are listed in the detail line.
    void expect(bool cond, const std::string& what)
    {
        if (cond)
            return;
        if (failures++ < 3)
            detail << (ok ? "" : "; ") << "failed: " << what;
        ok = false;
    }

    int failures = 0;
};

struct Criterion {
    int id;
    double budget_s;
    std::function<void(Outcome&)> body;
};

// Audit shared by the runs of criteria 7 to 9 and read by criterion 10.
CsitAudit g_audit;
bool g_audit_exercised = false;

Rational R(long p, long q = 1) { return Rational(p, q); }

void exact_values(Outcome& o)
{
    o.expect(d_order_m_closed({3, 2, 3}, 2) == R(7, 3), "d_2(3,2,3) = 7/3");
    o.expect(d_order_m_recursive({3, 2, 3}, 2) == R(7, 3), "recursive d_2(3,2,3) = 7/3");
    o.expect(d1_mat(2, {3, 2, 3}) == R(21, 8), "d1_mat(2,3,2,3) = 21/8");
    o.expect(d1_rtpin(3, {3, 2, 3}) == R(504, 185), "d1_rtpin(3,3,2,3) = 504/185");
    o.expect(d1_best({3, 1, 3}).value == R(3, 2), "d_1(3,1,3) = 3/2");
    o.expect(d1_rtpin(3, {1, 1, 3}) == R(36, 31), "d1_rtpin(3,1,1,3) = 36/31");
    for (int M : {2, 3, 4, 5, 6}) {
        o.expect(d_order_1m({M, 2, 3}, 2) == R(6), "d_{1,2}(M,2,3) = 6");
        o.expect(d_order_m_closed({M, 2, 3}, 3) == R(2), "d_3(M,2,3) = 2");
    }
    o.detail << "d_2=7/3, 21/8, 504/185, 3/2, 36/31, d_{1,2}=6, d_3=2";
}

void closed_equals_recursion(Outcome& o)
{
    int cases = 0;
    for (int K = 2; K <= 8; ++K)
        for (int N = 1; N <= 4; ++N)
            for (int M = N; M <= K * N; ++M)
                for (int m = 2; m <= K; ++m) {
                    const SystemConfig cfg{M, N, K};
                    ++cases;
                    o.expect(d_order_m_closed(cfg, m) == d_order_m_recursive(cfg, m),
                             "(" + std::to_string(M) + "," + std::to_string(N) + "," + std::to_string(K) + ") m=" +
                                 std::to_string(m));
                }
    o.detail << (o.ok ? "" : "; ") << cases << " cases";
}

void asymptote(Outcome& o)
{
    const int K = 10000;
    const Rational limit(64, 15);
    const MisoResult d1 = d1_miso(K);
    const double gap = (limit - d1.value).to_double();
    const Rational a2 = R(1) - R(1) / d2_miso_closed(K);
    const double a2_gap = abs(a2 - R(3, 4)).to_double();
    o.expect(gap >= 0.0 && gap < 0.01, "|d_1(K,1,K) - 64/15| < 0.01 at K=10^4");
    o.expect(a2_gap < 0.005, "|A_2 - 3/4| < 0.005 at K=10^4");
    char buf[160];
    std::snprintf(buf, sizeof buf, "%sd_1=%s (n=%d), gap to 64/15 = %.5f; A_2=%s, gap to 3/4 = %.5f", o.ok ? "" : "; ",
                  to_decimal(d1.value).c_str(), d1.n, gap, to_decimal(a2).c_str(), a2_gap);
    o.detail << buf;
}

void scheduling(Outcome& o)
{
    std::ostringstream chosen;
    for (int K = 4; K <= 13; ++K) {
        const BestChoice b = d1_best({1, 1, K});
        chosen << (K > 4 ? "," : "") << b.choice.n;
        o.expect(b.choice.n == 4, "(1,1," + std::to_string(K) + ") n*=" + std::to_string(b.choice.n));
    }
    const Rational two = d1_mat(2, {3, 1, 3}), three = d1_mat(3, {3, 1, 3});
    o.expect(two == R(3, 2) && three == R(3, 2), "(3,1,3) n=2 and n=3 both 3/2");
    o.expect(d1_best({3, 1, 3}).choice == ScheduleChoice{2, Scheme::MatLike}, "(3,1,3) tie resolved to n=2");
    o.detail << (o.ok ? "" : "; ") << "n* for K=4..13: " << chosen.str() << "; (3,1,3): " << two << " vs " << three;
}

void homogeneity(Outcome& o)
{
    int cases = 0;
    for (int K = 2; K <= 8; ++K)
        for (int N = 1; N <= 4; ++N)
            for (int M = N; M <= K * N; ++M) {
                const SystemConfig cfg{M, N, K};
                const BestChoice base = d1_best(cfg);
                for (int c : {2, 3}) {
                    const SystemConfig big = scaled(cfg, c);
                    ++cases;
                    for (int m = 2; m <= K; ++m)
                        o.expect(d_order_m_closed(big, m) == R(c) * d_order_m_closed(cfg, m), "d_m scaling");
                    for (int n = 2; n <= K; ++n)
                        o.expect(d1_mat(n, big) == R(c) * d1_mat(n, cfg), "d1_mat scaling");
                    for (int n = 3; n <= K; ++n)
                        o.expect(d1_rtpin(n, big) == R(c) * d1_rtpin(n, cfg), "d1_rtpin scaling");
                    const BestChoice scaled_best = d1_best(big);
                    o.expect(scaled_best.value == R(c) * base.value, "d1_best scaling");
                    o.expect(scaled_best.choice == base.choice, "argmax invariance");
                }
            }
    o.detail << (o.ok ? "" : "; ") << cases << " scaled configurations";
}

void crossover(Outcome& o)
{
    int points = 0;
    for (int n = 3; n <= 6; ++n) {
        const Rational eps = epsilon(n);
        std::vector<std::pair<long, long>> ratios;
        for (long q = 1; q <= 12; ++q)
            for (long p = q; p <= n * q; ++p)
                ratios.emplace_back(p, q);
        ratios.emplace_back(eps.numerator().get_si(), eps.denominator().get_si());
        for (int K : {n, n + 1})
            for (const auto& [p, q] : ratios) {
                const SystemConfig cfg{static_cast<int>(p), static_cast<int>(q), K};
                const Rational rho(p, q);
                const int lhs = (d1_rtpin(n, cfg) - d1_mat(n - 1, cfg)).sign();
                const int rhs = (eps - rho).sign();
                ++points;
                o.expect(lhs == rhs, "n=" + std::to_string(n) + " K=" + std::to_string(K) + " M/N=" + rho.str());
            }
    }
    o.detail << (o.ok ? "" : "; ") << points << " grid points including every epsilon(n)";
}

void rank_suites(Outcome& o)
{
    struct Suite {
        const char* kind;
        SystemConfig cfg;
        int index;
    };
    std::vector<Suite> suites{{"phase1-mat", {3, 2, 3}, 2}};
    for (int n = 2; n <= 4; ++n)
        suites.push_back({"phase1-mat", {4, 2, 4}, n});
    for (int K = 2; K <= 5; ++K)
        for (int n = 2; n <= K; ++n)
            suites.push_back({"phase1-mat", {K, 1, K}, n});
    suites.push_back({"phase1-rtpin", {3, 2, 3}, 3});
    suites.push_back({"phase1-rtpin", {1, 1, 3}, 3});
    suites.push_back({"phase1-rtpin", {1, 1, 4}, 4});
    suites.push_back({"phase-m", {3, 2, 3}, 2});
    suites.push_back({"phase-m", {1, 1, 3}, 2});
    suites.push_back({"phase-m", {4, 2, 4}, 2});
    suites.push_back({"phase-m", {4, 2, 4}, 3});
    // M = N t: (4,2,3) and (2,1,3) with m = 2 leave the partner silent.
    suites.push_back({"phase-m", {4, 2, 3}, 2});
    suites.push_back({"phase-m", {2, 1, 3}, 2});

    VerifyOptions opt;
    opt.audit = &g_audit;
    size_t reports = 0;
    double worst_ratio = 1.0, worst_residual = 0.0;
    for (const Suite& s : suites) {
        const std::string kind = s.kind;
        const std::vector<RankReport> r = kind == "phase1-mat"     ? verify_phase1_mat(s.cfg, s.index, 100, 1, opt)
                                          : kind == "phase1-rtpin" ? verify_phase1_rtpin(s.cfg, s.index, 100, 1, opt)
                                                                   : verify_phase_m(s.cfg, s.index, 100, 1, opt);
        const VerifySummary sum = summarize(kind, s.cfg, s.index, 100, 1, r);
        reports += sum.reports;
        worst_ratio = std::min(worst_ratio, sum.min_singular_ratio_min);
        worst_residual = std::max(worst_residual, sum.max_residual);
        o.expect(sum.all_pass() && sum.trial_pass_count == 100,
                 kind + " (" + std::to_string(s.cfg.M) + "," + std::to_string(s.cfg.N) + "," + std::to_string(s.cfg.K) +
                     ") index " + std::to_string(s.index));
    }
    o.expect(worst_residual < 1e-10, "annihilator residuals < 1e-10");
    g_audit_exercised = true;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%zu suites x 100 seeds, %zu reports, min singular ratio %.2e, max residual %.2e",
                  o.ok ? "" : "; ", suites.size(), reports, worst_ratio, worst_residual);
    o.detail << buf;
}

void end_to_end_313(Outcome& o)
{
    RunOptions opt;
    opt.audit = &g_audit;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const DecodingReport r = run_313(seed, opt);
        int recovered = 0;
        for (int v : r.recovered)
            recovered += v;
        worst = std::max(worst, r.max_relative_error);
        const std::string s = "seed " + std::to_string(seed);
        o.expect(r.pass, s + " pass");
        o.expect(recovered == 18 && r.private_symbols == 18, s + " 18/18 recovered");
        o.expect(r.max_relative_error < 1e-8, s + " error < 1e-8");
        o.expect(r.total_slots == 12, s + " 12 slots");
        o.expect(r.ratio == R(3, 2), s + " ratio 3/2");
        o.expect(ledger_audit(r, scheme_plan("313")).ok, s + " ledger audit");
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s20 seeds, 18/18 each, 12 slots, ratio 3/2, max error %.1e", o.ok ? "" : "; ", worst);
    o.detail << buf;
}

void end_to_end_323(Outcome& o)
{
    RunOptions opt;
    opt.audit = &g_audit;
    const ChainPlan plan = scheme_plan("323");
    o.expect(plan.expected[0].generated == 7 * 36 && plan.expected[1].sent == 6 * 42 && 7 * 36 == 6 * 42,
             "planned order-2 conservation");
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const DecodingReport r = run_323(seed, opt);
        int recovered = 0;
        for (int v : r.recovered)
            recovered += v;
        worst = std::max(worst, r.max_relative_error);
        const std::string s = "seed " + std::to_string(seed);
        o.expect(r.pass, s + " pass");
        o.expect(recovered == 504 && r.private_symbols == 504, s + " 504/504 recovered");
        o.expect(r.total_slots == 185, s + " 185 slots");
        o.expect(r.max_relative_error < 1e-6, s + " error < 1e-6");
        o.expect(r.ratio == R(504, 185), s + " ratio 504/185");
        o.expect(r.phases.size() == 4 && r.phases[0].generated == 252 && r.phases[1].sent == 252,
                 s + " executed order-2 conservation");
        o.expect(ledger_audit(r, plan).ok, s + " ledger audit");
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s5 seeds, 504/504 each, 185 slots, ratio 504/185, 7*36 = 6*42 = 252, max error %.1e",
                  o.ok ? "" : "; ", worst);
    o.detail << buf;
}

void csit_causality(Outcome& o)
{
    o.expect(g_audit_exercised, "criteria 7-9 ran instrumented");
    o.expect(g_audit.granted() > 0, "channel reads recorded");
    o.expect(g_audit.violations() == 0, "no same-slot or future reads");
    o.detail << (o.ok ? "" : "; ") << g_audit.granted() << " delayed reads, " << g_audit.violations() << " violations";
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, 1.0, exact_values},       {2, 5.0, closed_equals_recursion}, {3, 10.0, asymptote},
        {4, 1.0, scheduling},         {5, 5.0, homogeneity},             {6, 5.0, crossover},
        {7, 60.0, rank_suites},       {8, 5.0, end_to_end_313},          {9, 60.0, end_to_end_323},
        {10, 0.0, csit_causality},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.body(o);
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail << "; exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0.0 && secs > c.budget_s)
            o.expect(false, "time budget " + std::to_string(static_cast<int>(c.budget_s)) + " s");
        std::printf("%s criterion %d: %s (%.2f s)\n", o.ok ? "PASS" : "FAIL", c.id, o.detail.str().c_str(), secs);
        if (!o.ok)
            ++failed;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
