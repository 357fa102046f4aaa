// SPDX-License-Identifier: Apache-2.0
//
// riadof: sum-DoF calculators, rank verifiers and end-to-end simulations from the command line.
// Exit status: 0 success, 1 verification or simulation failure, 2 usage error.

#include "riadof/dof_calculus.hpp"
#include "riadof/end_to_end.hpp"
#include "riadof/phase_verify.hpp"
#include "riadof/report_json.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace riadof;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;
constexpr int kRhoDenominator = 24;
constexpr const char* kSeedVariable = "RIADOF_SEED";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t default_seed()
{
    const char* env = std::getenv(kSeedVariable);
    if (!env || !*env)
        return 1;
    try {
        size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string(kSeedVariable) + " must be a non-negative integer");
    }
}

std::string fraction(const Rational& r) { return r.str() + " (" + to_decimal(r) + ")"; }

// Nearest multiple of 1/24; ties round up.
Rational snap_rho(double rho)
{
    const auto k = static_cast<long>(std::floor(rho * kRhoDenominator + 0.5));
    return Rational(k, kRhoDenominator);
}

Rational parse_rho(const std::string& text)
{
    if (text.find('/') != std::string::npos)
        return Rational::parse(text);
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    double v = 0.0;
    if (!(in >> v) || !in.eof())
        throw UsageError("not a number: '" + text + "'");
    return snap_rho(v);
}

// ---------------------------------------------------------------------------------------------

struct DofArgs {
    int M = 0, N = 0, K = 0;
    std::optional<int> n;
    std::optional<std::string> scheme;
    std::string format = "text";
};

int cmd_dof(const DofArgs& a, std::ostream& out)
{
    const SystemConfig cfg{a.M, a.N, a.K};
    const ClampedConfig cc = clamp_antennas(cfg);
    Rational value;
    ScheduleChoice choice;
    if (a.n || a.scheme) {
        choice.scheme = a.scheme ? parse_scheme(*a.scheme) : Scheme::MatLike;
        choice.n = a.n ? *a.n : (choice.scheme == Scheme::RtPin ? 3 : 2);
        validate(choice, cc.cfg);
        value = d1(choice, cc.cfg);
    } else {
        const BestChoice best = d1_best(cc.cfg);
        value = best.value;
        choice = best.choice;
    }
    const Rational ratio(cc.cfg.M, cc.cfg.N);
    if (a.format == "json") {
        nlohmann::json j{{"config", config_json(cfg)},
                         {"clamped", cc.clamped},
                         {"d1", rational_json(value)},
                         {"scheme", to_string(choice.scheme)},
                         {"n", choice.n},
                         {"M_over_N", rational_json(ratio)}};
        if (choice.n >= 3)
            j["epsilon"] = rational_json(epsilon(choice.n));
        out << j.dump(2) << '\n';
        return kOk;
    }
    out << "d1 = " << fraction(value) << '\n';
    out << "scheme = " << to_string(choice.scheme) << ", n = " << choice.n << '\n';
    if (cc.clamped)
        out << "M clamped to K*N = " << cc.cfg.M << '\n';
    if (choice.n >= 3) {
        const Rational eps = epsilon(choice.n);
        out << "epsilon(" << choice.n << ") = " << fraction(eps) << ", M/N = " << ratio.str()
            << (ratio < eps ? " < epsilon" : ratio == eps ? " = epsilon" : " > epsilon") << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------------------------------------

struct CurveArgs {
    int K = 0;
    std::string rho_min = "1";
    std::string rho_max;
    int steps = 97;
    std::string out;
};

int cmd_curve(const CurveArgs& a, std::ostream& out)
{
    if (a.K < 2)
        throw UsageError("K must be at least 2");
    const Rational lo = parse_rho(a.rho_min);
    const Rational hi = a.rho_max.empty() ? Rational(a.K) : parse_rho(a.rho_max);
    if (lo < Rational(1) || hi < lo || Rational(a.K) < hi)
        throw UsageError("need 1 <= rho_min <= rho_max <= K");
    if (a.steps < 1 || (a.steps == 1 && !(lo == hi)))
        throw UsageError("steps must be at least 2 for a range");

    std::ostringstream csv;
    csv.imbue(std::locale::classic());
    csv << "rho,d1_over_N,scheme,n_star\n";
    std::optional<Rational> last;
    for (int i = 0; i < a.steps; ++i) {
        const Rational raw = a.steps == 1 ? lo : lo + (hi - lo) * Rational(i, a.steps - 1);
        Rational rho = snap_rho(raw.to_double());
        rho = max(lo, min(hi, rho));
        if (last && *last == rho)
            continue;
        last = rho;
        // d1 is homogeneous in (M, N): evaluate at (p, q) and divide by q.
        const int p = static_cast<int>(rho.numerator().get_si());
        const int q = static_cast<int>(rho.denominator().get_si());
        const BestChoice best = d1_best({p, q, a.K});
        csv << to_decimal(rho) << ',' << to_decimal(best.value / Rational(q)) << ',' << to_string(best.choice.scheme) << ','
            << best.choice.n << '\n';
    }
    if (a.out.empty()) {
        out << csv.str();
    } else {
        std::ofstream f(a.out, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write " + a.out);
        f << csv.str();
    }
    return kOk;
}

// ---------------------------------------------------------------------------------------------

struct MisoArgs {
    int K_max = 0;
    int stride = 1;
    std::string format = "text";
};

int cmd_miso(const MisoArgs& a, std::ostream& out)
{
    if (a.K_max < 2)
        throw UsageError("K_max must be at least 2");
    if (a.stride < 1)
        throw UsageError("stride must be positive");
    const Rational limit(64, 15);
    std::vector<int> Ks;
    for (int K = 2; K <= a.K_max; K += a.stride)
        Ks.push_back(K);
    if (Ks.back() != a.K_max)
        Ks.push_back(a.K_max);

    nlohmann::json rows = nlohmann::json::array();
    std::ostringstream text;
    text << "K,d1,d1_decimal,n,gap_to_64_15\n";
    bool monotone = true;
    std::optional<Rational> prev;
    for (int K : Ks) {
        const MisoResult r = d1_miso(K);
        const Rational gap = limit - r.value;
        if (prev && r.value < *prev)
            monotone = false;
        prev = r.value;
        text << K << ',' << r.value.str() << ',' << to_decimal(r.value) << ',' << r.n << ',' << to_decimal(gap) << '\n';
        rows.push_back({{"K", K}, {"d1", rational_json(r.value)}, {"n", r.n}, {"gap_to_64_15", rational_json(gap)}});
    }
    if (a.format == "json") {
        out << nlohmann::json{{"rows", rows}, {"monotone_nondecreasing", monotone}}.dump(2) << '\n';
    } else {
        out << text.str();
        out << "# monotone nondecreasing: " << (monotone ? "yes" : "no") << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------------------------------------

struct VerifyArgs {
    std::string kind;
    int M = 0, N = 0, K = 0;
    std::optional<int> n;
    std::optional<int> m;
    int trials = 100;
    std::optional<std::uint64_t> seed;
    std::string dump_dir;
    bool reports = false;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out)
{
    const SystemConfig cfg{a.M, a.N, a.K};
    validate(cfg);
    if (a.trials < 1)
        throw UsageError("trials must be positive");
    const std::uint64_t seed = a.seed ? *a.seed : default_seed();
    CsitAudit audit;
    VerifyOptions opt;
    opt.audit = &audit;
    if (!a.dump_dir.empty())
        opt.dump_dir = a.dump_dir;
    std::vector<RankReport> reports;
    int index = 0;
    if (a.kind == "phase1-mat" || a.kind == "phase1-rtpin") {
        if (!a.n)
            throw UsageError(a.kind + " requires --n");
        index = *a.n;
        validate(ScheduleChoice{index, a.kind == "phase1-mat" ? Scheme::MatLike : Scheme::RtPin}, cfg);
        reports = a.kind == "phase1-mat" ? verify_phase1_mat(cfg, index, a.trials, seed, opt)
                                         : verify_phase1_rtpin(cfg, index, a.trials, seed, opt);
    } else if (a.kind == "phase-m") {
        if (!a.m)
            throw UsageError("phase-m requires --m");
        index = *a.m;
        if (index < 2 || index > cfg.K - 1)
            throw UsageError("phase-m requires 2 <= m <= K-1");
        reports = verify_phase_m(cfg, index, a.trials, seed, opt);
    } else {
        throw UsageError("unknown kind '" + a.kind + "' (expected phase1-mat, phase1-rtpin or phase-m)");
    }
    const VerifySummary s = summarize(a.kind, cfg, index, a.trials, seed, reports);
    nlohmann::json j = verify_json(s, a.reports ? std::span<const RankReport>(reports) : std::span<const RankReport>());
    j["seed"] = seed;
    j["csit_granted"] = audit.granted();
    j["csit_violations"] = audit.violations();
    out << j.dump(2) << '\n';
    return s.all_pass() && audit.violations() == 0 ? kOk : kFailed;
}

// ---------------------------------------------------------------------------------------------

struct SimulateArgs {
    std::string scheme;
    std::optional<std::uint64_t> seed;
    bool detail = false;
    std::string dump_dir;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out)
{
    const ChainPlan plan = scheme_plan(a.scheme);  // rejects unknown names before any work
    const std::uint64_t seed = a.seed ? *a.seed : default_seed();
    CsitAudit audit;
    RunOptions opt;
    opt.audit = &audit;
    if (!a.dump_dir.empty())
        opt.dump_dir = a.dump_dir;
    const DecodingReport r = a.scheme == "313" ? run_313(seed, opt) : a.scheme == "313-pair" ? run_313_pair(seed, opt) : run_323(seed, opt);
    const AuditResult audit_result = ledger_audit(r, plan);
    nlohmann::json j = decoding_json(r, a.detail);
    j["plan"] = chain_plan_json(plan);
    j["ledger_audit"] = {{"ok", audit_result.ok}, {"mismatches", audit_result.mismatches}};
    out << j.dump(2) << '\n';
    return r.pass && audit_result.ok ? kOk : kFailed;
}

// ---------------------------------------------------------------------------------------------

struct OptimalArgs {
    int M = 0, N = 0, K = 0;
};

int cmd_optimal_n(const OptimalArgs& a, std::ostream& out)
{
    const BestChoice best = d1_best({a.M, a.N, a.K});
    out << "n* = " << best.choice.n << " (" << to_string(best.choice.scheme) << "), d1 = " << fraction(best.value) << '\n';
    for (const auto& [choice, value] : d1_candidates(clamp_antennas({a.M, a.N, a.K}).cfg))
        out << "  " << to_string(choice.scheme) << " n=" << choice.n << ": " << fraction(value) << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    std::cout.imbue(std::locale::classic());
    CLI::App app{"Sum-DoF calculators and scheme verifiers for the K-user MIMO interference channel with delayed CSIT"};
    app.require_subcommand(1);

    DofArgs dof;
    auto* c_dof = app.add_subcommand("dof", "Best achievable sum DoF (or one scheme) for (M, N, K)");
    c_dof->add_option("M", dof.M, "transmit antennas")->required();
    c_dof->add_option("N", dof.N, "receive antennas")->required();
    c_dof->add_option("K", dof.K, "transmitter/receiver pairs")->required();
    c_dof->add_option("--n", dof.n, "co-scheduled pairs in phase 1");
    c_dof->add_option("--scheme", dof.scheme, "mat or rtpin");
    c_dof->add_option("--format", dof.format)->check(CLI::IsMember({"text", "json"}));

    CurveArgs curve;
    auto* c_curve = app.add_subcommand("curve", "CSV of d1/N against rho = M/N (rho on the 1/24 grid)");
    c_curve->add_option("K", curve.K)->required();
    c_curve->add_option("--rho-min", curve.rho_min, "decimal or p/q, default 1");
    c_curve->add_option("--rho-max", curve.rho_max, "decimal or p/q, default K");
    c_curve->add_option("--steps", curve.steps, "grid points before snapping");
    c_curve->add_option("--out", curve.out, "output file; stdout when absent");

    MisoArgs miso;
    auto* c_miso = app.add_subcommand("miso", "d1 of the (K,1,K) channel for K = 2..K_max");
    c_miso->add_option("K_max", miso.K_max)->required();
    c_miso->add_option("--stride", miso.stride, "step between listed K; K_max is always listed");
    c_miso->add_option("--format", miso.format)->check(CLI::IsMember({"text", "json"}));

    VerifyArgs ver;
    auto* c_ver = app.add_subcommand("verify", "Monte-Carlo rank verification of one phase");
    c_ver->add_option("kind", ver.kind, "phase1-mat, phase1-rtpin or phase-m")->required();
    c_ver->add_option("--M", ver.M)->required();
    c_ver->add_option("--N", ver.N)->required();
    c_ver->add_option("--K", ver.K)->required();
    c_ver->add_option("--n", ver.n);
    c_ver->add_option("--m", ver.m);
    c_ver->add_option("--trials", ver.trials);
    c_ver->add_option("--seed", ver.seed, std::string("default from ") + kSeedVariable + ", else 1");
    c_ver->add_option("--dump-dir", ver.dump_dir, "write channels of failing trials here");
    c_ver->add_flag("--reports", ver.reports, "list every rank report");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Noiseless end-to-end run: 313, 313-pair or 323");
    c_sim->add_option("case", sim.scheme)->required();
    c_sim->add_option("--seed", sim.seed, std::string("default from ") + kSeedVariable + ", else 1");
    c_sim->add_flag("--detail", sim.detail, "include slot plans and decoding steps");
    c_sim->add_option("--dump-dir", sim.dump_dir, "write the channels here on failure");

    OptimalArgs opt;
    auto* c_opt = app.add_subcommand("optimal-n", "Optimal co-scheduled count and every candidate");
    c_opt->add_option("M", opt.M)->required();
    c_opt->add_option("N", opt.N)->required();
    c_opt->add_option("K", opt.K)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (c_dof->parsed())
            return cmd_dof(dof, std::cout);
        if (c_curve->parsed())
            return cmd_curve(curve, std::cout);
        if (c_miso->parsed())
            return cmd_miso(miso, std::cout);
        if (c_ver->parsed())
            return cmd_verify(ver, std::cout);
        if (c_sim->parsed())
            return cmd_simulate(sim, std::cout);
        if (c_opt->parsed())
            return cmd_optimal_n(opt, std::cout);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailed;
    }
    return kUsage;
}
