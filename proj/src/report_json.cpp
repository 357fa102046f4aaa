// SPDX-License-Identifier: Apache-2.0

#include "riadof/report_json.hpp"

namespace riadof {

using nlohmann::json;

json rational_json(const Rational& r) { return {{"exact", r.str()}, {"decimal", to_decimal(r)}}; }

json config_json(const SystemConfig& cfg) { return {{"M", cfg.M}, {"N", cfg.N}, {"K", cfg.K}}; }

namespace {

json phase_entry_json(const PhaseEntry& e)
{
    return {{"m", e.m}, {"sent", e.sent.str()}, {"slots", e.slots.str()}, {"next_order", e.next_order.str()},
            {"order_1m", e.order_1m.str()}};
}

json phase_count_json(const PhaseCount& p)
{
    return {{"phase", p.phase}, {"sent", p.sent}, {"slots", p.slots}, {"generated", p.generated},
            {"generated_1m", p.generated_1m}};
}

} // namespace

json ledger_json(const SymbolLedger& L)
{
    json j{{"index", L.index},
           {"multiplicity", L.multiplicity.str()},
           {"effective_antennas", rational_json(L.effective_antennas)},
           {"single_slot", L.single_slot},
           {"block_slots", L.block_slots},
           {"counts", phase_entry_json(L.counts)},
           {"per_block", phase_entry_json(L.per_block())}};
    switch (L.kind) {
    case LedgerKind::Phase1Mat: j["kind"] = "phase1-mat"; break;
    case LedgerKind::Phase1RtPin:
        j["kind"] = "phase1-rtpin";
        j["t1"] = L.t1;
        j["t2"] = L.t2;
        break;
    case LedgerKind::PhaseM:
        j["kind"] = "phase-m";
        j["t"] = L.t;
        j["leader_streams"] = L.leader_streams.str();
        j["partner_streams"] = L.partner_streams.str();
        break;
    }
    return j;
}

json rank_report_json(const RankReport& r)
{
    json res = json::object();
    for (const auto& [name, value] : r.residual_norms)
        res[name] = value;
    return {{"label", r.label},
            {"trial", r.trial},
            {"claimed_rank", r.claimed_rank},
            {"observed_rank", r.observed_rank},
            {"min_to_max_singular_ratio", r.min_to_max_singular_ratio},
            {"residuals", res},
            {"pass", r.pass}};
}

json verify_json(const VerifySummary& s, std::span<const RankReport> reports)
{
    json failed = json::array();
    for (const auto& [trial, seed] : s.failed)
        failed.push_back({{"trial", trial}, {"seed", seed}});
    json j{{"kind", s.kind},
           {"config", config_json(s.cfg)},
           {"n_or_m", s.index},
           {"trials", s.trials},
           {"reports", s.reports},
           {"pass_count", s.pass_count},
           {"trial_pass_count", s.trial_pass_count},
           {"min_singular_ratio_min", s.min_singular_ratio_min},
           {"min_singular_ratio_median", s.min_singular_ratio_median},
           {"max_residual", s.max_residual},
           {"failed_seeds", failed},
           {"pass", s.all_pass()}};
    if (!reports.empty()) {
        json list = json::array();
        for (const auto& r : reports)
            list.push_back(rank_report_json(r));
        j["rank_reports"] = list;
    }
    return j;
}

json decoding_json(const DecodingReport& r, bool include_detail)
{
    json phases = json::array();
    for (const auto& p : r.phases)
        phases.push_back(phase_count_json(p));
    json j{{"scheme", r.scheme},
           {"config", config_json(r.cfg)},
           {"seed", r.seed},
           {"total_slots", r.total_slots},
           {"private_symbols", r.private_symbols},
           {"intended", r.intended},
           {"recovered", r.recovered},
           {"user_relative_error", r.user_error},
           {"max_relative_error", r.max_relative_error},
           {"error_threshold", r.error_threshold},
           {"ratio", rational_json(r.ratio)},
           {"max_antennas_used", r.max_antennas_used},
           {"combiner_min_singular_ratio", r.combiner_min_singular_ratio},
           {"order_ok", r.order_ok},
           {"causal_ok", r.causal_ok},
           {"csit_granted", r.csit_granted},
           {"csit_violations", r.csit_violations},
           {"phases", phases},
           {"failures", r.failures},
           {"pass", r.pass}};
    if (include_detail) {
        json slots = json::array();
        for (const auto& s : r.slots) {
            json em = json::array();
            for (const auto& e : s.emissions)
                em.push_back({{"tx", e.tx}, {"symbols", e.symbols}, {"antennas", e.antennas}, {"csit_through", e.csit_through}});
            slots.push_back({{"slot", s.slot}, {"phase", s.phase}, {"emissions", em}});
        }
        json steps = json::array();
        for (const auto& s : r.steps)
            steps.push_back({{"user", s.user},
                             {"label", s.label},
                             {"order", s.order},
                             {"symbols", s.symbols},
                             {"sources", s.sources},
                             {"prerequisites_known", s.prerequisites_known},
                             {"ok", s.ok},
                             {"residual", s.residual}});
        j["slots"] = slots;
        j["steps"] = steps;
    }
    return j;
}

json chain_plan_json(const ChainPlan& p)
{
    json expected = json::array();
    for (const auto& e : p.expected)
        expected.push_back(phase_count_json(e));
    return {{"config", config_json(p.cfg)},
            {"n", p.choice.n},
            {"scheme", to_string(p.choice.scheme)},
            {"phase1_repeats", p.phase1_repeats},
            {"phase2_repeats", p.phase2_repeats},
            {"phase1", ledger_json(p.phase1)},
            {"phase2", ledger_json(p.phase2)},
            {"d3", rational_json(p.d3)},
            {"d12", rational_json(p.d12)},
            {"expected", expected},
            {"total_slots", p.total_slots},
            {"private_symbols", p.private_symbols},
            {"ratio", rational_json(p.ratio)}};
}

} // namespace riadof
