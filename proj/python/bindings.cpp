// SPDX-License-Identifier: Apache-2.0
//
// Python surface: exact values come back as fractions.Fraction, reports as plain dicts.

#include "riadof/dof_calculus.hpp"
#include "riadof/end_to_end.hpp"
#include "riadof/phase_verify.hpp"
#include "riadof/report_json.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>

namespace py = pybind11;
using namespace riadof;

namespace {

py::object fraction(const Rational& r)
{
    return py::module_::import("fractions").attr("Fraction")(r.str());
}

// nlohmann::json to Python objects through the json module; keeps the key layout of the CLI.
py::object to_python(const nlohmann::json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

SystemConfig config(int M, int N, int K)
{
    const SystemConfig cfg{M, N, K};
    validate(cfg);
    return cfg;
}

py::dict choice_dict(const Rational& value, const ScheduleChoice& c)
{
    py::dict d;
    d["value"] = fraction(value);
    d["scheme"] = to_string(c.scheme);
    d["n"] = c.n;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Sum-DoF calculators and scheme verifiers for the MIMO interference channel with delayed CSIT";

    py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception<LedgerMismatch>(m, "LedgerMismatch", PyExc_RuntimeError);

    m.def(
        "d_order_m",
        [](int M, int N, int K, int order, const std::string& method) {
            const SystemConfig cfg = config(M, N, K);
            if (method == "closed")
                return fraction(d_order_m_closed(cfg, order));
            if (method == "recursive")
                return fraction(d_order_m_recursive(cfg, order));
            throw std::invalid_argument("method must be 'closed' or 'recursive'");
        },
        py::arg("M"), py::arg("N"), py::arg("K"), py::arg("m"), py::arg("method") = "closed",
        "DoF of delivering order-m symbols.");
    m.def(
        "d_order_1m", [](int M, int N, int K, int order) { return fraction(d_order_1m(config(M, N, K), order)); },
        py::arg("M"), py::arg("N"), py::arg("K"), py::arg("m"));
    m.def(
        "d2_miso", [](int K) { return fraction(d2_miso_closed(K)); }, py::arg("K"));
    m.def(
        "d1_miso",
        [](int K) {
            const MisoResult r = d1_miso(K);
            return py::make_tuple(fraction(r.value), r.n);
        },
        py::arg("K"), "(sum DoF, co-scheduled count) of the (K,1,K) channel.");
    m.def(
        "d1_mat", [](int n, int M, int N, int K) { return fraction(d1_mat(n, config(M, N, K))); }, py::arg("n"),
        py::arg("M"), py::arg("N"), py::arg("K"));
    m.def(
        "d1_rtpin", [](int n, int M, int N, int K) { return fraction(d1_rtpin(n, config(M, N, K))); }, py::arg("n"),
        py::arg("M"), py::arg("N"), py::arg("K"));
    m.def(
        "d1_best",
        [](int M, int N, int K) {
            const BestChoice b = d1_best(config(M, N, K));
            py::dict d = choice_dict(b.value, b.choice);
            d["clamped"] = b.clamped;
            return d;
        },
        py::arg("M"), py::arg("N"), py::arg("K"), "Best phase-1 schedule: dict with value, scheme, n, clamped.");
    m.def(
        "d1_candidates",
        [](int M, int N, int K) {
            py::list out;
            for (const auto& [c, v] : d1_candidates(clamp_antennas({M, N, K}).cfg))
                out.append(choice_dict(v, c));
            return out;
        },
        py::arg("M"), py::arg("N"), py::arg("K"));
    m.def(
        "epsilon", [](int n) { return fraction(epsilon(n)); }, py::arg("n"));
    m.def(
        "ratio_r",
        [](const std::string& scheme, int n, int M, int N, int K) {
            return fraction(ratio_r({n, parse_scheme(scheme)}, config(M, N, K)));
        },
        py::arg("scheme"), py::arg("n"), py::arg("M"), py::arg("N"), py::arg("K"));
    m.def(
        "ledger",
        [](const std::string& kind, int index, int M, int N, int K) {
            const SystemConfig cfg = config(M, N, K);
            if (kind == "phase1-mat")
                return to_python(ledger_json(ledger_phase1_mat(index, cfg)));
            if (kind == "phase1-rtpin")
                return to_python(ledger_json(ledger_phase1_rtpin(index, cfg)));
            if (kind == "phase-m")
                return to_python(ledger_json(ledger_phase_m(index, cfg)));
            throw std::invalid_argument("kind must be phase1-mat, phase1-rtpin or phase-m");
        },
        py::arg("kind"), py::arg("index"), py::arg("M"), py::arg("N"), py::arg("K"));
    m.def(
        "check_appendix_c_conditions",
        [](int M, int N, int K, int n, bool clamp) {
            const RtPinConditions c = check_appendix_c_conditions(config(M, N, K), n, clamp);
            py::dict d;
            d["equality_ok"] = c.equality_ok;
            d["inequality_ok"] = c.inequality_ok;
            d["t1"] = c.t1;
            d["t2"] = c.t2;
            d["effective_antennas"] = fraction(c.effective_antennas);
            return d;
        },
        py::arg("M"), py::arg("N"), py::arg("K"), py::arg("n"), py::arg("clamp") = true);
    m.def(
        "verify",
        [](const std::string& kind, int M, int N, int K, int index, int trials, std::uint64_t seed) {
            const SystemConfig cfg = config(M, N, K);
            CsitAudit audit;
            VerifyOptions opt;
            opt.audit = &audit;
            std::vector<RankReport> reports;
            {
                py::gil_scoped_release release;
                if (kind == "phase1-mat")
                    reports = verify_phase1_mat(cfg, index, trials, seed, opt);
                else if (kind == "phase1-rtpin")
                    reports = verify_phase1_rtpin(cfg, index, trials, seed, opt);
                else if (kind == "phase-m")
                    reports = verify_phase_m(cfg, index, trials, seed, opt);
                else
                    throw std::invalid_argument("kind must be phase1-mat, phase1-rtpin or phase-m");
            }
            nlohmann::json j = verify_json(summarize(kind, cfg, index, trials, seed, reports));
            j["csit_granted"] = audit.granted();
            j["csit_violations"] = audit.violations();
            return to_python(j);
        },
        py::arg("kind"), py::arg("M"), py::arg("N"), py::arg("K"), py::arg("index"), py::arg("trials") = 100,
        py::arg("seed") = 1, "Monte-Carlo rank verification; index is n for phase 1 and m for phase m.");
    m.def(
        "simulate",
        [](const std::string& scheme, std::uint64_t seed, bool detail) {
            const ChainPlan plan = scheme_plan(scheme);
            CsitAudit audit;
            RunOptions opt;
            opt.audit = &audit;
            DecodingReport r;
            {
                py::gil_scoped_release release;
                r = scheme == "313" ? run_313(seed, opt) : scheme == "313-pair" ? run_313_pair(seed, opt) : run_323(seed, opt);
            }
            nlohmann::json j = decoding_json(r, detail);
            j["ledger_audit"] = ledger_audit(r, plan).ok;
            return to_python(j);
        },
        py::arg("scheme"), py::arg("seed") = 1, py::arg("detail") = false,
        "Noiseless end-to-end run of '313', '313-pair' or '323'.");
    m.def(
        "chain_plan", [](const std::string& scheme) { return to_python(chain_plan_json(scheme_plan(scheme))); },
        py::arg("scheme"));
}
