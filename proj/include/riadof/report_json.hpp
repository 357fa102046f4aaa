// SPDX-License-Identifier: Apache-2.0
//
// JSON views of the calculators' and verifiers' results. Fractions carry both the exact "p/q"
// string and a 12-significant-digit decimal.

#pragma once

#include "riadof/end_to_end.hpp"
#include "riadof/phase_verify.hpp"

#include <json.hpp>

#include <span>

namespace riadof {

nlohmann::json rational_json(const Rational& r);
nlohmann::json config_json(const SystemConfig& cfg);
nlohmann::json ledger_json(const SymbolLedger& L);
nlohmann::json rank_report_json(const RankReport& r);

// Non-empty reports are listed in full.
nlohmann::json verify_json(const VerifySummary& s, std::span<const RankReport> reports = {});

// include_detail adds the slot plans and every decoding step.
nlohmann::json decoding_json(const DecodingReport& r, bool include_detail = false);

nlohmann::json chain_plan_json(const ChainPlan& p);

} // namespace riadof
