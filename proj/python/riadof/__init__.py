# SPDX-License-Identifier: Apache-2.0
"""Sum-DoF calculators and scheme verifiers for the MIMO interference channel with delayed CSIT."""

from ._core import (
    ConfigurationError,
    LedgerMismatch,
    chain_plan,
    check_appendix_c_conditions,
    d1_best,
    d1_candidates,
    d1_mat,
    d1_miso,
    d1_rtpin,
    d2_miso,
    d_order_1m,
    d_order_m,
    epsilon,
    ledger,
    ratio_r,
    simulate,
    verify,
)

__all__ = [
    "ConfigurationError",
    "LedgerMismatch",
    "chain_plan",
    "check_appendix_c_conditions",
    "d1_best",
    "d1_candidates",
    "d1_mat",
    "d1_miso",
    "d1_rtpin",
    "d2_miso",
    "d_order_1m",
    "d_order_m",
    "epsilon",
    "ledger",
    "ratio_r",
    "simulate",
    "verify",
]
