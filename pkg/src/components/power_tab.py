"""
Power breakdown tab component for the RIS green network app.
"""

from typing import Any, Dict

import pandas as pd
import streamlit as st

from src.errors import InfeasibleError, NumericalLimitError
from src.model.monte_carlo import draw_realization, trial_seed
from src.model.orchestrate import AlgorithmOptions, run_method
from src.utils.conversion_utils import format_power, mw_to_dbm
from src.utils.parameters import EXHAUSTIVE_AUTO_DISABLE_RIS, METHODS
from src.utils.scenario_loader import load_config_dict

METHOD_LABELS = {
    "proposed": "Proposed (RIS on/off)",
    "all_active": "All RISs active",
    "exhaustive": "Exhaustive search",
}


@st.cache_data(show_spinner=False)
def solve_scenario(scenario: Dict[str, Any], algorithm: Dict[str, Any], seed: int) -> Dict[str, Any]:
    """
    Run every method on one channel realization.

    Args:
        scenario: Scenario object from the sidebar
        algorithm: AlgorithmOptions keyword arguments
        seed: Master seed

    Returns:
        dict: "breakdown" DataFrame (one row per method), "trace" DataFrame of
        the proposed method, "initial_power_mW" and "warnings"
    """
    config, _ = load_config_dict(scenario)
    config, channels, algorithm_seed = draw_realization(config, trial_seed(seed, 0))
    options = AlgorithmOptions(**algorithm)

    rows = []
    warnings = []
    trace = None
    for method in METHODS:
        if method == "exhaustive" and config.L > EXHAUSTIVE_AUTO_DISABLE_RIS:
            warnings.append(f"Exhaustive search skipped for L={config.L}")
            continue
        row = {"Method": METHOD_LABELS[method]}
        try:
            solution, extras = run_method(method, channels, config, options, algorithm_seed)
        except (InfeasibleError, NumericalLimitError) as exc:
            warnings.append(f"{METHOD_LABELS[method]}: {exc}")
            row["Status"] = "infeasible" if isinstance(exc, InfeasibleError) else "numerical failure"
            rows.append(row)
            continue
        if method == "proposed":
            trace = extras["trace"]
        row.update({
            "Status": solution.status,
            "Active RISs": ", ".join(str(l) for l in solution.active.indices) or "none",
            "Transmit (mW)": solution.transmit_power_mW,
            "RIS Circuit (mW)": solution.ris_circuit_power_mW,
            "Network (mW)": solution.network_power_mW,
            "Network (dBm)": mw_to_dbm(solution.network_power_mW),
            "Total incl. BS (mW)": solution.total_power_mW,
            "Iterations": extras["iterations"],
        })
        rows.append(row)

    return {
        "breakdown": pd.DataFrame(rows),
        "trace": trace.to_frame() if trace is not None else pd.DataFrame(),
        "trace_status": trace.status if trace is not None else "not run",
        "initial_power_mW": trace.initial_power_mW if trace is not None else float("nan"),
        "warnings": warnings,
    }


def render_power_tab(params: Dict[str, Any]):
    """
    Render the Power Breakdown tab.

    Args:
        params: Sidebar parameters
    """
    st.header("Power Breakdown")

    st.markdown("""
    Run the proposed on/off RIS design and both baselines on one channel realization.
    Network power is transmit power divided by the drain efficiency plus the circuit
    power of every active RIS.
    """)

    if st.button("Run", key="run_power", use_container_width=False):
        with st.spinner("Solving..."):
            st.session_state.scenario_results = solve_scenario(
                params["scenario"], params["algorithm"], params["seed"]
            )

    if "scenario_results" not in st.session_state:
        st.info("Press Run to solve the current scenario.")
        return

    results = st.session_state.scenario_results
    for warning in results["warnings"]:
        st.warning(warning)

    breakdown = results["breakdown"]
    solved = breakdown[breakdown["Status"] == "solved"] if "Status" in breakdown else breakdown.iloc[0:0]
    if not solved.empty:
        cols = st.columns(len(solved))
        for col, (_, row) in zip(cols, solved.iterrows()):
            col.metric(row["Method"], format_power(row["Network (mW)"]))

    st.subheader("Per-method Breakdown")
    st.dataframe(breakdown, use_container_width=True)
