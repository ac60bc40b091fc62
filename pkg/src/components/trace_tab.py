"""
Alternation trace tab component for the RIS green network app.
"""

import streamlit as st

from src.utils.conversion_utils import format_power


def render_trace_tab():
    """Render the per-iteration history of the proposed method's last run."""
    st.header("Alternation Trace")

    if "scenario_results" not in st.session_state:
        st.info("Run the Power Breakdown tab first.")
        return

    results = st.session_state.scenario_results
    trace = results["trace"]
    if trace.empty:
        st.info(f"No iterations recorded (status: {results['trace_status']}).")
        return

    col1, col2, col3 = st.columns(3)
    col1.metric("Start (all RISs active)", format_power(results["initial_power_mW"]))
    accepted = trace[trace["accepted"]]
    final = accepted["network_power_mW"].iloc[-1] if not accepted.empty else results["initial_power_mW"]
    col2.metric("Final", format_power(final))
    col3.metric("Stopped because", results["trace_status"])

    st.markdown("""
    Each row is one pass: beams for the current RISs, the relaxation over the on/off
    pattern, rounding by bisection, and recovered phases. A pass is kept only if it
    lowers the network power. The relaxation objective never exceeds the circuit power
    of the rounded set.
    """)
    st.dataframe(trace, use_container_width=True)
