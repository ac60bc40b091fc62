"""
Monte Carlo tab component for the RIS green network app.
"""

from typing import Any, Dict, Tuple

import streamlit as st

from src.errors import StructuralError
from src.model.monte_carlo import ExperimentSpec, MonteCarloResults, run_experiment
from src.model.orchestrate import AlgorithmOptions
from src.utils.config import CSV_FLOAT_FORMAT, DECIMAL_PLACES
from src.utils.parameters import EXHAUSTIVE_AUTO_DISABLE_RIS, METHODS, SWEEP_VARIABLES
from src.utils.scenario_loader import load_config_dict

# Trial cap for interactive runs; longer sweeps belong on the command line
MAX_APP_TRIALS = 50


@st.cache_data(show_spinner=False)
def run_sweep(scenario: Dict[str, Any], algorithm: Dict[str, Any], seed: int, sweep_variable: str,
              values: Tuple[float, ...], methods: Tuple[str, ...], trials: int) -> MonteCarloResults:
    """Cached run_experiment for the sidebar scenario."""
    config, _ = load_config_dict(scenario)
    spec = ExperimentSpec(
        base=config,
        sweep_variable=sweep_variable,
        sweep_values=values,
        methods=methods,
        trials=trials,
        master_seed=seed,
        options=AlgorithmOptions(**algorithm),
    )
    return run_experiment(spec, parallel=False)


def render_monte_carlo_tab(params: Dict[str, Any]):
    """
    Render the Monte Carlo tab.

    Args:
        params: Sidebar parameters
    """
    st.header("Monte Carlo Sweep")

    st.markdown("""
    Sweep the number of users, antennas or the target rate. Every method sees the same
    channel realizations, and means are taken over feasible trials only.
    """)

    col1, col2 = st.columns([1, 3])

    with col1:
        sweep_variable = st.selectbox("Sweep", SWEEP_VARIABLES)
        values_text = st.text_input("Values", value={"K": "2,3,4", "M": "6,8,10", "rate": "1,2,3"}[sweep_variable])
        methods = st.multiselect("Methods", METHODS, default=list(METHODS))
        trials = st.number_input(
            "Trials per Value",
            min_value=1,
            max_value=MAX_APP_TRIALS,
            value=5,
            step=1,
            help="More trials give smoother means but take longer"
        )
        run_mc_button = st.button("Run Simulation", use_container_width=True)

    if "exhaustive" in methods and params["scenario"]["L"] > EXHAUSTIVE_AUTO_DISABLE_RIS:
        st.warning(f"Exhaustive search is skipped for L > {EXHAUSTIVE_AUTO_DISABLE_RIS}")

    if run_mc_button:
        try:
            values = tuple(float(v) for v in values_text.split(",") if v.strip())
            if sweep_variable in ("K", "M"):
                values = tuple(int(v) if v.is_integer() else v for v in values)
            with st.spinner(f"Running {trials} trials per value..."):
                st.session_state.mc_results = run_sweep(
                    params["scenario"], params["algorithm"], params["seed"],
                    sweep_variable, values, tuple(methods), int(trials)
                )
        except (StructuralError, ValueError) as exc:
            st.error(f"Invalid sweep: {exc}")

    if "mc_results" in st.session_state:
        mc_results = st.session_state.mc_results
        summary_df = mc_results["summary_df"]
        results_df = mc_results["results_df"]

        with col2:
            st.subheader("Summary Statistics")
            st.dataframe(summary_df.round(DECIMAL_PLACES), use_container_width=True)

            infeasible = int(summary_df["infeasible"].sum()) if not summary_df.empty else 0
            if infeasible:
                st.warning(f"{infeasible} trials were infeasible and are excluded from the means")

            st.download_button(
                "Download results.csv",
                data=results_df.to_csv(index=False, float_format=CSV_FLOAT_FORMAT),
                file_name="results.csv",
                mime="text/csv"
            )

        st.subheader("Trials")
        st.dataframe(results_df, use_container_width=True)
