"""
Sidebar component for parameter input in the RIS green network app.
"""

from typing import Any, Dict, Optional

import streamlit as st

from src.errors import ConfigError
from src.model.orchestrate import FEASIBILITY_MODES
from src.utils.parameters import (
    DEFAULT_DRAIN_EFFICIENCY,
    DEFAULT_ELEMENT_POWER_MW,
    DEFAULT_ELEMENTS_PER_RIS,
    DEFAULT_EPSILON_MW,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_MAX_TRANSMIT_POWER_MW,
    DEFAULT_NOISE_DBM,
    DEFAULT_NUM_ANTENNAS,
    DEFAULT_NUM_RIS,
    DEFAULT_NUM_USERS,
    DEFAULT_PATHLOSS_INTERCEPT_DB,
    DEFAULT_RANDOM_SEED,
    DEFAULT_RANDOMIZATION_SAMPLES,
    DEFAULT_RIS_POSITIONS,
    DEFAULT_TARGET_RATE,
)
from src.utils.scenario_loader import load_config_dict


def create_sidebar_parameters() -> Optional[Dict[str, Any]]:
    """
    Create the sidebar with parameter input sections.

    Returns:
        dict: "scenario" (scenario object accepted by load_config_dict),
        "algorithm" (AlgorithmOptions keyword arguments) and "seed", or None
        if the scenario is invalid
    """
    with st.sidebar:
        st.header("Scenario Parameters")

        scenario_tab, algorithm_tab = st.tabs(["Scenario", "Algorithm"])

        with scenario_tab:
            M = st.slider(
                "BS Antennas (M)",
                min_value=1,
                max_value=16,
                value=DEFAULT_NUM_ANTENNAS,
                step=1
            )

            K = st.slider(
                "Users (K)",
                min_value=1,
                max_value=10,
                value=DEFAULT_NUM_USERS,
                step=1,
                help="Single-antenna users; K <= M keeps every rate target reachable without RISs"
            )

            L = st.slider(
                "RISs (L)",
                min_value=0,
                max_value=len(DEFAULT_RIS_POSITIONS),
                value=DEFAULT_NUM_RIS,
                step=1,
                help="RISs sit at the default positions"
            )

            N = st.slider(
                "Elements per RIS (N)",
                min_value=1,
                max_value=32,
                value=DEFAULT_ELEMENTS_PER_RIS,
                step=1
            )

            rate = st.slider(
                "Target Rate (bits/channel use)",
                min_value=0.5,
                max_value=6.0,
                value=DEFAULT_TARGET_RATE,
                step=0.5
            )

            noise_dbm = st.number_input(
                "Noise Power (dBm)",
                min_value=-120.0,
                max_value=0.0,
                value=DEFAULT_NOISE_DBM,
                step=5.0
            )

            P_max = st.number_input(
                "Max Transmit Power (mW)",
                min_value=1.0,
                max_value=100000.0,
                value=DEFAULT_MAX_TRANSMIT_POWER_MW,
                step=100.0
            )

            P_RE = st.number_input(
                "Power per Reflecting Element (mW)",
                min_value=0.0,
                max_value=100.0,
                value=DEFAULT_ELEMENT_POWER_MW,
                step=1.0
            )

            eta = st.slider(
                "Drain Efficiency",
                min_value=0.05,
                max_value=1.0,
                value=DEFAULT_DRAIN_EFFICIENCY,
                step=0.05
            )

            intercept = st.number_input(
                "Path Loss at 1 m (dB)",
                min_value=-60.0,
                max_value=0.0,
                value=DEFAULT_PATHLOSS_INTERCEPT_DB,
                step=5.0,
                help="Lower values weaken every link and can put the SINR targets out of reach"
            )

        with algorithm_tab:
            epsilon = st.number_input(
                "Stopping Threshold (mW)",
                min_value=0.0,
                max_value=100.0,
                value=DEFAULT_EPSILON_MW,
                step=0.5
            )

            max_iter = st.slider(
                "Max Iterations",
                min_value=1,
                max_value=100,
                value=DEFAULT_MAX_ITERATIONS,
                step=1
            )

            samples = st.slider(
                "Randomization Samples",
                min_value=10,
                max_value=500,
                value=DEFAULT_RANDOMIZATION_SAMPLES,
                step=10
            )

            feasibility_mode = st.selectbox(
                "Bisection Check",
                FEASIBILITY_MODES,
                help="evaluate: check SINRs at the switched pattern; sdp: re-solve the relaxation"
            )

            random_init = st.checkbox("Random initial phases", value=False)

            seed = st.number_input(
                "Seed",
                min_value=0,
                value=DEFAULT_RANDOM_SEED,
                step=1
            )

        st.info("Results update when you press Run in a tab")

    scenario = {
        "M": int(M),
        "K": int(K),
        "L": int(L),
        "N": int(N),
        "eta": float(eta),
        "P_max": float(P_max),
        "P_RE": float(P_RE),
        "sigma2": f"{noise_dbm} dBm",
        "rate": float(rate),
        "pathloss_intercept_dB": float(intercept),
    }

    try:
        load_config_dict(scenario)
    except ConfigError as exc:
        for issue in exc.issues:
            st.sidebar.error(str(issue))
        return None

    return {
        "scenario": scenario,
        "algorithm": {
            "epsilon_mW": float(epsilon),
            "max_iter": int(max_iter),
            "samples": int(samples),
            "feasibility_mode": feasibility_mode,
            "random_init": bool(random_init),
        },
        "seed": int(seed),
    }
