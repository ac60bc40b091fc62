"""
Streamlit app for the RIS green network simulator.

This app provides an interactive interface for network power minimisation
with on/off RIS selection.
"""

import streamlit as st

from src.utils.parameters import (
    PAGE_TITLE, PAGE_ICON, PAGE_LAYOUT, TABS
)
from src.components.sidebar import create_sidebar_parameters
from src.components.power_tab import render_power_tab
from src.components.trace_tab import render_trace_tab
from src.components.monte_carlo_tab import render_monte_carlo_tab

# Set page configuration
st.set_page_config(
    page_title=PAGE_TITLE,
    page_icon=PAGE_ICON,
    layout=PAGE_LAYOUT
)

# App title and description
st.title("RIS Green Network Simulator")
st.markdown("""
This app minimises the network power of a multi-antenna base station assisted by several
reconfigurable intelligent surfaces (RISs). Each RIS can be switched off to save its circuit
power; the beams, the on/off pattern and the phase shifts are optimised together.
""")

# Create sidebar for parameters
params = create_sidebar_parameters()
if params is None:
    st.error("Fix the scenario parameters in the sidebar to continue.")
    st.stop()

tab1, tab2, tab3 = st.tabs(TABS)

with tab1:
    render_power_tab(params)

with tab2:
    render_trace_tab()

with tab3:
    render_monte_carlo_tab(params)

# Footer with additional information
st.markdown("---")
st.markdown("""
**About this model**: Powers are in mW unless marked dBm. Channels are Rayleigh fading with
distance-based path loss; every result is reproducible from the seed in the sidebar.
""")
