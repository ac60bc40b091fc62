"""
UI components for the RIS green network Streamlit app.

This package contains reusable UI components for the Streamlit interface.
"""
