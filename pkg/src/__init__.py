"""RIS Green Network - network power minimisation with on/off RIS selection."""

__version__ = "0.3.0"
