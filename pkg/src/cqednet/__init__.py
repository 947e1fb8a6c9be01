"""Open-system dynamics and two-qubit correlations in a fiber-coupled two-cavity network."""

__version__ = "0.1.0"
