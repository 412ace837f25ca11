"""nonmarkov — TCL4 qubit dynamics and non-Markovianity measures."""

__version__ = "0.1.0"
