"""Numerical core: bath kernels, TCL coefficients, Bloch dynamics and measures."""
