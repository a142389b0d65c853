"""Exact computations around the Jacquet-Rallis fundamental lemma over F_q((pi))."""

__version__ = "0.1.0"
