"""Numerical verification suites behind ``cvqd verify``."""
