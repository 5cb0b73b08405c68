"""
Test helper utilities for CVQD testing.

This module provides reusable utilities for:
- Drawing random density matrices and coherent inputs
- Independent oracles for the thermal loss channel
- Density-matrix assertions
"""
