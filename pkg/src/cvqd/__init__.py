"""
CVQD: continuous-variable quantum diffusion in a truncated Fock basis.

Forward thermal-loss diffusion, a two-qumode CVQNN denoiser and the training
loops that fit it for state generation and state restoration.
"""

__all__ = ["__version__"]

__version__ = "0.1.0"
