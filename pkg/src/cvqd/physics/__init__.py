"""Truncated Fock-basis physics: states, gates, diffusion and the denoiser circuit."""
