"""Traveling-wave selection and convergence harness for a singular PDE-ODE
chemotaxis system on the half line."""

from chemowave.wave_model import ModelParams, WaveParams, select_wave

__all__ = ["ModelParams", "WaveParams", "select_wave"]
__version__ = "0.1.0"
