"""Pauli-rotation transpilation, tile-board scheduling, magic-state
distillation and end-to-end resource estimation for patch-encoded
surface-code quantum computers."""

__version__ = "0.1.0"

from .pauli import Angle, PauliMeasurement, PauliRotation, PauliString

__all__ = ["Angle", "PauliMeasurement", "PauliRotation", "PauliString"]
