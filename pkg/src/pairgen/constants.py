"""CODATA constants used throughout (SI units)."""

from dataclasses import dataclass

from scipy import constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = _sc.c
    hbar: float = _sc.hbar
    epsilon_0: float = _sc.epsilon_0
    mu_0: float = _sc.mu_0


CONSTANTS = PhysicalConstants()
