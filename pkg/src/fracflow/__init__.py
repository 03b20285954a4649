"""Rotational flow of a generalized (fractional) second grade fluid in a cylinder.

The package evaluates the velocity and shear stress of a fluid inside an
infinite circular cylinder whose wall is accelerated from rest, omega(R, t) =
R Omega t, by three independent routes: mode-series solutions
(:mod:`fracflow.analytic_solution`), Gaver-Stehfest inversion of the exact
transforms (:mod:`fracflow.laplace_oracle`) and a finite-difference solver
(:mod:`fracflow.fd_solver`).
"""

from fracflow.analytic_solution import (
    FieldProfile,
    mode_convolution,
    shear,
    shear_field,
    shear_newtonian,
    shear_sgf,
    velocity,
    velocity_field,
    velocity_newtonian,
    velocity_sgf,
)
from fracflow.params import FlowConfig, FluidParams
from fracflow.special_functions import GFunctionParams, ModeBasis, bessel_j1_zeros

__version__ = "0.1.0"

__all__ = [
    "FieldProfile",
    "FlowConfig",
    "FluidParams",
    "GFunctionParams",
    "ModeBasis",
    "bessel_j1_zeros",
    "mode_convolution",
    "shear",
    "shear_field",
    "shear_newtonian",
    "shear_sgf",
    "velocity",
    "velocity_field",
    "velocity_newtonian",
    "velocity_sgf",
]
