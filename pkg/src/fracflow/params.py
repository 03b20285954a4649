"""Physical and numerical parameter records."""

from __future__ import annotations

from dataclasses import dataclass

from fracflow.errors import ParameterError


@dataclass(frozen=True)
class FluidParams:
    """Material constants of a generalized second grade fluid (SI units).

    ``alpha`` is alpha1 / rho; its unit depends on ``beta`` and is not checked.
    """

    nu: float
    alpha: float
    rho: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ParameterError(f"nu must be > 0, got {self.nu}")
        if not self.rho > 0:
            raise ParameterError(f"rho must be > 0, got {self.rho}")
        if not self.alpha >= 0:
            raise ParameterError(f"alpha must be >= 0 (alpha1 >= 0), got {self.alpha}")
        if not 0 < self.beta <= 1:
            raise ParameterError(f"beta must lie in (0, 1], got {self.beta}")

    @property
    def mu(self) -> float:
        return self.rho * self.nu

    @property
    def alpha1(self) -> float:
        return self.rho * self.alpha

    def replace(self, **changes) -> "FluidParams":
        fields = dict(nu=self.nu, alpha=self.alpha, rho=self.rho, beta=self.beta)
        fields.update(changes)
        return FluidParams(**fields)


@dataclass(frozen=True)
class FlowConfig:
    """Geometry, forcing and numerical controls.

    Omega is the angular acceleration of the wall: the wall speed is R*Omega*t.
    """

    R: float = 1.0
    Omega: float = 1.0
    n_modes: int = 50
    series_tol: float = 1e-10
    quad_tol: float = 1e-9
    k_max: int = 200
    j_max: int = 200
    stehfest_n: int = 14

    def __post_init__(self):
        if not self.R > 0:
            raise ParameterError(f"R must be > 0, got {self.R}")
        if self.n_modes < 1:
            raise ParameterError(f"n_modes must be >= 1, got {self.n_modes}")
        for name in ("series_tol", "quad_tol"):
            val = getattr(self, name)
            if not 0 < val <= 1e-2:
                raise ParameterError(f"{name} must lie in (0, 1e-2], got {val}")
        if self.k_max < 1 or self.j_max < 1:
            raise ParameterError("k_max and j_max must be >= 1")
        if self.stehfest_n % 2 or not 8 <= self.stehfest_n <= 20:
            raise ParameterError(f"stehfest_n must be even in [8, 20], got {self.stehfest_n}")

    def replace(self, **changes) -> "FlowConfig":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return FlowConfig(**fields)
