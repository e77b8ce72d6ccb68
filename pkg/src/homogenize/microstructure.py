"""Periodic two-phase coefficients and the registry of monotone nonlinearities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import ConfigurationError

KINDS = ("constant", "circular_inclusion", "laminate", "checkerboard")


@dataclass(frozen=True)
class MicrostructureSpec:
    """Isotropic two-phase unit cell.

    ``a_matrix`` fills the matrix phase Y_f, ``a_inclusion`` the inclusion
    Y_s. Inclusions are closed sets: interface points belong to Y_s.

    * ``circular_inclusion``: disc of ``radius`` centred at (0.5, 0.5)
    * ``laminate``: Y_s = {y1 >= 0.5}
    * ``checkerboard``: Y_s = the two squares where exactly one of
      y1, y2 is >= 0.5
    """

    kind: str = "constant"
    a_matrix: float = 1.0
    a_inclusion: float = 1.0
    radius: float = 0.25

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown microstructure kind {self.kind!r}")
        for name in ("a_matrix", "a_inclusion"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ConfigurationError(f"{name} must be positive and finite, got {v}")
        if self.kind == "circular_inclusion" and not 0 < self.radius < 0.5:
            raise ConfigurationError("inclusion radius must lie in (0, 0.5)")

    @property
    def lam(self) -> float:
        """Ellipticity constant (smallest phase coefficient)."""
        if self.kind == "constant":
            return self.a_matrix
        return min(self.a_matrix, self.a_inclusion)

    @property
    def Lam(self) -> float:
        if self.kind == "constant":
            return self.a_matrix
        return max(self.a_matrix, self.a_inclusion)

    def inclusion_fraction(self) -> float:
        """Area of Y_s."""
        return {
            "constant": 0.0,
            "circular_inclusion": np.pi * self.radius ** 2,
            "laminate": 0.5,
            "checkerboard": 0.5,
        }[self.kind]

    def in_inclusion(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        y1, y2 = y[..., 0], y[..., 1]
        if self.kind == "constant":
            return np.zeros(y1.shape, dtype=bool)
        if self.kind == "circular_inclusion":
            return (y1 - 0.5) ** 2 + (y2 - 0.5) ** 2 <= self.radius ** 2
        if self.kind == "laminate":
            return y1 >= 0.5
        return (y1 >= 0.5) ^ (y2 >= 0.5)

    def scalar_coefficient(self, y: np.ndarray) -> np.ndarray:
        return np.where(self.in_inclusion(y), self.a_inclusion, self.a_matrix)


def sample_cell_coefficient(spec: MicrostructureSpec, y) -> np.ndarray:
    """Coefficient matrix a(y) for points of the unit cell.

    Accepts one point (shape (2,)) or a stack (..., 2); returns (..., 2, 2).
    """
    a = spec.scalar_coefficient(y)
    return a[..., None, None] * np.eye(2)


def sample_epsilon_coefficient(spec: MicrostructureSpec, eps: float, x) -> np.ndarray:
    """Dilated coefficient a(x / eps), periodic with period ``eps``."""
    if not eps > 0:
        raise ConfigurationError(f"eps must be positive, got {eps}")
    return sample_cell_coefficient(spec, cell_coordinates(x, eps))


def cell_coordinates(x, eps: float) -> np.ndarray:
    """Component-wise fractional part of ``x / eps``."""
    z = np.asarray(x, dtype=float) / eps
    # snap round-off so that x = k * eps lands exactly on a cell corner
    r = np.round(z)
    z = np.where(np.abs(z - r) < 1e-12 * np.maximum(1.0, np.abs(z)), r, z)
    return z - np.floor(z)


def epsilon_coefficient(spec: MicrostructureSpec, eps: float) -> Callable:
    """Coefficient provider ``x -> a(x / eps)`` for assembly."""
    return lambda x: sample_epsilon_coefficient(spec, eps, x)


def cell_coefficient(spec: MicrostructureSpec) -> Callable:
    return lambda y: sample_cell_coefficient(spec, y)


@dataclass(frozen=True)
class NonlinearitySpec:
    """A continuous non-decreasing reaction term with its growth envelope.

    ``|g(u)| <= growth_constant * (|u|**(q - 1) + h0)``.
    """

    kind: str
    g: Callable[[np.ndarray], np.ndarray]
    g_prime: Optional[Callable[[np.ndarray], np.ndarray]]
    growth_constant: float
    q: float
    h0: float
    c: float = 0.0

    def __call__(self, u):
        return self.g(u)

    def __repr__(self):
        extra = f", c={self.c}" if self.kind == "linear" else ""
        return f"NonlinearitySpec(kind={self.kind!r}{extra})"


# with d = 2 the critical exponent may be taken as any number >= 2; fixed here
CRITICAL_EXPONENT = 4.0


def make_nonlinearity(kind: str, c: float = 1.0) -> NonlinearitySpec:
    """Build one of the registered monotone nonlinearities.

    ``zero``: g = 0; ``linear``: g = c u (c >= 0); ``cubic``: g = u**3;
    ``saturating``: g = u / (1 + |u|).
    """
    if kind == "zero":
        return NonlinearitySpec("zero", lambda u: np.zeros_like(np.asarray(u, dtype=float)),
                                None, 0.0, 1.0, 0.0)
    if kind == "linear":
        if c < 0:
            raise ConfigurationError("linear nonlinearity needs c >= 0 to be monotone")
        return NonlinearitySpec("linear", lambda u: c * np.asarray(u, dtype=float),
                                lambda u: np.full_like(np.asarray(u, dtype=float), c),
                                float(c), 2.0, 0.0, c=float(c))
    if kind == "cubic":
        return NonlinearitySpec("cubic", lambda u: np.asarray(u, dtype=float) ** 3,
                                lambda u: 3.0 * np.asarray(u, dtype=float) ** 2,
                                1.0, CRITICAL_EXPONENT, 0.0)
    if kind == "saturating":
        return NonlinearitySpec(
            "saturating",
            lambda u: np.asarray(u, dtype=float) / (1.0 + np.abs(u)),
            lambda u: 1.0 / (1.0 + np.abs(np.asarray(u, dtype=float))) ** 2,
            1.0, 2.0, 1.0)
    raise ConfigurationError(f"unknown nonlinearity kind {kind!r}")


def eval_g(spec: NonlinearitySpec, u):
    return spec.g(u)


def eval_g_prime(spec: NonlinearitySpec, u):
    """Derivative of g, or None when the kind has none (``zero`` gives 0)."""
    if spec.kind == "zero":
        return np.zeros_like(np.asarray(u, dtype=float))
    if spec.g_prime is None:
        return None
    return spec.g_prime(u)


def check_monotone(spec: NonlinearitySpec, n_pairs: int = 10_000, scale: float = 10.0,
                   seed: int = 0) -> float:
    """Smallest sampled value of (g(u) - g(v)) (u - v)."""
    rng = np.random.default_rng(seed)
    u, v = rng.uniform(-scale, scale, size=(2, n_pairs))
    return float(np.min((spec.g(u) - spec.g(v)) * (u - v)))


def check_growth(spec: NonlinearitySpec, n_samples: int = 10_001, bound: float = 10.0) -> bool:
    u = np.linspace(-bound, bound, n_samples)
    env = spec.growth_constant * (np.abs(u) ** (spec.q - 1.0) + spec.h0)
    return bool(np.all(np.abs(spec.g(u)) <= env * (1 + 1e-14) + 1e-300))
