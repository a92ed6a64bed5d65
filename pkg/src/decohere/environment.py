"""Environment models: two-level and oscillator baths, thermal states and
continuous spectral densities.

Units: hbar = 1, all frequencies and couplings in rad/time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "BathMode",
    "DiscreteBath",
    "ThermalState",
    "SpectralDensity",
    "OscillatorCoupling",
    "VACUUM",
    "build_uniform_bath",
    "sample_bath",
    "load_bath",
    "save_bath",
    "load_spectral_density",
]


@dataclass(frozen=True)
class BathMode:
    omega: float
    g: float

    def __post_init__(self):
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise DomainError(f"omega must be finite and > 0, got {self.omega}")
        if not (np.isfinite(self.g) and self.g >= 0):
            raise DomainError(f"g must be finite and >= 0, got {self.g}")


@dataclass(frozen=True)
class DiscreteBath:
    modes: tuple

    def __post_init__(self):
        modes = tuple(self.modes)
        if len(modes) < 1:
            raise DomainError("a bath needs at least one mode")
        if not all(isinstance(m, BathMode) for m in modes):
            raise DomainError("modes must be BathMode instances")
        object.__setattr__(self, "modes", modes)

    def __len__(self):
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    @property
    def N(self) -> int:
        return len(self.modes)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])

    @property
    def gs(self) -> np.ndarray:
        return np.array([m.g for m in self.modes])

    @classmethod
    def from_arrays(cls, omegas: Sequence[float], gs: Sequence[float]):
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        gs = np.atleast_1d(np.asarray(gs, dtype=float))
        if omegas.shape != gs.shape:
            raise DomainError("omega and g arrays differ in length")
        return cls(tuple(BathMode(float(w), float(g))
                         for w, g in zip(omegas, gs)))


@dataclass(frozen=True)
class ThermalState:
    """Gibbs state ``exp(-beta H_b) / Z`` of each bath mode.

    ``vacuum=True`` selects the ground state, the ``beta -> inf`` limit.
    """

    beta: float = np.inf
    vacuum: bool = False

    def __post_init__(self):
        if np.isnan(self.beta) or self.beta < 0:
            raise DomainError(f"beta must be >= 0, got {self.beta}")
        if np.isinf(self.beta):
            object.__setattr__(self, "vacuum", True)

    def weights(self, omega):
        """Ground and excited populations of a mode with ``H = omega sigma_3``."""
        if self.vacuum:
            w = np.asarray(omega, dtype=float)
            return np.ones_like(w), np.zeros_like(w)
        x = self.beta * np.asarray(omega, dtype=float)
        # e^{+x} / 2cosh(x) written to stay finite for large x
        w_e = 0.5 * (1.0 - np.tanh(x))
        return 1.0 - w_e, w_e

    def polarization(self, omega):
        """``w_g - w_e = tanh(beta omega)``; 1 for the vacuum."""
        if self.vacuum:
            return np.ones_like(np.asarray(omega, dtype=float))
        return np.tanh(self.beta * np.asarray(omega, dtype=float))


VACUUM = ThermalState(vacuum=True)


@dataclass(frozen=True)
class SpectralDensity:
    """Continuous bath weight ``J(w) = rho(w) g(w)**2`` on ``(0, cutoff]``.

    kind is one of

    ``"flat"``      J = gamma / pi
    ``"ohmic"``     J = 2 eta w**2 / pi
    ``"tabulated"`` J linearly interpolated from ``samples`` (w, J), zero
                    outside the tabulated range
    """

    kind: str
    cutoff: float
    gamma: float = 0.0
    eta: float = 0.0
    samples: tuple = None

    def __post_init__(self):
        if not (np.isfinite(self.cutoff) and self.cutoff > 0):
            raise DomainError("cutoff must be finite and > 0")
        if self.kind == "flat":
            if not self.gamma > 0:
                raise DomainError("flat density needs gamma > 0")
        elif self.kind == "ohmic":
            if not self.eta > 0:
                raise DomainError("ohmic density needs eta > 0")
        elif self.kind == "tabulated":
            if self.samples is None:
                raise DomainError("tabulated density needs samples")
            w, J = (np.asarray(a, dtype=float) for a in self.samples)
            if w.ndim != 1 or w.shape != J.shape or w.size < 2:
                raise DomainError("samples must be two equal 1-D arrays")
            if np.any(np.diff(w) <= 0):
                raise DomainError("sample frequencies must increase")
            if np.any(J < 0) or not np.all(np.isfinite(J)):
                raise DomainError("tabulated values must be finite and >= 0")
            w.setflags(write=False)
            J.setflags(write=False)
            object.__setattr__(self, "samples", (w, J))
        else:
            raise DomainError(f"unknown spectral density kind {self.kind!r}")

    @classmethod
    def flat(cls, gamma: float, cutoff: float):
        return cls("flat", cutoff, gamma=gamma)

    @classmethod
    def ohmic(cls, eta: float, cutoff: float):
        return cls("ohmic", cutoff, eta=eta)

    @classmethod
    def tabulated(cls, omegas, values, cutoff: float = None):
        omegas = np.asarray(omegas, dtype=float)
        if cutoff is None:
            cutoff = float(omegas[-1])
        return cls("tabulated", cutoff, samples=(omegas, np.asarray(values)))

    def __call__(self, omega):
        """Weight ``rho(w) g(w)**2`` at ``omega``."""
        w = np.asarray(omega, dtype=float)
        if self.kind == "flat":
            return np.full_like(w, self.gamma / np.pi)
        if self.kind == "ohmic":
            return 2.0 * self.eta * w ** 2 / np.pi
        ws, J = self.samples
        return np.interp(w, ws, J, left=0.0, right=0.0)


@dataclass(frozen=True)
class OscillatorCoupling:
    """Images f(alpha), f(beta) of the two system eigenvalues under f(s)."""

    f_a: float
    f_b: float

    def __post_init__(self):
        if not (np.isfinite(self.f_a) and np.isfinite(self.f_b)):
            raise DomainError("f_a and f_b must be finite")


def build_uniform_bath(N: int, omega: float, g: float) -> DiscreteBath:
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    mode = BathMode(float(omega), float(g))
    return DiscreteBath((mode,) * int(N))


def sample_bath(sd: SpectralDensity, N: int) -> DiscreteBath:
    """Midpoint-rule discretisation of ``sd`` into N modes.

    Modes sit at ``w_j = (j - 1/2) cutoff / N`` with ``g_j**2 = J(w_j) dw``,
    so that ``sum_j 8 g_j**2 / w_j**2 sin(w_j t)**2`` is the midpoint rule
    for the continuous dephasing integral.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    dw = sd.cutoff / N
    omegas = (np.arange(N) + 0.5) * dw
    gs = np.sqrt(np.maximum(sd(omegas), 0.0) * dw)
    return DiscreteBath.from_arrays(omegas, gs)


def load_bath(path) -> DiscreteBath:
    """Two columns (omega, g), one mode per line."""
    data = np.loadtxt(path, dtype=float, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise DomainError(f"{path}: expected 2 columns, got {data.shape[1]}")
    return DiscreteBath.from_arrays(data[:, 0], data[:, 1])


def save_bath(bath: DiscreteBath, path) -> None:
    np.savetxt(path, np.column_stack([bath.omegas, bath.gs]), fmt="%.17g",
               header="omega g")


def load_spectral_density(path, cutoff: float = None) -> SpectralDensity:
    """Two columns (omega, rho*g^2) as a tabulated density."""
    data = np.loadtxt(path, dtype=float, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise DomainError(f"{path}: expected 2 columns, got {data.shape[1]}")
    return SpectralDensity.tabulated(data[:, 0], data[:, 1], cutoff)
