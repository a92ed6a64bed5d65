"""Reduced density matrices of a register dephased by a two-level bath."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
from scipy.linalg import expm

from .decoherence import SIGMA_2, SIGMA_3, factor_two_level_thermal, product_factor
from .environment import VACUUM, DiscreteBath, ThermalState
from .errors import DomainError, ResourceCapError
from .registers import BasisLabel, RegisterSpec, spin_signs, xi_table

__all__ = [
    "DensityMatrix",
    "SystemState",
    "energy_table",
    "evolve_reduced",
    "purity",
    "oracle_full_evolution",
    "MAX_DIM",
    "MAX_ORACLE_MODES",
]

MAX_DIM = 2 ** 12
MAX_ORACLE_MODES = 12


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DomainError("density matrix must be square")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > 1e-12:
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > 1e-12:
            raise DomainError(f"trace is {np.trace(rho).real!r}, expected 1")
        if rho.shape[0] <= 1024 and np.linalg.eigvalsh(rho).min() < -1e-10:
            raise DomainError("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True)
class SystemState:
    """Register amplitudes indexed by basis label index."""

    amplitudes: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.amplitudes, dtype=complex))
        L = int(round(np.log2(c.size))) if c.size else 0
        if c.ndim != 1 or c.size < 2 or 2 ** L != c.size:
            raise DomainError("amplitude vector length must be 2**L, L >= 1")
        if abs(np.vdot(c, c).real - 1) > 1e-12:
            raise DomainError("state is not normalized")
        c.setflags(write=False)
        object.__setattr__(self, "amplitudes", c)

    @property
    def L(self) -> int:
        return int(self.amplitudes.size).bit_length() - 1

    @classmethod
    def from_components(cls, components: Mapping, L: int,
                        normalize: bool = True) -> "SystemState":
        """Build from ``{index or bit tuple or BasisLabel: amplitude}``."""
        c = np.zeros(2 ** L, dtype=complex)
        for key, amp in components.items():
            if isinstance(key, BasisLabel):
                n = key.index
            elif isinstance(key, (tuple, list)):
                n = sum(int(b) << i for i, b in enumerate(key))
            else:
                n = int(key)
            c[n] += amp
        if normalize:
            c = c / np.linalg.norm(c)
        return cls(c)

    def projector(self) -> DensityMatrix:
        c = self.amplitudes
        return DensityMatrix(np.outer(c, c.conj()))


def energy_table(spec: RegisterSpec) -> np.ndarray:
    """``E_q = sum_k eta_k (-1)**(q_k + 1)`` for each basis index."""
    return spin_signs(spec.L) @ spec.etas


def _check_dims(state0: SystemState, spec: RegisterSpec, energies):
    if state0.amplitudes.size != 2 ** spec.L:
        raise DomainError(
            f"state has dimension {state0.amplitudes.size}, register needs "
            f"{2 ** spec.L}")
    if 2 ** spec.L > MAX_DIM:
        raise ResourceCapError(f"register dimension 2**{spec.L} exceeds {MAX_DIM}")
    E = energy_table(spec) if energies is None else np.asarray(energies, float)
    if E.shape != (2 ** spec.L,):
        raise DomainError("energy table length must be 2**L")
    return E


def evolve_reduced(state0: SystemState, spec: RegisterSpec,
                   bath: Optional[DiscreteBath], th: ThermalState = VACUUM,
                   t: float = 0.0, energies=None) -> DensityMatrix:
    """Reduced register state at time ``t``.

    ``rho[q, q'] = C_q C_q'^* exp[i(E_q' - E_q) t] F(xi(q), xi(q'))`` with
    ``F`` the product of per-mode thermal two-level factors.  ``bath=None``
    means no environment.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    E = _check_dims(state0, spec, energies)
    c = state0.amplitudes
    rho = np.outer(c, c.conj()) * np.exp(1j * np.subtract.outer(-E, -E) * t)
    if bath is None:
        return DensityMatrix(rho)
    xis = xi_table(spec)
    support = np.flatnonzero(c)
    levels, inverse = np.unique(xis[support], return_inverse=True)
    F = np.ones((levels.size, levels.size), dtype=complex)
    for a in range(levels.size):
        for b in range(a + 1, levels.size):
            F[a, b] = product_factor(bath, factor_two_level_thermal, t,
                                     xi_a=levels[a], xi_b=levels[b], th=th)
            F[b, a] = np.conj(F[a, b])
    idx = np.ix_(support, support)
    rho[idx] = rho[idx] * F[np.ix_(inverse, inverse)]
    # exact symmetrisation removes rounding asymmetry from the complex products
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)


def purity(rho) -> float:
    """``Tr(rho^2)``."""
    r = np.asarray(rho)
    return float(np.vdot(r.conj().T, r).real)


def _mode_propagator(omega: float, g: float, xi_value: float, t: float):
    return expm(-1j * t * (omega * SIGMA_3 + xi_value * g * SIGMA_2))


def oracle_full_evolution(state0: SystemState, spec: RegisterSpec,
                          bath: Optional[DiscreteBath], t: float,
                          energies=None) -> DensityMatrix:
    """Brute-force reduced state from the full register-plus-bath state vector.

    The bath starts in its ground state.  For each register basis state the
    bath vector (dimension ``2**N``) is propagated mode by mode with
    numerically exponentiated 2x2 generators, the global state
    ``sum_q C_q e^{-i E_q t} |q> (x) |bath_q(t)>`` is assembled, and the bath is
    traced out.  Test oracle; limited to ``N <= 12`` modes.
    """
    E = _check_dims(state0, spec, energies)
    modes = () if bath is None else bath.modes
    N = len(modes)
    if N > MAX_ORACLE_MODES:
        raise ResourceCapError(f"oracle limited to {MAX_ORACLE_MODES} modes, got {N}")
    xis = xi_table(spec)
    ground = np.zeros((2,) * N, dtype=complex)
    ground[(1,) * N] = 1.0  # index 1 is |g> in the (e, g) ordering
    cache = {}
    psi = np.zeros((2 ** spec.L, 2 ** N), dtype=complex)
    for q, cq in enumerate(state0.amplitudes):
        if cq == 0:
            continue
        key = float(xis[q])
        if key not in cache:
            env = ground
            for j, m in enumerate(modes):
                U = _mode_propagator(m.omega, m.g, key, t)
                env = np.moveaxis(np.tensordot(U, env, axes=([1], [j])), 0, j)
            cache[key] = env.reshape(-1)
        psi[q] = cq * np.exp(-1j * E[q] * t) * cache[key]
    rho = psi @ psi.conj().T
    return DensityMatrix(0.5 * (rho + rho.conj().T))
