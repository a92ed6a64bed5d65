"""Decohering factors of QND-coupled qubit registers.

Every factor follows one ordering convention::

    F(xi_a, xi_b, t) = < U(xi_b, t)^dagger U(xi_a, t) >

where the first argument labels the ket side of the density-matrix element
``|q><q'|`` and the second the bra side.  Consequently
``F(xi_a, xi_b) == conj(F(xi_b, xi_a))``.

Two-level bath modes use the basis ordering (e, g), so ``sigma_3`` is
``diag(1, -1)`` and ``sigma_2`` is the usual Pauli matrix.  A mode evolves
under ``omega sigma_3 + xi g sigma_2`` when the register sits in a state with
coupling eigenvalue ``xi``.

All factor functions broadcast over ``t``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .environment import (
    VACUUM,
    BathMode,
    DiscreteBath,
    OscillatorCoupling,
    SpectralDensity,
    ThermalState,
)
from .errors import DomainError, NoDecayError, NumericError
from .registers import BasisLabel, RegisterSpec, xi

__all__ = [
    "ModeAngles",
    "DephasingCurve",
    "DecayFit",
    "FeasibilityInput",
    "FeasibilityVerdict",
    "mode_angles",
    "closed_form_propagator",
    "oracle_factor_unitary",
    "factor_two_level_exact",
    "factor_two_level_thermal",
    "factor_weak_coupling",
    "factor_oscillator",
    "product_factor",
    "dephasing_exponents",
    "dephasing_curve",
    "weak_coupling_exponent",
    "discrete_s",
    "s_integral",
    "scaling_exponent",
    "estimate_decoherence_time",
    "feasibility",
    "default_time_grid",
]

_G, _E = 1, 0  # basis indices in the (e, g) ordering

SIGMA_2 = np.array([[0, -1j], [1j, 0]])
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class ModeAngles:
    theta: float
    Omega: float


def mode_angles(mode: BathMode, xi: float) -> ModeAngles:
    """Mixing angle ``tan(theta) = xi g / omega`` and dressed frequency."""
    return ModeAngles(math.atan2(xi * mode.g, mode.omega),
                      math.hypot(xi * mode.g, mode.omega))


def closed_form_propagator(mode: BathMode, xi: float, t) -> np.ndarray:
    """``exp[-i(omega sigma_3 + xi g sigma_2) t]`` in closed form.

    Returns shape ``t.shape + (2, 2)``.
    """
    ang = mode_angles(mode, xi)
    t = np.asarray(t, dtype=float)
    c = np.cos(ang.Omega * t)
    s = np.sin(ang.Omega * t)
    sn, cs = math.sin(ang.theta), math.cos(ang.theta)
    U = np.empty(t.shape + (2, 2), dtype=complex)
    U[..., _E, _E] = c - 1j * cs * s
    U[..., _E, _G] = -sn * s
    U[..., _G, _E] = sn * s
    U[..., _G, _G] = c + 1j * cs * s
    return U


def oracle_factor_unitary(mode: BathMode, xi: float, t) -> np.ndarray:
    """Brute-force propagator via eigendecomposition of the 2x2 generator.

    Test oracle only: independent of :func:`closed_form_propagator`.
    """
    H = mode.omega * SIGMA_3 + xi * mode.g * SIGMA_2
    evals, V = np.linalg.eigh(H)
    t = np.asarray(t, dtype=float)
    phases = np.exp(-1j * t[..., None] * evals)
    return np.einsum("ik,...k,jk->...ij", V, phases, V.conj())


def _overlap_matrix(mode, xi_a, xi_b, t):
    Ua = closed_form_propagator(mode, xi_a, t)
    Ub = closed_form_propagator(mode, xi_b, t)
    return np.einsum("...ki,...kj->...ij", Ub.conj(), Ua)


def factor_two_level_exact(mode: BathMode, xi_a: float, xi_b: float, t):
    """``<g| U(xi_b)^dagger U(xi_a) |g>`` for a mode starting in its ground state."""
    if xi_a == xi_b:
        return np.ones_like(np.asarray(t, dtype=float), dtype=complex)[()]
    return _overlap_matrix(mode, xi_a, xi_b, t)[..., _G, _G][()]


def factor_two_level_thermal(mode: BathMode, xi_a: float, xi_b: float, t,
                             th: ThermalState = VACUUM):
    """Gibbs-weighted trace ``Tr[rho_b U(xi_b)^dagger U(xi_a)]``.

    The real part does not depend on temperature: the overlap matrix is in
    SU(2), so its two diagonal entries are complex conjugates and only the
    imaginary part picks up the polarization ``tanh(beta omega)``.
    """
    if xi_a == xi_b:
        return np.ones_like(np.asarray(t, dtype=float), dtype=complex)[()]
    if th.vacuum:
        return factor_two_level_exact(mode, xi_a, xi_b, t)
    X = _overlap_matrix(mode, xi_a, xi_b, t)
    w_g, w_e = th.weights(mode.omega)
    return (w_g * X[..., _G, _G] + w_e * X[..., _E, _E])[()]


def factor_weak_coupling(mode: BathMode, xi_a: float, xi_b: float, t,
                         beta: Optional[float] = None):
    """Second-order expansion of the two-level factor in ``g / omega``.

    ``1 - (g^2/2w^2)(xi_a-xi_b)^2 sin^2(wt)
    + i (g^2/4w^2)(xi_b^2-xi_a^2) tanh(beta w) sin(2wt)``.

    ``beta=None`` means the vacuum (``tanh = 1``).  The dressed-frequency
    shift ``Omega - omega`` is dropped, so the phase omits the secular term
    ``(g^2/2w)(xi_a^2 - xi_b^2) t`` carried by the exact factor.
    """
    t = np.asarray(t, dtype=float)
    if xi_a == xi_b:
        return np.ones_like(t, dtype=complex)[()]
    r2 = (mode.g / mode.omega) ** 2
    pol = 1.0 if beta is None else math.tanh(beta * mode.omega)
    wt = mode.omega * t
    re = 1.0 - 0.5 * r2 * (xi_a - xi_b) ** 2 * np.sin(wt) ** 2
    im = 0.25 * r2 * (xi_b ** 2 - xi_a ** 2) * pol * np.sin(2 * wt)
    return (re + 1j * im)[()]


def factor_oscillator(mode: BathMode, oc: OscillatorCoupling, t):
    """Vacuum overlap for a linearly forced harmonic mode.

    ``exp{-(f_a-f_b)^2 (2g^2/w^2) sin^2(wt/2)}
    * exp{+i (f_a^2-f_b^2)(g^2/w)[t - sin(wt)/w]}``

    The phase sign is pinned by the truncated-Fock check in the tests.
    """
    t = np.asarray(t, dtype=float)
    w, g = mode.omega, mode.g
    if oc.f_a == oc.f_b:
        return np.ones_like(t, dtype=complex)[()]
    log_mod = -(oc.f_a - oc.f_b) ** 2 * 2 * (g / w) ** 2 * np.sin(w * t / 2) ** 2
    phase = (oc.f_a ** 2 - oc.f_b ** 2) * (g ** 2 / w) * (t - np.sin(w * t) / w)
    return (np.exp(log_mod + 1j * phase))[()]


def _unique_modes(bath: DiscreteBath):
    counts: dict = {}
    for m in bath.modes:
        counts[m] = counts.get(m, 0) + 1
    return counts.items()


def product_factor(bath: DiscreteBath, per_mode: Callable, t, **kwargs):
    """Product of per-mode factors ``per_mode(mode, t=t, **kwargs)``.

    Accumulates ``sum log|F_j|`` and ``sum arg F_j`` separately so very large
    baths do not underflow before the final exponential.  Repeated modes are
    evaluated once.
    """
    t = np.asarray(t, dtype=float)
    log_mod = np.zeros(t.shape)
    phase = np.zeros(t.shape)
    with np.errstate(divide="ignore"):
        for mode, mult in _unique_modes(bath):
            f = np.asarray(per_mode(mode, t=t, **kwargs))
            log_mod = log_mod + mult * np.log(np.abs(f))
            phase = phase + mult * np.angle(f)
    return (np.exp(log_mod) * np.exp(1j * phase))[()]


def dephasing_exponents(bath: DiscreteBath, per_mode: Callable, t, **kwargs):
    """Per-mode ``Delta_j(t) = -ln|F_j(t)|``, shape ``(N,) + t.shape``."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return np.stack([-np.log(np.abs(per_mode(m, t=t, **kwargs)))
                         for m in bath.modes])


@dataclass(frozen=True)
class DephasingCurve:
    times: np.ndarray
    s_values: np.ndarray
    factors: np.ndarray = None
    deltas: np.ndarray = None


def dephasing_curve(bath: DiscreteBath, per_mode: Callable, times,
                    keep_deltas: bool = False, **kwargs) -> DephasingCurve:
    """Factor and ``S(t) = -ln|F(N, t)|`` sampled on ``times``."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise DomainError("times must be strictly increasing")
    F = np.atleast_1d(product_factor(bath, per_mode, times, **kwargs))
    with np.errstate(divide="ignore"):
        S = np.maximum(-np.log(np.abs(F)), 0.0)
    deltas = (dephasing_exponents(bath, per_mode, times, **kwargs)
              if keep_deltas else None)
    return DephasingCurve(times, S, F, deltas)


def weak_coupling_exponent(bath: DiscreteBath, xi_a: float, xi_b: float, t):
    """``(xi_a - xi_b)^2 sum_j g_j^2/(2 w_j^2) sin^2(w_j t)``.

    Exponent of the weak-coupling modulus ``|F| = exp(-S_L)`` of an L-qubit
    register; its dependence on the pair enters only via ``xi_a - xi_b``.
    """
    t = np.asarray(t, dtype=float)
    w, g = bath.omegas, bath.gs
    terms = (g / w) ** 2 / 2 * np.sin(np.multiply.outer(t, w)) ** 2
    return ((xi_a - xi_b) ** 2 * terms.sum(axis=-1))[()]


def discrete_s(bath: DiscreteBath, t):
    """``sum_j 8 g_j^2 / w_j^2 sin^2(w_j t)``: the xi = +-2 weak-coupling exponent."""
    return weak_coupling_exponent(bath, 2.0, -2.0, t)


def _s_integrand(sd: SpectralDensity, t: float):
    def f(w):
        # sin(wt)/w written through sinc so the w -> 0 limit 8 J t^2 is exact
        return 8.0 * sd(w) * (t * np.sinc(w * t / np.pi)) ** 2
    return f


def s_integral(sd: SpectralDensity, t, rtol: float = 1e-10,
               max_chunks: int = 200_000) -> np.ndarray:
    """``S(t) = int_0^cutoff 8 J(w) sin^2(wt) / w^2 dw`` by adaptive quadrature.

    The range is split at multiples of ``pi / t`` (one chunk per half period
    of the integrand) and each chunk integrated with QUADPACK.  Raises
    :class:`NumericError` when the summed error estimate exceeds
    ``rtol * |S| + 1e-14``.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise DomainError("t must be >= 0")
    out = np.empty_like(ts)
    knots = None
    if sd.kind == "tabulated":
        ws = sd.samples[0]
        knots = ws[(ws > 0) & (ws < sd.cutoff)]
    for i, ti in enumerate(ts):
        if ti == 0:
            out[i] = 0.0
            continue
        n_chunks = int(math.ceil(sd.cutoff * ti / math.pi))
        if n_chunks > max_chunks:
            raise NumericError(
                f"s_integral: cutoff*t = {sd.cutoff * ti:.3g} needs "
                f"{n_chunks} chunks (max {max_chunks})")
        edges = np.linspace(0.0, sd.cutoff, n_chunks + 1)
        if knots is not None and knots.size:
            edges = np.union1d(edges, knots)
        f = _s_integrand(sd, ti)
        total, err = 0.0, 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, e = integrate.quad(f, a, b, epsabs=0.0,
                                        epsrel=rtol * 1e-2, limit=200)
            total += val
            err += e
        if not np.isfinite(total) or err > rtol * abs(total) + 1e-14:
            raise NumericError(
                f"s_integral did not converge at t={ti:g}: value={total:.6g}, "
                f"error estimate={err:.3g}, chunks={edges.size - 1}")
        out[i] = total
    return out if np.ndim(t) else out[0]


def scaling_exponent(spec: RegisterSpec, q: BasisLabel, q2: BasisLabel) -> float:
    """``(xi(q) - xi(q2))^2 / 2``: multiplier of ``sum g^2/w^2 sin^2(wt)``."""
    return 0.5 * (xi(q, spec) - xi(q2, spec)) ** 2


@dataclass(frozen=True)
class DecayFit:
    rate: float
    t_d: float
    residual: float


def estimate_decoherence_time(times, moduli) -> DecayFit:
    """Fit ``-ln|F| = rate * t`` through the origin by least squares.

    ``residual`` is the RMS misfit of ``-ln|F|``.
    """
    t = np.asarray(times, dtype=float)
    m = np.asarray(moduli, dtype=float)
    if t.shape != m.shape or t.ndim != 1 or t.size < 3:
        raise DomainError("need >= 3 matching samples of (t, |F|)")
    if np.any(m <= 0) or np.any(m > 1 + 1e-12):
        raise DomainError("|F| samples must lie in (0, 1]")
    y = -np.log(np.minimum(m, 1.0))
    denom = np.dot(t, t)
    if denom == 0:
        raise DomainError("all sample times are zero")
    rate = float(np.dot(t, y) / denom)
    if not rate > 0:
        raise NoDecayError("no decay detected")
    residual = float(np.sqrt(np.mean((y - rate * t) ** 2)))
    return DecayFit(rate, 1.0 / rate, residual)


@dataclass(frozen=True)
class FeasibilityInput:
    L: int
    tau: float
    K: float
    t_d: float

    def __post_init__(self):
        for name in ("L", "tau", "K", "t_d"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive, got {v}")


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    margin: float

    def report(self) -> str:
        return f"{'FEASIBLE' if self.feasible else 'INFEASIBLE'} margin={self.margin!r}"


def feasibility(fi: FeasibilityInput) -> FeasibilityVerdict:
    """Whether ``L^2 tau K < t_d``; ``margin = t_d - L^2 tau K``."""
    cost = fi.L ** 2 * fi.tau * fi.K
    return FeasibilityVerdict(cost < fi.t_d, fi.t_d - cost)


def default_time_grid(bath: DiscreteBath, n: int = 200) -> np.ndarray:
    return np.geomspace(1e-3 / bath.omegas.max(), 10.0 / bath.omegas.min(), n)
