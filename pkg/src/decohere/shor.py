"""Shor period-finding output statistics with a dephasing environment.

The first register holds ``a in [0, q)``, the second ``x**a mod n``.  The
environment attached to the first register leaves a kernel ``F(a, a')`` on
the reduced density matrix, and the probability of reading ``(c, x**k)``
becomes::

    p'(c, k) = q^-2 sum_{a, a' = k mod r} exp[2 pi i (a - a') c / q] F(a, a')

The Fourier transform itself is treated as noiseless.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .decoherence import factor_two_level_thermal, product_factor
from .environment import VACUUM, DiscreteBath, ThermalState
from .errors import DomainError, KernelValidityError, ResourceCapError
from .registers import RegisterSpec, xi_table

__all__ = [
    "ShorInstance",
    "DecoherenceKernel",
    "ShorDistribution",
    "SuccessReport",
    "EfficiencySpec",
    "EfficiencyVerdict",
    "multiplicative_order",
    "totient",
    "shor_distribution",
    "shor_distribution_decohered",
    "success_probability",
    "good_c_values",
    "complete_decoherence_chain",
    "classify_efficiency",
    "DEFAULT_MAX_WORK",
]

log = logging.getLogger(__name__)

DEFAULT_MAX_WORK = 2 ** 32
MAX_Q = 2 ** 16


def multiplicative_order(x: int, n: int) -> int:
    """Least ``r >= 1`` with ``x**r = 1 (mod n)``."""
    if n < 3:
        raise DomainError(f"n must be >= 3, got {n}")
    g = math.gcd(x, n)
    if g != 1:
        raise DomainError(f"gcd({x}, {n}) = {g}: {g} is a factor of {n}")
    x %= n
    r, y = 1, x
    while y != 1:
        y = y * x % n
        r += 1
    return r


def totient(r: int) -> int:
    """Euler's phi by trial-division factorisation."""
    if r < 1:
        raise DomainError(f"totient needs r >= 1, got {r}")
    result, m, p = r, r, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


@dataclass(frozen=True)
class ShorInstance:
    n: int
    x: int
    q: int
    r: int = field(init=False)

    def __post_init__(self):
        n, x, q = int(self.n), int(self.x), int(self.q)
        if n < 3:
            raise DomainError(f"n must be >= 3, got {n}")
        if not 1 < x < n:
            raise DomainError(f"x must satisfy 1 < x < n, got x={x}")
        if q < n:
            raise DomainError(f"q must be >= n, got q={q}")
        if q > MAX_Q:
            raise ResourceCapError(f"q={q} exceeds the cap {MAX_Q}")
        object.__setattr__(self, "r", multiplicative_order(x, n))

    @property
    def register_bits(self) -> int:
        return max(1, (self.q - 1).bit_length())


@dataclass(frozen=True)
class DecoherenceKernel:
    """Environment overlap ``F(a, a')`` between first-register states.

    kind ``"isolated"``: F = 1.  ``"complete"``: F = delta(a, a').
    ``"two-level"``: each value ``a`` is read as a bit string and couples with
    ``xi(a)`` under ``spec`` to ``bath`` for time ``t``; F is the bath product
    factor, so it depends on ``(a, a')`` only through ``(xi(a), xi(a'))``.
    """

    kind: str
    spec: Optional[RegisterSpec] = None
    bath: Optional[DiscreteBath] = None
    t: float = 0.0
    th: ThermalState = VACUUM

    def __post_init__(self):
        if self.kind not in ("isolated", "complete", "two-level"):
            raise DomainError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "two-level":
            if self.spec is None or self.bath is None:
                raise DomainError("two-level kernel needs spec and bath")
            if self.t < 0:
                raise DomainError("t must be >= 0")

    @classmethod
    def isolated(cls):
        return cls("isolated")

    @classmethod
    def complete(cls):
        return cls("complete")

    @classmethod
    def two_level(cls, bath: DiscreteBath, t: float, L: int = None,
                  spec: RegisterSpec = None, th: ThermalState = VACUUM):
        """Kernel for identical qubits (``lambda_k = 1``) unless ``spec`` given."""
        if spec is None:
            if L is None:
                raise DomainError("give L or spec")
            spec = RegisterSpec.identical(L)
        return cls("two-level", spec, bath, float(t), th)

    def classes(self, q: int):
        """Class label of every ``a < q`` and the class-by-class factor matrix."""
        if self.kind != "two-level":
            raise DomainError("only the two-level kernel is class-based")
        if 2 ** self.spec.L < q:
            raise DomainError(
                f"register spec has {self.spec.L} qubits, need "
                f"{max(1, (q - 1).bit_length())} for q={q}")
        xis = xi_table(self.spec)[:q]
        levels, inverse = np.unique(xis, return_inverse=True)
        K = np.ones((levels.size, levels.size), dtype=complex)
        for i in range(levels.size):
            for j in range(i + 1, levels.size):
                K[i, j] = product_factor(self.bath, factor_two_level_thermal,
                                         self.t, xi_a=levels[i],
                                         xi_b=levels[j], th=self.th)
                K[j, i] = np.conj(K[i, j])
        return inverse, K

    def matrix(self, q: int) -> np.ndarray:
        """Dense ``F[a, a']`` for ``a, a' < q``."""
        if self.kind == "isolated":
            return np.ones((q, q), dtype=complex)
        if self.kind == "complete":
            return np.eye(q, dtype=complex)
        inverse, K = self.classes(q)
        return K[np.ix_(inverse, inverse)]


@dataclass(frozen=True)
class ShorDistribution:
    """``probabilities[c, k]``, shape ``(q, r)``."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 2:
            raise DomainError("probabilities must be a (q, r) array")
        if np.any(p < 0):
            raise DomainError("negative probability")
        if abs(p.sum() - 1) > 1e-9:
            raise DomainError(f"probabilities sum to {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def q(self) -> int:
        return self.probabilities.shape[0]

    @property
    def r(self) -> int:
        return self.probabilities.shape[1]


def _check_work(work: float, max_work: float):
    if work > max_work:
        raise ResourceCapError(f"estimated work {work:.3g} exceeds cap {max_work:.3g}")


def _residue_sums(q: int, r: int, weights=None) -> np.ndarray:
    """``sum_{a = k mod r} w_a exp(2 pi i a c / q)`` as a (q, r) array."""
    a = np.arange(q)
    w = np.ones(q) if weights is None else weights
    V = np.zeros((r, q), dtype=complex)
    V[a % r, a] = w
    # ifft carries exp(+2 pi i a c / q) / q
    return (q * np.fft.ifft(V, axis=1)).T


def shor_distribution(inst: ShorInstance,
                      max_work: float = DEFAULT_MAX_WORK) -> ShorDistribution:
    """Noiseless ``p(c, k) = q^-2 |sum_{a = k mod r} exp(2 pi i a c / q)|^2``."""
    q, r = inst.q, inst.r
    _check_work(q * r ** 2, max_work)
    S = _residue_sums(q, r)
    return ShorDistribution(np.abs(S) ** 2 / q ** 2)


def shor_distribution_decohered(inst: ShorInstance, kernel: DecoherenceKernel,
                                max_work: float = DEFAULT_MAX_WORK,
                                clip_tol: float = 1e-12) -> ShorDistribution:
    """``p'(c, k)`` for the given environment kernel.

    Class-based kernels reduce the double sum over ``(a, a')`` to a quadratic
    form over coupling classes, costing ``O(G^2 q r)`` for G classes.
    Entries that come out negative by less than ``clip_tol`` are clipped to
    zero with a warning; larger negatives raise :class:`KernelValidityError`.
    """
    q, r = inst.q, inst.r
    _check_work(q * r ** 2, max_work)
    if kernel.kind == "isolated":
        p = np.abs(_residue_sums(q, r)) ** 2 / q ** 2
    elif kernel.kind == "complete":
        counts = np.bincount(np.arange(q) % r, minlength=r).astype(float)
        p = np.broadcast_to(counts / q ** 2, (q, r)).copy()
    else:
        inverse, K = kernel.classes(q)
        G = K.shape[0]
        _check_work(G ** 2 * q * r, max_work)
        # S[g][c, k]: residue sum restricted to class g
        S = np.stack([_residue_sums(q, r, (inverse == g).astype(float))
                      for g in range(G)])
        quad = np.einsum("gck,gh,hck->ck", S, K, S.conj())
        imag = np.max(np.abs(quad.imag), initial=0.0)
        if imag > 1e-9 * max(1.0, np.max(np.abs(quad.real), initial=0.0)):
            raise KernelValidityError(f"kernel is not Hermitian (imag {imag:.3g})")
        p = quad.real / q ** 2
    low = p.min()
    if low < -clip_tol:
        raise KernelValidityError(f"negative probability {low:.3g}")
    if low < 0:
        log.warning("clipping negative probabilities down to %.3g", low)
        p = np.maximum(p, 0.0)
    return ShorDistribution(p)


def good_c_values(q: int, r: int) -> np.ndarray:
    """``c`` within 1/2 of ``j q / r`` for some ``j`` coprime to ``r``."""
    c = np.arange(q)
    good = np.zeros(q, dtype=bool)
    for j in range(r):
        if math.gcd(j, r) != 1:
            continue
        # |c r - j q| <= r/2 is |c - j q / r| <= 1/2 in exact integers
        good |= np.abs(c * r - j * q) * 2 <= r
    return np.flatnonzero(good)


@dataclass(frozen=True)
class SuccessReport:
    probability: float
    lower_bound: float
    good_c: np.ndarray
    r: int
    phi_r: int

    def report(self) -> str:
        return (f"success={self.probability!r} r={self.r} phi(r)={self.phi_r} "
                f"r*phi(r)*min_good_p={self.lower_bound!r}")


def success_probability(dist: ShorDistribution, inst: ShorInstance) -> SuccessReport:
    """Probability of a ``c`` from which the period can be read off.

    Also reports ``r * phi(r) * min p(c, k)`` over good ``(c, k)``.
    """
    r = inst.r
    if r == 1:
        raise DomainError("r = 1: x = 1 mod n, success is undefined")
    if dist.probabilities.shape != (inst.q, r):
        raise DomainError("distribution does not match instance")
    good = good_c_values(inst.q, r)
    p = dist.probabilities[good]
    return SuccessReport(float(p.sum()), float(r * totient(r) * p.min()),
                         good, r, totient(r))


def complete_decoherence_chain(inst: ShorInstance) -> dict:
    """Links of ``phi(r)/q <= phi(r)/n^2 <= 1/n`` with their premises.

    The middle link needs ``q >= n^2`` and the last ``phi(r) <= n``; each
    is reported separately so instances violating a premise are flagged.
    """
    phi = totient(inst.r)
    return {
        "phi_r_over_q": phi / inst.q,
        "q_ge_n2": inst.q >= inst.n ** 2,
        "phi_r_le_n": phi <= inst.n,
        "link1": phi / inst.q <= phi / inst.n ** 2,
        "link2": phi / inst.n ** 2 <= 1 / inst.n,
    }


@dataclass(frozen=True)
class EfficiencySpec:
    """One-try success probability ``f(N)`` and repetition polynomial ``p``.

    ``poly`` holds coefficients lowest order first: ``p(x) = sum c_i x**i``.
    """

    f: Callable[[np.ndarray], np.ndarray]
    poly: tuple
    label: str = "custom"
    # log(1 - f(N)) directly, for f too close to 0 or 1 for float subtraction
    log1mf: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        object.__setattr__(self, "poly", tuple(float(c) for c in self.poly))

    @classmethod
    def reciprocal_log(cls, c: float, poly: Sequence[float]):
        """``f(N) = 1 / (c ln N)``."""
        return cls(lambda N: 1.0 / (c * np.log(N)), poly, f"1/({c:g} ln N)")

    @classmethod
    def reciprocal(cls, poly: Sequence[float]):
        """``f(N) = 1 / N``."""
        return cls(lambda N: 1.0 / np.asarray(N, float), poly, "1/N",
                   log1mf=lambda N: np.log1p(-1.0 / np.asarray(N, float)))

    @classmethod
    def sampled(cls, N: Sequence[float], f: Sequence[float],
                poly: Sequence[float]):
        """f interpolated linearly in ``ln N`` between samples."""
        lnN = np.log(np.asarray(N, float))
        fv = np.asarray(f, float)
        return cls(lambda x: np.interp(np.log(x), lnN, fv), poly, "sampled")

    def lam(self, N) -> np.ndarray:
        """``p(ln N) ln(1 - f(N))``; ``-inf`` where ``f >= 1``."""
        N = np.asarray(N, float)
        pv = np.polynomial.polynomial.polyval(np.log(N), self.poly)
        if self.log1mf is not None:
            l1 = self.log1mf(N)
        else:
            fv = np.asarray(self.f(N), float)
            with np.errstate(divide="ignore", invalid="ignore"):
                l1 = np.where(fv >= 1, -np.inf, np.log1p(-np.minimum(fv, 1)))
        with np.errstate(invalid="ignore"):
            return pv * l1


@dataclass(frozen=True)
class EfficiencyVerdict:
    verdict: str
    limit: float
    N: np.ndarray
    lam: np.ndarray
    tail_slope: float
    richardson: tuple = ()

    def report(self) -> str:
        return (f"{self.verdict} limit={self.limit!r} "
                f"tail_slope={self.tail_slope!r}")


def classify_efficiency(es: EfficiencySpec, N_grid=None, margin: float = 1e-3,
                        decay_slope: float = -0.25) -> EfficiencyVerdict:
    """Estimate ``lim (1 - f(N))**p(ln N)`` and classify the algorithm.

    ``Lambda(N) = p(ln N) ln(1 - f(N))`` is evaluated on a geometric grid.
    Its tail is examined two ways:

    * the log-log slope of ``|Lambda|`` over the upper half of ``ln N``.  A
      clearly negative slope means ``Lambda -> 0`` (limit 1);
    * otherwise ``Lambda`` is extrapolated to ``1/ln N -> 0`` with quadratic
      and linear least-squares fits (Richardson style) over the same tail.

    ``Efficient`` if the limit is below ``1 - margin``; ``NotEfficient`` if it
    is at least ``1 - margin`` and the tail is flat or decaying;
    ``Inconclusive`` otherwise.  A grid point with ``f >= 1`` makes the
    result trivially ``Efficient``.
    """
    N = np.geomspace(10.0, 1e12, 221) if N_grid is None else np.asarray(N_grid, float)
    if N.ndim != 1 or N.size < 6 or np.any(N <= 1) or np.any(np.diff(N) <= 0):
        raise DomainError("N_grid must be >= 6 increasing values above 1")
    pv = np.polynomial.polynomial.polyval(np.log(N), es.poly)
    if np.any(pv <= 0):
        raise DomainError("p(ln N) must be positive on the grid")
    lam = es.lam(N)
    if np.any(np.isneginf(lam)):
        return EfficiencyVerdict("Efficient", 0.0, N, lam, np.nan)
    if np.any(lam > 0) or not np.all(np.isfinite(lam)):
        raise DomainError("f(N) must lie in [0, 1] on the grid")

    lnN = np.log(N)
    tail = lnN >= 0.5 * lnN[-1]
    if tail.sum() < 3:
        tail[-3:] = True
    absl = np.abs(lam[tail])
    if np.all(absl == 0):
        return EfficiencyVerdict("NotEfficient", 1.0, N, lam, -np.inf)
    if np.any(absl == 0):
        slope = -np.inf
    else:
        slope = float(np.polyfit(lnN[tail], np.log(absl), 1)[0])
    if slope < decay_slope:
        return EfficiencyVerdict("NotEfficient", 1.0, N, lam, slope)

    h = 1.0 / lnN[tail]
    r2 = float(np.polyval(np.polyfit(h, lam[tail], 2), 0.0))
    r1 = float(np.polyval(np.polyfit(h, lam[tail], 1), 0.0))
    limit = float(np.exp(min(r2, 0.0)))
    if limit < 1 - margin:
        verdict = "Efficient"
    elif abs(slope) <= abs(decay_slope):
        verdict = "NotEfficient"
    else:
        verdict = "Inconclusive"
    return EfficiencyVerdict(verdict, limit, N, lam, slope, (r2, r1))
