"""Qubit register labels, coupling-signature grouping and the xi invariant.

A basis label ``|q_0 q_1 ... q_{L-1}>`` is stored least-significant bit first,
so ``index = sum(bits[i] * 2**i)``.  Each qubit's ``S_3`` eigenvalue is
``(-1)**(q_k + 1)``: bit 1 maps to +1 and bit 0 to -1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "RegisterSpec",
    "BasisLabel",
    "CouplingMatrix",
    "SubspaceGroup",
    "SubspaceDecomposition",
    "label_from_index",
    "all_labels",
    "xi",
    "xi_table",
    "spin_signs",
    "decompose_subspaces",
    "coupling_matrix_from_xi",
    "dfs_members",
    "load_coupling_matrix",
]


@dataclass(frozen=True)
class RegisterSpec:
    """L qubits with QND couplings ``lambdas`` and level splittings ``etas``."""

    lambdas: np.ndarray
    etas: np.ndarray = None

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=float))
        if lam.ndim != 1 or lam.size < 1:
            raise DomainError("lambdas must be a non-empty 1-D array")
        eta = np.zeros_like(lam) if self.etas is None else np.atleast_1d(
            np.asarray(self.etas, dtype=float))
        if eta.shape != lam.shape:
            raise DomainError(
                f"etas has length {eta.size}, expected {lam.size}")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(eta))):
            raise DomainError("lambdas and etas must be finite")
        lam.setflags(write=False)
        eta.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "etas", eta)

    @property
    def L(self) -> int:
        return int(self.lambdas.size)

    @classmethod
    def identical(cls, L: int, lam: float = 1.0, eta: float = 0.0):
        return cls(np.full(L, lam), np.full(L, eta))


@dataclass(frozen=True)
class BasisLabel:
    bits: tuple
    index: int

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise DomainError("bits must be 0 or 1")
        if sum(b << i for i, b in enumerate(bits)) != self.index:
            raise DomainError("bits do not reconstruct index")
        object.__setattr__(self, "bits", bits)

    @property
    def L(self) -> int:
        return len(self.bits)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BasisLabel":
        bits = tuple(int(b) for b in bits)
        return cls(bits, sum(b << i for i, b in enumerate(bits)))


def label_from_index(index: int, L: int) -> BasisLabel:
    """Binary label of ``index`` on ``L`` qubits, bit 0 least significant."""
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    index = int(index)
    if not 0 <= index < 2 ** L:
        raise DomainError(f"index {index} outside [0, 2**{L})")
    return BasisLabel(tuple((index >> i) & 1 for i in range(L)), index)


def all_labels(L: int) -> list[BasisLabel]:
    return [label_from_index(n, L) for n in range(2 ** L)]


def spin_signs(L: int) -> np.ndarray:
    """(2**L, L) array of S_3 eigenvalues, row n for basis index n."""
    n = np.arange(2 ** L)[:, None]
    bits = (n >> np.arange(L)[None, :]) & 1
    return 2.0 * bits - 1.0


def xi(label: BasisLabel, spec: RegisterSpec) -> float:
    """Coupling eigenvalue ``sum_k lambda_k (-1)**(q_k + 1)`` of a label."""
    if label.L != spec.L:
        raise DomainError(
            f"label has {label.L} bits but register has L={spec.L}")
    signs = 2.0 * np.asarray(label.bits, dtype=float) - 1.0
    return float(np.dot(spec.lambdas, signs))


def xi_table(spec: RegisterSpec) -> np.ndarray:
    """xi for every basis index of the register, shape (2**L,)."""
    return spin_signs(spec.L) @ spec.lambdas


@dataclass(frozen=True)
class CouplingMatrix:
    """Coupling signatures g[n, j]: system label n, environment particle j.

    Entries may be real numbers or arbitrary hashable tokens.  Real entries
    compare with absolute tolerance ``tol``; tokens compare exactly.
    """

    entries: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DomainError("coupling matrix must be 2-D with M, N >= 1")
        if self.tol < 0:
            raise DomainError("tol must be >= 0")
        object.__setattr__(self, "entries", arr)

    @property
    def shape(self):
        return self.entries.shape

    @property
    def numeric(self) -> bool:
        return np.issubdtype(self.entries.dtype, np.number)

    def rows_equal(self, m: int, n: int) -> bool:
        a, b = self.entries[m], self.entries[n]
        if self.numeric:
            return bool(np.all(np.abs(a - b) <= self.tol))
        return all(x == y for x, y in zip(a, b))


@dataclass(frozen=True)
class SubspaceGroup:
    signature: tuple
    members: tuple

    @property
    def dimension(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class SubspaceDecomposition:
    groups: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    @property
    def dimensions(self) -> list[int]:
        return [g.dimension for g in self.groups]

    def group_of(self, label: int) -> int:
        for i, g in enumerate(self.groups):
            if label in g.members:
                return i
        raise KeyError(label)


def decompose_subspaces(cm: CouplingMatrix) -> SubspaceDecomposition:
    """Group system labels whose coupling rows coincide.

    Each label joins the first earlier group whose representative row it
    matches, so groups come out ordered by their smallest member.  With a
    nonzero tolerance, matching is against the group's first member.
    """
    reps: list[int] = []
    members: list[list[int]] = []
    for n in range(cm.shape[0]):
        for g, rep in enumerate(reps):
            if cm.rows_equal(rep, n):
                members[g].append(n)
                break
        else:
            reps.append(n)
            members.append([n])
    groups = tuple(
        SubspaceGroup(tuple(cm.entries[rep].tolist()), tuple(mem))
        for rep, mem in zip(reps, members))
    return SubspaceDecomposition(groups)


def coupling_matrix_from_xi(spec: RegisterSpec, couplings: Sequence[float],
                            tol: float = 1e-12) -> CouplingMatrix:
    """Rows ``xi(n) * c_j``: the coupling of an L-qubit register to N spins."""
    c = np.atleast_1d(np.asarray(couplings, dtype=float))
    return CouplingMatrix(np.outer(xi_table(spec), c), tol=tol)


def dfs_members(spec: RegisterSpec, xi_value: float,
                tol: float = 1e-12) -> list[BasisLabel]:
    """All basis labels whose xi lies within ``tol`` of ``xi_value``."""
    if tol < 0:
        raise DomainError("tol must be >= 0")
    table = xi_table(spec)
    hits = np.flatnonzero(np.abs(table - xi_value) <= tol)
    return [label_from_index(int(n), spec.L) for n in hits]


def load_coupling_matrix(path, tol: float = 1e-12) -> CouplingMatrix:
    """Whitespace-separated reals, one row per system label."""
    data = np.loadtxt(path, dtype=float, comments="#", ndmin=2)
    return CouplingMatrix(data, tol=tol)
