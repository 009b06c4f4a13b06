"""Truncated Fock spaces for a deformed-boson sector tensored with fermions.

Basis states are tuples ``(n_1..n_Db; e_1..e_Df)`` with ``0 <= n <= n_max``
and ``e in {0, 1}``, enumerated lexicographically (last fermion fastest).
Operators are ``scipy.sparse.csr_matrix`` objects acting on column vectors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
import scipy.sparse as sp

MAX_BASIS_SIZE = 10**7
DROP_TOL = 1e-15


class ResourceLimitError(RuntimeError):
    """Raised when a basis would exceed the configured size limit."""


@dataclass(frozen=True)
class ModeConfig:
    boson_modes: int
    fermion_modes: int
    boson_cutoff: int

    def __post_init__(self):
        if self.boson_modes < 1 or self.fermion_modes < 1:
            raise ValueError("need at least one boson and one fermion mode")
        if self.boson_cutoff < 2:
            raise ValueError("boson_cutoff must be >= 2")

    @property
    def size(self) -> int:
        return (self.boson_cutoff + 1) ** self.boson_modes * 2**self.fermion_modes


@dataclass(frozen=True, eq=False)
class StructureFunction:
    """Deformation map n -> chi(n), tabulated for 0 <= n <= n_max + 1."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) < 3:
            raise ValueError("structure function needs values for n = 0, 1, 2 at least")
        if vals[0] != 0.0:
            raise ValueError("chi(0) must be 0")
        if abs(vals[1] - 1.0) > 1e-12:
            raise ValueError("chi(1) must be 1")
        if np.any(vals < 0):
            raise ValueError("chi(n) must be non-negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, fn: Callable[[int], float], n_max: int) -> "StructureFunction":
        return cls(np.array([fn(n) for n in range(n_max + 2)], dtype=float))

    @classmethod
    def linear(cls, n_max: int) -> "StructureFunction":
        """Non-deformed boson, chi(n) = n."""
        return cls(np.arange(n_max + 2, dtype=float))

    @classmethod
    def from_chi2(cls, chi2: float, n_max: int) -> "StructureFunction":
        """chi(n) = n everywhere except chi(2) = chi2."""
        vals = np.arange(max(n_max + 2, 3), dtype=float)
        vals[2] = chi2
        return cls(vals)

    @classmethod
    def q_deformed(cls, q: float, n_max: int) -> "StructureFunction":
        """Arik-Coon type chi(n) = (1 - q^n) / (1 - q); q = 1 gives chi(n) = n."""
        if q == 1.0:
            return cls.linear(n_max)
        n = np.arange(n_max + 2, dtype=float)
        return cls((1.0 - q**n) / (1.0 - q))

    @property
    def n_max(self) -> int:
        return len(self.values) - 2

    @property
    def chi2(self) -> float:
        return float(self.values[2])

    def __call__(self, n):
        return self.values[n]


class BasisState(NamedTuple):
    bosons: tuple[int, ...]
    fermions: tuple[int, ...]


class FockBasis:
    """Enumerated basis for a :class:`ModeConfig`.

    ``boson_occ`` and ``fermion_occ`` hold the occupation table as integer
    arrays of shape ``(dim, D_b)`` and ``(dim, D_f)``.
    """

    def __init__(self, config: ModeConfig, max_size: int = MAX_BASIS_SIZE):
        if config.size > max_size:
            raise ResourceLimitError(
                f"basis size {config.size} exceeds limit {max_size}"
            )
        self.config = config
        nb, nf = config.boson_modes, config.fermion_modes
        ranges = [range(config.boson_cutoff + 1)] * nb + [range(2)] * nf
        table = np.array(list(itertools.product(*ranges)), dtype=np.int64)
        self.boson_occ = table[:, :nb]
        self.fermion_occ = table[:, nb:]
        self.boson_occ.setflags(write=False)
        self.fermion_occ.setflags(write=False)
        self.states = [
            BasisState(tuple(int(x) for x in row[:nb]), tuple(int(x) for x in row[nb:]))
            for row in table
        ]
        self.index = {s: i for i, s in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def n_max(self) -> int:
        return self.config.boson_cutoff

    def _stride(self, sector: str, mode: int) -> int:
        cfg = self.config
        if sector == "boson":
            return (cfg.boson_cutoff + 1) ** (cfg.boson_modes - 1 - mode) * 2**cfg.fermion_modes
        return 2 ** (cfg.fermion_modes - 1 - mode)

    def vacuum(self) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[0] = 1.0
        return psi

    def basis_vector(self, bosons, fermions) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index[BasisState(tuple(bosons), tuple(fermions))]] = 1.0
        return psi

    def safe_mask(self, headroom: int) -> np.ndarray:
        """States whose every boson occupation is <= n_max - headroom."""
        return np.all(self.boson_occ <= self.n_max - headroom, axis=1)

    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.dim, dtype=complex, format="csr")

    def zero(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.dim, self.dim), dtype=complex)


def enumerate_basis(config: ModeConfig, max_size: int = MAX_BASIS_SIZE) -> FockBasis:
    return FockBasis(config, max_size=max_size)


def prune(op, tol: float = DROP_TOL) -> sp.csr_matrix:
    """Return ``op`` as CSR with entries of modulus below ``tol`` removed."""
    op = sp.csr_matrix(op, dtype=complex)
    op.data[np.abs(op.data) < tol] = 0.0
    op.eliminate_zeros()
    return op


def _check_chi(basis: FockBasis, chi: StructureFunction) -> None:
    if chi.n_max < basis.n_max:
        raise ValueError(
            f"structure function tabulated to n={chi.n_max + 1}, basis needs n={basis.n_max + 1}"
        )


def boson_create(basis: FockBasis, chi: StructureFunction, mode: int) -> sp.csr_matrix:
    """Deformed creation operator: a+|n> = sqrt(chi(n+1)) |n+1>, zero at the cutoff."""
    if not 0 <= mode < basis.config.boson_modes:
        raise IndexError(f"boson mode {mode} out of range")
    _check_chi(basis, chi)
    n = basis.boson_occ[:, mode]
    cols = np.nonzero(n < basis.n_max)[0]
    rows = cols + basis._stride("boson", mode)
    amps = np.sqrt(chi.values[n[cols] + 1]).astype(complex)
    op = sp.csr_matrix((amps, (rows, cols)), shape=(basis.dim, basis.dim))
    return prune(op)


def boson_annihilate(basis: FockBasis, chi: StructureFunction, mode: int) -> sp.csr_matrix:
    return boson_create(basis, chi, mode).conj().T.tocsr()


def fermion_create(basis: FockBasis, mode: int) -> sp.csr_matrix:
    """Fermionic creation with Jordan-Wigner sign over lower-indexed modes."""
    if not 0 <= mode < basis.config.fermion_modes:
        raise IndexError(f"fermion mode {mode} out of range")
    occ = basis.fermion_occ
    cols = np.nonzero(occ[:, mode] == 0)[0]
    rows = cols + basis._stride("fermion", mode)
    parity = occ[cols, :mode].sum(axis=1) % 2
    amps = np.where(parity == 0, 1.0, -1.0).astype(complex)
    return sp.csr_matrix((amps, (rows, cols)), shape=(basis.dim, basis.dim))


def fermion_annihilate(basis: FockBasis, mode: int) -> sp.csr_matrix:
    return fermion_create(basis, mode).conj().T.tocsr()


def number_operator(basis: FockBasis, sector: str, mode: int) -> sp.csr_matrix:
    if sector == "boson":
        if not 0 <= mode < basis.config.boson_modes:
            raise IndexError(f"boson mode {mode} out of range")
        diag = basis.boson_occ[:, mode]
    elif sector == "fermion":
        if not 0 <= mode < basis.config.fermion_modes:
            raise IndexError(f"fermion mode {mode} out of range")
        diag = basis.fermion_occ[:, mode]
    else:
        raise ValueError(f"unknown sector {sector!r}")
    return prune(sp.diags(diag.astype(complex), format="csr"))


def chi_of_number(basis: FockBasis, chi: StructureFunction, mode: int, shift: int = 0):
    """Diagonal operator chi(n_mode + shift)."""
    _check_chi(basis, chi)
    n = basis.boson_occ[:, mode] + shift
    return prune(sp.diags(chi.values[n].astype(complex), format="csr"))


def anticommutator(x, y):
    return prune(x @ y + y @ x)


def commutator(x, y):
    return prune(x @ y - y @ x)
