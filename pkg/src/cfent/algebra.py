"""Composite-fermion operators A+ = sum Phi[mu, nu] a+_mu b+_nu and their algebra.

The closed-form (anti)commutator expansions are assembled term by term from
constituent operators and compared against direct operator products on the
part of the truncated space where the cutoff cannot interfere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

from .fock import (
    FockBasis,
    StructureFunction,
    anticommutator,
    boson_annihilate,
    boson_create,
    commutator,
    fermion_annihilate,
    fermion_create,
    prune,
)

NORM_TOL = 1e-12


def as_structural(phi, basis: FockBasis | None = None) -> np.ndarray:
    """Coerce to a complex ``(D_b, D_f)`` array, checking shape against ``basis``."""
    phi = np.atleast_2d(np.asarray(phi, dtype=complex))
    if phi.ndim != 2:
        raise ValueError("structural matrix must be 2-D")
    if basis is not None:
        expect = (basis.config.boson_modes, basis.config.fermion_modes)
        if phi.shape != expect:
            raise ValueError(f"structural matrix shape {phi.shape} does not match basis {expect}")
    return phi


def normalize(phi) -> np.ndarray:
    phi = as_structural(phi)
    return phi / np.sqrt(np.trace(phi @ phi.conj().T).real)


def is_normalized(phi, tol: float = NORM_TOL) -> bool:
    phi = as_structural(phi)
    return abs(np.trace(phi @ phi.conj().T).real - 1.0) < tol


@dataclass(frozen=True)
class DeltaChi:
    """k-th forward difference of a structure function."""

    chi: StructureFunction
    order: int

    def __call__(self, n: int) -> float:
        return delta_chi(self.chi, self.order, n)


def delta_chi(chi: StructureFunction, k: int, n: int) -> float:
    if k < 0 or n < 0:
        raise ValueError("order and occupation must be non-negative")
    if n + k > chi.n_max + 1:
        raise ValueError(f"chi is tabulated up to {chi.n_max + 1}, need chi({n + k})")
    return float(sum((-1) ** (k - l) * comb(k, l) * chi.values[n + l] for l in range(k + 1)))


class Constituents:
    """Cached constituent operators for one (basis, chi) pair."""

    def __init__(self, basis: FockBasis, chi: StructureFunction):
        self.basis = basis
        self.chi = chi
        nb, nf = basis.config.boson_modes, basis.config.fermion_modes
        self.a_dag = [boson_create(basis, chi, m) for m in range(nb)]
        self.a = [boson_annihilate(basis, chi, m) for m in range(nb)]
        self.b_dag = [fermion_create(basis, v) for v in range(nf)]
        self.b = [fermion_annihilate(basis, v) for v in range(nf)]
        self._delta = {}

    def delta(self, mode: int, k: int) -> sp.csr_matrix:
        """Diagonal operator Delta_k chi(n_mode).

        Entries needing chi beyond its table (n + k > n_max + 1) are set to
        zero; those states lie outside every safe region that uses order k.
        """
        key = (mode, k)
        if key not in self._delta:
            n = self.basis.boson_occ[:, mode]
            vals = np.zeros(len(n))
            top = self.chi.n_max + 1
            for i, occ in enumerate(n):
                if occ + k <= top:
                    vals[i] = delta_chi(self.chi, k, int(occ))
            self._delta[key] = prune(sp.diags(vals.astype(complex), format="csr"))
        return self._delta[key]

    def is_linear(self) -> bool:
        vals = self.chi.values
        return bool(np.allclose(vals, np.arange(len(vals)), atol=1e-14))


@lru_cache(maxsize=32)
def constituents(basis: FockBasis, chi: StructureFunction) -> Constituents:
    return Constituents(basis, chi)


def build_composite_creator(phi, basis: FockBasis, chi: StructureFunction) -> sp.csr_matrix:
    """A+ for one structural matrix; the annihilator is its conjugate transpose."""
    phi = as_structural(phi, basis)
    ops = constituents(basis, chi)
    out = basis.zero()
    for mu, nu in zip(*np.nonzero(phi)):
        out = out + phi[mu, nu] * (ops.a_dag[mu] @ ops.b_dag[nu])
    return prune(out)


def build_composite_annihilator(phi, basis: FockBasis, chi: StructureFunction) -> sp.csr_matrix:
    return build_composite_creator(phi, basis, chi).conj().T.tocsr()


def one_cf_state(phi, basis: FockBasis) -> np.ndarray:
    """sum Phi[mu, nu] |a_mu> (x) |b_nu>, one boson quantum and one fermion."""
    phi = as_structural(phi, basis)
    nb, nf = phi.shape
    psi = np.zeros(basis.dim, dtype=complex)
    for mu in range(nb):
        for nu in range(nf):
            bos = [0] * nb
            fer = [0] * nf
            bos[mu] = 1
            fer[nu] = 1
            psi[basis.index[(tuple(bos), tuple(fer))]] += phi[mu, nu]
    return psi


class WeakEquality(NamedTuple):
    holds: bool
    residual: float


def generated_states(generators: Sequence, basis: FockBasis, depth: int) -> list[np.ndarray]:
    """All ordered products A+_{g_m} ... A+_{g_1}|0> for m = 0..depth."""
    states = [basis.vacuum()]
    frontier = [basis.vacuum()]
    for _ in range(depth):
        frontier = [g @ psi for psi in frontier for g in generators]
        states.extend(frontier)
    return states


def weak_equal(G, H, generators: Sequence, basis: FockBasis, tol: float = 1e-10,
               depth: int | None = None) -> WeakEquality:
    """Compare G and H on the states generated from the vacuum by ``generators``.

    Residual is ``|(G - H) psi| / |psi|`` maximised over generated states;
    states that vanish identically are skipped. ``depth`` defaults to the
    number of fermion modes.
    """
    if depth is None:
        depth = basis.config.fermion_modes
    diff = sp.csr_matrix(G) - sp.csr_matrix(H)
    worst = 0.0
    for psi in generated_states(generators, basis, depth):
        norm = np.linalg.norm(psi)
        if norm < 1e-12:
            continue
        worst = max(worst, float(np.linalg.norm(diff @ psi) / norm))
    return WeakEquality(worst < tol, worst)


def safe_residual(x, y, basis: FockBasis, headroom: int) -> float:
    """max |x - y| entrywise over columns in the truncation-safe region."""
    cols = np.nonzero(basis.safe_mask(headroom))[0]
    if len(cols) == 0:
        raise ValueError(f"cutoff {basis.n_max} leaves no states with headroom {headroom}")
    d = (sp.csr_matrix(x) - sp.csr_matrix(y)).tocsc()[:, cols]
    return float(np.abs(d.data).max()) if d.nnz else 0.0


# --- closed forms -----------------------------------------------------------

def anticommutator_expansion(phi_a, phi_b, basis: FockBasis, chi: StructureFunction):
    """Three-term expansion of {A_a, A+_b}: Delta_1 trace term + a+a term - b+b Delta_1 term."""
    ops = constituents(basis, chi)
    pa, pb = as_structural(phi_a, basis), as_structural(phi_b, basis)
    nb, nf = pa.shape
    ba = pb @ pa.conj().T
    out = basis.zero()
    for mu in range(nb):
        out = out + ba[mu, mu] * ops.delta(mu, 1)
        for mu1 in range(nb):
            if ba[mu1, mu] != 0:
                out = out + ba[mu1, mu] * (ops.a_dag[mu1] @ ops.a[mu])
        for nu in range(nf):
            for nu1 in range(nf):
                c = np.conj(pa[mu, nu]) * pb[mu, nu1]
                if c != 0:
                    out = out - c * (ops.b_dag[nu1] @ ops.b[nu] @ ops.delta(mu, 1))
    return prune(out)


def anticommutator_nondeformed(phi_a, phi_b, basis: FockBasis, chi: StructureFunction):
    """Reduction of the expansion for chi(n) = n."""
    ops = constituents(basis, chi)
    pa, pb = as_structural(phi_a, basis), as_structural(phi_b, basis)
    ba = pb @ pa.conj().T
    ab = pa.conj().T @ pb
    out = np.trace(ba) * basis.identity()
    for mu1, mu in itertools.product(range(pa.shape[0]), repeat=2):
        out = out + ba[mu1, mu] * (ops.a_dag[mu1] @ ops.a[mu])
    for nu, nu1 in itertools.product(range(pa.shape[1]), repeat=2):
        out = out - ab[nu, nu1] * (ops.b_dag[nu1] @ ops.b[nu])
    return prune(out)


def commutator_expansion(phi_a, phi_b, phi_c, basis: FockBasis, chi: StructureFunction):
    """Closed form of [{A_a, A+_b}, A+_c]."""
    ops = constituents(basis, chi)
    pa, pb, pc = (as_structural(p, basis) for p in (phi_a, phi_b, phi_c))
    nb, nf = pa.shape
    ba = pb @ pa.conj().T
    ca = pc @ pa.conj().T
    out = basis.zero()
    for mu, mu1, nu1 in itertools.product(range(nb), range(nb), range(nf)):
        c = ba[mu1, mu] * pc[mu, nu1] - ca[mu1, mu] * pb[mu, nu1]
        if c == 0:
            continue
        diag = ops.delta(mu, 1)
        if mu == mu1:
            diag = diag + ops.delta(mu, 2)
        out = out + c * (ops.a_dag[mu1] @ ops.b_dag[nu1] @ diag)
    for mu in range(nb):
        for nu, nu_p, nu1 in itertools.product(range(nf), repeat=3):
            c = np.conj(pa[mu, nu]) * pb[mu, nu_p] * pc[mu, nu1]
            if c == 0:
                continue
            out = out + c * (ops.a_dag[mu] @ ops.b_dag[nu_p] @ ops.b_dag[nu1]
                             @ ops.b[nu] @ ops.delta(mu, 2))
    return prune(out)


def commutator_nondeformed(phi_a, phi_b, phi_c, basis: FockBasis, chi: StructureFunction):
    """sum (Phi_b Phi_a^+ Phi_c - Phi_c Phi_a^+ Phi_b)[mu, nu] a+_mu b+_nu."""
    pa, pb, pc = (as_structural(p, basis) for p in (phi_a, phi_b, phi_c))
    m = pb @ pa.conj().T @ pc - pc @ pa.conj().T @ pb
    return build_composite_creator(m, basis, chi)


def double_expansion(phi_a, phi_b, phi_c1, phi_c2, basis: FockBasis, chi: StructureFunction):
    """Closed form of {[{A_a, A+_b}, A+_c1], A+_c2}."""
    ops = constituents(basis, chi)
    pa, pb, p1, p2 = (as_structural(p, basis) for p in (phi_a, phi_b, phi_c1, phi_c2))
    nb, nf = pa.shape
    ba = pb @ pa.conj().T
    c1a = p1 @ pa.conj().T
    c2a = p2 @ pa.conj().T
    out = basis.zero()
    for mu, mu1, nu1, nu2 in itertools.product(range(nb), range(nb), range(nf), range(nf)):
        c = (ba[mu1, mu] * p1[mu, nu1] * p2[mu, nu2]
             - c1a[mu1, mu] * pb[mu, nu1] * p2[mu, nu2]
             + c2a[mu1, mu] * pb[mu, nu1] * p1[mu, nu2])
        if c == 0:
            continue
        diag = ops.delta(mu, 2)
        if mu == mu1:
            diag = diag + ops.delta(mu, 3)
        out = out + c * (ops.a_dag[mu] @ ops.a_dag[mu1] @ ops.b_dag[nu1] @ ops.b_dag[nu2] @ diag)
    for mu in range(nb):
        a2 = ops.a_dag[mu] @ ops.a_dag[mu]
        for nu, nu_p, nu1, nu2 in itertools.product(range(nf), repeat=4):
            c = np.conj(pa[mu, nu]) * pb[mu, nu_p] * p1[mu, nu1] * p2[mu, nu2]
            if c == 0:
                continue
            out = out - c * (a2 @ ops.b_dag[nu_p] @ ops.b_dag[nu1] @ ops.b_dag[nu2]
                             @ ops.b[nu] @ ops.delta(mu, 3))
    return prune(out)


# --- verification -----------------------------------------------------------

def composite_pair(phi, basis, chi):
    c = build_composite_creator(phi, basis, chi)
    return c, c.conj().T.tocsr()


def verify_anticommutator_expansion(phi_a, phi_b, chi: StructureFunction, basis: FockBasis) -> float:
    """Max entrywise gap between {A_a, A+_b} and its expansion on the safe region.

    For chi(n) = n the non-deformed reduction is checked as well.
    """
    _, a_a = composite_pair(phi_a, basis, chi)
    c_b, _ = composite_pair(phi_b, basis, chi)
    direct = anticommutator(a_a, c_b)
    res = safe_residual(direct, anticommutator_expansion(phi_a, phi_b, basis, chi), basis, 1)
    if constituents(basis, chi).is_linear():
        res = max(res, safe_residual(direct, anticommutator_nondeformed(phi_a, phi_b, basis, chi),
                                     basis, 1))
    return res


def verify_nested_identities(phis: Sequence, chi: StructureFunction, basis: FockBasis,
                             double: bool = True) -> float:
    """Check the commutator and double (anti)commutator closed forms for all index tuples."""
    pairs = [composite_pair(p, basis, chi) for p in phis]
    linear = constituents(basis, chi).is_linear()
    worst = 0.0
    k = len(phis)
    acs = {}
    for a, b in itertools.product(range(k), repeat=2):
        acs[a, b] = anticommutator(pairs[a][1], pairs[b][0])
    for a, b, c in itertools.product(range(k), repeat=3):
        direct = commutator(acs[a, b], pairs[c][0])
        closed = commutator_expansion(phis[a], phis[b], phis[c], basis, chi)
        worst = max(worst, safe_residual(direct, closed, basis, 2))
        if linear:
            nd = commutator_nondeformed(phis[a], phis[b], phis[c], basis, chi)
            worst = max(worst, safe_residual(direct, nd, basis, 2))
        if double:
            for d in range(k):
                direct2 = anticommutator(direct, pairs[d][0])
                closed2 = double_expansion(phis[a], phis[b], phis[c], phis[d], basis, chi)
                worst = max(worst, safe_residual(direct2, closed2, basis, 3))
    return worst


def strict_independence_residual(phis: Sequence, basis: FockBasis, chi: StructureFunction) -> float:
    """max entrywise |{A+_a, A+_b}| over all pairs, including a == b."""
    creators = [build_composite_creator(p, basis, chi) for p in phis]
    worst = 0.0
    for x, y in itertools.product(creators, repeat=2):
        d = x @ y + y @ x
        if d.nnz:
            worst = max(worst, float(np.abs(d.data).max()))
    return worst


def realization_weak_residual(phis: Sequence, basis: FockBasis, chi: StructureFunction,
                              depth: int = 1) -> float:
    """Residual of {A_a, A+_b} ~ delta_ab [phi(N+1) + phi(N)] on generated states.

    The realized structure function is fermionic (phi(0)=0, phi(1)=1, phi(2)=0),
    so the right-hand side acts as the identity on vacuum and one-CF states.
    """
    pairs = [composite_pair(p, basis, chi) for p in phis]
    gens = [c for c, _ in pairs]
    ident = basis.identity()
    worst = 0.0
    for a, b in itertools.product(range(len(phis)), repeat=2):
        lhs = anticommutator(pairs[a][1], pairs[b][0])
        rhs = ident if a == b else basis.zero()
        worst = max(worst, weak_equal(lhs, rhs, gens, basis, depth=depth).residual)
    return worst
