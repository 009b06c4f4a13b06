"""Realization conditions on structural matrices and their analytic solution families.

Conditions, for all mode indices a, b, c:

* orthonormality   Tr(Phi_b Phi_a^+) = delta_ab
* cubic            Phi_b Phi_a^+ Phi_c - Phi_c Phi_a^+ Phi_b
                   + dchi2 [diag(Phi_b Phi_a^+) Phi_c - diag(Phi_c Phi_a^+) Phi_b] = 0

with dchi2 = chi(2) - 2 (zero for an undeformed constituent boson).
Solution families are generative: parameters in, ``(Phi_1, Phi_2)`` out.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import entanglement as ent
from .algebra import build_composite_creator
from .fock import FockBasis, StructureFunction
from .svd import jacobi_svd

DEGENERACY_TOL = 1e-10
DEFAULT_TOL = 1e-10
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class DeformationSpec:
    chi2: float = 2.0

    @property
    def delta(self) -> float:
        return self.chi2 - 2.0

    @property
    def kind(self) -> str:
        return "nondeformed" if self.chi2 == 2.0 else "deformed"


def _spec(spec) -> DeformationSpec:
    if spec is None:
        return DeformationSpec()
    if isinstance(spec, DeformationSpec):
        return spec
    return DeformationSpec(float(spec))


@dataclass
class RealizationReport:
    residuals: dict[str, float]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(r < self.tolerance for r in self.residuals.values())

    @property
    def total(self) -> float:
        return float(np.sqrt(sum(r * r for r in self.residuals.values())))

    def lines(self) -> list[str]:
        out = [f"{k:>16s}  {v:.3e}" for k, v in self.residuals.items()]
        out.append(("PASS" if self.passed else "FAIL") + f" (tol {self.tolerance:.1e})")
        return out


def _mats(phis) -> list[np.ndarray]:
    mats = [np.atleast_2d(np.asarray(p, dtype=complex)) for p in phis]
    if not mats:
        raise ValueError("no structural matrices given")
    shape = mats[0].shape
    if any(m.shape != shape for m in mats):
        raise ValueError("structural matrices must share one shape")
    return mats


def _diag(m: np.ndarray) -> np.ndarray:
    return np.diag(np.diag(m))


def cubic_term(pa, pb, pc, delta: float = 0.0) -> np.ndarray:
    """Left side of the one-CF realization condition for indices (a, b, c)."""
    ba = pb @ pa.conj().T
    ca = pc @ pa.conj().T
    out = ba @ pc - ca @ pb
    if delta != 0.0:
        out = out + delta * (_diag(ba) @ pc - _diag(ca) @ pb)
    return out


def orthonormality_residuals(phis) -> list[float]:
    mats = _mats(phis)
    k = len(mats)
    return [abs(np.trace(mats[b] @ mats[a].conj().T) - (a == b))
            for a, b in itertools.product(range(k), repeat=2)]


def cubic_residuals(phis, spec=None) -> list[float]:
    mats = _mats(phis)
    d = _spec(spec).delta
    k = len(mats)
    return [float(np.linalg.norm(cubic_term(mats[a], mats[b], mats[c], d)))
            for a, b, c in itertools.product(range(k), repeat=3)]


def check_nondeformed(phis, tol: float = DEFAULT_TOL) -> RealizationReport:
    return RealizationReport(
        {"orthonormality": max(orthonormality_residuals(phis)),
         "cubic": max(cubic_residuals(phis))},
        tol,
    )


def check_deformed(phis, spec, tol: float = DEFAULT_TOL) -> RealizationReport:
    """All-index form of the deformed conditions, any number of modes."""
    spec = _spec(spec)
    return RealizationReport(
        {"orthonormality": max(orthonormality_residuals(phis)),
         "deformed": max(cubic_residuals(phis, spec))},
        tol,
    )


def check_deformed_two_mode(phi1, phi2, spec, tol: float = DEFAULT_TOL) -> RealizationReport:
    """The two independent deformed equations for a pair, plus orthonormality."""
    spec = _spec(spec)
    p1, p2 = _mats([phi1, phi2])
    eq1 = cubic_term(p1, p1, p2, spec.delta)
    eq2 = cubic_term(p2, p1, p2, spec.delta)
    return RealizationReport(
        {"orthonormality": max(orthonormality_residuals([p1, p2])),
         "eq1": float(np.linalg.norm(eq1)),
         "eq2": float(np.linalg.norm(eq2))},
        tol,
    )


def check(phis, spec=None, tol: float = DEFAULT_TOL) -> RealizationReport:
    spec = _spec(spec)
    if spec.delta == 0.0:
        return check_nondeformed(phis, tol)
    if len(phis) == 2:
        return check_deformed_two_mode(phis[0], phis[1], spec, tol)
    return check_deformed(phis, spec, tol)


def _residual_vector(mats, delta: float) -> np.ndarray:
    k = len(mats)
    parts = [np.atleast_1d(np.trace(mats[b] @ mats[a].conj().T) - (a == b))
             for a, b in itertools.product(range(k), repeat=2)]
    parts += [cubic_term(mats[a], mats[b], mats[c], delta).ravel()
              for a, b, c in itertools.product(range(k), repeat=3)]
    return np.concatenate(parts)


def residual(phis, spec=None) -> float:
    """Root-sum-square of every condition residual."""
    mats = _mats(phis)
    return float(np.linalg.norm(_residual_vector(mats, _spec(spec).delta)))


def refine(phis, spec=None, step_tol: float = 1e-12, max_iter: int = 50, fd_step: float = 1e-7):
    """Gauss-Newton polish of a near-solution; returns ``(matrices, residual)``.

    The Jacobian is taken by central differences over real and imaginary
    parts; steps are minimum-norm least-squares solutions.
    """
    mats = _mats(phis)
    shape, k = mats[0].shape, len(mats)
    delta = _spec(spec).delta

    def unpack(x):
        z = x[: x.size // 2] + 1j * x[x.size // 2:]
        return list(z.reshape(k, *shape))

    def f(x):
        r = _residual_vector(unpack(x), delta)
        return np.concatenate([r.real, r.imag])

    z = np.concatenate([m.ravel() for m in mats])
    x = np.concatenate([z.real, z.imag])
    for _ in range(max_iter):
        r = f(x)
        jac = np.empty((r.size, x.size))
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = fd_step
            jac[:, i] = (f(x + e) - f(x - e)) / (2 * fd_step)
        step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        x = x + step
        if np.linalg.norm(step) < step_tol:
            break
    out = unpack(x)
    return out, residual(out, spec)


# --- canonical form ---------------------------------------------------------

@dataclass(frozen=True)
class CanonicalPair:
    d1: np.ndarray
    phi2_tilde: np.ndarray
    u1: np.ndarray
    v1: np.ndarray

    @property
    def d1_matrix(self) -> np.ndarray:
        m, n = self.u1.shape[0], self.v1.shape[0]
        out = np.zeros((m, n), dtype=complex)
        k = len(self.d1)
        out[:k, :k] = np.diag(self.d1)
        return out

    def reconstruct(self):
        v_h = self.v1.conj().T
        return self.u1 @ self.d1_matrix @ v_h, self.u1 @ self.phi2_tilde @ v_h


def canonicalize(phi1, phi2) -> CanonicalPair:
    """SVD of Phi_1 (descending, det U_1 = 1) and Phi_2 in the same frame."""
    p1, p2 = _mats([phi1, phi2])
    if not np.any(p1):
        raise ValueError("Phi_1 must be nonzero")
    u, s, v = jacobi_svd(p1)
    det = np.linalg.det(u)
    fix = np.exp(-1j * np.angle(det) / u.shape[0])
    u, v = u * fix, v * fix
    return CanonicalPair(s, u.conj().T @ p2 @ v, u, v)


def degeneracy_groups(lams, tol: float = DEGENERACY_TOL) -> list[list[int]]:
    """Indices grouped by (near-)equal value, in input order."""
    groups: list[list[int]] = []
    for i, x in enumerate(lams):
        for g in groups:
            if abs(lams[g[0]] - x) < tol:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


# --- random helpers ---------------------------------------------------------

def haar_unitary(n: int, rng) -> np.ndarray:
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_special_unitary(n: int, rng) -> np.ndarray:
    u = haar_unitary(n, rng)
    return u * np.exp(-1j * np.angle(np.linalg.det(u)) / n)


def su2(u: complex, v: complex) -> np.ndarray:
    return np.array([[u, v], [-np.conj(v), np.conj(u)]], dtype=complex)


def phase(rng) -> complex:
    return complex(np.exp(1j * rng.uniform(0.0, TWO_PI)))


def _unit_pair(rng):
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    z /= np.linalg.norm(z)
    return complex(z[0]), complex(z[1])


def r_matrix(u: complex, v: complex) -> np.ndarray:
    """R with U^+ diag(U X U^+) U = (X + R X R) / 2 for U = [[u, v], [-v*, u*]]."""
    au, av = abs(u) ** 2, abs(v) ** 2
    return np.array([[au - av, 2 * np.conj(u) * v],
                     [2 * u * np.conj(v), av - au]], dtype=complex)


def _d1_vector(d1) -> np.ndarray:
    d1 = np.asarray(d1)
    lam = np.real(np.diag(d1)) if d1.ndim == 2 else np.real(d1)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("D1 entries must be non-negative")
    if abs(np.sum(lam**2) - 1.0) > 1e-12:
        raise ValueError(f"D1 is not normalized: sum lambda^2 = {np.sum(lam**2)}")
    return lam


# --- solution families ------------------------------------------------------

@dataclass(frozen=True)
class SolutionFamily:
    """Parameters -> (Phi_1, Phi_2).

    ``free_parameters`` maps parameter names to a human-readable range;
    ``sampler`` draws a full parameter dict from a numpy Generator.
    ``schmidt2`` returns the declared mode-2 Schmidt coefficients, and
    ``entropy2`` the mode-2 entropy from a closed-form expression when one
    exists; both are evaluated independently of ``generator``.
    """

    case_tag: str
    lambdas1: np.ndarray
    free_parameters: dict[str, str]
    generator: Callable[[dict], tuple[np.ndarray, np.ndarray]]
    sampler: Callable[[np.random.Generator], dict]
    chi2: float = 2.0
    variant: str = ""
    schmidt2: Callable[[dict], np.ndarray] | None = None
    entropy2: Callable[[dict], float] | None = None
    entropy1: float | None = None

    def generate(self, params: dict):
        return self.generator(params)

    def sample(self, rng):
        params = self.sampler(rng)
        phi1, phi2 = self.generator(params)
        return params, phi1, phi2


def _frame(params, n, rng, fixed_u1=None):
    if fixed_u1 is None:
        params.setdefault("U1", haar_unitary(n, rng))
    else:
        params["U1"] = fixed_u1
    params.setdefault("V1", haar_unitary(n, rng))
    return params


def _assemble(params, d1, phi2_tilde):
    u1, v1 = params["U1"], params["V1"]
    d = np.diag(np.asarray(d1, dtype=complex))
    return u1 @ d @ v1.conj().T, u1 @ phi2_tilde @ v1.conj().T


def solve_two_mode_nondeformed(d1, u1=None) -> SolutionFamily:
    """Two CF modes, two-mode constituents, chi(n) = n.

    Distinct lambdas give Phi~_2 = e^{i eta'} diag(lambda_2, -lambda_1); equal
    lambdas give Phi~_2 = e^{i eta} lambda U~ with U~ in SU(2), Tr U~ = 0.
    """
    lam = _d1_vector(d1)
    if lam.shape != (2,):
        raise ValueError("two-mode family needs a 2x2 D1")
    l1, l2 = lam

    if abs(l1 - l2) >= DEGENERACY_TOL:
        def gen(p):
            return _assemble(p, lam, np.exp(1j * p["eta_prime"]) * np.diag([l2, -l1]))

        def samp(rng):
            return _frame({"eta_prime": rng.uniform(0, TWO_PI)}, 2, rng, u1)

        return SolutionFamily(
            "two-mode-distinct", lam,
            {"eta_prime": "[0, 2pi)", "U1": "U(2)", "V1": "U(2)"},
            gen, samp,
            schmidt2=lambda p: np.array([max(l1, l2), min(l1, l2)]),
            entropy2=lambda p: ent.s2(np.arctan2(l2, l1)),
            entropy1=ent.s2(np.arctan2(l2, l1)),
        )

    def gen_eq(p):
        a = p["a"]
        ut = su2(1j * a, np.sqrt(1 - a * a) * np.exp(1j * p["psi"]))
        return _assemble(p, lam, np.exp(1j * p["eta"]) * l1 * ut)

    def samp_eq(rng):
        return _frame({"eta": rng.uniform(0, TWO_PI), "a": rng.uniform(-1, 1),
                       "psi": rng.uniform(0, TWO_PI)}, 2, rng, u1)

    return SolutionFamily(
        "two-mode-equal", lam,
        {"eta": "[0, 2pi)", "a": "Im u~_1 in [-1, 1]", "psi": "[0, 2pi)",
         "U1": "U(2)", "V1": "U(2)"},
        gen_eq, samp_eq,
        schmidt2=lambda p: np.array([l1, l1]),
        entropy2=lambda p: ent.LN2,
        entropy1=ent.LN2,
    )


def deformed_basis(d1, u: complex, v: complex) -> list[np.ndarray]:
    """Basis of Phi~_2 orthogonal to D1 used by the 3x3 linear system."""
    l1, l2 = _d1_vector(d1)
    kap = np.exp(1j * (np.angle(v) - np.angle(u)))
    return [
        np.diag([l2, -l1]).astype(complex),
        np.array([[0, kap * l1], [np.conj(kap) * l2, 0]], dtype=complex),
        np.array([[0, -kap * l2], [np.conj(kap) * l1, 0]], dtype=complex),
    ]


def deformed_linear_system(d1, u: complex, v: complex, chi2: float):
    """Coefficient matrix of the linear system in (x1, x2, x3) and its determinant."""
    l1, l2 = _d1_vector(d1)
    au, av = abs(u), abs(v)
    if abs(au**2 + av**2 - 1.0) > 1e-12:
        raise ValueError("|u|^2 + |v|^2 must equal 1")
    d = chi2 - 2.0
    gap = l1**2 - l2**2
    uv = au**2 - av**2
    off = chi2 * l1 * l2 * (l2**2 - l1**2)
    m = np.array([
        [2 * d * au**2 * av**2, -d * au * av * uv, 0.0],
        [-d * au * av * uv, 0.5 * (chi2 * gap**2 + d * uv**2), off],
        [0.0, off, -0.5 * (chi2 * gap**2 - d)],
    ])
    return m, float(np.linalg.det(m))


def determinant_closed_form(d1, u: complex, v: complex, chi2: float) -> float:
    l1, l2 = _d1_vector(d1)
    return float(-chi2 * (chi2 - 2) * abs(u) ** 2 * abs(v) ** 2 * (l1**2 - l2**2) ** 2)


def deformed_condition_operator(d1, u: complex, v: complex, chi2: float) -> np.ndarray:
    """The first deformed equation in the SVD frame, as a linear map on the basis.

    Column i holds the flattened left side for Phi~_2 = basis[i]; built
    directly from the diag(U X U^+) form, independent of the 3x3 system.
    """
    lam = _d1_vector(d1)
    d1m = np.diag(lam).astype(complex)
    u1 = su2(u, v)
    uh = u1.conj().T
    d = chi2 - 2.0

    def lhs(p):
        return (d1m @ d1m @ p - p @ d1m @ d1m
                + d * (uh @ _diag(u1 @ d1m @ d1m @ uh) @ u1 @ p
                       - uh @ _diag(u1 @ p @ d1m @ uh) @ u1 @ d1m))

    return np.array([lhs(b).ravel() for b in deformed_basis(lam, u, v)]).T


def _check_su2(u1) -> tuple[complex, complex]:
    u1 = np.asarray(u1, dtype=complex)
    if u1.shape != (2, 2):
        raise ValueError("U1 must be 2x2")
    if np.linalg.norm(u1.conj().T @ u1 - np.eye(2)) > 1e-10 or abs(np.linalg.det(u1) - 1) > 1e-10:
        raise ValueError("U1 must be in SU(2)")
    return complex(u1[0, 0]), complex(u1[0, 1])


def solve_two_mode_deformed(d1, u1, spec) -> list[SolutionFamily]:
    """Applicable families for chi(2) != 2 given the SVD frame (D1, U1).

    a) chi(2) = 2 reduces to the undeformed families.
    b) chi(2) = 0 or lambda_1 = lambda_2: Phi~_2 = kappa_phase R diag(lambda_2, lambda_1).
    c) uv = 0 with lambda_1 != lambda_2: Phi~_2 = kappa_phase diag(lambda_2, -lambda_1),
       plus the nilpotent Phi~_2 = [[0, phi_12], [0, 0]] iff chi(2) = 1, lambda = (1, 0).
    """
    spec = _spec(spec)
    lam = _d1_vector(d1)
    l1, l2 = lam
    u, v = _check_su2(u1)
    u1 = su2(u, v)
    chi2 = spec.chi2
    equal = abs(l1 - l2) < DEGENERACY_TOL

    if chi2 == 2.0:
        return [solve_two_mode_nondeformed(lam, u1)]

    out = []
    theta = float(np.arctan2(l2, l1))
    if chi2 == 0.0 or equal:
        rm = r_matrix(u, v)

        def gen_b(p):
            return _assemble(p, lam, p["kappa_phase"] * rm @ np.diag([l2, l1]))

        def samp_b(rng):
            return _frame({"kappa_phase": phase(rng)}, 2, rng, u1)

        out.append(SolutionFamily(
            "deformed-b", lam, {"kappa_phase": "|kappa| = 1", "V1": "U(2)"},
            gen_b, samp_b, chi2=chi2,
            schmidt2=lambda p: np.sort([l1, l2])[::-1],
            entropy2=lambda p: ent.s2(theta), entropy1=ent.s2(theta),
        ))

    if abs(u * v) < DEGENERACY_TOL and not equal:
        def gen_c(p):
            return _assemble(p, lam, p["kappa_phase"] * np.diag([l2, -l1]))

        def samp_c(rng):
            return _frame({"kappa_phase": phase(rng)}, 2, rng, u1)

        out.append(SolutionFamily(
            "deformed-c-diagonal", lam, {"kappa_phase": "|kappa| = 1", "V1": "U(2)"},
            gen_c, samp_c, chi2=chi2,
            schmidt2=lambda p: np.sort([l1, l2])[::-1],
            entropy2=lambda p: ent.s2(theta), entropy1=ent.s2(theta),
        ))
        if chi2 == 1.0 and abs(l1 - 1.0) < DEGENERACY_TOL:
            def gen_n(p):
                return _assemble(p, lam, np.array([[0, p["phi12"]], [0, 0]], dtype=complex))

            def samp_n(rng):
                return _frame({"phi12": phase(rng)}, 2, rng, u1)

            out.append(SolutionFamily(
                "deformed-c-nilpotent", lam, {"phi12": "|phi12| = 1", "V1": "U(2)"},
                gen_n, samp_n, chi2=chi2,
                schmidt2=lambda p: np.array([1.0, 0.0]),
                entropy2=lambda p: 0.0, entropy1=0.0,
            ))
    return out


THREE_MODE_VARIANTS = {
    "distinct": ("su3", "angles", "random"),
    "two-equal": ("unitary-block", "diagonal", "normal-block"),
    "all-equal": ("w-diagonal", "block-w", "unitary"),
}


def _pattern_of(lam) -> str:
    n = len(degeneracy_groups(lam))
    return {3: "distinct", 2: "two-equal", 1: "all-equal"}[n]


def solve_three_mode(d1, pattern: str, variant: str | None = None) -> SolutionFamily:
    """Two CF modes with three-mode undeformed constituents.

    ``pattern`` must match the degeneracy of D1. ``variant`` picks a
    sub-family (see ``THREE_MODE_VARIANTS``); the first one is the default.
    """
    lam = _d1_vector(d1)
    if lam.shape != (3,):
        raise ValueError("three-mode family needs a 3x3 D1")
    if pattern not in THREE_MODE_VARIANTS:
        raise ValueError(f"unknown pattern {pattern!r}")
    actual = _pattern_of(lam)
    if actual != pattern:
        raise ValueError(f"D1 has pattern {actual!r}, not {pattern!r}")
    variant = variant or THREE_MODE_VARIANTS[pattern][0]
    if variant not in THREE_MODE_VARIANTS[pattern]:
        raise ValueError(f"unknown variant {variant!r} for pattern {pattern!r}")
    s1 = ent.entropy(lam)
    builder = {"distinct": _three_distinct, "two-equal": _three_two_equal,
               "all-equal": _three_all_equal}[pattern]
    return builder(lam, variant, s1)


def _three_distinct(lam, variant, s1):
    # angles of lam in the (c1 c2, c1 s2, s1) parametrisation
    th1 = float(np.arcsin(np.clip(lam[2], -1, 1)))
    th2 = float(np.arctan2(lam[1], lam[0]))

    if variant == "su3":
        def diag(p):
            return ent.su3_orthonormal_pair(th1, th2, p["theta3"], p["gamma"])[1]

        def samp(rng):
            return _frame({"theta3": rng.uniform(0, np.pi / 2),
                           "gamma": rng.uniform(0, TWO_PI)}, 3, rng)

        free = {"theta3": "[0, pi/2]", "gamma": "[0, 2pi)"}
        e2 = None
    elif variant == "angles":
        def diag(p):
            t22, gp = p["theta2_2"], p["gamma_prime"]
            # mode-2 moduli |phi11| : |phi22| = cos : sin, relative phase gamma'
            a = np.array([np.cos(t22), np.sin(t22) * np.exp(1j * gp)])
            a = a * np.exp(1j * p["eta"])
            c33 = -(lam[0] * a[0] + lam[1] * a[1]) / lam[2]
            v = np.array([a[0], a[1], c33])
            return v / np.linalg.norm(v)

        def samp(rng):
            return _frame({"theta2_2": rng.uniform(0, np.pi / 2),
                           "gamma_prime": rng.uniform(0, TWO_PI),
                           "eta": rng.uniform(0, TWO_PI)}, 3, rng)

        free = {"theta2_2": "[0, pi/2]", "gamma_prime": "[0, 2pi)", "eta": "[0, 2pi)"}

        def e2(p):
            return ent.entropy_pair_3mode(th1, th2, p["theta2_2"], p["gamma_prime"])[1]
    else:
        def diag(p):
            z = p["z"] - lam * (lam @ p["z"])
            return z / np.linalg.norm(z)

        def samp(rng):
            return _frame({"z": rng.normal(size=3) + 1j * rng.normal(size=3)}, 3, rng)

        free = {"z": "C^3 (projected orthogonal to lambda)"}
        e2 = None

    def gen(p):
        return _assemble(p, lam, np.diag(diag(p)))

    free.update({"U1": "U(3)", "V1": "U(3)"})
    return SolutionFamily(
        "3mode-distinct", lam, free, gen, samp, variant=variant,
        schmidt2=lambda p: np.sort(np.abs(diag(p)))[::-1],
        entropy2=e2, entropy1=s1,
    )


def _three_two_equal(lam, variant, s1):
    groups = degeneracy_groups(lam)
    pair = next(g for g in groups if len(g) == 2)
    single = next(g for g in groups if len(g) == 1)[0]
    i, j = pair
    lp, ls = lam[i], lam[single]
    # lam = (cos th1 / sqrt2, cos th1 / sqrt2, sin th1) up to ordering
    th1 = float(np.arcsin(np.clip(ls, -1, 1)))

    def embed(block, phi_s):
        out = np.zeros((3, 3), dtype=complex)
        out[np.ix_([i, j], [i, j])] = block
        out[single, single] = phi_s
        return out

    if variant == "unitary-block":
        if ls < DEGENERACY_TOL:
            raise ValueError("unitary-block variant needs a nonzero single lambda")

        def parts(p):
            tr, sign = p["tr_u"], p["sign"]
            re = sign * tr / 2
            im = p["im_frac"] * np.sqrt(max(0.0, 1 - re * re))
            u1_ = complex(re, im)
            uprime = su2(u1_, np.sqrt(max(0.0, 1 - abs(u1_) ** 2)) * np.exp(1j * p["psi"]))
            eta = np.exp(1j * p["eta"])
            phi_s = -lp * eta * (u1_ + np.conj(u1_)) / ls
            # scale t fixed by normalization 2 t^2 + t^2 |phi_s / t|^2 = 1
            t = 1.0 / np.sqrt(2.0 + abs(phi_s) ** 2)
            return t * eta * uprime, t * phi_s

        def samp(rng):
            return _frame({"tr_u": rng.uniform(0, 2), "sign": rng.choice([-1.0, 1.0]),
                           "im_frac": rng.uniform(-1, 1), "psi": rng.uniform(0, TWO_PI),
                           "eta": rng.uniform(0, TWO_PI)}, 3, rng)

        free = {"tr_u": "|Tr U'| in [0, 2]", "sign": "+-1", "im_frac": "[-1, 1]",
                "psi": "[0, 2pi)", "eta": "[0, 2pi)"}

        def e2(p):
            return ent.entropy_two_equal_S2(th1, p["tr_u"])
    elif variant == "diagonal":
        if not (single == 2 and pair == [0, 1]):
            raise ValueError("diagonal variant assumes lambda_1 = lambda_2 != lambda_3")

        def parts(p):
            _, phi = ent.su3_orthonormal_pair(th1, np.pi / 4, p["theta3"], p["gamma"])
            return np.diag(phi[:2]), phi[2]

        def samp(rng):
            return _frame({"theta3": rng.uniform(0, np.pi / 2),
                           "gamma": rng.uniform(0, TWO_PI)}, 3, rng)

        free = {"theta3": "[0, pi/2]", "gamma": "[0, 2pi)"}

        def e2(p):
            return ent.entropy_s2_threeangle(th1, p["theta3"], p["gamma"])
    else:
        def parts(p):
            w = p["W"]
            block = w @ np.diag(p["z"]) @ w.conj().T
            tr = np.trace(block)
            if ls < DEGENERACY_TOL:
                # lambda_single = 0: orthogonality forces Tr B = 0, phi_s free
                block = block - tr / 2 * np.eye(2)
                phi_s = p["free"]
            else:
                phi_s = -lp * tr / ls
            nrm = np.sqrt(np.linalg.norm(block) ** 2 + abs(phi_s) ** 2)
            return block / nrm, phi_s / nrm

        def samp(rng):
            return _frame({"W": haar_unitary(2, rng),
                           "z": rng.normal(size=2) + 1j * rng.normal(size=2),
                           "free": complex(rng.normal(), rng.normal())}, 3, rng)

        free = {"W": "U(2)", "z": "C^2", "free": "C"}
        e2 = None

    def gen(p):
        block, phi_s = parts(p)
        return _assemble(p, lam, embed(block, phi_s))

    def sch(p):
        block, phi_s = parts(p)
        sv = np.linalg.svd(block, compute_uv=False)
        return np.sort(np.append(sv, abs(phi_s)))[::-1]

    free.update({"U1": "U(3)", "V1": "U(3)"})
    return SolutionFamily("3mode-two-equal", lam, free, gen, samp, variant=variant,
                          schmidt2=sch, entropy2=e2, entropy1=s1)


def _three_all_equal(lam, variant, s1):
    l = lam[0]

    if variant == "w-diagonal":
        # Phi~_2 = e^{i eta} U~ diag(phi) U~^+ with sum(phi) = 0
        def core(p):
            z = p["z"] - p["z"].mean()
            return np.diag(z / np.linalg.norm(z))

        def samp(rng):
            return _frame({"z": rng.normal(size=3) + 1j * rng.normal(size=3),
                           "Ut": haar_special_unitary(3, rng),
                           "eta": rng.uniform(0, TWO_PI)}, 3, rng)

        free = {"z": "C^3 (projected to zero sum)"}

        def sch(p):
            return np.sort(np.abs(np.diag(core(p))))[::-1]

        def e2(p):
            d = np.diag(core(p))
            # angles of the diagonal in the (c1 c2, c1 s2 e^{i g'}, s1) form
            theta1_2 = float(np.arcsin(min(1.0, abs(d[2]))))
            gp = float(np.angle(d[1]) - np.angle(d[0]))
            return ent.entropy_K(theta1_2, gp)
    elif variant == "block-w":
        def core(p):
            t = p["tr_w"]
            re = p["sign"] * t / 2
            im = p["im_frac"] * np.sqrt(max(0.0, 1 - re * re))
            w1 = complex(re, im)
            wp = su2(w1, np.sqrt(max(0.0, 1 - abs(w1) ** 2)) * np.exp(1j * p["psi"]))
            lb = 1.0 / np.sqrt(2.0 + t * t)
            out = np.zeros((3, 3), dtype=complex)
            out[:2, :2] = lb * wp
            out[2, 2] = -lb * 2 * re
            return out

        def samp(rng):
            return _frame({"tr_w": rng.uniform(0, 2), "sign": rng.choice([-1.0, 1.0]),
                           "im_frac": rng.uniform(-1, 1), "psi": rng.uniform(0, TWO_PI),
                           "Ut": haar_special_unitary(3, rng),
                           "eta": rng.uniform(0, TWO_PI)}, 3, rng)

        free = {"tr_w": "|Tr W'| in [0, 2]", "sign": "+-1", "im_frac": "[-1, 1]",
                "psi": "[0, 2pi)"}

        def sch(p):
            t = p["tr_w"]
            lb = 1.0 / np.sqrt(2.0 + t * t)
            return np.sort([lb, lb, t * lb])[::-1]

        def e2(p):
            return ent.entropy_trW(p["tr_w"])
    else:
        omega = np.exp(2j * np.pi / 3)

        def core(p):
            return l * p["Q"] @ np.diag([1, omega, omega**2]) @ p["Q"].conj().T

        def samp(rng):
            return _frame({"Q": haar_unitary(3, rng), "Ut": np.eye(3, dtype=complex),
                           "eta": rng.uniform(0, TWO_PI)}, 3, rng)

        free = {"Q": "U(3)"}

        def sch(p):
            return np.full(3, l)

        def e2(p):
            return ent.LN3

    def gen(p):
        ut = p["Ut"]
        return _assemble(p, lam, np.exp(1j * p["eta"]) * ut @ core(p) @ ut.conj().T)

    free.update({"Ut": "SU(3)", "eta": "[0, 2pi)", "U1": "U(3)", "V1": "U(3)"})
    return SolutionFamily("3mode-all-equal", lam, free, gen, samp, variant=variant,
                          schmidt2=sch, entropy2=e2, entropy1=s1)


# --- sampling across all families -------------------------------------------

FAMILY_TAGS = (
    "two-mode-distinct",
    "two-mode-equal",
    "deformed-b",
    "deformed-c-diagonal",
    "deformed-c-nilpotent",
    "3mode-distinct",
    "3mode-two-equal",
    "3mode-all-equal",
)


@dataclass
class Sample:
    tag: str
    variant: str
    chi2: float
    phi1: np.ndarray
    phi2: np.ndarray
    params: dict = field(repr=False)
    family: SolutionFamily = field(repr=False)

    @property
    def phis(self):
        return [self.phi1, self.phi2]

    def report(self, tol: float = DEFAULT_TOL) -> RealizationReport:
        return check(self.phis, self.chi2, tol)


def _lam2(theta):
    return np.array([np.cos(theta), np.sin(theta)])


def _lam3(theta1, theta2):
    return np.array([np.cos(theta1) * np.cos(theta2), np.cos(theta1) * np.sin(theta2),
                     np.sin(theta1)])


def _distinct_angle(rng, lo, hi, avoid, gap=1e-3):
    while True:
        x = rng.uniform(lo, hi)
        if all(abs(x - a) > gap for a in avoid):
            return x


def sample_family(tag: str, rng, chi2: float | None = None, variant: str | None = None,
                  theta: float | None = None, theta1: float | None = None,
                  theta2: float | None = None, ordered: bool = True) -> Sample:
    """Draw one member of a named family, filling unspecified parameters from ``rng``."""
    if tag == "two-mode-distinct":
        hi = np.pi / 4 if ordered else np.pi / 2
        th = _distinct_angle(rng, 0.0, hi, [np.pi / 4]) if theta is None else theta
        lam = _lam2(th)
        if abs(lam[0] - lam[1]) < DEGENERACY_TOL:
            raise ValueError("theta = pi/4 gives equal lambdas; use two-mode-equal")
        fam = solve_two_mode_nondeformed(lam)
        c2 = 2.0
    elif tag == "two-mode-equal":
        fam = solve_two_mode_nondeformed(_lam2(np.pi / 4))
        c2 = 2.0
    elif tag == "deformed-b":
        if chi2 is None:
            chi2 = 0.0 if rng.random() < 0.5 else _distinct_angle(rng, 0.0, 4.0, [2.0])
        if chi2 == 2.0:
            raise ValueError("deformed-b requires chi(2) != 2")
        if chi2 == 0.0:
            th = rng.uniform(0.0, np.pi / 4) if theta is None else theta
        else:
            th = np.pi / 4
            if theta is not None and abs(theta - th) > 1e-12:
                raise ValueError("deformed-b with chi(2) != 0 requires lambda_1 = lambda_2")
        u, v = _unit_pair(rng)
        fams = solve_two_mode_deformed(_lam2(th), su2(u, v), chi2)
        fam = next(f for f in fams if f.case_tag == "deformed-b")
        c2 = chi2
    elif tag == "deformed-c-diagonal":
        if chi2 is None:
            chi2 = rng.uniform(0.0, 4.0)
        th = _distinct_angle(rng, 0.0, np.pi / 4, [np.pi / 4]) if theta is None else theta
        ph = phase(rng)
        u1 = su2(ph, 0) if rng.random() < 0.5 else su2(0, ph)
        fams = solve_two_mode_deformed(_lam2(th), u1, chi2)
        fam = next(f for f in fams if f.case_tag == "deformed-c-diagonal")
        c2 = chi2
    elif tag == "deformed-c-nilpotent":
        if chi2 is None:
            chi2 = 1.0
        if chi2 != 1.0:
            raise ValueError("family deformed-c-nilpotent requires chi(2) = 1")
        ph = phase(rng)
        fams = solve_two_mode_deformed(np.array([1.0, 0.0]), su2(ph, 0), chi2)
        fam = next(f for f in fams if f.case_tag == "deformed-c-nilpotent")
        c2 = chi2
    elif tag == "3mode-distinct":
        while True:
            t1 = rng.uniform(0.05, np.pi / 2 - 0.05) if theta1 is None else theta1
            t2 = rng.uniform(0.0, np.pi / 2) if theta2 is None else theta2
            lam = _lam3(t1, t2)
            if _pattern_of(lam) == "distinct" and lam[2] > 1e-3:
                break
            if theta1 is not None and theta2 is not None:
                raise ValueError("theta1/theta2 do not give distinct lambdas")
        var = variant or THREE_MODE_VARIANTS["distinct"][rng.integers(3)]
        fam = solve_three_mode(lam, "distinct", var)
        c2 = 2.0
    elif tag == "3mode-two-equal":
        var = variant or THREE_MODE_VARIANTS["two-equal"][rng.integers(3)]
        t1 = (_distinct_angle(rng, 0.05, np.pi / 2 - 0.05, [np.arcsin(1 / np.sqrt(3))])
              if theta1 is None else theta1)
        lam = _lam3(t1, np.pi / 4)
        fam = solve_three_mode(lam, "two-equal", var)
        c2 = 2.0
    elif tag == "3mode-all-equal":
        var = variant or THREE_MODE_VARIANTS["all-equal"][rng.integers(3)]
        fam = solve_three_mode(np.full(3, 1 / np.sqrt(3)), "all-equal", var)
        c2 = 2.0
    else:
        raise ValueError(f"unknown family {tag!r}; choose from {', '.join(FAMILY_TAGS)}")
    params, phi1, phi2 = fam.sample(rng)
    return Sample(fam.case_tag, fam.variant, float(c2), phi1, phi2, params, fam)


# --- mode-count bound -------------------------------------------------------

@dataclass
class BoundReport:
    product_norm: float
    tail_norm: float
    deviation: float
    cf_modes: int
    fermion_modes: int

    @property
    def vanishes(self) -> bool:
        return self.product_norm < 1e-13

    @property
    def forced_zero(self) -> bool:
        return self.cf_modes > self.fermion_modes

    @property
    def contradiction(self) -> bool:
        """Product vanishes while the realization would require it equal the nonzero tail."""
        return self.vanishes and self.tail_norm > 1e-13


def mode_count_bound_check(phis: Sequence, basis: FockBasis, chi: StructureFunction) -> BoundReport:
    """Evaluate A_1 A+_1 A+_2 ... A+_D |0> and compare with A+_2 ... A+_D |0>."""
    creators = [build_composite_creator(p, basis, chi) for p in phis]
    tail = basis.vacuum()
    for c in reversed(creators[1:]):
        tail = c @ tail
    prod = creators[0].conj().T @ (creators[0] @ tail)
    return BoundReport(
        float(np.linalg.norm(prod)), float(np.linalg.norm(tail)),
        float(np.linalg.norm(prod - tail)), len(phis), basis.config.fermion_modes,
    )
