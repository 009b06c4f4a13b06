"""Schmidt decomposition, entanglement entropy and purity of one-composite states.

Entropies are in nats. Closed-form expressions for the two- and three-mode
solution families live here next to the generic SVD route so the two can be
compared directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .svd import jacobi_svd

ZERO_LAMBDA = 1e-14
K_SERIES = 1e-8
LN2 = float(np.log(2.0))
LN3 = float(np.log(3.0))


class DomainError(ValueError):
    """Input outside the domain of a closed-form expression."""


@dataclass(frozen=True)
class SchmidtDecomposition:
    lambdas: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        k = len(self.lambdas)
        return self.left[:, :k] @ np.diag(self.lambdas) @ self.right[:, :k].conj().T

    @property
    def probabilities(self) -> np.ndarray:
        return self.lambdas**2


def schmidt(phi) -> SchmidtDecomposition:
    phi = np.atleast_2d(np.asarray(phi, dtype=complex))
    if not np.any(phi):
        raise ValueError("Schmidt decomposition of a zero matrix")
    u, s, v = jacobi_svd(phi)
    return SchmidtDecomposition(s, u, v)


def _lambdas(s) -> np.ndarray:
    lam = s.lambdas if isinstance(s, SchmidtDecomposition) else np.asarray(s, dtype=float)
    return np.where(np.abs(lam) < ZERO_LAMBDA, 0.0, np.abs(lam))


def entropy_of_probabilities(p) -> float:
    """-sum p ln p with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    return float(-np.sum(xlogy(p, p))) + 0.0


def entropy(s) -> float:
    """Entanglement entropy -sum lambda^2 ln lambda^2 of Schmidt coefficients."""
    return entropy_of_probabilities(_lambdas(s) ** 2)


def purity(s) -> float:
    return float(np.sum(_lambdas(s) ** 4))


def entropy_of_matrix(phi) -> float:
    return entropy(schmidt(phi))


def purity_of_matrix(phi) -> float:
    return purity(schmidt(phi))


# --- two-mode constituents --------------------------------------------------

def s2(theta):
    """Binary entropy in angle form, -sin^2 ln sin^2 - cos^2 ln cos^2."""
    sn = np.sin(theta) ** 2
    cs = np.cos(theta) ** 2
    out = -xlogy(sn, sn) - xlogy(cs, cs)
    return float(out) if np.ndim(out) == 0 else out


def purity_theta(theta):
    out = 0.25 * (3.0 + np.cos(4.0 * np.asarray(theta, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


# --- three-mode constituents ------------------------------------------------

def omega_angle(theta2_1: float, theta2_2: float, gamma_prime: float) -> float:
    """Omega from cos 2 Omega = cos2a cos2b + sin2a sin2b cos(gamma')."""
    c = (np.cos(2 * theta2_1) * np.cos(2 * theta2_2)
         + np.sin(2 * theta2_1) * np.sin(2 * theta2_2) * np.cos(gamma_prime))
    return float(0.5 * np.arccos(np.clip(c, -1.0, 1.0)))


def entropy_pair_3mode(theta1_1: float, theta2_1: float, theta2_2: float,
                       gamma_prime: float, slack: float = 1e-12):
    """Entropies of both modes for the distinct-lambda three-mode family.

    Mode 1 has lambda = (c1 c2, c1 s2, s1) in the angles (theta1_1, theta2_1).
    Mode 2 has |phi_ii| in the same form with (theta1_2, theta2_2); theta1_2
    follows from orthogonality. Returns ``(S1, S2, theta1_2)``.
    """
    omega = omega_angle(theta2_1, theta2_2, gamma_prime)
    lo = abs(theta2_1 - theta2_2) - slack
    hi = theta2_1 + theta2_2 + slack
    if not lo <= omega <= hi:
        raise DomainError(f"Omega={omega} outside [{lo}, {hi}]")
    s1sq = np.sin(theta1_1) ** 2
    denom = 1.0 - np.sin(omega) ** 2 * np.cos(theta1_1) ** 2
    if s1sq <= 0.0 or denom <= 0.0:
        raise DomainError("orthogonality relation is singular (sin theta1_1 = 0)")
    cos2_t12 = s1sq / denom
    theta1_2 = float(np.arccos(np.sqrt(np.clip(cos2_t12, 0.0, 1.0))))

    S1 = s2(theta1_1) + np.cos(theta1_1) ** 2 * s2(theta2_1)
    c = (np.cos(theta1_1) / np.sin(theta1_1)) ** 2 * np.cos(omega) ** 2
    S2 = (s2(theta2_2) - xlogy(c, c)) / (1.0 + c) + np.log1p(c)
    return float(S1), float(S2), theta1_2


def su3_orthonormal_pair(theta1: float, theta2: float, theta3: float, gamma: float):
    """Two orthonormal 3-vectors from the first two rows of an SU(3) parametrisation.

    The first is the real Schmidt vector (c1 c2, c1 s2, s1); the second is the
    diagonal of the partner structural matrix.
    """
    c1, s1 = np.cos(theta1), np.sin(theta1)
    c2, s2_ = np.cos(theta2), np.sin(theta2)
    c3, s3 = np.cos(theta3), np.sin(theta3)
    e = np.exp(1j * gamma)
    lam = np.array([c1 * c2, c1 * s2_, s1])
    phi = np.array([
        -s1 * c2 * c3 - s2_ * s3 * e,
        c2 * s3 * e - s1 * s2_ * c3,
        c1 * c3,
    ], dtype=complex)
    return lam, phi


def entropy_two_equal_S1(theta1: float) -> float:
    """Mode-1 entropy for lambda^2 = (cos^2/2, cos^2/2, sin^2)."""
    return float(np.cos(theta1) ** 2 * LN2 + s2(theta1))


def entropy_two_equal_S2(theta1: float, tr_u: float) -> float:
    """Mode-2 entropy of the unitary-block solution with |Tr U'| = tr_u."""
    if not 0.0 <= tr_u <= 2.0 + 1e-12:
        raise DomainError("|Tr U'| must lie in [0, 2]")
    t = np.tan(theta1) ** 2
    q = 0.25 * tr_u**2
    tot = t + q
    if not np.isfinite(t) or tot <= 0.0:
        raise DomainError("theta1 must lie strictly inside (0, pi/2) unless Tr U' != 0")
    return float(np.log(tot) - (xlogy(t, 0.5 * t) + xlogy(q, q)) / tot)


def entropy_s2_threeangle(theta1: float, theta3: float, gamma: float) -> float:
    """Mode-2 entropy for the diagonal solution with lambda_1 = lambda_2 in mode 1."""
    e = np.exp(1j * gamma)
    plus = abs(np.sin(theta1) * np.cos(theta3) + np.sin(theta3) * e)
    minus = abs(np.sin(theta1) * np.cos(theta3) - np.sin(theta3) * e)
    w = (np.cos(theta1) * np.cos(theta3)) ** 2
    return float(LN2 - xlogy(plus**2, plus) - xlogy(minus**2, minus) - xlogy(w, 2 * w))


def _s_tilde(theta):
    x = (2.0 / 3.0) * np.cos(theta) ** 2
    return -xlogy(x, x)


def entropy_s2_symmetric(theta3: float) -> float:
    """gamma = 0, sin theta1 = 1/sqrt(3) case of :func:`entropy_s2_threeangle`."""
    k = 2 * np.pi / 3
    return float(_s_tilde(theta3) + _s_tilde(theta3 + k) + _s_tilde(theta3 - k))


def k_parameter(theta1_2: float, gamma_prime: float) -> float:
    cg = np.cos(gamma_prime)
    if abs(cg) < 1e-15:
        raise DomainError("cos(gamma') = 0")
    c2 = np.cos(theta1_2) ** 2
    if c2 < 1e-300:
        raise DomainError("cos(theta1_2) = 0")
    return float((np.sin(theta1_2) ** 2 - 0.5) / (c2 * cg))


def entropy_K(theta1_2: float, gamma_prime: float, slack: float = 1e-12) -> float:
    """Mode-2 entropy of the diagonal solution when all mode-1 lambdas are equal."""
    K = k_parameter(theta1_2, gamma_prime)
    if abs(K) > 0.5 + slack:
        raise DomainError(f"|K| = {abs(K)} exceeds 1/2")
    K = float(np.clip(K, -0.5, 0.5))
    r = np.sqrt(max(0.0, 1.0 - 4.0 * K * K))
    ak = abs(K)
    if ak == 0.0:
        bracket = 0.0
    elif ak < K_SERIES:
        # removable singularity: (r - 1) ln|K| -> 0
        bracket = -4.0 * K * K / (1.0 + r) * np.log(ak) + r * np.log(2.0 / (1.0 + r))
    else:
        bracket = r * np.log(2.0 * ak / (1.0 + r)) - np.log(ak)
    return float(s2(theta1_2) + np.cos(theta1_2) ** 2 * bracket)


def entropy_trW(tr_w: float) -> float:
    """Mode-2 entropy for squared Schmidt coefficients (1, 1, t^2) / (2 + t^2)."""
    if not 0.0 <= tr_w <= 2.0 + 1e-12:
        raise DomainError("|Tr W'| must lie in [0, 2]")
    t2 = tr_w**2
    return float(np.log(2.0 + t2) - xlogy(t2, t2) / (2.0 + t2))


# --- quasibosons ------------------------------------------------------------

def _m_from_f(f: float) -> int:
    if f <= 0:
        raise DomainError("deformation parameter f must be positive")
    m = 2.0 / f
    mi = int(round(m))
    if mi < 1 or abs(m - mi) > 1e-9:
        raise DomainError(f"f = {f} is not 2/m for a positive integer m")
    return mi


def quasiboson_phi(n, f: float, kappa_sign: int = 1):
    """Quadratic structure function (1 + k f/2) n - k (f/2) n^2."""
    if kappa_sign not in (1, -1):
        raise DomainError("kappa_sign must be +1 or -1")
    _m_from_f(f)
    n = np.asarray(n, dtype=float)
    out = (1.0 + kappa_sign * f / 2.0) * n - kappa_sign * (f / 2.0) * n**2
    return float(out) if out.ndim == 0 else out


def _haar_unitary(n: int, rng) -> np.ndarray:
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def quasiboson_phi_matrix(m: int, d_a: int | None = None, d_b: int | None = None,
                          offset: int = 0, rng=None) -> np.ndarray:
    """U1 diag(0.., sqrt(f/2) U(m), ..0) U2^+ with f = 2/m.

    With ``rng`` the three unitaries are Haar-random, otherwise identities.
    """
    d_a = m if d_a is None else d_a
    d_b = m if d_b is None else d_b
    if m < 1 or offset + m > min(d_a, d_b):
        raise ValueError("block does not fit in the requested dimensions")
    f = 2.0 / m
    block = np.eye(m, dtype=complex) if rng is None else _haar_unitary(m, rng)
    core = np.zeros((d_a, d_b), dtype=complex)
    core[offset:offset + m, offset:offset + m] = np.sqrt(f / 2.0) * block
    if rng is None:
        return core
    return _haar_unitary(d_a, rng) @ core @ _haar_unitary(d_b, rng).conj().T


def quasiboson_entropy_purity(m: int, check: bool = True, rng=None):
    """(ln m, 1/m); with ``check`` both are recomputed from an explicit matrix."""
    if m < 1:
        raise DomainError("m must be a positive integer")
    S, P = float(np.log(m)), 1.0 / m
    if check:
        rng = np.random.default_rng(0) if rng is None else rng
        sd = schmidt(quasiboson_phi_matrix(m, m + 1, m + 2, offset=1, rng=rng))
        if abs(entropy(sd) - S) > 1e-12 or abs(purity(sd) - P) > 1e-12:
            raise ArithmeticError(f"SVD cross-check failed for m={m}")
    return S, P
