import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cfent import entanglement as ent
from cfent.realization import haar_unitary, sample_family

LN2, LN3 = np.log(2), np.log(3)
angle = st.floats(0.0, np.pi / 2)


def oracle_entropy(phi):
    """numpy SVD, explicit sum skipping zeros."""
    p = np.linalg.svd(phi, compute_uv=False) ** 2
    p = p[p > 1e-28]
    return float(-np.sum(p * np.log(p)))


def probs_entropy(p):
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


# --- Schmidt / entropy / purity ---------------------------------------------

@pytest.mark.parametrize("phi, lam", [
    (np.eye(2) / np.sqrt(2), [2**-0.5, 2**-0.5]),
    (np.array([[0, 1], [0, 0]]), [1, 0]),
])
def test_schmidt_examples(phi, lam):
    s = ent.schmidt(phi)
    assert np.allclose(s.lambdas, lam, atol=1e-15)
    assert np.allclose(s.reconstruct(), phi, atol=1e-12)


def test_schmidt_rejects_zero():
    with pytest.raises(ValueError):
        ent.schmidt(np.zeros((2, 2)))


@pytest.mark.parametrize("lam, S, P", [
    ([1, 0], 0.0, 1.0),
    ([2**-0.5, 2**-0.5], LN2, 0.5),
    ([3**-0.5] * 3, LN3, 1 / 3),
    ([np.cos(np.pi / 6), np.sin(np.pi / 6)], 0.5623351446188083, 0.625),
])
def test_entropy_purity_examples(lam, S, P):
    assert ent.entropy(lam) == pytest.approx(S, abs=1e-12)
    assert ent.purity(lam) == pytest.approx(P, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4))
def test_unitary_invariance(seed, m, n):
    rng = np.random.default_rng(seed)
    phi = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    phi /= np.linalg.norm(phi)
    rotated = haar_unitary(m, rng) @ phi @ haar_unitary(n, rng).conj().T
    s0, s1 = ent.schmidt(phi), ent.schmidt(rotated)
    assert abs(ent.entropy(s0) - ent.entropy(s1)) < 1e-12
    assert abs(ent.entropy(s0) - oracle_entropy(phi)) < 1e-12
    assert abs(np.sum(s0.lambdas**2) - 1) < 1e-12
    assert np.allclose(s0.reconstruct(), phi, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=4), st.integers(0, 3))
def test_zeros_do_not_change_entropy(vals, zeros):
    lam = np.array(vals) / np.linalg.norm(vals)
    padded = np.concatenate([lam, np.zeros(zeros)])
    assert ent.entropy(padded) == pytest.approx(ent.entropy(lam), abs=1e-14)
    assert np.isfinite(ent.entropy(padded))


# --- two-mode curves ----------------------------------------------------------

def test_s2_and_purity_values():
    assert ent.s2(np.pi / 4) == pytest.approx(LN2, abs=1e-15)
    assert ent.s2(0.0) == 0.0
    assert ent.s2(np.pi / 2) == pytest.approx(0.0, abs=1e-30)
    assert ent.s2(np.pi / 6) == pytest.approx(0.5623351446188083, abs=1e-12)
    assert ent.purity_theta(np.pi / 4) == pytest.approx(0.5, abs=1e-15)
    assert ent.purity_theta(0.0) == 1.0
    assert ent.purity_theta(np.pi / 6) == pytest.approx(0.625, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(angle)
def test_curves_match_schmidt(theta):
    phi = np.diag([np.cos(theta), np.sin(theta)])
    assert ent.s2(theta) == pytest.approx(oracle_entropy(phi), abs=1e-12)
    assert ent.purity_theta(theta) == pytest.approx(ent.purity_of_matrix(phi), abs=1e-12)
    assert ent.s2(theta) == pytest.approx(ent.s2(np.pi / 2 - theta), abs=1e-12)
    assert 0.0 <= ent.s2(theta) <= LN2 + 1e-15


def test_curve_extrema_coincide():
    grid = np.linspace(0, np.pi / 2, 10001)
    s, p = ent.s2(grid), ent.purity_theta(grid)
    assert abs(grid[np.argmax(s)] - np.pi / 4) <= grid[1]
    assert np.argmax(s) == np.argmin(p)


# --- three-mode closed forms ------------------------------------------------

def test_pair_3mode_examples():
    _, _, t12 = ent.entropy_pair_3mode(np.pi / 4, np.pi / 4, np.pi / 4, np.pi / 2)
    assert np.cos(t12) ** 2 == pytest.approx(2 / 3, abs=1e-12)
    s1, _, _ = ent.entropy_pair_3mode(np.arcsin(3**-0.5), np.pi / 4, np.pi / 4, 0.0)
    assert s1 == pytest.approx(LN3, abs=1e-12)


def test_pair_3mode_domain():
    with pytest.raises(ent.DomainError):
        ent.entropy_pair_3mode(0.0, np.pi / 4, np.pi / 4, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, np.pi / 2 - 0.05), angle, angle, st.floats(0, 2 * np.pi))
def test_pair_3mode_matches_construction(t11, t21, t22, gp):
    """Mode 2 built from the angles, with phi_33 fixed by orthogonality."""
    lam = np.array([np.cos(t11) * np.cos(t21), np.cos(t11) * np.sin(t21), np.sin(t11)])
    a = np.array([np.cos(t22), np.sin(t22) * np.exp(1j * gp)])
    phi33 = -(lam[0] * a[0] + lam[1] * a[1]) / lam[2]
    v = np.concatenate([a, [phi33]])
    v /= np.linalg.norm(v)
    S1, S2, t12 = ent.entropy_pair_3mode(t11, t21, t22, gp)
    assert S1 == pytest.approx(probs_entropy(lam**2), abs=1e-10)
    assert S2 == pytest.approx(probs_entropy(np.abs(v) ** 2), abs=1e-10)
    assert np.sin(t12) == pytest.approx(abs(v[2]), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(angle, angle, angle, st.floats(0, 2 * np.pi))
def test_su3_pair_orthonormal(t1, t2, t3, g):
    lam, phi = ent.su3_orthonormal_pair(t1, t2, t3, g)
    assert np.linalg.norm(lam) == pytest.approx(1, abs=1e-12)
    assert np.linalg.norm(phi) == pytest.approx(1, abs=1e-12)
    assert abs(np.vdot(phi, lam)) < 1e-12


def test_su3_pair_corner():
    t1, t2 = 0.3, 0.7
    _, phi = ent.su3_orthonormal_pair(t1, t2, 0.0, 0.0)
    assert phi[2] == pytest.approx(np.cos(t1))
    assert phi[0] == pytest.approx(-np.sin(t1) * np.cos(t2))


def test_two_equal_S1():
    assert ent.entropy_two_equal_S1(0.0) == pytest.approx(LN2)
    assert ent.entropy_two_equal_S1(np.arcsin(3**-0.5)) == pytest.approx(LN3, abs=1e-12)
    assert ent.entropy_two_equal_S1(np.pi / 2) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(angle)
def test_two_equal_S1_oracle(t):
    c = np.cos(t) ** 2
    assert ent.entropy_two_equal_S1(t) == pytest.approx(probs_entropy([c / 2, c / 2, 1 - c]), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, np.pi / 2 - 0.05), st.floats(0.0, 2.0))
def test_two_equal_S2_oracle(t, tr):
    # squared Schmidt coefficients of the unitary-block family, up to normalization
    tt, q = np.tan(t) ** 2, tr**2 / 4
    p = np.array([tt / 2, tt / 2, q]) / (tt + q)
    assert ent.entropy_two_equal_S2(t, tr) == pytest.approx(probs_entropy(p), abs=1e-12)


def test_two_equal_S2_trace_zero():
    assert ent.entropy_two_equal_S2(0.4, 0.0) == pytest.approx(LN2, abs=1e-12)


def test_threeangle_symmetric():
    val = ent.entropy_s2_threeangle(np.arcsin(3**-0.5), 0.0, 0.0)
    assert val == pytest.approx(0.8675632284814612, abs=1e-9)
    assert ent.entropy_s2_symmetric(0.0) == pytest.approx(val, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(angle, st.floats(0, 2 * np.pi))
def test_threeangle_oracle(t1, t3):
    _, phi = ent.su3_orthonormal_pair(t1, np.pi / 4, t3, 0.7)
    assert ent.entropy_s2_threeangle(t1, t3, 0.7) == pytest.approx(
        probs_entropy(np.abs(phi) ** 2), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * np.pi))
def test_symmetric_form(t3):
    t1 = np.arcsin(3**-0.5)
    assert ent.entropy_s2_symmetric(t3) == pytest.approx(ent.entropy_s2_threeangle(t1, t3, 0.0), abs=1e-12)
    assert ent.entropy_s2_symmetric(t3) == pytest.approx(ent.entropy_s2_symmetric(t3 + 2 * np.pi / 3), abs=1e-12)


def test_entropy_K_values():
    assert ent.k_parameter(np.arcsin(3**-0.5), 0.0) == pytest.approx(-0.25)
    assert ent.entropy_K(np.pi / 4, 0.3) == pytest.approx(LN2, abs=1e-9)
    near = np.pi / 4 + 1e-10
    assert ent.entropy_K(near, 0.3) == pytest.approx(LN2, abs=1e-9)
    with pytest.raises(ent.DomainError):
        ent.entropy_K(1.4, 0.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.5), st.floats(0, 2 * np.pi))
def test_entropy_K_oracle(t, gp):
    """Diagonal (a, b, c), a + b + c = 0, moduli cos t (cos u, sin u) and sin t.

    |a + b| = |c| gives sin 2u = 2K, so the squared moduli follow directly.
    """
    assume(abs(np.cos(gp)) > 1e-3)
    k = ent.k_parameter(t, gp)
    assume(abs(k) <= 0.5)
    s = ent.entropy_K(t, gp)
    assert LN2 - 1e-12 <= s <= LN3 + 1e-12
    c2 = np.cos(t) ** 2
    r = np.sqrt(1 - 4 * k * k)
    p = np.array([c2 * (1 + r) / 2, c2 * (1 - r) / 2, 1 - c2])
    assert s == pytest.approx(probs_entropy(p), abs=1e-10)


def test_entropy_trW_values():
    assert ent.entropy_trW(0.0) == pytest.approx(LN2)
    assert ent.entropy_trW(1.0) == pytest.approx(LN3, abs=1e-12)
    assert ent.entropy_trW(2.0) == pytest.approx(probs_entropy([1 / 6, 1 / 6, 2 / 3]), abs=1e-12)
    with pytest.raises(ent.DomainError):
        ent.entropy_trW(2.5)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 2.0))
def test_entropy_trW_oracle(t):
    p = np.array([1, 1, t * t]) / (2 + t * t)
    assert ent.entropy_trW(t) == pytest.approx(probs_entropy(p), abs=1e-12)


# --- quasibosons ------------------------------------------------------------

def test_quasiboson_phi():
    for m in range(1, 7):
        for k in (1, -1):
            assert ent.quasiboson_phi(1, 2 / m, k) == pytest.approx(1)
    assert ent.quasiboson_phi(2, 2.0, 1) == pytest.approx(0)
    assert ent.quasiboson_phi(np.arange(4), 1.0, 1) == pytest.approx([0, 1, 1, 0])
    with pytest.raises(ent.DomainError):
        ent.quasiboson_phi(1, 0.7)
    with pytest.raises(ent.DomainError):
        ent.quasiboson_phi(1, 1.0, 0)


@pytest.mark.parametrize("m", range(1, 7))
def test_quasiboson_entropy_purity(m):
    S, P = ent.quasiboson_entropy_purity(m)
    assert S == pytest.approx(np.log(m), abs=1e-12)
    assert P == pytest.approx(1 / m, abs=1e-12)
    phi = ent.quasiboson_phi_matrix(m, m + 2, m + 1, offset=1, rng=np.random.default_rng(m))
    assert oracle_entropy(phi) == pytest.approx(np.log(m), abs=1e-12)


# --- range bound across families ----------------------------------------------

@pytest.mark.parametrize("tag", ["3mode-distinct", "3mode-two-equal", "3mode-all-equal"])
def test_entropy_gap_bound(tag):
    rng = np.random.default_rng(17)
    for _ in range(100):
        s = sample_family(tag, rng)
        gap = abs(ent.entropy_of_matrix(s.phi1) - ent.entropy_of_matrix(s.phi2))
        assert gap <= LN2 + 1e-12
        assert ent.entropy_of_matrix(s.phi2) <= LN3 + 1e-12
