import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfent.fock import (
    FockBasis,
    ModeConfig,
    ResourceLimitError,
    StructureFunction,
    anticommutator,
    boson_annihilate,
    boson_create,
    chi_of_number,
    commutator,
    enumerate_basis,
    fermion_annihilate,
    fermion_create,
    number_operator,
)


def dense_oracle(nb, nf, cutoff, chi, sector, mode):
    """Creation operator built by Kronecker products, independent of the sparse code."""
    d = cutoff + 1
    a = np.zeros((d, d))
    for n in range(cutoff):
        a[n + 1, n] = np.sqrt(chi(n + 1))
    c = np.array([[0.0, 0.0], [1.0, 0.0]])
    z = np.diag([1.0, -1.0])
    factors = []
    for m in range(nb):
        factors.append(a if sector == "boson" and m == mode else np.eye(d))
    for m in range(nf):
        if sector == "fermion":
            factors.append(c if m == mode else (z if m < mode else np.eye(2)))
        else:
            factors.append(np.eye(2))
    out = np.array([[1.0]])
    for f in factors:
        out = np.kron(out, f)
    return out


configs = st.tuples(st.integers(1, 2), st.integers(1, 3), st.integers(2, 4))


def test_basis_size_and_order():
    b = enumerate_basis(ModeConfig(2, 2, 3))
    assert b.dim == 16 * 4
    assert b.states[0] == ((0, 0), (0, 0))
    assert b.states[1] == ((0, 0), (0, 1))
    assert b.states[-1] == ((3, 3), (1, 1))
    assert b.index[b.states[17]] == 17


def test_basis_limit():
    with pytest.raises(ResourceLimitError):
        FockBasis(ModeConfig(3, 3, 3), max_size=100)


@pytest.mark.parametrize("bad", [(0, 1, 3), (1, 0, 3), (1, 1, 1)])
def test_config_rejects(bad):
    with pytest.raises(ValueError):
        ModeConfig(*bad)


def test_structure_function_validation():
    with pytest.raises(ValueError):
        StructureFunction(np.array([0.0, 2.0, 2.0]))
    with pytest.raises(ValueError):
        StructureFunction(np.array([1.0, 1.0, 2.0]))
    with pytest.raises(ValueError):
        StructureFunction(np.array([0.0, 1.0, -1.0]))
    chi = StructureFunction.q_deformed(0.5, 3)
    assert np.allclose(chi.values, [0, 1, 1.5, 1.75, 1.875])
    assert np.array_equal(StructureFunction.q_deformed(1.0, 3).values, np.arange(5))
    assert StructureFunction.from_chi2(0.0, 3).chi2 == 0.0


def test_chi_table_too_short():
    b = FockBasis(ModeConfig(1, 1, 4))
    with pytest.raises(ValueError):
        boson_create(b, StructureFunction.linear(2), 0)


@settings(max_examples=25, deadline=None)
@given(configs, st.floats(0.1, 3.0))
def test_boson_matches_kron_oracle(cfg, chi2):
    nb, nf, cut = cfg
    b = FockBasis(ModeConfig(nb, nf, cut))
    chi = StructureFunction.from_chi2(chi2, cut)
    for mode in range(nb):
        assert np.allclose(boson_create(b, chi, mode).toarray(),
                           dense_oracle(nb, nf, cut, chi, "boson", mode), atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(configs)
def test_fermion_matches_kron_oracle(cfg):
    nb, nf, cut = cfg
    b = FockBasis(ModeConfig(nb, nf, cut))
    chi = StructureFunction.linear(cut)
    for mode in range(nf):
        assert np.array_equal(fermion_create(b, mode).toarray(),
                              dense_oracle(nb, nf, cut, chi, "fermion", mode))


@settings(max_examples=15, deadline=None)
@given(configs)
def test_canonical_relations(cfg):
    nb, nf, cut = cfg
    b = FockBasis(ModeConfig(nb, nf, cut))
    chi = StructureFunction.q_deformed(0.7, cut)
    ident = b.identity().toarray()
    fc = [fermion_create(b, m) for m in range(nf)]
    fa = [fermion_annihilate(b, m) for m in range(nf)]
    for i in range(nf):
        for j in range(nf):
            assert np.allclose(anticommutator(fa[i], fc[j]).toarray(), ident * (i == j))
            assert anticommutator(fc[i], fc[j]).nnz == 0
    safe = b.safe_mask(1)
    for mu in range(nb):
        ad, a = boson_create(b, chi, mu), boson_annihilate(b, chi, mu)
        lhs = commutator(a, ad).toarray()
        rhs = (chi_of_number(b, chi, mu, 1) - chi_of_number(b, chi, mu)).toarray()
        assert np.allclose(lhs[:, safe], rhs[:, safe])
        # a+ a = chi(N) holds everywhere, cutoff included
        assert np.allclose((ad @ a).toarray(), chi_of_number(b, chi, mu).toarray())
        for nu in range(nf):
            assert commutator(ad, fc[nu]).nnz == 0
            assert commutator(a, fc[nu]).nnz == 0


def test_creation_killed_at_cutoff():
    b = FockBasis(ModeConfig(1, 1, 3))
    ad = boson_create(b, StructureFunction.linear(3), 0)
    top = b.basis_vector([3], [0])
    assert np.linalg.norm(ad @ top) == 0
    psi = ad @ b.basis_vector([1], [0])
    assert np.allclose(psi, np.sqrt(2) * b.basis_vector([2], [0]))


def test_number_operator():
    b = FockBasis(ModeConfig(2, 2, 3))
    n = number_operator(b, "boson", 1)
    assert np.array_equal(n.diagonal().real, b.boson_occ[:, 1])
    chi = StructureFunction.linear(3)
    assert np.allclose(n.toarray(), (boson_create(b, chi, 1) @ boson_annihilate(b, chi, 1)).toarray())
    nf = number_operator(b, "fermion", 0)
    assert np.allclose(nf.toarray(), (fermion_create(b, 0) @ fermion_annihilate(b, 0)).toarray())
    with pytest.raises(ValueError):
        number_operator(b, "photon", 0)
    with pytest.raises(IndexError):
        number_operator(b, "fermion", 2)


def test_jordan_wigner_sign():
    b = FockBasis(ModeConfig(1, 2, 2))
    out = fermion_create(b, 1) @ b.basis_vector([0], [1, 0])
    assert np.allclose(out, -b.basis_vector([0], [1, 1]))
    out = fermion_create(b, 0) @ b.basis_vector([0], [0, 1])
    assert np.allclose(out, b.basis_vector([0], [1, 1]))
