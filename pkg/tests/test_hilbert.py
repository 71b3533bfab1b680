import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photonic_tns.hilbert import (CAVITY, TRANSMON, CompositeSpace, TruncationSpec, build_space,
                                  complete_isometry, embed_isometry, make_operator, permute_basis,
                                  random_isometry, source_space, stack_isometry, unitarity_defect)
from photonic_tns.mpdo import CLUSTER_LAST_V0, CLUSTER_LAST_V1, CLUSTER_V0, CLUSTER_V1


def test_space_dimensions():
    assert build_space(TruncationSpec(5, 3)).dim == 15
    assert build_space(TruncationSpec(5, 2)).dim == 10


def test_flat_index_transmon_slow():
    sp = build_space(TruncationSpec(2, 2, 1))
    assert sp.flat_index({CAVITY: 1, TRANSMON: 1}) == 3
    assert sp.flat_index({CAVITY: 1, TRANSMON: 0}) == 1


@pytest.mark.parametrize("kw", [dict(cavity_cutoff=2, ancilla_dim=2), dict(transmon_levels=4),
                                dict(cavity_cutoff=0)])
def test_invalid_truncation(kw):
    with pytest.raises(ValueError):
        TruncationSpec(**kw)


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4))
def test_index_map_is_bijection(dims):
    sp = CompositeSpace(tuple(f"f{i}" for i in range(len(dims))), tuple(dims))
    seen = {sp.flat_index(sp.multi_index(k)) for k in range(sp.dim)}
    assert seen == set(range(sp.dim))


def test_lowering_entries():
    sp = CompositeSpace((CAVITY,), (3,))
    a = make_operator("lower", sp, CAVITY).matrix
    expected = np.zeros((3, 3))
    expected[0, 1], expected[1, 2] = 1, np.sqrt(2)
    assert np.array_equal(a, expected)


def test_sigma_single_entry():
    sp = CompositeSpace((TRANSMON,), (3,))
    s = make_operator("sigma", sp, TRANSMON, 0, 1).matrix
    assert np.count_nonzero(s) == 1 and s[0, 1] == 1


def test_operator_errors():
    sp = source_space(3, 2)
    with pytest.raises(ValueError):
        make_operator("sigma", sp, TRANSMON, 0, 2)
    with pytest.raises(ValueError):
        make_operator("lower", sp, "nope")
    with pytest.raises(ValueError):
        make_operator("lower", CompositeSpace((CAVITY,), (1,)), CAVITY)


def test_number_operators_commute():
    sp = source_space(4, 3)
    n_c = make_operator("number", sp, CAVITY)
    s11 = make_operator("sigma", sp, TRANSMON, 1, 1)
    prod = (s11 @ n_c).matrix
    assert np.max(np.abs(prod @ n_c.matrix - n_c.matrix @ prod)) == 0


def test_permute_round_trip_and_spectrum():
    sp = source_space(4, 3)
    op = 0.3 * (make_operator("sigma", sp, TRANSMON, 1, 1) @ make_operator("number", sp, CAVITY))
    h = op + make_operator("lower", sp, CAVITY) + make_operator("raise", sp, CAVITY)
    p = permute_basis(h, (CAVITY, TRANSMON))
    back = permute_basis(p, (TRANSMON, CAVITY))
    assert np.array_equal(back.matrix, h.matrix)
    assert np.allclose(np.sort(np.linalg.eigvalsh(p.matrix)), np.sort(np.linalg.eigvalsh(h.matrix)))
    d = permute_basis(op, (CAVITY, TRANSMON)).matrix
    assert np.count_nonzero(d - np.diag(np.diag(d))) == 0
    with pytest.raises(ValueError):
        permute_basis(h, (CAVITY, "x"))


def test_cluster_embedding():
    sp = source_space(5, 2)
    t = embed_isometry(stack_isometry(CLUSTER_V0, CLUSTER_V1), sp)
    assert t.matrix.shape == (10, 10)
    assert unitarity_defect(t.matrix) <= 1e-12
    assert np.all(t.leak_block == 0)


def test_disentangling_action():
    sp = source_space(5, 2)
    t = embed_isometry(stack_isometry(CLUSTER_LAST_V0, CLUSTER_LAST_V1), sp)
    a, b = 0.6, 0.8j
    psi = a * sp.basis_vector(cavity=0) + b * sp.basis_vector(cavity=1)
    out = t.matrix @ psi
    expected = a * sp.basis_vector(transmon=0) + b * sp.basis_vector(transmon=1)
    assert np.max(np.abs(out - expected)) == 0


def test_identity_isometry_first_column():
    sp = source_space(3, 2)
    t = embed_isometry(np.array([[1.0], [0.0]]), sp)
    assert np.array_equal(t.matrix[:, 0], sp.basis_vector())


def test_non_isometric_rejected():
    with pytest.raises(ValueError):
        embed_isometry(np.ones((4, 2)), source_space(5, 2))
    with pytest.raises(ValueError):
        embed_isometry(stack_isometry(CLUSTER_V0, CLUSTER_V1), source_space(2, 2))


def _qr_oracle(rows, cols, seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    return np.linalg.qr(z)[0]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_random_isometry_embedding_unitary(seed):
    iso = _qr_oracle(4, 2, seed)
    t = embed_isometry(iso, source_space(4, 2))
    assert unitarity_defect(t.matrix) <= 1e-12
    assert np.all(t.leak_block == 0)
    # the embedded block reproduces the isometry on the input columns
    assert np.allclose(t.matrix[np.ix_(t.output_indices, t.input_indices)], iso, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 999))
def test_complete_isometry_is_unitary(k, seed):
    iso = random_isometry(6, k, np.random.default_rng(seed))
    u = complete_isometry(iso)
    assert unitarity_defect(u) <= 1e-12
    assert np.allclose(u[:, :k], iso)
