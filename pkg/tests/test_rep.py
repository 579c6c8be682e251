import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lacuna.rep import (
    Irrep,
    QuantumGroupModel,
    classical_dim,
    fuse,
    q_matrix,
    quantum_dim,
    suq2,
)


def q_integer(n, q):
    """[n]_q = (q^-n - q^n) / (q^-1 - q), the quantum dimension of the (n-1)-label irrep."""
    if q == 1.0:
        return float(n)
    return (q ** -n - q ** n) / (q ** -1 - q)


def test_model_validation():
    with pytest.raises(ValueError):
        QuantumGroupModel(())
    with pytest.raises(ValueError):
        suq2(0.0)
    with pytest.raises(ValueError):
        suq2(1.5)
    assert suq2(1.0).is_kac
    assert not suq2(0.5).is_kac


@pytest.mark.parametrize("n, expected", [(0, [1.0]), (1, [2.0, 0.5]), (2, [4.0, 1.0, 0.25])])
def test_q_matrix_examples(n, expected):
    np.testing.assert_allclose(q_matrix(suq2(0.5), n), expected, rtol=0, atol=1e-15)


def test_quantum_dim_examples():
    assert quantum_dim(suq2(1.0), 1) == 2
    assert quantum_dim(suq2(0.5), 1) == pytest.approx(2.5, abs=1e-15)
    assert quantum_dim(suq2(0.5), 2) == pytest.approx(5.25, abs=1e-15)


@pytest.mark.parametrize("q", [0.2, 0.5, 0.9, 1.0])
def test_quantum_dim_matches_q_integer(q):
    for n in range(15):
        assert quantum_dim(suq2(q), n) == pytest.approx(q_integer(n + 1, q), rel=1e-12)


def test_fuse_examples():
    assert fuse(1, 1) == [Irrep.single(0), Irrep.single(2)]
    assert fuse(0, 4) == [Irrep.single(4)]
    assert fuse(2, 3) == [Irrep.single(1), Irrep.single(3), Irrep.single(5)]


def test_classical_dim_examples():
    assert classical_dim(0) == 1
    assert classical_dim(3) == 4
    assert classical_dim(Irrep.from_indices([1, 2])) == 6


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9, 1.0])
def test_dimension_conservation(q):
    model = suq2(q)
    for m, mp in itertools.product(range(13), repeat=2):
        parts = fuse(m, mp)
        assert sum(classical_dim(s) for s in parts) == (m + 1) * (mp + 1)
        lhs = sum(quantum_dim(model, s) for s in parts)
        rhs = quantum_dim(model, m) * quantum_dim(model, mp)
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_trace_q_equals_trace_q_inverse():
    model = suq2(0.37)
    for n in range(20):
        qd = q_matrix(model, n)
        assert qd.sum() == pytest.approx((1.0 / qd).sum(), rel=1e-13)


def test_kac_case_identity():
    for n in range(6):
        np.testing.assert_array_equal(q_matrix(suq2(1.0), n), np.ones(n + 1))


@given(st.integers(0, 15), st.integers(0, 15))
def test_fuse_commutative_and_unital(m, mp):
    assert fuse(m, mp) == fuse(mp, m)
    assert fuse(0, m) == [Irrep.single(m)]


def test_product_model_kronecker():
    model = QuantumGroupModel((0.5, 0.8))
    label = Irrep.from_indices([1, 2])
    expected = np.kron([2.0, 0.5], [0.8 ** -2, 1.0, 0.8 ** 2])
    np.testing.assert_allclose(q_matrix(model, label), expected, rtol=1e-14)
    assert quantum_dim(model, label) == pytest.approx(2.5 * q_integer(3, 0.8), rel=1e-13)


def test_product_fusion_componentwise():
    a = Irrep.from_indices([1, 1])
    b = Irrep.from_indices([1, 0])
    out = fuse(a, b)
    assert sorted(out) == sorted([Irrep.from_indices([0, 1]), Irrep.from_indices([2, 1])])
    assert sum(classical_dim(x) for x in out) == classical_dim(a) * classical_dim(b)


@given(st.lists(st.integers(0, 9), min_size=1, max_size=4))
@settings(max_examples=50)
def test_irrep_parse_roundtrip(indices):
    label = Irrep.from_indices(indices)
    assert Irrep.parse(str(label)) == label


def test_irrep_parse_rejects_bad_input():
    for bad in ["-1", "x", "1:2,0:1", "0:1,0:2"]:
        with pytest.raises(ValueError):
            Irrep.parse(bad)


def test_label_outside_model_rejected():
    with pytest.raises(ValueError):
        q_matrix(suq2(0.5), Irrep.from_indices([0, 1]))
