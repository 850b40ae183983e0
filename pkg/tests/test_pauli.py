import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adiasym.pauli import (
    DimensionError,
    LinearPath,
    PauliOperatorSum,
    PauliString,
    StateVector,
    SymmetryError,
    basis_index,
    basis_label,
    bit_flip_operator,
    commutator_norm,
    dense_matrix,
    expectation,
    hamming_sector,
    hamming_weight_operator,
    interpolate,
    parity_sector,
    product_state,
    restrict,
    uniform_superposition,
)

from conftest import kron_operator, kron_string, random_terms


def test_single_string_matches_kron():
    for s in ["X", "Y", "Z", "XY", "ZIY", "YYX"]:
        H = PauliOperatorSum(len(s), [(1.0, s)])
        np.testing.assert_allclose(H.dense(), kron_string(s), atol=1e-15)


def test_bit_convention():
    assert basis_index("100") == 1
    assert basis_label(1, 3) == "100"
    assert PauliString("XIZ").masks == (1, 4)
    Z0 = PauliOperatorSum(3, [(1.0, "ZII")])
    np.testing.assert_array_equal(Z0.diagonal(), [1, -1, 1, -1, 1, -1, 1, -1])


@given(n=st.integers(1, 8), count=st.integers(1, 12), seed=st.integers(0, 2**31))
def test_apply_matches_dense(backend, n, count, seed):
    rng = np.random.default_rng(seed)
    terms = random_terms(rng, n, count)
    H = PauliOperatorSum(n, terms)
    M = kron_operator(terms, n)
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    np.testing.assert_allclose(H.apply(psi), M @ psi, atol=1e-12 * max(1, np.abs(M).sum()))
    np.testing.assert_allclose(H.diagonal(), np.diag(M).real, atol=1e-12)


def test_real_input_stays_real(backend):
    H = PauliOperatorSum(3, [(0.5, "XXI"), (1.0, "ZIZ"), (-0.3, "YYI")])
    assert H.is_real
    out = H.apply(np.arange(8.0))
    assert out.dtype == np.float64
    np.testing.assert_allclose(out, kron_operator(H.terms, 3).real @ np.arange(8.0), atol=1e-13)


def test_complex_operator_is_not_real():
    H = PauliOperatorSum(2, [(1.0, "XY")])
    assert not H.is_real


def test_merge_and_drop():
    H = PauliOperatorSum(2, [(1.0, "XZ"), (2.0, "XZ"), (0.0, "ZZ"), (1.0, "IY"), (-1.0, "IY")])
    assert H.terms == [(3.0, "XZ")]


def test_rank1_term_matrix_free():
    n = 3
    v = np.arange(1.0, 9.0)
    H = PauliOperatorSum(n, [(1.0, "III")], rank1=[(-2.0, v)])
    u = v / np.linalg.norm(v)
    M = np.eye(8) - 2.0 * np.outer(u, u)
    psi = np.sin(np.arange(8.0))
    np.testing.assert_allclose(H.apply(psi), M @ psi, atol=1e-14)
    np.testing.assert_allclose(H.diagonal(), np.diag(M), atol=1e-14)
    assert not H.is_diagonal
    marked = PauliOperatorSum(n, [(1.0, "III")], rank1=[(-1.0, np.eye(8)[5])])
    assert marked.is_diagonal


def test_json_round_trip():
    H = PauliOperatorSum(3, [(0.25, "XYZ"), (-1.5, "IIZ")], rank1=[(-1.0, uniform_superposition(3))])
    doc = json.loads(H.to_json())
    assert doc["n_qubits"] == 3
    assert {"coef": 0.25, "string": "XYZ"} in doc["terms"]
    H2 = PauliOperatorSum.from_json(H.to_json())
    np.testing.assert_allclose(H2.dense(), H.dense(), atol=1e-15)


def test_rank1_vectors_refused_above_twelve_qubits():
    n = 13
    H = PauliOperatorSum(n, [(1.0, "I" * n)], rank1=[(-1.0, uniform_superposition(n))])
    with pytest.raises(ValueError):
        H.to_dict()


def test_invalid_strings():
    with pytest.raises(ValueError):
        PauliString("XA")
    with pytest.raises(ValueError):
        PauliOperatorSum(2, [(1.0, "XXX")])
    with pytest.raises(DimensionError):
        PauliOperatorSum(2, [(1.0, "XX")]).apply(np.ones(3))


def test_hamming_weight_operator_eigenvalues():
    n = 4
    d = hamming_weight_operator(n).diagonal()
    w = np.array([bin(i).count("1") for i in range(16)])
    np.testing.assert_array_equal(d, n - 2 * w)


def test_restrict_hamming_sector_is_block():
    rng = np.random.default_rng(3)
    n = 5
    terms = []
    for i in range(n):
        for j in range(i + 1, n):
            c = float(rng.normal())
            terms += [(c, PauliString.single(n, {i: "X", j: "X"})), (c, PauliString.single(n, {i: "Y", j: "Y"}))]
        terms.append((float(rng.normal()), PauliString.single(n, {i: "Z"})))
    H = PauliOperatorSum(n, terms)
    full = np.linalg.eigvalsh(H.dense())
    pieces = []
    for W in range(n + 1):
        sub = hamming_sector(n, W)
        R = restrict(H, sub)
        idx = sub.kept_indices
        np.testing.assert_allclose(R.dense(), H.dense()[np.ix_(idx, idx)], atol=1e-13)
        pieces.append(np.linalg.eigvalsh(R.dense()))
    np.testing.assert_allclose(np.sort(np.concatenate(pieces)), full, atol=1e-11)


@given(seed=st.integers(0, 2**31), W=st.integers(0, 6))
def test_restricted_spectrum_is_sub_multiset(seed, W):
    rng = np.random.default_rng(seed)
    n = 6
    c = rng.normal(size=3)
    H = PauliOperatorSum(n, [(c[0], "XXIIII"), (c[0], "YYIIII"), (c[1], "IZZIII"), (c[2], "IIIXXI"),
                             (c[2], "IIIYYI")])
    full = np.sort(np.linalg.eigvalsh(H.dense()))
    part = np.linalg.eigvalsh(restrict(H, hamming_sector(n, W)).dense())
    for e in part:
        assert np.min(np.abs(full - e)) < 1e-10


def test_restrict_parity_sector():
    from adiasym.models import ising_hamiltonians

    H_I, H_F = ising_hamiltonians(4)
    H = interpolate(H_I, H_F, 0.3)
    full = np.linalg.eigvalsh(H.dense())
    even = np.linalg.eigvalsh(restrict(H, parity_sector(4, True)).dense())
    odd = np.linalg.eigvalsh(restrict(H, parity_sector(4, False)).dense())
    np.testing.assert_allclose(np.sort(np.concatenate([even, odd])), full, atol=1e-12)
    P = bit_flip_operator(4).dense()
    assert commutator_norm(H, bit_flip_operator(4)) < 1e-12
    assert np.allclose(P @ P, np.eye(16))


def test_restrict_detects_leak():
    H = PauliOperatorSum(3, [(1.0, "XII")])
    with pytest.raises(SymmetryError):
        restrict(H, hamming_sector(3, 1))
    grover_like = PauliOperatorSum(3, [(1.0, "III")], rank1=[(-1.0, uniform_superposition(3))])
    with pytest.raises(SymmetryError):
        restrict(grover_like, hamming_sector(3, 1))


def test_state_vector_embed_and_validation():
    sub = hamming_sector(4, 2)
    amp = np.full(sub.dim, 1 / np.sqrt(sub.dim))
    psi = StateVector(amp, sub)
    full = psi.full()
    assert full.shape == (16,)
    assert np.isclose(sub.weight(full), 1.0)
    assert np.isclose(hamming_sector(4, 1).weight(full), 0.0)
    with pytest.raises(ValueError):
        StateVector(np.ones(4))
    with pytest.raises(DimensionError):
        StateVector(np.ones(3) / np.sqrt(3))


def test_expectation_and_product_state():
    n = 3
    H = hamming_weight_operator(n)
    # (cos phi |0> + sin phi |1>)^n gives <Z> = cos 2 phi per qubit
    phi = 0.4
    psi = product_state(n, phi)
    assert np.isclose(np.linalg.norm(psi), 1.0)
    assert np.isclose(expectation(H, psi), n * np.cos(2 * phi))


def test_interpolate_and_path_agree():
    rng = np.random.default_rng(1)
    A = PauliOperatorSum(3, random_terms(rng, 3, 5))
    B = PauliOperatorSum(3, random_terms(rng, 3, 5))
    path = LinearPath(A, B)
    v = rng.normal(size=8)
    for s in (0.0, 0.37, 1.0):
        np.testing.assert_allclose(path.apply(s, v), interpolate(A, B, s).apply(v), atol=1e-13)
        np.testing.assert_allclose(path.dense(s), dense_matrix(interpolate(A, B, s)), atol=1e-13)
    with pytest.raises(ValueError):
        interpolate(A, B, 1.5)
