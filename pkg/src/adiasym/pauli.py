"""Qubit operators as weighted Pauli strings.

Basis convention: qubit ``q`` is bit ``q`` of a computational-basis index,
``|0>`` is the ``sigma^z = +1`` eigenstate, and the problem bit is
``z_q = (1 - sigma^z_q) / 2``, i.e. the value of that bit.  Pauli strings
are written with character ``q`` acting on qubit ``q``; bit strings
``"z_0 z_1 ..."`` use the same order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from . import kernels

_LETTERS = "IXYZ"
_DROP_TOL = 1e-14
DENSE_LIMIT = 4096
JSON_RANK1_LIMIT = 12


class DimensionError(ValueError):
    """Operator and vector live in different spaces."""


class SymmetryError(ValueError):
    """Operator does not leave the requested subspace invariant."""


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Pauli letters, one per qubit."""

    letters: str

    def __post_init__(self):
        if not self.letters or any(c not in _LETTERS for c in self.letters):
            raise ValueError(f"invalid Pauli string {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def masks(self) -> tuple[int, int]:
        x = z = 0
        for q, c in enumerate(self.letters):
            if c in "XY":
                x |= 1 << q
            if c in "ZY":
                z |= 1 << q
        return x, z

    @classmethod
    def from_masks(cls, n: int, x: int, z: int) -> "PauliString":
        out = []
        for q in range(n):
            bx, bz = (x >> q) & 1, (z >> q) & 1
            out.append("IXZY"[bx + 2 * bz])
        return cls("".join(out))

    @classmethod
    def single(cls, n: int, ops: Mapping[int, str]) -> "PauliString":
        """Build a string from ``{qubit: letter}``, identity elsewhere."""
        letters = ["I"] * n
        for q, c in ops.items():
            letters[q] = c
        return cls("".join(letters))


def _popcount(v: int) -> int:
    return bin(v).count("1")


def basis_index(bits: str) -> int:
    """Index of the basis state labelled by ``"z_0 z_1 ..."``."""
    return sum(1 << q for q, c in enumerate(bits) if c == "1")


def basis_label(index: int, n: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n))


def uniform_superposition(n: int) -> np.ndarray:
    """The state ``|S> = |+>^n`` (all amplitudes ``2**(-n/2)``)."""
    dim = 1 << n
    return np.full(dim, 1.0 / math.sqrt(dim))


def product_state(n: int, phi: float) -> np.ndarray:
    """``(cos phi |0> + sin phi |1>)^n`` as a full amplitude vector."""
    ones = np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)
    return np.cos(phi) ** (n - ones) * np.sin(phi) ** ones


class PauliOperatorSum:
    """Hermitian operator ``sum_t c_t P_t + sum_r c_r |v_r><v_r|``.

    Coefficients are real.  Duplicate strings are merged and zero terms
    dropped on construction.  Rank-one projector terms are kept as vectors
    and applied with one inner product; they are never expanded into the
    ``2**n`` Pauli strings they correspond to.

    Parameters
    ----------
    n_qubits : int
    terms : mapping or iterable
        ``{"XZI": c, ...}`` or ``[(c, "XZI"), ...]``.
    rank1 : iterable of (coefficient, vector), optional
        Each vector is normalized to unit norm.
    """

    def __init__(self, n_qubits: int, terms=(), rank1=()):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = int(n_qubits)
        self.dim = 1 << self.n_qubits
        if isinstance(terms, Mapping):
            terms = [(c, s) for s, c in terms.items()]
        merged: dict[tuple[int, int], float] = {}
        for coef, string in terms:
            if not isinstance(string, PauliString):
                string = PauliString(string)
            if string.n_qubits != self.n_qubits:
                raise DimensionError(
                    f"string {string.letters} does not act on {self.n_qubits} qubits"
                )
            coef = float(coef)
            if not math.isfinite(coef):
                raise ValueError("coefficients must be finite reals")
            key = string.masks
            merged[key] = merged.get(key, 0.0) + coef
        scale = max((abs(c) for c in merged.values()), default=0.0)
        self._terms = {
            k: c for k, c in merged.items() if abs(c) > _DROP_TOL * max(scale, 1.0)
        }
        r1 = []
        for coef, vec in rank1:
            vec = np.asarray(vec, dtype=complex if np.iscomplexobj(vec) else float)
            if vec.shape != (self.dim,):
                raise DimensionError("rank-one vector has wrong dimension")
            norm = np.linalg.norm(vec)
            if norm == 0:
                raise ValueError("rank-one vector must be non-zero")
            coef = float(coef)
            if coef != 0.0:
                r1.append((coef, vec / norm))
        self.rank1 = tuple(r1)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def identity(cls, n: int, coef: float = 1.0) -> "PauliOperatorSum":
        return cls(n, [(coef, "I" * n)])

    @classmethod
    def from_masks(cls, n: int, items: Iterable[tuple[float, int, int]], rank1=()):
        """Terms given as ``(coef, x_mask, z_mask)``."""
        return cls(n, [(c, PauliString.from_masks(n, x, z)) for c, x, z in items], rank1)

    @property
    def terms(self) -> list[tuple[float, str]]:
        return [
            (c, PauliString.from_masks(self.n_qubits, x, z).letters)
            for (x, z), c in sorted(self._terms.items())
        ]

    @property
    def n_terms(self) -> int:
        return len(self._terms) + len(self.rank1)

    def coefficient(self, string: str) -> float:
        return self._terms.get(PauliString(string).masks, 0.0)

    # -- algebra --------------------------------------------------------------

    def __add__(self, other: "PauliOperatorSum") -> "PauliOperatorSum":
        if not isinstance(other, PauliOperatorSum):
            return NotImplemented
        if other.n_qubits != self.n_qubits:
            raise DimensionError("qubit counts differ")
        items = [(c, x, z) for (x, z), c in self._terms.items()]
        items += [(c, x, z) for (x, z), c in other._terms.items()]
        return PauliOperatorSum.from_masks(self.n_qubits, items, self.rank1 + other.rank1)

    def __mul__(self, scalar: float) -> "PauliOperatorSum":
        scalar = float(scalar)
        items = [(scalar * c, x, z) for (x, z), c in self._terms.items()]
        return PauliOperatorSum.from_masks(
            self.n_qubits, items, [(scalar * c, v) for c, v in self.rank1]
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    # -- compiled form --------------------------------------------------------

    @cached_property
    def _split(self):
        diag_z, diag_c, xs, zs, cs = [], [], [], [], []
        for (x, z), c in self._terms.items():
            if x == 0:
                diag_z.append(z)
                diag_c.append(c)
            else:
                n_y = _popcount(x & z)
                xs.append(x)
                zs.append(z)
                cs.append(c * 1j**n_y)
        cs = np.array(cs, dtype=complex)
        real = bool(np.all(cs.imag == 0)) and all(
            not np.iscomplexobj(v) for _, v in self.rank1
        )
        return (
            np.array(diag_z, dtype=np.uint64),
            np.array(diag_c, dtype=float),
            np.array(xs, dtype=np.uint64),
            np.array(zs, dtype=np.uint64),
            cs,
            real,
        )

    @property
    def is_real(self) -> bool:
        """True when the matrix has only real entries."""
        return self._split[5]

    @property
    def is_diagonal(self) -> bool:
        off = len(self._split[2]) > 0
        r1 = all(np.count_nonzero(v) <= 1 for _, v in self.rank1)
        return not off and r1

    @cached_property
    def _z_diag(self) -> np.ndarray:
        zs, cs = self._split[0], self._split[1]
        if len(zs) == 0:
            return np.zeros(self.dim)
        return np.asarray(kernels.z_diagonal(zs, cs, self.dim))

    def diagonal(self) -> np.ndarray:
        d = self._z_diag.astype(complex)
        for c, v in self.rank1:
            d += c * np.abs(v) ** 2
        return d.real.copy()

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Matrix-free ``H @ psi`` in ``O(terms * 2**n)``."""
        psi = np.asarray(psi)
        if psi.shape != (self.dim,):
            raise DimensionError(f"expected vector of length {self.dim}, got {psi.shape}")
        _, _, xs, zs, cs, real = self._split
        if real and not np.iscomplexobj(psi):
            dtype = np.float64
            cs = cs.real.copy()
        else:
            dtype = np.complex128
        psi = np.ascontiguousarray(psi, dtype=dtype)
        out = self._z_diag * psi
        if len(xs):
            kernels.apply_pauli(xs, zs, cs, psi, out)
        for c, v in self.rank1:
            out += (c * np.vdot(v, psi)) * v
        return out

    def norm_bound(self) -> float:
        """Upper bound on the spectral norm (sum of absolute coefficients)."""
        return sum(abs(c) for c in self._terms.values()) + sum(abs(c) for c, _ in self.rank1)

    def to_sparse(self) -> sp.csr_matrix:
        """Full sparse matrix; ``rank1`` terms must be basis projectors."""
        idx = np.arange(self.dim, dtype=np.uint64)
        rows, cols, vals = [idx.astype(np.int64)], [idx.astype(np.int64)], [self._z_diag.astype(complex)]
        _, _, xs, zs, cs, real = self._split
        for x, z, c in zip(xs, zs, cs):
            src = idx ^ x
            sign = 1 - 2 * (np.bitwise_count(src & z) & 1).astype(float)
            rows.append(idx.astype(np.int64))
            cols.append(src.astype(np.int64))
            vals.append(c * sign)
        mat = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim, self.dim),
        )
        for c, v in self.rank1:
            nz = np.flatnonzero(v)
            if len(nz) > self.dim // 8 + 1:
                raise ValueError("dense rank-one term cannot be converted to sparse")
            blk = sp.csr_matrix(
                (np.outer(v[nz], v[nz].conj()).ravel(),
                 (np.repeat(nz, len(nz)), np.tile(nz, len(nz)))),
                shape=(self.dim, self.dim),
            )
            mat = mat + c * blk
        return mat.real.tocsr() if real else mat

    def dense(self) -> np.ndarray:
        return dense_matrix(self)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        doc = {
            "n_qubits": self.n_qubits,
            "terms": [{"coef": c, "string": s} for c, s in self.terms],
        }
        if self.rank1:
            if self.n_qubits > JSON_RANK1_LIMIT:
                raise ValueError("rank-one terms are serialized only for n <= 12")
            doc["rank1"] = [
                {"coef": c, "vector_re": v.real.tolist(), "vector_im": np.imag(v).tolist()}
                for c, v in self.rank1
            ]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "PauliOperatorSum":
        rank1 = []
        for item in doc.get("rank1", []):
            v = np.asarray(item["vector_re"]) + 1j * np.asarray(item["vector_im"])
            if not np.any(v.imag):
                v = v.real
            rank1.append((item["coef"], v))
        terms = [(t["coef"], t["string"]) for t in doc["terms"]]
        return cls(doc["n_qubits"], terms, rank1)

    @classmethod
    def from_json(cls, text: str) -> "PauliOperatorSum":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"PauliOperatorSum(n_qubits={self.n_qubits}, terms={len(self._terms)}, rank1={len(self.rank1)})"


# --------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True, eq=False)
class SubspaceMap:
    """Symmetry sector of the ``2**parent_n`` dimensional space.

    ``label`` is ``("hamming", W)`` for the states with exactly ``W`` one-bits
    or ``("parity", "even"|"odd")`` for bit-flip parity.  For parity sectors
    ``kept_indices`` are the representatives ``i`` with the top bit clear; the
    sector basis vector is ``(|i> +- |~i>)/sqrt(2)``.
    """

    parent_n: int
    kept_indices: np.ndarray
    label: tuple

    @property
    def dim(self) -> int:
        return len(self.kept_indices)

    @property
    def parent_dim(self) -> int:
        return 1 << self.parent_n

    @cached_property
    def isometry(self) -> sp.csc_matrix:
        """Sparse ``V`` with orthonormal columns spanning the sector."""
        cols = np.arange(self.dim)
        if self.label[0] == "hamming":
            return sp.csc_matrix(
                (np.ones(self.dim), (self.kept_indices, cols)),
                shape=(self.parent_dim, self.dim),
            )
        mirror = self.kept_indices ^ (self.parent_dim - 1)
        sign = 1.0 if self.label[1] == "even" else -1.0
        r = 1.0 / math.sqrt(2.0)
        return sp.csc_matrix(
            (
                np.concatenate([np.full(self.dim, r), np.full(self.dim, sign * r)]),
                (np.concatenate([self.kept_indices, mirror]), np.concatenate([cols, cols])),
            ),
            shape=(self.parent_dim, self.dim),
        )

    def embed(self, vec: np.ndarray) -> np.ndarray:
        """Scatter a sector vector into the full basis."""
        vec = np.asarray(vec)
        if vec.shape != (self.dim,):
            raise DimensionError("vector does not match sector dimension")
        return self.isometry @ vec

    def project(self, full: np.ndarray) -> np.ndarray:
        """Sector coordinates ``V^dagger psi`` of a full-basis vector."""
        full = np.asarray(full)
        if full.shape != (self.parent_dim,):
            raise DimensionError("vector does not match parent dimension")
        return self.isometry.conj().T @ full

    def weight(self, full: np.ndarray) -> float:
        """Squared norm of the component of ``full`` inside the sector."""
        return float(np.linalg.norm(self.project(full)) ** 2)


def hamming_sector(n: int, weight: int) -> SubspaceMap:
    if not 0 <= weight <= n:
        raise ValueError("Hamming weight out of range")
    idx = np.arange(1 << n, dtype=np.uint64)
    kept = np.flatnonzero(np.bitwise_count(idx) == weight).astype(np.int64)
    return SubspaceMap(n, kept, ("hamming", int(weight)))


def parity_sector(n: int, even: bool = True) -> SubspaceMap:
    """Bit-flip parity sector (eigenspace of the product of all ``sigma^x``)."""
    kept = np.arange(1 << (n - 1), dtype=np.int64)
    return SubspaceMap(n, kept, ("parity", "even" if even else "odd"))


class RestrictedOperator:
    """Operator acting inside a :class:`SubspaceMap` (sparse + rank-one part)."""

    def __init__(self, matrix: sp.csr_matrix, rank1=(), subspace: SubspaceMap | None = None):
        self.matrix = matrix.tocsr()
        self.rank1 = tuple(rank1)
        self.subspace = subspace
        self.dim = self.matrix.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix.data) and all(
            not np.iscomplexobj(u) for _, u in self.rank1
        )

    def apply(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec)
        if vec.shape != (self.dim,):
            raise DimensionError(f"expected vector of length {self.dim}, got {vec.shape}")
        out = self.matrix @ vec
        for c, u in self.rank1:
            out = out + (c * np.vdot(u, vec)) * u
        return out

    @property
    def is_diagonal(self) -> bool:
        m = self.matrix.tocoo()
        off = np.any((m.row != m.col) & (m.data != 0))
        return not off and all(np.count_nonzero(u) <= 1 for _, u in self.rank1)

    def dense(self) -> np.ndarray:
        out = self.matrix.toarray()
        for c, u in self.rank1:
            out = out + c * np.outer(u, u.conj())
        return out

    def diagonal(self) -> np.ndarray:
        d = self.matrix.diagonal().astype(complex)
        for c, u in self.rank1:
            d += c * np.abs(u) ** 2
        return d.real

    def norm_bound(self) -> float:
        rows = np.asarray(abs(self.matrix).sum(axis=1)).ravel()
        return float(rows.max(initial=0.0)) + sum(abs(c) for c, _ in self.rank1)

    def __add__(self, other: "RestrictedOperator") -> "RestrictedOperator":
        return RestrictedOperator(self.matrix + other.matrix, self.rank1 + other.rank1, self.subspace)

    def __mul__(self, scalar: float) -> "RestrictedOperator":
        scalar = float(scalar)
        return RestrictedOperator(
            self.matrix * scalar, [(scalar * c, u) for c, u in self.rank1], self.subspace
        )

    __rmul__ = __mul__


def restrict(H: PauliOperatorSum, subspace: SubspaceMap, tol: float = 1e-9) -> RestrictedOperator:
    """Compress ``H`` to ``V^dagger H V`` after checking ``H V = V V^dagger H V``.

    Raises
    ------
    SymmetryError
        If ``H`` moves weight out of the sector by more than ``tol`` (relative).
    """
    if H.n_qubits != subspace.parent_n:
        raise DimensionError("operator and subspace have different qubit counts")
    V = subspace.isometry.tocoo()
    r0 = V.row.astype(np.uint64)
    c0 = V.col
    v0 = V.data.astype(complex)
    zd, cd, xs, zs, cs, _ = H._split
    rows, cols, vals = [], [], []
    # diagonal Z part evaluated only on the sector support
    if len(zd):
        diag = np.zeros(len(r0))
        for z, c in zip(zd, cd):
            diag += c * (1 - 2 * (np.bitwise_count(r0 & z) & 1).astype(float))
        rows.append(r0)
        cols.append(c0)
        vals.append(diag * v0)
    for x, z, c in zip(xs, zs, cs):
        sign = 1 - 2 * (np.bitwise_count(r0 & z) & 1).astype(float)
        rows.append(r0 ^ x)
        cols.append(c0)
        vals.append(c * sign * v0)
    if rows:
        HV = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows).astype(np.int64), np.concatenate(cols))),
            shape=(subspace.parent_dim, subspace.dim),
        )
        HV.sum_duplicates()
        HV.eliminate_zeros()
    else:
        HV = sp.csr_matrix((subspace.parent_dim, subspace.dim), dtype=complex)
    Vh = subspace.isometry.conj().T.tocsr()
    R = (Vh @ HV).tocsr()
    resid = (HV - subspace.isometry @ R).tocsr()
    leak = float(np.sqrt(np.sum(np.abs(resid.data) ** 2)))
    scale = float(np.sqrt(np.sum(np.abs(HV.data) ** 2)))
    if leak > tol * max(1.0, scale):
        raise SymmetryError(f"operator leaks out of sector {subspace.label}: {leak:.3g}")
    rank1 = []
    for c, v in H.rank1:
        u = subspace.project(v)
        lost = math.sqrt(max(1.0 - float(np.vdot(u, u).real), 0.0))
        if lost > tol:
            raise SymmetryError(f"rank-one term leaks out of sector {subspace.label}")
        if not np.any(np.imag(u)):
            u = np.real(u)
        rank1.append((c, u))
    if not np.any(R.data.imag if np.iscomplexobj(R.data) else 0):
        R = R.real.tocsr()
    R.eliminate_zeros()
    return RestrictedOperator(R, rank1, subspace)


# --------------------------------------------------------------------------
# state vectors


@dataclass
class StateVector:
    """Unit-norm amplitudes, in the full basis or in a sector basis."""

    amplitudes: np.ndarray
    subspace: SubspaceMap | None = None
    n_qubits: int = field(default=0)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.subspace is not None:
            if len(self.amplitudes) != self.subspace.dim:
                raise DimensionError("amplitudes do not match the sector dimension")
            self.n_qubits = self.subspace.parent_n
        else:
            n = int(round(math.log2(len(self.amplitudes))))
            if 1 << n != len(self.amplitudes):
                raise DimensionError("full-basis vector length must be a power of two")
            self.n_qubits = n
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized (norm={norm!r})")

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def full(self) -> np.ndarray:
        """Amplitudes in the full computational basis."""
        if self.subspace is None:
            return self.amplitudes
        return self.subspace.embed(self.amplitudes)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    @classmethod
    def normalized(cls, vec, subspace=None) -> "StateVector":
        vec = np.asarray(vec, dtype=complex)
        return cls(vec / np.linalg.norm(vec), subspace)


# --------------------------------------------------------------------------
# module-level operations


def apply(H, psi) -> np.ndarray:
    """Unnormalized image ``H psi``."""
    return H.apply(np.asarray(psi))


def expectation(H, psi) -> float:
    """``Re <psi|H|psi>``; the imaginary part must vanish (Hermitian ``H``)."""
    psi = np.asarray(psi)
    val = np.vdot(psi, H.apply(psi))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"non-real expectation value {val}")
    return float(val.real)


def interpolate(H_I: PauliOperatorSum, H_F: PauliOperatorSum, s: float) -> PauliOperatorSum:
    """Term-merged ``(1 - s) H_I + s H_F``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("interpolation parameter must lie in [0, 1]")
    if H_I.n_qubits != H_F.n_qubits:
        raise DimensionError("qubit counts differ")
    return (1.0 - s) * H_I + s * H_F


def hamming_weight_operator(n: int) -> PauliOperatorSum:
    """``sum_i sigma^z_i``; eigenvalue ``n - 2 W`` on states with ``W`` one-bits."""
    if n < 1:
        raise ValueError("n must be positive")
    return PauliOperatorSum(n, [(1.0, PauliString.single(n, {q: "Z"})) for q in range(n)])


def bit_flip_operator(n: int) -> PauliOperatorSum:
    return PauliOperatorSum(n, [(1.0, "X" * n)])


def dense_matrix(H) -> np.ndarray:
    """Dense matrix of ``H`` built column by column through ``apply``."""
    dim = H.dim
    if dim > DENSE_LIMIT:
        raise ValueError(f"dense matrix refused for dimension {dim} > {DENSE_LIMIT}")
    if isinstance(H, RestrictedOperator):
        return H.dense()
    out = np.empty((dim, dim), dtype=float if H.is_real else complex)
    eye = np.eye(dim, dtype=out.dtype)
    for j in range(dim):
        out[:, j] = H.apply(eye[j])
    return out


def commutator_norm(A, B) -> float:
    """Frobenius norm of ``[A, B]`` via dense matrices (small systems only)."""
    a, b = dense_matrix(A), dense_matrix(B)
    return float(np.linalg.norm(a @ b - b @ a))


class LinearPath:
    """The interpolation ``H(s) = (1 - s) H_I + s H_F`` on one (sub)space.

    Both endpoints are restricted to ``subspace`` when one is given.
    Dense endpoint matrices are cached for ``dim <= dense_limit``.
    """

    def __init__(self, H_I, H_F, subspace: SubspaceMap | None = None, dense_limit: int = 256):
        if subspace is not None:
            if isinstance(H_I, PauliOperatorSum):
                H_I = restrict(H_I, subspace)
            if isinstance(H_F, PauliOperatorSum):
                H_F = restrict(H_F, subspace)
        if H_I.dim != H_F.dim:
            raise DimensionError("endpoint dimensions differ")
        self.H_I = H_I
        self.H_F = H_F
        self.subspace = subspace
        self.dim = H_I.dim
        self.dense_limit = dense_limit
        self.is_real = bool(H_I.is_real and H_F.is_real)

    @cached_property
    def _dense_ends(self):
        return dense_matrix(self.H_I), dense_matrix(self.H_F)

    @property
    def use_dense(self) -> bool:
        return self.dim <= self.dense_limit

    def dense(self, s: float) -> np.ndarray:
        a, b = self._dense_ends
        return (1.0 - s) * a + s * b

    def apply(self, s: float, vec: np.ndarray) -> np.ndarray:
        return (1.0 - s) * self.H_I.apply(vec) + s * self.H_F.apply(vec)

    def derivative_apply(self, vec: np.ndarray) -> np.ndarray:
        """``dH/ds`` applied to ``vec``."""
        return self.H_F.apply(vec) - self.H_I.apply(vec)

    def norm_bound(self, s: float) -> float:
        return (1.0 - s) * self.H_I.norm_bound() + s * self.H_F.norm_bound()

    def embed(self, vec: np.ndarray) -> np.ndarray:
        return vec if self.subspace is None else self.subspace.embed(vec)
