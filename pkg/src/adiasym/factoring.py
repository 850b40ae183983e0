"""Factoring ``omega = a * b`` as a diagonal two-qubit penalty Hamiltonian.

Grid layout
-----------
``a = a_1 ... a_k`` and ``b = b_1 ... b_{n-k}`` are written MSB first.  The
partial product ``a_i b_j`` sits in column ``i + j`` (column ``c`` carries
weight ``2**(n - c)``).  Each grid cell obeys::

    a_i b_j + S_ij + z_ij - S_{i+1,j-1} - 2 z_{i-1,j} = 0

with partial-sum variables ``S`` flowing down the rows and carries ``z``
flowing left within a row.  Boundary closures (``S_{i,0} = omega_i``,
``S_{k+1,j} = omega_{k+j+1}``, vanishing top row and right-edge carries, the
alias ``z_{0,j} = S_{1,j-1}``) are folded in at build time, so constants never
occupy a qubit.

Variables map to qubits in the order a-bits, b-bits, S-grid, z-grid.  Qubit
``q`` holds ``x_q = (1 - sigma^z_q)/2``, i.e. bit ``q`` of the basis index.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .pauli import PauliOperatorSum, PauliString

#: ``n_tot -> [(omega, k, n - k), ...]`` for the accessible bi-prime table.
BIPRIME_TABLE = {
    5: [(33, 4, 2), (39, 4, 2)],
    7: [(w, 5, 2) for w in (51, 57, 69, 87, 93)],
    9: [(25, 3, 3), (35, 3, 3), (49, 3, 3)] + [(w, 6, 2) for w in (111, 123, 129, 141, 159, 177, 183)],
    13: [(w, 4, 3) for w in (55, 65, 77, 91)],
    17: [(w, 5, 3) for w in (85, 95, 115, 119, 133, 145, 155, 161, 203, 217)],
    21: [(w, 4, 4) for w in (121, 143, 169)],
}

MAX_EQUATION_PENALTY = 21


def table_rows(max_qubits: int | None = None):
    """Flat list of ``(n_tot, omega, k, n - k)`` rows, optionally capped."""
    out = []
    for n_tot, rows in sorted(BIPRIME_TABLE.items()):
        if max_qubits is not None and n_tot > max_qubits:
            continue
        out.extend((n_tot, w, k, nk) for w, k, nk in rows)
    return out


def qubit_count(n: int, k: int, odd_reduced: bool) -> int:
    if odd_reduced:
        return 2 * k * (n - k - 1) - 3
    return n - 1 + (2 * k - 1) * (n - k - 1)


@dataclass(frozen=True)
class FactorEquation:
    """``A*B + sum(alpha_j x_j) + constant = 0`` with qubit indices for A, B, x_j."""

    product_term: tuple[int, int] | None
    linear_terms: tuple[tuple[int, int], ...]
    constant: int
    cell: tuple[int, int] | None = None

    @property
    def variables(self) -> list[int]:
        vs = [q for _, q in self.linear_terms]
        if self.product_term:
            vs += list(self.product_term)
        return sorted(set(vs))

    def residual(self, x) -> int:
        """Value of the left-hand side for a 0/1 assignment (mapping or sequence)."""
        val = self.constant + sum(c * int(x[q]) for c, q in self.linear_terms)
        if self.product_term:
            A, B = self.product_term
            val += int(x[A]) * int(x[B])
        return val

    def binary_poly(self) -> tuple[int, dict, dict]:
        """``8 * penalty`` as an integer binary polynomial ``(const, lin, quad)``.

        With a product the penalty is ``((2A + 2B - 1 + 4S)^2 - 1)/8``; without
        one it is ``S^2``.  ``x^2 = x`` is folded into the linear part.
        """
        if self.product_term:
            A, B = self.product_term
            coef = {A: 2, B: 2}
            for c, q in self.linear_terms:
                coef[q] = coef.get(q, 0) + 4 * c
            c0 = 4 * self.constant - 1
            const, scale = c0 * c0 - 1, 1
        else:
            coef = {}
            for c, q in self.linear_terms:
                coef[q] = coef.get(q, 0) + c
            c0 = self.constant
            const, scale = c0 * c0, 8
        lin: dict[int, int] = {}
        quad: dict[tuple[int, int], int] = {}
        for q, c in coef.items():
            if c:
                lin[q] = lin.get(q, 0) + c * c + 2 * c0 * c
        items = [(q, c) for q, c in sorted(coef.items()) if c]
        for (p, cp), (q, cq) in itertools.combinations(items, 2):
            quad[(p, q)] = quad.get((p, q), 0) + 2 * cp * cq
        return (
            scale * const,
            {q: scale * v for q, v in lin.items() if v},
            {pq: scale * v for pq, v in quad.items() if v},
        )


def penalty(eq: FactorEquation, assignment) -> Fraction:
    """Exact penalty of one equation: 0 when it holds, at least 1 otherwise."""
    missing = [q for q in eq.variables if q not in assignment] if isinstance(assignment, dict) else [
        q for q in eq.variables if q >= len(assignment)
    ]
    if missing:
        raise KeyError(f"unassigned variables {missing}")
    x = assignment
    if eq.product_term:
        A, B = (int(x[q]) for q in eq.product_term)
        S = eq.residual(x) - A * B
        return 2 * (Fraction(1, 2) * (A + B - Fraction(1, 2)) + S) ** 2 - Fraction(1, 8)
    return Fraction(eq.residual(x)) ** 2


@dataclass(frozen=True)
class FactoringLayout:
    omega: int
    n: int
    k: int
    odd_reduced: bool
    variables: dict  # name -> qubit index
    constants: dict  # name -> 0/1
    equations: tuple[FactorEquation, ...]
    eliminated: int = 0  # top-row S variables removed by the odd reduction

    @property
    def n_qubits(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> list[str]:
        inv = sorted(self.variables.items(), key=lambda kv: kv[1])
        return [name for name, _ in inv]

    def value_of(self, name: str, x) -> int:
        if name in self.variables:
            return int(x[self.variables[name]])
        return int(self.constants[name])

    def decode(self, index: int) -> tuple[int, int]:
        """``(a, b)`` read from a basis index."""
        x = [(index >> q) & 1 for q in range(self.n_qubits)]
        a = sum(self.value_of(f"a{i}", x) << (self.k - i) for i in range(1, self.k + 1))
        nb = self.n - self.k
        b = sum(self.value_of(f"b{j}", x) << (nb - j) for j in range(1, nb + 1))
        return a, b

    def encode(self, a: int, b: int) -> int | None:
        """Basis index of the zero-penalty assignment for ``(a, b)``, if consistent."""
        k, nb = self.k, self.n - self.k
        vals = {}
        for i in range(1, k + 1):
            vals[f"a{i}"] = (a >> (k - i)) & 1
        for j in range(1, nb + 1):
            vals[f"b{j}"] = (b >> (nb - j)) & 1
        for name, v in self.constants.items():
            if name in vals and vals[name] != v:
                return None
        # propagate rows from the top
        S = {(i, nb): 0 for i in range(1, k + 2)}
        for j in range(nb, 0, -1):
            carry = 0
            for i in range(k, 0, -1):
                tot = vals[f"a{i}"] * vals[f"b{j}"] + S.get((i, j), 0) + carry
                S[(i + 1, j - 1)] = tot & 1
                vals[f"z{i}_{j}"] = carry
                carry = tot >> 1
            S[(1, j - 1)] = carry
        for (i, j), v in S.items():
            vals[f"S{i}_{j}"] = v
        idx = 0
        for name, q in self.variables.items():
            idx |= vals[name] << q
        return idx

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "n": self.n,
            "k": self.k,
            "odd_reduced": self.odd_reduced,
            "n_qubits": self.n_qubits,
            "variables": self.variables,
            "constants": self.constants,
        }


def _bits_msb(value: int, n: int) -> list[int]:
    return [(value >> (n - c)) & 1 for c in range(1, n + 1)]


def build_layout(omega: int, n: int, k: int, odd_reduced: bool = True) -> FactoringLayout:
    """Equations and qubit registry for ``omega`` split into ``k`` and ``n - k`` bits."""
    nb = n - k
    if k < 2 or nb < 2:
        raise ValueError("both factors need at least two bits")
    if not 0 < omega < (1 << n):
        raise ValueError(f"omega={omega} does not fit in {n} bits")
    if odd_reduced and omega % 2 == 0:
        raise ValueError("odd reduction needs an odd omega")
    w = _bits_msb(omega, n)

    consts: dict[str, int] = {}
    alias: dict[str, str] = {}
    if odd_reduced:
        consts.update({"a1": 1, f"a{k}": 1, "b1": 1, f"b{nb}": 1})
        for i in range(1, k):
            alias[f"S{i + 1}_{nb - 1}"] = f"a{i}"

    names = [f"a{i}" for i in range(1, k + 1)] + [f"b{j}" for j in range(1, nb + 1)]
    names += [f"S{i}_{j}" for j in range(1, nb) for i in range(1, k + 1) if (i, j) != (1, nb - 1)]
    names += [f"z{i}_{j}" for j in range(1, nb) for i in range(1, k)]
    names = [v for v in names if v not in consts and v not in alias]
    variables = {v: q for q, v in enumerate(names)}

    def S(i, j):
        if j == 0:
            return ("c", w[i - 1])
        if i == k + 1:
            return ("c", w[k + j])
        if j == nb or (i, j) == (1, nb - 1):
            return ("c", 0)
        return ref(f"S{i}_{j}")

    def z(i, j):
        if i == 0:
            return S(1, j - 1)
        if i == k or j == nb:
            return ("c", 0)
        return ref(f"z{i}_{j}")

    def ref(name):
        name = alias.get(name, name)
        if name in consts:
            return ("c", consts[name])
        return ("q", variables[name])

    equations = []
    for j in range(nb, 0, -1):
        for i in range(1, k + 1):
            lin: dict[int, int] = {}
            const = 0
            prod = None
            A, B = ref(f"a{i}"), ref(f"b{j}")
            if A[0] == "q" and B[0] == "q":
                prod = (A[1], B[1])
            elif A[0] == "c" and B[0] == "c":
                const += A[1] * B[1]
            else:
                q, c = (A, B) if A[0] == "q" else (B, A)
                if c[1]:
                    lin[q[1]] = lin.get(q[1], 0) + 1
            for coef, r in ((1, S(i, j)), (1, z(i, j)), (-1, S(i + 1, j - 1)), (-2, z(i - 1, j))):
                if r[0] == "c":
                    const += coef * r[1]
                else:
                    lin[r[1]] = lin.get(r[1], 0) + coef
            terms = tuple((c, q) for q, c in sorted(lin.items()) if c)
            if prod is None and not terms and const == 0:
                continue
            equations.append(FactorEquation(prod, terms, const, (i, j)))

    layout = FactoringLayout(omega, n, k, odd_reduced, variables, consts, tuple(equations),
                             eliminated=len(alias))
    expected = qubit_count(n, k, odd_reduced)
    if layout.n_qubits != expected:  # pragma: no cover - structural guard
        raise AssertionError(f"qubit count {layout.n_qubits} != {expected}")
    return layout


def penalty_values(layout: FactoringLayout, scaled: bool = True) -> np.ndarray:
    """Total penalty on every basis index, times 8 when ``scaled`` (exact int64)."""
    nq = layout.n_qubits
    if nq > 26:
        raise ValueError("exhaustive penalty table limited to 26 qubits")
    idx = np.arange(1 << nq, dtype=np.int64)
    x = [((idx >> q) & 1) for q in range(nq)]
    total = np.zeros(1 << nq, dtype=np.int64)
    for eq in layout.equations:
        r = np.full(1 << nq, eq.constant, dtype=np.int64)
        for c, q in eq.linear_terms:
            r += c * x[q]
        if eq.product_term:
            A, B = eq.product_term
            u = 2 * x[A] + 2 * x[B] - 1 + 4 * r
            total += u * u - 1
        else:
            total += 8 * r * r
    return total if scaled else total / 8.0


@dataclass
class QuadraticForm:
    """``h + sum h_i Z_i + 2 sum_{i<j} h_ij Z_i Z_j`` with exact rational entries."""

    n: int
    h: Fraction
    h_i: list
    h_ij: dict = field(default_factory=dict)  # (i, j) with i < j -> Fraction

    def matrix(self) -> np.ndarray:
        M = np.zeros((self.n, self.n))
        for (i, j), v in self.h_ij.items():
            M[i, j] = M[j, i] = float(v)
        return M

    def diagonal_scaled(self, scale: int = 64) -> np.ndarray:
        """``scale * H`` on every basis index, exact in int64."""
        idx = np.arange(1 << self.n, dtype=np.int64)
        sig = [1 - 2 * ((idx >> q) & 1) for q in range(self.n)]
        out = np.full(1 << self.n, _exact_int(self.h * scale), dtype=np.int64)
        for q, v in enumerate(self.h_i):
            if v:
                out += _exact_int(v * scale) * sig[q]
        for (i, j), v in self.h_ij.items():
            out += _exact_int(2 * v * scale) * sig[i] * sig[j]
        return out

    def operator(self) -> PauliOperatorSum:
        n = self.n
        terms = [(float(self.h), "I" * n)]
        terms += [(float(v), PauliString.single(n, {q: "Z"})) for q, v in enumerate(self.h_i) if v]
        terms += [(2.0 * float(v), PauliString.single(n, {i: "Z", j: "Z"})) for (i, j), v in self.h_ij.items()]
        return PauliOperatorSum(n, terms)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "h": str(self.h),
            "h_i": [str(v) for v in self.h_i],
            "h_ij": [[i, j, str(v)] for (i, j), v in sorted(self.h_ij.items())],
        }


def _exact_int(v: Fraction) -> int:
    if Fraction(v).denominator != 1:
        raise ValueError(f"{v} is not integral at this scale")
    return int(v)


def binary_form(layout: FactoringLayout):
    """Summed ``8 * penalty`` as integer ``(const, lin, quad)``."""
    const, lin, quad = 0, {}, {}
    for eq in layout.equations:
        c, l, q = eq.binary_poly()
        const += c
        for key, v in l.items():
            lin[key] = lin.get(key, 0) + v
        for key, v in q.items():
            quad[key] = quad.get(key, 0) + v
    return const, lin, quad


def to_quadratic(layout: FactoringLayout) -> QuadraticForm:
    """Spin form of the penalty sum, matching the normalized-trace definitions."""
    const, lin, quad = binary_form(layout)
    n = layout.n_qubits
    eighth = Fraction(1, 8)
    h = Fraction(const) + Fraction(sum(lin.values()), 2) + Fraction(sum(quad.values()), 4)
    h_i = [Fraction(0)] * n
    for q, v in lin.items():
        h_i[q] -= Fraction(v, 2)
    h_ij = {}
    for (p, q), v in quad.items():
        h_i[p] -= Fraction(v, 4)
        h_i[q] -= Fraction(v, 4)
        key = (min(p, q), max(p, q))
        h_ij[key] = h_ij.get(key, Fraction(0)) + Fraction(v, 8)
    return QuadraticForm(
        n,
        h * eighth,
        [v * eighth for v in h_i],
        {key: v * eighth for key, v in h_ij.items() if v},
    )


def quadratic_from_traces(diag: np.ndarray, n: int) -> QuadraticForm:
    """Trace-based extraction straight from a diagonal (oracle for small ``n``)."""
    idx = np.arange(1 << n, dtype=np.int64)
    sig = [1 - 2 * ((idx >> q) & 1) for q in range(n)]
    dim = 1 << n
    d = [Fraction(int(v)) for v in diag] if diag.dtype.kind in "iu" else None
    if d is None:
        raise TypeError("pass the exact integer-scaled diagonal")
    tot = int(diag.sum())
    h = Fraction(tot, dim)
    h_i = [Fraction(int((diag * sig[q]).sum()), dim) for q in range(n)]
    h_ij = {}
    for i in range(n):
        for j in range(i + 1, n):
            v = Fraction(int((diag * sig[i] * sig[j]).sum()), 2 * dim)
            if v:
                h_ij[(i, j)] = v
    return QuadraticForm(n, h, h_i, h_ij)


def penalty_hamiltonian(layout: FactoringLayout) -> PauliOperatorSum:
    return to_quadratic(layout).operator()


def per_equation_couplings(layout: FactoringLayout) -> list[Fraction]:
    """Absolute pair coefficients of each equation's own penalty polynomial."""
    out = []
    for eq in layout.equations:
        _, _, quad = eq.binary_poly()
        out.extend(Fraction(abs(v), 8) for v in quad.values())
    return out


def initial_hamiltonians(q: QuadraticForm) -> dict:
    """The transverse-field, planar (xy) and isotropic (xyz) starting Hamiltonians."""
    n = q.n
    hx = PauliOperatorSum(
        n,
        [(0.5 * n, "I" * n)] + [(-0.5, PauliString.single(n, {i: "X"})) for i in range(n)],
    )
    xy_terms, xyz_terms = [], []
    for (i, j), v in sorted(q.h_ij.items()):
        c = abs(float(v)) / 2.0  # both orders (i, j) and (j, i)
        if c == 0:
            continue
        xy_terms.append((2 * c, "I" * n))
        xyz_terms.append((c, "I" * n))
        for p in "XY":
            xy_terms.append((-c, PauliString.single(n, {i: p, j: p})))
        for p in "XYZ":
            xyz_terms.append((-c, PauliString.single(n, {i: p, j: p})))
    return {
        "x": hx,
        "xy": PauliOperatorSum(n, xy_terms),
        "xyz": PauliOperatorSum(n, xyz_terms),
    }


def brute_force_ground(layout: FactoringLayout):
    """Ground energy (exact Fraction) and ground indices of the penalty sum."""
    vals = penalty_values(layout)
    lo = int(vals.min())
    return Fraction(lo, 8), np.flatnonzero(vals == lo)


def expected_factorizations(layout: FactoringLayout) -> set[tuple[int, int]]:
    """All ``(a, b)`` the encoding should accept, by trial division."""
    k, nb = layout.k, layout.n - layout.k
    out = set()
    for a in range(1, 1 << k):
        if layout.omega % a:
            continue
        b = layout.omega // a
        if b >= 1 << nb:
            continue
        if layout.odd_reduced:
            if not (a >> (k - 1)) & 1 or not a & 1 or not (b >> (nb - 1)) & 1 or not b & 1:
                continue
        out.add((a, b))
    return out


def verify(layout: FactoringLayout) -> dict:
    """Brute-force check: zero-penalty assignments decode to exactly the factor pairs."""
    energy, ground = brute_force_ground(layout)
    decoded = sorted(layout.decode(int(g)) for g in ground) if energy == 0 else []
    expected = sorted(expected_factorizations(layout))
    return {
        "omega": layout.omega,
        "k": layout.k,
        "n_qubits": layout.n_qubits,
        "ground_energy": str(energy),
        "degeneracy": int(len(ground)),
        "decoded": decoded,
        "expected": expected,
        "ok": decoded == expected and (energy == 0) == bool(expected),
    }


def naive_hamiltonian_coefficients(n: int, k: int, omega: int | None = None) -> dict:
    """Coefficient audit of the two naive encodings next to the grid encoding.

    ``(omega - a b)^2`` is expanded symbolically in spin variables; the
    Hamming-distance variant has width ``n``.  Nothing is simulated.
    """
    nb = n - k
    if omega is None:
        omega = (1 << (n - 1)) | 1
    # a = sum 2^(k-i) (1 - Z_i)/2, b likewise; ab - omega is a polynomial in Z's
    # with coefficients set by the bit weights.  Track the squared product exactly.
    a_w = [Fraction(1 << (k - i), 2) for i in range(1, k + 1)]
    b_w = [Fraction(1 << (nb - j), 2) for j in range(1, nb + 1)]
    # poly: frozenset of spin labels -> coefficient
    poly: dict = {}

    def add(p, key, v):
        if v:
            p[key] = p.get(key, 0) + v

    A = {frozenset(): sum(a_w)}
    for i, wi in enumerate(a_w):
        add(A, frozenset({("a", i)}), -wi)
    B = {frozenset(): sum(b_w)}
    for j, wj in enumerate(b_w):
        add(B, frozenset({("b", j)}), -wj)
    AB = {}
    for ka, va in A.items():
        for kb, vb in B.items():
            add(AB, ka | kb, va * vb)
    add(AB, frozenset(), -omega)
    for k1, v1 in AB.items():
        for k2, v2 in AB.items():
            add(poly, k1 ^ k2, v1 * v2)  # Z^2 = 1
    coeffs = [abs(v) for key, v in poly.items() if key and v]
    width1 = max(
        (omega - a * b) ** 2 for a in range(1 << k) for b in range(1 << nb)
    ) if n <= 24 else None
    layout_width = None
    try:
        lay = build_layout(omega, n, k, odd_reduced=False)
        layout_width = MAX_EQUATION_PENALTY * len(lay.equations)
    except ValueError:
        pass
    return {
        "n": n,
        "k": k,
        "omega": omega,
        "h1_max_coupling": float(max(coeffs)),
        "h1_min_coupling": float(min(coeffs)),
        "h1_coupling_ratio": float(max(coeffs) / min(coeffs)),
        "h1_spectral_width": width1,
        "h1_max_locality": max(len(key) for key in poly),
        "h2_spectral_width": n,
        "h3_width_bound": layout_width,
    }


def save_encoding(layout: FactoringLayout, path) -> None:
    doc = {"layout": layout.to_dict(), "quadratic": to_quadratic(layout).to_dict()}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def canonical_shape(eq: FactorEquation) -> FactorEquation:
    """Relabel an equation onto qubits ``0..v-1`` (product bits first)."""
    order = list(eq.product_term or ()) + [q for _, q in eq.linear_terms if q not in (eq.product_term or ())]
    seen = []
    for q in order:
        if q not in seen:
            seen.append(q)
    relabel = {q: t for t, q in enumerate(seen)}
    prod = tuple(relabel[q] for q in eq.product_term) if eq.product_term else None
    lin = tuple(sorted((c, relabel[q]) for c, q in eq.linear_terms))
    return FactorEquation(prod, lin, eq.constant)


def equation_shapes(layouts=None) -> list[FactorEquation]:
    """Distinct equation shapes over a set of layouts (default: all table rows, both modes)."""
    if layouts is None:
        layouts = []
        for _, w, k, nk in table_rows():
            layouts.append(build_layout(w, k + nk, k, odd_reduced=True))
            layouts.append(build_layout(w, k + nk, k, odd_reduced=False))
    shapes = {}
    for lay in layouts:
        for eq in lay.equations:
            c = canonical_shape(eq)
            shapes[(c.product_term, c.linear_terms, c.constant)] = c
    return list(shapes.values())
