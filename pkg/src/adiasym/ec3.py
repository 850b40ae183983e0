"""Exact Cover 3: instances, unique-solution generation, Hamiltonians.

Bits are numbered ``1..n`` in clauses and map to qubits ``0..n-1``.  A clause
``(a, b, c)`` is satisfied when exactly one of ``z_a, z_b, z_c`` equals one.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pauli import PauliOperatorSum, PauliString, basis_label

BRUTE_FORCE_LIMIT = 24


class GenerationError(RuntimeError):
    """Restart budget exhausted before a unique-solution instance appeared."""


@dataclass(frozen=True)
class Ec3Instance:
    n: int
    clauses: tuple[tuple[int, int, int], ...]
    seed: int | None = None
    cap: int | None = None

    def __post_init__(self):
        norm = []
        seen = set()
        for cl in self.clauses:
            cl = tuple(sorted(int(v) for v in cl))
            if len(cl) != 3 or len(set(cl)) != 3:
                raise ValueError(f"clause {cl} must contain three distinct bits")
            if cl[0] < 1 or cl[2] > self.n:
                raise ValueError(f"clause {cl} references bits outside 1..{self.n}")
            if cl in seen:
                raise ValueError(f"duplicate clause {cl}")
            seen.add(cl)
            norm.append(cl)
        object.__setattr__(self, "clauses", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.clauses)

    def to_dict(self) -> dict:
        return {"n": self.n, "clauses": [list(c) for c in self.clauses], "seed": self.seed, "cap": self.cap}

    @classmethod
    def from_dict(cls, doc: dict) -> "Ec3Instance":
        return cls(doc["n"], tuple(tuple(c) for c in doc["clauses"]), doc.get("seed"), doc.get("cap"))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "Ec3Instance":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def content_hash(self) -> str:
        body = json.dumps({"n": self.n, "clauses": [list(c) for c in self.clauses]}, sort_keys=True)
        return hashlib.sha256(body.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class InstanceStats:
    m: int
    n_i: np.ndarray
    n_ij: np.ndarray


def _bit_columns(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[None, :] >> np.arange(n)[:, None]) & 1).astype(np.int8)


def clause_penalties(inst: Ec3Instance) -> np.ndarray:
    """``sum_c (z_a + z_b + z_c - 1)^2`` for every basis index (independent oracle path)."""
    if inst.n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"exhaustive evaluation limited to n <= {BRUTE_FORCE_LIMIT}")
    bits = _bit_columns(inst.n)
    total = np.zeros(1 << inst.n, dtype=np.int64)
    for a, b, c in inst.clauses:
        total += (bits[a - 1] + bits[b - 1] + bits[c - 1] - 1).astype(np.int64) ** 2
    return total


def satisfying_indices(inst: Ec3Instance) -> np.ndarray:
    if inst.n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_LIMIT}")
    bits = _bit_columns(inst.n)
    ok = np.ones(1 << inst.n, dtype=bool)
    for a, b, c in inst.clauses:
        ok &= (bits[a - 1] + bits[b - 1] + bits[c - 1]) == 1
    return np.flatnonzero(ok)


def brute_force_solve(inst: Ec3Instance) -> list[str]:
    """All satisfying bit strings ``"z_1 ... z_n"``."""
    return [basis_label(int(i), inst.n) for i in satisfying_indices(inst)]


def _triple_table(n: int) -> np.ndarray:
    from itertools import combinations

    return np.array(list(combinations(range(1, n + 1), 3)), dtype=np.int64)


def generate_unique(n: int, rng_seed, clause_cap: int | None = None, max_restarts: int = 10**6) -> Ec3Instance:
    """Add uniformly random distinct clauses until exactly one solution is left.

    The attempt restarts from scratch when the instance becomes unsatisfiable
    or, with ``clause_cap``, when more than ``clause_cap`` clauses would be
    needed.
    """
    if n < 4:
        raise ValueError("generation needs n >= 4")
    rng = np.random.default_rng(rng_seed)
    triples = _triple_table(n)
    bits = _bit_columns(n)
    member = bits[triples - 1].sum(axis=1) == 1  # (n_triples, 2**n)
    for _ in range(max_restarts):
        alive = np.ones(1 << n, dtype=bool)
        used: list[int] = []
        while True:
            if clause_cap is not None and len(used) >= clause_cap:
                break
            t = int(rng.integers(len(triples)))
            if t in used:
                continue
            used.append(t)
            alive &= member[t]
            count = int(alive.sum())
            if count == 0:
                break
            if count == 1:
                clauses = tuple(tuple(int(v) for v in triples[k]) for k in used)
                seed = rng_seed if isinstance(rng_seed, (int, np.integer)) else None
                return Ec3Instance(n, clauses, seed=None if seed is None else int(seed), cap=clause_cap)
    raise GenerationError(f"no unique instance for n={n}, cap={clause_cap} after {max_restarts} restarts")


def hard_cap(n: int) -> int:
    """Clause cap ``round(2n/3)`` of the hard instance class."""
    return int(round(2 * n / 3))


def instance_seed(master_seed: int, index: int) -> int:
    """Per-instance seed of an independent stream derived from ``master_seed``."""
    return int(np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1)[0])


def generate_corpus(n: int, count: int, master_seed: int, clause_cap: int | None = None,
                    max_restarts: int = 10**6) -> list[Ec3Instance]:
    return [
        generate_unique(n, instance_seed(master_seed, i), clause_cap, max_restarts)
        for i in range(count)
    ]


def stats(inst: Ec3Instance) -> InstanceStats:
    n_i = np.zeros(inst.n, dtype=np.int64)
    n_ij = np.zeros((inst.n, inst.n), dtype=np.int64)
    for cl in inst.clauses:
        q = [v - 1 for v in cl]
        for a in q:
            n_i[a] += 1
            for b in q:
                if a != b:
                    n_ij[a, b] += 1
    return InstanceStats(inst.m, n_i, n_ij)


def _pairs(st: InstanceStats):
    n = len(st.n_i)
    for i in range(n):
        for j in range(i + 1, n):
            if st.n_ij[i, j]:
                yield i, j, int(st.n_ij[i, j])


def final_hamiltonian(inst: Ec3Instance) -> PauliOperatorSum:
    """``m - sum_i n_i/2 Z_i + sum_{i != j} n_ij/4 Z_i Z_j`` (ordered pairs)."""
    st = stats(inst)
    n = inst.n
    terms = [(float(st.m), "I" * n)]
    terms += [(-st.n_i[i] / 2.0, PauliString.single(n, {i: "Z"})) for i in range(n)]
    terms += [(c / 2.0, PauliString.single(n, {i: "Z", j: "Z"})) for i, j, c in _pairs(st)]
    return PauliOperatorSum(n, terms)


def conventional_initial(inst: Ec3Instance) -> PauliOperatorSum:
    """``sum_i n_i/2 (1 - X_i)``; ground state ``|S>`` at energy 0."""
    st = stats(inst)
    if np.any(st.n_i == 0):
        raise ValueError(f"bits {np.flatnonzero(st.n_i == 0) + 1} appear in no clause")
    n = inst.n
    terms = [(float(st.n_i.sum()) / 2.0, "I" * n)]
    terms += [(-st.n_i[i] / 2.0, PauliString.single(n, {i: "X"})) for i in range(n)]
    return PauliOperatorSum(n, terms)


def xy_initial(inst: Ec3Instance) -> PauliOperatorSum:
    """Planar ferromagnet ``-sum_{i != j} n_ij/4 (X_i X_j + Y_i Y_j)``."""
    st = stats(inst)
    n = inst.n
    terms = []
    for i, j, c in _pairs(st):
        for p in "XY":
            terms.append((-c / 2.0, PauliString.single(n, {i: p, j: p})))
    return PauliOperatorSum(n, terms)


def xyz_initial(inst: Ec3Instance) -> PauliOperatorSum:
    """Isotropic ferromagnet ``-sum_{i != j} n_ij/4 sigma_i . sigma_j``."""
    st = stats(inst)
    n = inst.n
    terms = []
    for i, j, c in _pairs(st):
        for p in "XYZ":
            terms.append((-c / 2.0, PauliString.single(n, {i: p, j: p})))
    return PauliOperatorSum(n, terms)


INITIAL_BUILDERS = {
    "conventional": conventional_initial,
    "xy": xy_initial,
    "xyz": xyz_initial,
}


def solution_index(inst: Ec3Instance) -> int:
    sols = satisfying_indices(inst)
    if len(sols) != 1:
        raise ValueError(f"instance has {len(sols)} solutions, expected exactly one")
    return int(sols[0])


def solution_weight(inst: Ec3Instance) -> int:
    """Number of one-bits ``W`` of the unique solution."""
    return bin(solution_index(inst)).count("1")


def corpus_hash(instances) -> str:
    h = hashlib.sha256()
    for inst in instances:
        h.update(inst.content_hash().encode())
    return h.hexdigest()[:16]


def default_shortlist(n: int, width: int = 1) -> list[int]:
    """Hamming weights within ``width`` of ``n/3``."""
    centre = int(round(n / 3))
    return [w for w in range(centre - width, centre + width + 1) if 0 <= w <= n]


def spectral_spread(H: PauliOperatorSum, conserves_weight: bool = False) -> float:
    """``E_max - E_min``; blocks by Hamming weight when the operator conserves it."""
    from .pauli import hamming_sector, restrict

    if H.is_diagonal:
        d = H.diagonal()
        return float(d.max() - d.min())
    if conserves_weight:
        lo, hi = math.inf, -math.inf
        for w in range(H.n_qubits + 1):
            ev = np.linalg.eigvalsh(restrict(H, hamming_sector(H.n_qubits, w)).dense())
            lo, hi = min(lo, ev[0]), max(hi, ev[-1])
        return float(hi - lo)
    ev = np.linalg.eigvalsh(H.dense())
    return float(ev[-1] - ev[0])
