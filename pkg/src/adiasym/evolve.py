"""Linear-quench Schroedinger evolution and runtime search."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.integrate import solve_ivp

from .pauli import LinearPath, StateVector, SubspaceMap, hamming_sector, uniform_superposition
from .spectra import lowest_eigenpairs, path_eigenpairs

log = logging.getLogger(__name__)

DEFAULT_WINDOW = (0.12, 0.13)
GROVER_WINDOW = (0.75, 0.76)


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuenchSpec:
    T: float
    tol: float = 1e-10  # keeps the norm drift below 1e-8
    samples: int = 0  # trajectory points (0 = none)

    def __post_init__(self):
        if not self.T >= 0 or not math.isfinite(self.T):
            raise ValueError("T must be a finite non-negative number")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")


@dataclass
class EvolutionResult:
    T: float
    final_state: StateVector
    final_fidelity: float
    norm_drift: float
    n_rhs: int  # right-hand-side evaluations
    trajectory: list = field(default_factory=list)  # (s, ground fidelity, energy)

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "final_fidelity": self.final_fidelity,
            "norm_drift": self.norm_drift,
            "n_rhs": self.n_rhs,
            "trajectory": [list(map(float, r)) for r in self.trajectory],
        }


def prepare_initial(scheme: str, n: int, weight: int | None = None) -> StateVector:
    """``|S>`` for the conventional scheme, else the normalized Hamming projection of ``|S>``.

    The sector state lives directly in the Hamming subspace; every amplitude
    equals ``1/sqrt(C(n, W))``.
    """
    if scheme in ("conventional", "x"):
        return StateVector(uniform_superposition(n).astype(complex), None, n)
    if scheme in ("sector", "xy", "xyz"):
        if weight is None or not 0 <= weight <= n:
            raise ValueError(f"sector weight must lie in [0, {n}]")
        sub = hamming_sector(n, weight)
        amp = np.full(sub.dim, 1.0 / math.sqrt(comb(n, weight)), dtype=complex)
        return StateVector(amp, sub, n)
    raise ValueError(f"unknown scheme {scheme!r}")


def fidelity(psi, ground_basis) -> float:
    """``sum_g |<g|psi>|^2`` for orthonormal columns ``ground_basis``."""
    psi = np.asarray(psi)
    G = np.asarray(ground_basis)
    if G.ndim == 1:
        G = G[:, None]
    return float(np.sum(np.abs(G.conj().T @ psi) ** 2))


def ground_basis(H_F, subspace: SubspaceMap | None = None, dense_limit: int = 256) -> np.ndarray:
    """Orthonormal basis of the (possibly degenerate) ground space of ``H_F``."""
    _, vecs = lowest_eigenpairs(H_F, 1, subspace=subspace, dense_limit=dense_limit)
    return vecs


def _path(H_I, H_F, subspace, dense_limit):
    if isinstance(H_I, LinearPath):
        return H_I
    return LinearPath(H_I, H_F, subspace=subspace, dense_limit=dense_limit)


def _mean_energy(op) -> float:
    return float(np.mean(op.diagonal()))


def integrate(H_I, H_F, spec: QuenchSpec, psi0, subspace: SubspaceMap | None = None,
              ground=None, dense_limit: int = 256) -> EvolutionResult:
    """Integrate ``i d psi/dt = H(t/T) psi`` for ``t`` in ``[0, T]``.

    The equation is solved in ``s = t/T`` with the Dormand-Prince 4(5) pair
    (scipy's RK45).  A running trace shift is removed from ``H(s)``; it only
    changes the global phase.
    """
    path = _path(H_I, H_F, subspace if not isinstance(psi0, StateVector) or psi0.subspace is None
                 else psi0.subspace, dense_limit)
    amp = np.asarray(psi0.amplitudes if isinstance(psi0, StateVector) else psi0, dtype=complex)
    if amp.shape != (path.dim,):
        raise ValueError(f"initial state has length {amp.shape}, path dimension is {path.dim}")
    if abs(np.linalg.norm(amp) - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    if ground is None:
        ground = path_eigenpairs(path, 1.0, 1, expand=True)[1]
    sub = path.subspace
    n = psi0.n_qubits if isinstance(psi0, StateVector) else None

    T = float(spec.T)
    if T == 0.0:
        return EvolutionResult(0.0, StateVector(amp.copy(), sub, n), fidelity(amp, ground), 0.0, 0)

    shift_I, shift_F = _mean_energy(path.H_I), _mean_energy(path.H_F)
    if path.use_dense:
        A, B = path._dense_ends
        A = A - shift_I * np.eye(path.dim)
        B = B - shift_F * np.eye(path.dim)

        def rhs(s, y):
            return -1j * T * ((1.0 - s) * (A @ y) + s * (B @ y))
    else:
        def rhs(s, y):
            hy = path.apply(s, y) - ((1.0 - s) * shift_I + s * shift_F) * y
            return -1j * T * hy

    t_eval = np.linspace(0.0, 1.0, spec.samples) if spec.samples > 1 else None
    sol = solve_ivp(rhs, (0.0, 1.0), amp, method="RK45", rtol=spec.tol, atol=spec.tol * 1e-2,
                    t_eval=t_eval)
    if sol.status != 0:
        raise IntegrationError(f"integration failed at T={T}: {sol.message}")
    final = sol.y[:, -1]
    norm = float(np.linalg.norm(final))
    drift = abs(norm - 1.0)
    if drift > 1e-8:
        log.info("norm drift %.2e at T=%g (tol %g) exceeds 1e-8", drift, T, spec.tol)
    final = final / norm

    traj = []
    if t_eval is not None:
        for s, y in zip(sol.t, sol.y.T):
            y = y / np.linalg.norm(y)
            _, g = path_eigenpairs(path, float(s), 1, expand=True)
            energy = float(np.vdot(y, path.apply(float(s), y)).real)
            traj.append((float(s), fidelity(y, g), energy))
    return EvolutionResult(T, StateVector(final, sub, n), fidelity(final, ground), drift,
                           int(sol.nfev), traj)


@dataclass
class RuntimeSearch:
    T: float
    fidelity: float
    status: str  # ok | trivial | budget | timeout
    probes: list = field(default_factory=list)  # (T, fidelity)
    bracket: tuple | None = None

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "fidelity": self.fidelity,
            "status": self.status,
            "probes": [list(p) for p in self.probes],
            "bracket": list(self.bracket) if self.bracket else None,
        }


def runtime_for_fidelity(H_I, H_F, psi0, window=DEFAULT_WINDOW, subspace=None, tol: float = 1e-8,
                         max_evals: int = 60, T0: float = 1.0, dense_limit: int = 256,
                         ground=None, T_max: float = 1e7, time_budget: float | None = None) -> RuntimeSearch:
    """Smallest-found ``T`` whose final fidelity falls inside ``window``.

    The sudden limit ``T = 0`` is probed first.  Then doubling (or halving
    on overshoot) from ``T0`` until the fidelity reaches the window, then
    false-position refinement inside the last bracket.  With ``time_budget`` (seconds)
    the search stops early with status ``timeout``.
    """
    lo, hi = window
    if not 0 <= lo <= hi <= 1:
        raise ValueError("window must satisfy 0 <= lo <= hi <= 1")
    sub = psi0.subspace if isinstance(psi0, StateVector) and psi0.subspace is not None else subspace
    path = _path(H_I, H_F, sub, dense_limit)
    if ground is None:
        ground = path_eigenpairs(path, 1.0, 1, expand=True)[1]
    probes: list[tuple[float, float]] = []
    start = time.perf_counter()

    def out_of_time():
        return time_budget is not None and time.perf_counter() - start > time_budget

    def f(T):
        r = integrate(path, None, QuenchSpec(T, tol), psi0, ground=ground)
        probes.append((T, r.final_fidelity))
        return r.final_fidelity

    F0 = f(0.0)
    if F0 > hi:
        return RuntimeSearch(0.0, F0, "trivial", probes)
    if F0 >= lo:
        return RuntimeSearch(0.0, F0, "ok", probes)
    T = T0
    F = f(T)
    if lo <= F <= hi:
        return RuntimeSearch(T, F, "ok", probes)

    def stop(T, F, bracket):
        status = "timeout" if out_of_time() else "budget"
        return RuntimeSearch(T, F, status, probes, bracket)

    if F > hi:
        # overshoot: halve towards the sudden limit
        while F > hi:
            if len(probes) >= max_evals or out_of_time():
                return stop(T, F, (0.0, T))
            b = T
            T *= 0.5
            F = f(T)
        if F >= lo:
            return RuntimeSearch(T, F, "ok", probes)
        a = T
    else:
        a = T
        while F < lo:
            if len(probes) >= max_evals or T > T_max or out_of_time():
                return stop(T, F, (a, T))
            a = T
            T *= 2.0
            F = f(T)
        if F <= hi:
            return RuntimeSearch(T, F, "ok", probes)
        b = T
    # Illinois false position on F(T) - target; F is smooth near the window
    target = 0.5 * (lo + hi)
    Fa, Fb = dict(probes)[a] - target, dict(probes)[b] - target
    side = 0
    while len(probes) < max_evals and not out_of_time():
        mid = b - Fb * (b - a) / (Fb - Fa)
        if not a < mid < b:
            mid = 0.5 * (a + b)
        Fm = f(mid)
        if lo <= Fm <= hi:
            return RuntimeSearch(mid, Fm, "ok", probes, (a, b))
        Fm -= target
        if Fm < 0:
            a, Fa = mid, Fm
            if side == -1:
                Fb *= 0.5
            side = -1
        else:
            b, Fb = mid, Fm
            if side == 1:
                Fa *= 0.5
            side = 1
    best = min(probes, key=lambda p: abs(p[1] - 0.5 * (lo + hi)))
    return stop(best[0], best[1], (a, b))
