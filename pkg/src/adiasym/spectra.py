"""Low-lying spectra along ``H(s)``, minimum-gap search and curvature fits."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .pauli import LinearPath, PauliOperatorSum, RestrictedOperator, SubspaceMap, restrict

DEGENERACY_TOL = 1e-8
RESIDUAL_TOL = 1e-9
COARSE_TOL = 1e-6
FIT_POINTS = 9
FIT_REL_RISE = 1e-3  # window half-width: where g has risen by this fraction


class EigensolverError(RuntimeError):
    def __init__(self, msg, residual=float("nan")):
        super().__init__(f"{msg} (best residual {residual:.3e})")
        self.residual = residual


class MultipleMinimaWarning(UserWarning):
    pass


@dataclass
class GapProfile:
    s: np.ndarray
    energies: np.ndarray  # (len(s), count)
    subspace_label: str = "full"
    level: int = 1

    @property
    def E0(self):
        return self.energies[:, 0]

    @property
    def E1(self):
        return self.energies[:, 1]

    @property
    def E2(self):
        return self.energies[:, 2] if self.energies.shape[1] > 2 else None

    @property
    def gap(self):
        return self.energies[:, self.level] - self.energies[:, 0]

    def rows(self):
        for s, row in zip(self.s, self.energies):
            yield [float(s)] + [float(v) for v in row]


@dataclass
class CriticalFit:
    """Minimum of ``g(s)`` and local parabolas.

    ``c_min`` is the second derivative ``g''(s_crit)``; coefficient triples are
    ``(value, slope, second derivative)`` at ``s_crit``.
    """

    s_crit: float
    g_min: float
    c_min: float
    e0: tuple
    e1: tuple
    g: tuple
    half_width: float
    level: int = 1
    subspace_label: str = "full"
    n_evals: int = 0
    coarse_minima: list = field(default_factory=list)

    @property
    def c_e0(self) -> float:
        return self.e0[2]

    @property
    def c_e1(self) -> float:
        return self.e1[2]

    @property
    def c_parabola_difference(self) -> float:
        return self.e1[2] - self.e0[2]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["estimator"] = runtime_estimate(self) if self.g_min > 0 and self.c_min > 0 else None
        return d


def _as_operator(H, subspace: SubspaceMap | None):
    if subspace is not None and isinstance(H, PauliOperatorSum):
        return restrict(H, subspace)
    return H


def _start_vector(dim: int, dtype) -> np.ndarray:
    # fixed, non-symmetric start so results do not depend on global RNG state
    v = 1.0 + 0.1 * np.cos(np.arange(dim) * 0.7 + 0.3)
    return v.astype(dtype) / np.linalg.norm(v)


def _cluster_count(vals: np.ndarray, count: int, scale: float) -> int:
    """Extend ``count`` so a degenerate cluster is never cut."""
    while count < len(vals) and vals[count] - vals[count - 1] <= DEGENERACY_TOL * max(1.0, scale):
        count += 1
    return count


def _dense_lowest(M: np.ndarray, count: int, expand: bool = True):
    dim = M.shape[0]
    m = min(dim, count + 4)
    vals, vecs = sla.eigh(M, subset_by_index=[0, m - 1])
    if not expand:
        return vals[:count], vecs[:, :count]
    c = _cluster_count(vals, min(count, dim), float(np.max(np.abs(vals))))
    if c == m and m < dim:
        vals, vecs = np.linalg.eigh(M)
        c = _cluster_count(vals, count, float(np.max(np.abs(vals))))
    return vals[:c], vecs[:, :c]


def _iterative_lowest(apply, dim: int, dtype, count: int, norm: float, max_extra: int = 8,
                      expand: bool = True, v0=None, rel_tol: float = RESIDUAL_TOL):
    k = min(count + 2, dim - 1)
    v0 = _start_vector(dim, dtype) if v0 is None else np.asarray(v0, dtype=dtype)
    op = LinearOperator((dim, dim), matvec=apply, dtype=dtype)
    best = math.inf
    for attempt in range(4):
        ncv = min(dim, max(2 * k + 1, 24 + 8 * attempt))
        try:
            vals, vecs = eigsh(op, k=k, which="SA", v0=v0, ncv=ncv, tol=rel_tol * 1e-3,
                               maxiter=5000 * (attempt + 1))
        except ArpackNoConvergence:  # pragma: no cover - rare
            continue
        if np.linalg.svd(vecs, compute_uv=False)[-1] < 1e-6:
            # collapsed Krylov space: restart from a scrambled vector
            v0 = np.random.default_rng(attempt).standard_normal(dim).astype(dtype)
            continue
        # Rayleigh-Ritz on the returned span; the complex driver does not
        # orthogonalize inside degenerate clusters
        Q, _ = np.linalg.qr(vecs)
        HQ = np.column_stack([apply(Q[:, i]) for i in range(Q.shape[1])])
        vals, U = np.linalg.eigh(Q.conj().T @ HQ)
        vecs = Q @ U
        res = max(np.linalg.norm(apply(vecs[:, i]) - vals[i] * vecs[:, i]) for i in range(len(vals)))
        best = min(best, res)
        c = _cluster_count(vals, count, norm) if expand else count
        if c >= k and k < min(dim - 1, count + max_extra):
            k = min(dim - 1, k + 4)
            continue
        if res <= rel_tol * max(1.0, norm):
            return vals[:c], vecs[:, :c]
    raise EigensolverError("iterative eigensolver did not converge", best)


def lowest_eigenpairs(H, count: int = 2, subspace: SubspaceMap | None = None, dense_limit: int = 256):
    """``count`` algebraically smallest eigenpairs (more if the last is degenerate).

    Parameters
    ----------
    H : PauliOperatorSum, RestrictedOperator or ndarray
        Hermitian operator.  Pauli sums are restricted to ``subspace`` first.
    count : int
        Minimum number of eigenpairs.
    dense_limit : int
        Dimension up to which a dense solver is used.

    Returns
    -------
    vals : ndarray
    vecs : ndarray of shape ``(dim, len(vals))``
    """
    if isinstance(H, np.ndarray):
        return _dense_lowest(H, count)
    H = _as_operator(H, subspace)
    dim = H.dim
    if count < 1 or count > dim:
        raise ValueError(f"count must be in [1, {dim}]")
    if H.is_diagonal and dim > dense_limit:
        d = H.diagonal()
        order = np.argsort(d, kind="stable")
        c = _cluster_count(d[order], count, float(np.max(np.abs(d))))
        vecs = np.zeros((dim, c))
        vecs[order[:c], np.arange(c)] = 1.0
        return d[order[:c]], vecs
    if dim <= max(dense_limit, count + 3):
        M = H.dense() if isinstance(H, RestrictedOperator) or dim <= 4096 else None
        if M is None:
            raise ValueError("dimension too large for the dense path")
        return _dense_lowest(M, count)
    dtype = float if H.is_real else complex
    return _iterative_lowest(H.apply, dim, dtype, count, H.norm_bound())


def path_eigenpairs(path: LinearPath, s: float, count: int = 2, expand: bool = False, v0=None,
                    rel_tol: float = RESIDUAL_TOL):
    """Lowest eigenpairs of ``H(s)``; no cluster expansion unless asked."""
    end = path.H_F if s == 1.0 else path.H_I if s == 0.0 else None
    if end is not None and end.is_diagonal and not path.use_dense:
        # Krylov methods stall on diagonal operators; sort instead
        d = end.diagonal()
        order = np.argsort(d, kind="stable")
        c = _cluster_count(d[order], count, float(np.max(np.abs(d)))) if expand else count
        vecs = np.zeros((path.dim, c))
        vecs[order[:c], np.arange(c)] = 1.0
        return d[order[:c]], vecs
    if path.use_dense or path.dim <= count + 3:
        return _dense_lowest(path.dense(s), count, expand)
    dtype = float if path.is_real else complex
    return _iterative_lowest(lambda v: path.apply(s, v), path.dim, dtype, count, path.norm_bound(s),
                             expand=expand, v0=v0, rel_tol=rel_tol)


def _make_path(H_I, H_F=None, subspace=None, dense_limit=256) -> LinearPath:
    if isinstance(H_I, LinearPath):
        return H_I
    return LinearPath(H_I, H_F, subspace=subspace, dense_limit=dense_limit)


def _label(path: LinearPath) -> str:
    return "full" if path.subspace is None else path.subspace.label


def gap_curve(H_I, H_F=None, grid=101, subspace=None, count: int = 3, level: int = 1,
              dense_limit: int = 256) -> GapProfile:
    """Lowest ``count`` energies on a grid of ``s`` values."""
    path = _make_path(H_I, H_F, subspace, dense_limit)
    s = np.linspace(0.0, 1.0, grid) if np.isscalar(grid) else np.asarray(grid, dtype=float)
    if np.any(s < 0) or np.any(s > 1):
        raise ValueError("grid must lie in [0, 1]")
    count = min(max(count, level + 1), path.dim)
    rows = np.empty((len(s), count))
    for i, si in enumerate(s):
        vals, _ = path_eigenpairs(path, float(si), count)
        rows[i] = vals[:count]
    return GapProfile(s, rows, _label(path), level)


def ground_degeneracy(H_F, subspace=None, dense_limit: int = 256) -> int:
    vals, _ = lowest_eigenpairs(H_F, 1, subspace=subspace, dense_limit=dense_limit)
    return len(vals)


def _fit(s0: float, xs: np.ndarray, ys: np.ndarray) -> tuple:
    c2, c1, c0 = np.polyfit(xs - s0, ys, 2)
    return float(c0), float(c1), float(2.0 * c2)


def find_min_gap(H_I, H_F=None, subspace=None, tol_s: float = 1e-5, level: int = 1,
                 coarse: int = 101, dense_limit: int = 256, half_width: float | None = None) -> CriticalFit:
    """Locate ``s_crit`` and fit parabolas to ``E0``, ``E_level`` and the gap.

    The gap is ``E_level - E_0``; use ``level > 1`` when the final ground
    state is degenerate.  The fit window is narrow (the gap rises by a
    fraction ``1e-3`` at its edges) so that hyperbolic crossings are not
    biased; pass ``half_width`` to override.
    """
    path = _make_path(H_I, H_F, subspace, dense_limit)
    count = level + 1
    evals = 0
    cache: dict[float, np.ndarray] = {}
    warm = {"v": None}

    def levels(s, rel_tol=RESIDUAL_TOL):
        nonlocal evals
        s = float(min(1.0, max(0.0, s)))
        if s not in cache:
            # warm start from the last ground vector; Krylov restarts are cheap then
            vals, vecs = path_eigenpairs(path, s, count, v0=warm["v"], rel_tol=rel_tol)
            if not path.use_dense:
                warm["v"] = vecs[:, 0] + 1e-3 * _start_vector(path.dim, vecs.dtype)
            cache[s] = vals[:count]
            evals += 1
        return cache[s]

    def gap(s, rel_tol=RESIDUAL_TOL):
        v = levels(s, rel_tol)
        return float(v[level] - v[0])

    grid = np.linspace(0.0, 1.0, coarse)
    g = np.array([gap(s, COARSE_TOL) for s in grid])
    for s in grid:  # coarse values are not reused for the refinement
        cache.pop(float(s), None)
    from .models import local_minima

    mins = local_minima(g).tolist()
    i = int(np.argmin(g))
    rivals = [j for j in mins if abs(j - i) > 1 and g[j] <= 1.1 * g[i]]
    if rivals:
        warnings.warn(
            f"coarse scan found {len(rivals) + 1} separated gap minima near s="
            f"{[round(float(grid[j]), 3) for j in [i] + rivals]}",
            MultipleMinimaWarning,
            stacklevel=2,
        )
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, coarse - 1)]
    if 0 < i < coarse - 1:
        res = minimize_scalar(gap, bracket=(lo, grid[i], hi), method="golden",
                              options={"xtol": min(tol_s, 1e-6) / 2.0})
        s_c = float(res.x)
        if not lo <= s_c <= hi:
            res = minimize_scalar(gap, bounds=(lo, hi), method="bounded",
                                  options={"xatol": min(tol_s, 1e-6) / 10.0})
            s_c = float(res.x)
    else:
        res = minimize_scalar(gap, bounds=(lo, hi), method="bounded",
                              options={"xatol": min(tol_s, 1e-6) / 10.0})
        s_c = float(res.x)
    g_min = gap(s_c)

    if half_width is None:
        h = min(1e-3, 0.5 * (hi - lo))
        for _ in range(3):
            a, b = max(0.0, s_c - h), min(1.0, s_c + h)
            mid = 0.5 * (a + b)
            hh = 0.5 * (b - a)
            c0 = (gap(a) + gap(b) - 2.0 * gap(mid)) / hh**2
            if c0 <= 0:
                break
            new = math.sqrt(2.0 * FIT_REL_RISE * max(g_min, 1e-300) / c0)
            if abs(new - h) <= 0.2 * h:
                h = new
                break
            h = new
        half_width = max(20.0 * tol_s, min(h, 0.05))
    a = min(max(0.0, s_c - half_width), 1.0 - 2 * half_width)
    a = max(a, 0.0)
    xs = np.linspace(a, min(1.0, a + 2 * half_width), FIT_POINTS)
    E = np.array([levels(x) for x in xs])
    f0 = _fit(s_c, xs, E[:, 0])
    f1 = _fit(s_c, xs, E[:, level])
    fg = _fit(s_c, xs, E[:, level] - E[:, 0])
    return CriticalFit(
        s_crit=s_c,
        g_min=g_min,
        c_min=fg[2],
        e0=f0,
        e1=f1,
        g=fg,
        half_width=float(half_width),
        level=level,
        subspace_label=_label(path),
        n_evals=evals,
        coarse_minima=[float(grid[j]) for j in mins],
    )


def runtime_estimate(fit_or_g, c_min: float | None = None) -> float:
    """``sqrt(c_min / g_min**3)``; accepts a :class:`CriticalFit` or two numbers."""
    if isinstance(fit_or_g, CriticalFit):
        g_min, c_min = fit_or_g.g_min, fit_or_g.c_min
    else:
        g_min = float(fit_or_g)
    if c_min is None or not (g_min > 0 and c_min > 0):
        raise ValueError(f"estimator needs g_min > 0 and c_min > 0, got {g_min}, {c_min}")
    return math.sqrt(c_min / g_min**3)


def hellmann_feynman_slope(path: LinearPath, s: float) -> float:
    """``<psi0| dH/ds |psi0>`` at ``s``."""
    _, vecs = path_eigenpairs(path, s, 1)
    v = vecs[:, 0]
    return float(np.vdot(v, path.derivative_apply(v)).real)
