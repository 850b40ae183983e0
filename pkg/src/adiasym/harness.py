"""Batch experiments: corpora, spectral/runtime runs, aggregation and CSV output.

Outputs of one run live in ``out_dir``:

``records.csv``     one row per (instance, scheme), deterministic
``timings.csv``     wall-clock seconds per record (not deterministic)
``aggregates.csv``  per (n, scheme): medians with 99% order-statistic intervals
``scaling.json``    log-log fit of measured T against the gap estimator
``manifest.json``   config, seeds, corpus hash, package versions
``corpus/``         instance files
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import platform
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy
from scipy import stats as sst

from . import __version__
from .ec3 import (
    Ec3Instance,
    conventional_initial,
    corpus_hash,
    default_shortlist,
    final_hamiltonian,
    generate_corpus,
    hard_cap,
    instance_seed,
    solution_index,
    solution_weight,
    xy_initial,
    xyz_initial,
)
from .evolve import DEFAULT_WINDOW, GROVER_WINDOW, QuenchSpec, integrate, prepare_initial, runtime_for_fidelity
from .factoring import build_layout, expected_factorizations, initial_hamiltonians, table_rows, to_quadratic
from .models import model_hamiltonians
from .pauli import LinearPath, hamming_sector, parity_sector, uniform_superposition, StateVector
from .spectra import MultipleMinimaWarning, find_min_gap, runtime_estimate

THREADS_ENV = "ADIASYM_THREADS"
RECORD_FIELDS = [
    "instance_id", "seed", "scheme", "n", "W", "m", "s_crit", "g_min", "c_min", "estimator",
    "T_measured", "fidelity", "status", "error",
]


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class ExperimentConfig:
    experiment_id: str
    family: str = "ec3"  # ec3 | grover | ising | factoring
    n_values: list = field(default_factory=lambda: [8])
    instances: int = 100
    schemes: list = field(default_factory=lambda: ["conventional", "xy"])
    seed: int = 0
    cap: object = "hard"  # "hard" -> round(2n/3), an int, or None
    measure: list = field(default_factory=lambda: ["gap", "runtime"])
    window: list | None = None
    tol_s: float = 1e-5
    ode_tol: float = 1e-8
    max_evals: int = 60
    run_budget_s: float = 600.0
    qubit_budget: int = 17
    out_dir: str = "results"

    def __post_init__(self):
        if self.instances < 1:
            raise ValueError("instance count must be at least 1")
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        if self.family not in ("ec3", "grover", "ising", "factoring"):
            raise ValueError(f"unknown family {self.family!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def cap_for(self, n: int):
        if self.cap == "hard":
            return hard_cap(n)
        return None if self.cap is None else int(self.cap)

    def fidelity_window(self):
        if self.window is not None:
            return tuple(self.window)
        return GROVER_WINDOW if self.family == "grover" else DEFAULT_WINDOW


@dataclass
class RunRecord:
    instance_id: str
    seed: int | None
    scheme: str
    n: int
    W: int | None = None
    m: int | None = None
    s_crit: float | None = None
    g_min: float | None = None
    c_min: float | None = None
    estimator: float | None = None
    T_measured: float | None = None
    fidelity: float | None = None
    status: str = "ok"
    error: str = ""
    wall_time: float = 0.0

    def row(self) -> list:
        out = []
        for name in RECORD_FIELDS:
            v = getattr(self, name)
            out.append("" if v is None else repr(v) if isinstance(v, float) else v)
        return out


# ---------------------------------------------------------------------------
# statistics


def median_ci(values, confidence: float = 0.99) -> tuple[float, float, float]:
    """Sample median and the distribution-free order-statistic interval.

    The interval ``[x_(l), x_(n+1-l)]`` uses the largest ``l`` with
    ``P(l <= Bin(n, 1/2) <= n - l) >= confidence``.  Samples too small for
    that coverage get the full range.
    """
    x = np.sort(np.asarray([v for v in values if v is not None and np.isfinite(v)], dtype=float))
    n = len(x)
    if n == 0:
        return math.nan, math.nan, math.nan
    med = float(np.median(x))
    l = 0  # zero-based index of the lower order statistic
    for cand in range(n // 2, -1, -1):
        # coverage of [x_(cand+1), x_(n-cand)] in one-based order statistics
        cover = sst.binom.cdf(n - cand - 1, n, 0.5) - sst.binom.cdf(cand, n, 0.5)
        if cover >= confidence:
            l = cand
            break
    return med, float(x[l]), float(x[n - 1 - l])


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    slope_ci: tuple
    r: float
    n_points: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def correlate_scaling(records=None, T=None, estimator=None, min_points: int = 10) -> ScalingFit:
    """Least-squares fit of ``log T`` against ``log sqrt(c/g^3)``.

    Accepts run records or two arrays.  The interval on the slope is 95%.
    """
    if records is not None:
        pairs = [(r.T_measured, r.estimator) for r in records
                 if r.T_measured and r.estimator and r.status == "ok"]
        T = [p[0] for p in pairs]
        estimator = [p[1] for p in pairs]
    T = np.asarray(T, dtype=float)
    est = np.asarray(estimator, dtype=float)
    keep = np.isfinite(T) & np.isfinite(est) & (T > 0) & (est > 0)
    T, est = T[keep], est[keep]
    if len(T) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(T)}")
    x, y = np.log(est), np.log(T)
    if np.ptp(x) < 1e-9:
        raise ValueError("estimator values have no spread")
    res = sst.linregress(x, y)
    tcrit = sst.t.ppf(0.975, len(x) - 2)
    return ScalingFit(float(res.slope), float(res.intercept),
                      (float(res.slope - tcrit * res.stderr), float(res.slope + tcrit * res.stderr)),
                      float(res.rvalue), int(len(x)))


def correlate_medians(records, min_sizes: int = 3) -> dict:
    """Per-scheme fit of ``log median T`` against ``log median estimator`` over ``n``.

    One point per system size, from runs with status ``ok``.  Returns
    ``{scheme: ScalingFit}`` for schemes with at least ``min_sizes`` sizes.
    """
    out = {}
    for scheme in sorted({r.scheme for r in records}):
        T, est = [], []
        for n in sorted({r.n for r in records if r.scheme == scheme}):
            rs = [r for r in records if r.scheme == scheme and r.n == n and r.status == "ok"
                  and r.T_measured and r.estimator]
            if rs:
                T.append(float(np.median([r.T_measured for r in rs])))
                est.append(float(np.median([r.estimator for r in rs])))
        if len(T) >= min_sizes:
            out[scheme] = correlate_scaling(T=T, estimator=est, min_points=min_sizes)
    return out


def growth_exponent(n_values, medians) -> float:
    """Slope of ``log(median)`` against ``n`` (exponential growth rate)."""
    n = np.asarray(n_values, dtype=float)
    y = np.log(np.asarray(medians, dtype=float))
    return float(np.polyfit(n, y, 1)[0])


# ---------------------------------------------------------------------------
# EC3 runs


def ec3_setup(inst: Ec3Instance, scheme: str, weight: int | None = None):
    """``(H_I, H_F, subspace, psi0)`` for one instance and scheme."""
    H_F = final_hamiltonian(inst)
    if scheme == "conventional":
        return conventional_initial(inst), H_F, None, prepare_initial("conventional", inst.n)
    if scheme in ("xy", "xyz"):
        W = solution_weight(inst) if weight is None else weight
        H_I = xy_initial(inst) if scheme == "xy" else xyz_initial(inst)
        return H_I, H_F, hamming_sector(inst.n, W), prepare_initial(scheme, inst.n, W)
    raise ValueError(f"unknown EC3 scheme {scheme!r}")


def _ground_for_solution(inst: Ec3Instance, subspace):
    idx = solution_index(inst)
    if subspace is None:
        g = np.zeros(1 << inst.n)
        g[idx] = 1.0
        return g[:, None]
    pos = np.searchsorted(subspace.kept_indices, idx)
    g = np.zeros(subspace.dim)
    if pos < subspace.dim and subspace.kept_indices[pos] == idx:
        g[pos] = 1.0
    return g[:, None]


def _fit_noting_warnings(path, tol_s, rec):
    """Gap fit; a multiple-minima warning is kept in the record's note field."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", MultipleMinimaWarning)
        fit = find_min_gap(path, tol_s=tol_s)
    notes = [str(w.message) for w in caught if issubclass(w.category, MultipleMinimaWarning)]
    if notes:
        rec.error = "note: " + notes[0]
    return fit


def run_ec3_record(inst: Ec3Instance, instance_id: str, scheme: str, cfg: ExperimentConfig) -> RunRecord:
    t0 = time.perf_counter()
    rec = RunRecord(instance_id, inst.seed, scheme, inst.n, m=inst.m)
    try:
        rec.W = solution_weight(inst)
        H_I, H_F, sub, psi0 = ec3_setup(inst, scheme)
        path = LinearPath(H_I, H_F, subspace=sub)
        if "gap" in cfg.measure:
            fit = _fit_noting_warnings(path, cfg.tol_s, rec)
            rec.s_crit, rec.g_min, rec.c_min = fit.s_crit, fit.g_min, fit.c_min
            rec.estimator = runtime_estimate(fit) if fit.c_min > 0 else None
        if "runtime" in cfg.measure:
            search = runtime_for_fidelity(path, None, psi0, window=cfg.fidelity_window(), tol=cfg.ode_tol,
                                          max_evals=cfg.max_evals, ground=_ground_for_solution(inst, sub),
                                          time_budget=cfg.run_budget_s)
            rec.T_measured, rec.fidelity, rec.status = search.T, search.fidelity, search.status
    except Exception as exc:  # recorded, not raised: partial failures are expected
        rec.status, rec.error = "failed", f"{type(exc).__name__}: {exc}"
    rec.wall_time = time.perf_counter() - t0
    return rec


def run_model_record(family: str, n: int, cfg: ExperimentConfig) -> RunRecord:
    t0 = time.perf_counter()
    rec = RunRecord(f"{family}-n{n}", None, "linear", n)
    try:
        H_I, H_F = model_hamiltonians(family, n)
        sub = parity_sector(n, True) if family == "ising" else None
        path = LinearPath(H_I, H_F, subspace=sub)
        if "gap" in cfg.measure:
            fit = _fit_noting_warnings(path, cfg.tol_s, rec)
            rec.s_crit, rec.g_min, rec.c_min = fit.s_crit, fit.g_min, fit.c_min
            rec.estimator = runtime_estimate(fit)
        if "runtime" in cfg.measure:
            if sub is None:
                psi0 = StateVector(uniform_superposition(n).astype(complex), None, n)
            else:
                psi0 = StateVector(sub.project(uniform_superposition(n)).astype(complex), sub, n)
            search = runtime_for_fidelity(path, None, psi0, window=cfg.fidelity_window(), tol=cfg.ode_tol,
                                          max_evals=cfg.max_evals, time_budget=cfg.run_budget_s)
            rec.T_measured, rec.fidelity, rec.status = search.T, search.fidelity, search.status
    except Exception as exc:
        rec.status, rec.error = "failed", f"{type(exc).__name__}: {exc}"
    rec.wall_time = time.perf_counter() - t0
    return rec


def _ec3_task(args):
    doc, iid, scheme, cfg_doc = args
    return run_ec3_record(Ec3Instance.from_dict(doc), iid, scheme, ExperimentConfig.from_dict(cfg_doc))


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))  # map keeps task order


def build_corpus(cfg: ExperimentConfig) -> dict:
    """``{n: [(instance_id, instance), ...]}`` generated from the master seed."""
    out = {}
    for n in cfg.n_values:
        master = int(instance_seed(cfg.seed, n))
        insts = generate_corpus(n, cfg.instances, master, cfg.cap_for(n))
        out[n] = [(f"n{n}-{i:03d}", inst) for i, inst in enumerate(insts)]
    return out


# ---------------------------------------------------------------------------
# sector sweep and factoring study


@dataclass
class SectorSweep:
    best_W: int | None
    fidelities: dict  # W -> final fidelity on the solution
    sector_ground: dict  # W -> lowest H_F energy inside the sector
    T: float


def sweep_sector(inst: Ec3Instance, schemes=("xy",), weights=None, T: float = 10.0, tol: float = 1e-8,
                 shortlist: bool = False) -> dict:
    """Run the sector scheme for each candidate weight.

    ``weights`` defaults to all of ``0..n`` (or the ``n/3`` shortlist).  The
    fidelity is measured against the true solution, so sectors that do not
    contain it report 0.
    """
    if weights is None:
        weights = default_shortlist(inst.n) if shortlist else list(range(inst.n + 1))
    out = {}
    H_F = final_hamiltonian(inst)
    for scheme in schemes:
        H_I = xy_initial(inst) if scheme == "xy" else xyz_initial(inst)
        fids, lows = {}, {}
        for W in weights:
            sub = hamming_sector(inst.n, W)
            ground = _ground_for_solution(inst, sub)
            lows[W] = float(np.min(H_F.diagonal()[sub.kept_indices]))
            if not ground.any():
                fids[W] = 0.0
                continue
            r = integrate(H_I, H_F, QuenchSpec(T, tol), prepare_initial(scheme, inst.n, W), ground=ground)
            fids[W] = r.final_fidelity
        best = max(fids, key=lambda w: fids[w]) if any(v > 0 for v in fids.values()) else None
        out[scheme] = SectorSweep(best, fids, lows, T)
    return out


def factoring_gap_study(qubit_budget: int = 17, schemes=("x", "xy", "xyz"), tol_s: float = 1e-5,
                        rows=None) -> list[dict]:
    """Minimum gap for every table row within ``qubit_budget`` and each initial Hamiltonian.

    The gap is taken to the first level above the final ground cluster.  For
    the sector schemes every solution's Hamming weight is tried and the
    smallest gap is reported.
    """
    out = []
    rows = table_rows(qubit_budget) if rows is None else rows
    for n_tot, omega, k, nk in rows:
        lay = build_layout(omega, k + nk, k, odd_reduced=True)
        q = to_quadratic(lay)
        H_F = q.operator()
        inits = initial_hamiltonians(q)
        sols = [lay.encode(a, b) for a, b in sorted(expected_factorizations(lay))]
        for scheme in schemes:
            t0 = time.perf_counter()
            if scheme == "x":
                sectors = [None]
            else:
                sectors = sorted({bin(s).count("1") for s in sols})
            best = None
            for W in sectors:
                sub = None if W is None else hamming_sector(lay.n_qubits, W)
                inside = len(sols) if sub is None else sum(bin(s).count("1") == W for s in sols)
                fit = find_min_gap(LinearPath(inits[scheme], H_F, subspace=sub), tol_s=tol_s, level=inside)
                if best is None or fit.g_min < best[0].g_min:
                    best = (fit, W, inside)
            fit, W, level = best
            out.append({
                "n_tot": n_tot, "omega": omega, "k": k, "n_minus_k": nk, "scheme": scheme,
                "sector": "" if W is None else W, "level": level, "s_crit": fit.s_crit,
                "g_min": fit.g_min, "c_min": fit.c_min, "wall_time": time.perf_counter() - t0,
            })
    return out


# ---------------------------------------------------------------------------
# driver


@dataclass
class ExperimentResult:
    records: list
    aggregates: list
    scaling: dict
    manifest: dict
    extra: list = field(default_factory=list)


def aggregate(records) -> list[dict]:
    rows = []
    keys = sorted({(r.n, r.scheme) for r in records})
    for n, scheme in keys:
        rs = [r for r in records if r.n == n and r.scheme == scheme]
        good = [r for r in rs if r.status != "failed"]
        row = {"n": n, "scheme": scheme, "count": len(good), "failed": len(rs) - len(good)}
        for name in ("g_min", "c_min", "estimator", "T_measured", "W"):
            vals = [getattr(r, name) for r in good if getattr(r, name) is not None]
            med, lo, hi = median_ci(vals)
            row[f"{name}_median"], row[f"{name}_lo"], row[f"{name}_hi"] = med, lo, hi
        rows.append(row)
    return rows


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def _scaling_summary(records) -> dict:
    """Per-run fit plus the per-size median fits; errors are reported, not raised."""
    try:
        doc = correlate_scaling(records).to_dict()
    except ValueError as exc:
        doc = {"error": str(exc)}
    try:
        doc["per_size_medians"] = {k: f.to_dict() for k, f in correlate_medians(records).items()}
    except ValueError as exc:
        doc["per_size_medians"] = {"error": str(exc)}
    return doc


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    out = Path(cfg.out_dir)
    workers = thread_count()
    hashes = {}
    extra = []
    if cfg.family == "ec3":
        corpus = build_corpus(cfg)
        tasks = []
        for n in cfg.n_values:
            hashes[str(n)] = corpus_hash([inst for _, inst in corpus[n]])
            for iid, inst in corpus[n]:
                for scheme in cfg.schemes:
                    tasks.append((inst.to_dict(), iid, scheme, cfg.to_dict()))
        records = _map(_ec3_task, tasks, workers)
        if write:
            for n in cfg.n_values:
                d = out / "corpus" / f"n{n}"
                d.mkdir(parents=True, exist_ok=True)
                for iid, inst in corpus[n]:
                    inst.save(d / f"{iid}.json")
    elif cfg.family in ("grover", "ising"):
        records = [run_model_record(cfg.family, n, cfg) for n in cfg.n_values]
    else:
        records = []
        extra = factoring_gap_study(cfg.qubit_budget, tuple(cfg.schemes), cfg.tol_s)
        hashes["table"] = "builtin"

    aggs = aggregate(records) if records else []
    scaling = _scaling_summary(records)
    manifest = {
        "config": cfg.to_dict(),
        "corpus_hash": hashes,
        "versions": {"adiasym": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "threads": workers,
    }
    if write:
        out.mkdir(parents=True, exist_ok=True)
        if records:
            _write_csv(out / "records.csv", RECORD_FIELDS, [r.row() for r in records])
            _write_csv(out / "timings.csv", ["instance_id", "scheme", "wall_time"],
                       [[r.instance_id, r.scheme, f"{r.wall_time:.3f}"] for r in records])
        if aggs:
            hdr = list(aggs[0])
            _write_csv(out / "aggregates.csv", hdr, [[_fmt(a[h]) for h in hdr] for a in aggs])
        if extra:
            hdr = [h for h in extra[0] if h != "wall_time"]
            _write_csv(out / "factoring_gaps.csv", hdr, [[_fmt(e[h]) for h in hdr] for e in extra])
        (out / "scaling.json").write_text(json.dumps(scaling, indent=1, sort_keys=True))
        (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return ExperimentResult(records, aggs, scaling, manifest, extra)


def load_records(path) -> list[RunRecord]:
    recs = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for name in RECORD_FIELDS:
                v = row.get(name, "")
                if name in ("instance_id", "scheme", "status", "error"):
                    kw[name] = v
                elif name in ("seed", "n", "W", "m"):
                    kw[name] = int(v) if v != "" else None
                else:
                    kw[name] = float(v) if v != "" else None
            recs.append(RunRecord(**kw))
    return recs


def report(out_dir) -> dict:
    """Re-aggregate an output directory from its ``records.csv``."""
    out = Path(out_dir)
    doc = {"manifest": json.loads((out / "manifest.json").read_text())}
    if (out / "records.csv").exists():
        recs = load_records(out / "records.csv")
        doc["aggregates"] = aggregate(recs)
        doc["scaling"] = _scaling_summary(recs)
    if (out / "factoring_gaps.csv").exists():
        with open(out / "factoring_gaps.csv", newline="") as fh:
            doc["factoring"] = list(csv.DictReader(fh))
    return doc


def entropy_profile(instances, scheme: str, grid: int = 21) -> list[tuple[float, float, float]]:
    """Chain-averaged entropy of the instantaneous ground state along the path.

    Returns ``(s, mean, std)`` rows.  Each instance contributes its own mean
    over cuts; ``std`` is the spread of those means across instances.
    """
    from .entangle import chain_average_entropy
    from .spectra import path_eigenpairs

    s_grid = np.linspace(0.0, 1.0, grid)
    table = np.empty((len(instances), grid))
    for i, inst in enumerate(instances):
        H_I, H_F, sub, _ = ec3_setup(inst, scheme)
        path = LinearPath(H_I, H_F, subspace=sub)
        for j, s in enumerate(s_grid):
            _, vec = path_eigenpairs(path, float(s), 1)
            table[i, j] = chain_average_entropy(path.embed(vec[:, 0]))
    std = table.std(axis=0) if len(instances) > 1 else np.zeros(grid)
    return [(float(s), float(m), float(d)) for s, m, d in zip(s_grid, table.mean(axis=0), std)]
