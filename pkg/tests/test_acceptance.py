"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Batch-sized criteria (8, 9, 10) share corpora through module fixtures.  Set
``ADIASYM_ACCEPTANCE_DIR`` to keep their experiment outputs on disk; a rerun
with an identical configuration then reloads ``records.csv`` instead of
recomputing.
"""

import json
import math
import os
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from adiasym import kernels
from adiasym.ec3 import (
    brute_force_solve, clause_penalties, final_hamiltonian, generate_corpus, hard_cap, instance_seed,
    satisfying_indices, spectral_spread, stats, xy_initial,
)
from adiasym.entangle import cut_entropies, entropy, half_chain_entropy, reduced_density
from adiasym.evolve import integrate, QuenchSpec, prepare_initial
from adiasym.factoring import (
    MAX_EQUATION_PENALTY, BIPRIME_TABLE, build_layout, equation_shapes, penalty, penalty_values,
    quadratic_from_traces, qubit_count, table_rows, to_quadratic, verify,
)
from adiasym.harness import (
    ExperimentConfig, correlate_medians, correlate_scaling, ec3_setup, entropy_profile, growth_exponent, load_records,
    median_ci, run_experiment,
)
from adiasym.models import (
    grover_gap_analytic, grover_hamiltonians, grover_runtime_estimate_analytic, ising_even_spectrum,
    ising_hamiltonians,
)
from adiasym.pauli import (
    LinearPath, PauliOperatorSum, PauliString, basis_index, hamming_weight_operator, parity_sector, restrict,
)
from adiasym.spectra import find_min_gap, gap_curve, hellmann_feynman_slope, path_eigenpairs, runtime_estimate

from conftest import kron_operator, random_terms

pytestmark = pytest.mark.acceptance

FROZEN_SEED = 2024  # master seed of every EC3 corpus below
WINDOW = [0.12, 0.13]


# ---------------------------------------------------------------------------
# shared batch runs


def _experiment(cfg: ExperimentConfig):
    """Run ``cfg`` or reload a previous run with the identical configuration."""
    keep = os.environ.get("ADIASYM_ACCEPTANCE_DIR")
    if keep:
        cfg.out_dir = str(Path(keep) / cfg.experiment_id)
        out = Path(cfg.out_dir)
        if (out / "records.csv").exists() and (out / "manifest.json").exists():
            old = json.loads((out / "manifest.json").read_text())["config"]
            if old == cfg.to_dict():
                return load_records(out / "records.csv")
    return run_experiment(cfg, write=bool(keep)).records


@pytest.fixture(scope="module")
def frozen_n10():
    """100-instance hard corpus at n = 10, gap and runtime for both schemes."""
    cfg = ExperimentConfig("ec3-n10-frozen", n_values=[10], instances=100, seed=FROZEN_SEED,
                           window=WINDOW)
    return _experiment(cfg)


@pytest.fixture(scope="module")
def ec3_small():
    """Gap and runtime for n = 6, 8, 12 (30 instances each)."""
    cfg = ExperimentConfig("ec3-n6-8-12", n_values=[6, 8, 12], instances=30, seed=FROZEN_SEED,
                           window=WINDOW)
    return _experiment(cfg)


@pytest.fixture(scope="module")
def grover_runs():
    cfg = ExperimentConfig("grover-n4-10", family="grover", n_values=list(range(4, 11)), instances=1,
                           schemes=["linear"], window=WINDOW)
    return _experiment(cfg)


@pytest.fixture(scope="module")
def curvature_runs(frozen_n10):
    """Gap-only runs at n = 8, 12, 14; n = 10 comes from the frozen corpus."""
    recs = list(frozen_n10)
    for n, count in ((8, 100), (12, 30), (14, 15)):
        cfg = ExperimentConfig(f"ec3-n{n}-gap", n_values=[n], instances=count, seed=FROZEN_SEED,
                               measure=["gap"])
        recs += _experiment(cfg)
    return recs


# ---------------------------------------------------------------------------
# 1-3: model oracles


def test_criterion_01_grover_gap(criterion):
    worst_curve, worst_s, worst_g = 0.0, 0.0, 0.0
    for n in range(2, 11):
        H_I, H_F = grover_hamiltonians(n, (1 << n) - 1)
        prof = gap_curve(H_I, H_F, grid=101)
        exact = np.array([grover_gap_analytic(n, s) for s in prof.s])
        worst_curve = max(worst_curve, float(np.max(np.abs(prof.gap - exact))))
        fit = find_min_gap(H_I, H_F)
        worst_s = max(worst_s, abs(fit.s_crit - 0.5))
        worst_g = max(worst_g, abs(fit.g_min / 2.0 ** (-n / 2) - 1.0))
    ok = worst_curve <= 1e-10 and worst_s <= 1e-5 and worst_g <= 1e-8
    criterion(1, ok, f"max |g - exact| = {worst_curve:.1e}, max |s_crit - 0.5| = {worst_s:.1e}, "
                     f"max rel g_min error = {worst_g:.1e}")
    assert ok


def test_criterion_02_grover_estimator(criterion):
    worst = 0.0
    for n in range(4, 11):
        H_I, H_F = grover_hamiltonians(n, 0)
        est = runtime_estimate(find_min_gap(H_I, H_F))
        N = 2.0**n
        closed = 2.0 * N * math.sqrt(1.0 - 1.0 / N)
        assert closed == pytest.approx(grover_runtime_estimate_analytic(n), rel=1e-12)
        worst = max(worst, abs(est / closed - 1.0))
    criterion(2, worst <= 5e-3, f"max relative deviation {worst:.2e} over n = 4..10")
    assert worst <= 5e-3


def test_criterion_03_ising_free_fermions(criterion):
    worst = 0.0
    for n in (4, 6, 8):
        H_I, H_F = ising_hamiltonians(n)
        A = restrict(H_I, parity_sector(n, True)).dense()
        B = restrict(H_F, parity_sector(n, True)).dense()
        for s in (0.1, 0.3, 0.5, 0.7, 0.9):
            dense = np.linalg.eigvalsh((1 - s) * A + s * B)
            worst = max(worst, float(np.max(np.abs(dense - ising_even_spectrum(n, s)))))
    n = 8
    H_I, H_F = ising_hamiltonians(n)
    est = runtime_estimate(find_min_gap(H_I, H_F, subspace=parity_sector(n, True)))
    target = 2.0 / math.pi**2 * n**2 - 1.0 / 12.0
    rel = abs(est / target - 1.0)
    ok = worst <= 1e-8 and rel <= 0.02
    criterion(3, ok, f"max spectrum deviation {worst:.1e}; estimator {est:.4f} vs {target:.4f} "
                     f"(rel {rel:.2e}) at n = 8")
    assert ok


# ---------------------------------------------------------------------------
# 4-6: factoring


def test_criterion_04_penalty_iff(criterion):
    shapes = equation_shapes()
    overall = 0
    bad = []
    for eq in shapes:
        qubits = eq.variables
        assert len(qubits) <= 6
        for bits in range(1 << len(qubits)):
            assignment = {q: (bits >> t) & 1 for t, q in enumerate(qubits)}
            p = penalty(eq, assignment)
            holds = eq.residual(assignment) == 0
            if (p == 0) != holds or (not holds and p < 1):
                bad.append((eq, assignment))
            overall = max(overall, p)
    ok = not bad and overall == MAX_EQUATION_PENALTY
    criterion(4, ok, f"{len(shapes)} shapes, {len(bad)} violations, maximum penalty {overall}")
    assert ok


def test_criterion_05_factoring_encodings(criterion):
    counts_ok = all(
        qubit_count(k + nk, k, odd_reduced=True) == n_tot
        for n_tot, rows in BIPRIME_TABLE.items() for _, k, nk in rows
    )
    failures, degeneracies = [], {}
    for n_tot, omega, k, nk in table_rows(max_qubits=17):
        res = verify(build_layout(omega, k + nk, k, odd_reduced=True))
        if not res["ok"] or res["ground_energy"] != "0":
            failures.append(omega)
        if k == nk:
            degeneracies[omega] = res["degeneracy"]
        elif res["degeneracy"] != 1:
            failures.append(omega)
    # swapping equal-width factors gives a second ground state unless the factors coincide
    expected = {w: 1 if math.isqrt(w) ** 2 == w else 2 for w in degeneracies}
    ok = counts_ok and not failures and degeneracies == expected
    criterion(5, ok, f"qubit counts {'match' if counts_ok else 'differ'}; "
                     f"{len(table_rows(17))} rows brute-forced, failures {failures}; "
                     f"equal-partition degeneracies {degeneracies} (squares have a single ground state)")
    assert ok


def test_criterion_06_quadratic_extraction(criterion):
    checked, bad = 0, []
    for n_tot, omega, k, nk in table_rows(max_qubits=17):
        for odd in (True, False):
            try:
                lay = build_layout(omega, k + nk, k, odd_reduced=odd)
            except ValueError:
                continue
            if lay.n_qubits > 17:
                continue
            q = to_quadratic(lay)
            target = penalty_values(lay)  # integers, scaled by 8
            if not np.array_equal(q.diagonal_scaled(8), target):
                bad.append((omega, odd))
            # independent extraction from normalized traces, compared as exact rationals
            oracle = quadratic_from_traces(target, lay.n_qubits)
            eight = Fraction(8)
            if oracle.h != eight * q.h or oracle.h_i != [eight * v for v in q.h_i] \
                    or oracle.h_ij != {k: eight * v for k, v in q.h_ij.items()}:
                bad.append((omega, odd, "traces"))
            checked += 1
    criterion(6, not bad, f"{checked} layouts reconstructed exactly, mismatches {bad}")
    assert not bad


# ---------------------------------------------------------------------------
# 7: EC3 instance algebra


def test_criterion_07_ec3_correctness(criterion):
    problems = []
    checked = 0
    for n in (8, 10, 12):
        for inst in generate_corpus(n, 100, instance_seed(FROZEN_SEED, n), hard_cap(n)):
            st = stats(inst)
            if not np.array_equal(2 * st.n_i, st.n_ij.sum(axis=1)) or 3 * st.m != st.n_i.sum():
                problems.append((inst.content_hash(), "identity"))
            H_F = final_hamiltonian(inst)
            diag = H_F.diagonal()
            sol = satisfying_indices(inst)
            (bits,) = brute_force_solve(inst)
            if len(sol) != 1 or abs(diag.min()) > 1e-12 or diag[basis_index(bits)] != 0.0 \
                    or np.count_nonzero(np.abs(diag) < 1e-12) != 1 \
                    or not np.allclose(diag, clause_penalties(inst)):
                problems.append((inst.content_hash(), "ground"))
            if spectral_spread(H_F) > 4 * inst.m + 1e-9:
                problems.append((inst.content_hash(), "final spread"))
            if spectral_spread(xy_initial(inst), conserves_weight=True) > 6 * inst.m + 1e-9:
                problems.append((inst.content_hash(), "xy spread"))
            checked += 1
    criterion(7, not problems, f"{checked} instances, problems {problems[:5]}")
    assert not problems


# ---------------------------------------------------------------------------
# 8-10: batch statistics


def test_criterion_08_estimator_correlation(criterion, frozen_n10, ec3_small, grover_runs):
    ec3 = list(ec3_small) + list(frozen_n10)
    # one point per system size: median T against median estimator, as a per-scheme fit
    fits = correlate_medians(ec3)
    fits["grover"] = correlate_scaling(grover_runs, min_points=5)
    per_run = correlate_scaling(ec3)
    detail = ", ".join(f"{k} {f.slope:.3f} [{f.slope_ci[0]:.2f}, {f.slope_ci[1]:.2f}] ({f.n_points} sizes)"
                       for k, f in fits.items())
    ok = set(fits) == {"conventional", "xy", "grover"} and all(abs(f.slope - 1.0) <= 0.2 for f in fits.values())
    criterion(8, ok, f"slopes: {detail}; single-run EC3 regression {per_run.slope:.3f} "
                     f"over {per_run.n_points} runs (not asserted)")
    assert ok


def _paired(records, field):
    by = {}
    for r in records:
        by.setdefault(r.instance_id, {})[r.scheme] = getattr(r, field)
    ids = sorted(i for i, d in by.items()
                 if d.get("xy") is not None and d.get("conventional") is not None)
    return np.array([by[i]["xy"] for i in ids]), np.array([by[i]["conventional"] for i in ids])


def test_criterion_09_scheme_ordering(criterion, frozen_n10):
    usable = [r for r in frozen_n10 if r.status in ("ok", "trivial")]
    T_xy, T_conv = _paired(usable, "T_measured")
    g_xy, g_conv = _paired(frozen_n10, "g_min")
    med_xy, lo_xy, hi_xy = median_ci(T_xy)
    med_cv, lo_cv, hi_cv = median_ci(T_conv)
    ratio = float(np.median(g_xy) / np.median(g_conv))
    rng = np.random.default_rng(FROZEN_SEED)
    idx = rng.integers(0, len(T_xy), size=(4000, len(T_xy)))
    kept = float(np.mean(np.median(T_xy[idx], axis=1) < np.median(T_conv[idx], axis=1)))
    separated = hi_xy < lo_cv or kept >= 0.99
    ok = med_xy < med_cv and 1.5 <= ratio <= 4.0 and separated
    criterion(9, ok, f"median T xy {med_xy:.2f} [{lo_xy:.2f}, {hi_xy:.2f}] vs conventional "
                     f"{med_cv:.2f} [{lo_cv:.2f}, {hi_cv:.2f}] over {len(T_xy)} pairs; "
                     f"ordering kept in {kept:.3f} of resamples; g_min ratio {ratio:.2f}")
    assert ok


def test_criterion_10_curvature_growth(criterion, curvature_runs):
    ns = [8, 10, 12, 14]
    exps, meds = {}, {}
    for scheme in ("conventional", "xy"):
        meds[scheme] = [median_ci([r.c_min for r in curvature_runs
                                   if r.n == n and r.scheme == scheme and r.c_min is not None])[0]
                        for n in ns]
        exps[scheme] = growth_exponent(ns, meds[scheme])
    ok = exps["xy"] < exps["conventional"]
    criterion(10, ok, "growth exponents " + ", ".join(f"{k} {v:.4f}" for k, v in exps.items())
              + "; medians " + ", ".join(f"{k} {np.round(v, 1).tolist()}" for k, v in meds.items()))
    assert ok


# ---------------------------------------------------------------------------
# 11: entanglement


def test_criterion_11_entanglement(criterion):
    n = 10
    insts = generate_corpus(n, 5, instance_seed(FROZEN_SEED, n), hard_cap(n))
    grid = 41
    problems = []
    conv_curves, xy_curves = [], []
    for inst in insts:
        conv = np.array([m for _, m, _ in entropy_profile([inst], "conventional", grid)])
        xy = np.array([m for _, m, _ in entropy_profile([inst], "xy", grid)])
        conv_curves.append(conv)
        xy_curves.append(xy)
        H_I, H_F, sub, _ = ec3_setup(inst, "conventional")
        s_crit = find_min_gap(H_I, H_F).s_crit
        s_peak = np.linspace(0, 1, grid)[int(np.argmax(conv))]
        if conv[0] >= 0.05 or conv[-1] >= 0.05:
            problems.append("endpoint entropy")
        if abs(s_peak - s_crit) > 0.1:
            problems.append(f"peak {s_peak:.3f} vs s_crit {s_crit:.3f}")
        if not xy[0] > conv[0]:
            problems.append("xy start")
    conv_mean, xy_mean = np.mean(conv_curves, axis=0), np.mean(xy_curves, axis=0)
    flat_conv = conv_mean.max() / conv_mean.mean()
    flat_xy = xy_mean.max() / xy_mean.mean()
    if not flat_xy < flat_conv:
        problems.append("xy not flatter")
    grover_max = 0.0
    for m in range(2, 11):
        path = LinearPath(*grover_hamiltonians(m, (1 << m) - 1))
        for s in np.linspace(0, 1, 101):
            _, vec = path_eigenpairs(path, float(s), 1)
            grover_max = max(grover_max, half_chain_entropy(vec[:, 0]))
    if grover_max > 1 + 1e-6:
        problems.append("grover")
    criterion(11, not problems,
              f"max/mean conventional {flat_conv:.2f} vs xy {flat_xy:.2f}; "
              f"xy S(0) {xy_mean[0]:.3f}; Grover max half-chain entropy {grover_max:.6f}; {problems}")
    assert not problems


# ---------------------------------------------------------------------------
# 12: invariants over randomized inputs


def _random_hermitian_path(rng, n):
    A = PauliOperatorSum(n, random_terms(rng, n, 6))
    B = PauliOperatorSum(n, random_terms(rng, n, 6))
    return A, B


def test_criterion_12_invariants(criterion):
    rng = np.random.default_rng(FROZEN_SEED)
    worst = {"hf": 0.0, "unitarity": 0.0, "sector": 0.0, "entropy": 0.0, "apply": 0.0}

    for _ in range(10):
        n = int(rng.integers(2, 6))
        path = LinearPath(*_random_hermitian_path(rng, n))
        s = float(rng.uniform(0.05, 0.95))
        h = 1e-5
        e = lambda x: path_eigenpairs(path, x, 1)[0][0]  # noqa: E731
        vals = path_eigenpairs(path, s, 2)[0]
        if vals[1] - vals[0] < 1e-3:
            continue  # slope undefined at a crossing
        fd = (e(s + h) - e(s - h)) / (2 * h)
        worst["hf"] = max(worst["hf"], abs(fd - hellmann_feynman_slope(path, s)))

    for _ in range(5):
        n = int(rng.integers(2, 6))
        A, B = _random_hermitian_path(rng, n)
        psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        psi /= np.linalg.norm(psi)
        r = integrate(A, B, QuenchSpec(float(rng.uniform(0.5, 5.0))), psi, ground=np.eye(1 << n)[:, :1])
        worst["unitarity"] = max(worst["unitarity"], r.norm_drift)

    for _ in range(5):
        n = int(rng.integers(4, 8))
        weight = int(rng.integers(1, n))
        # XX + YY with equal coefficients on every pair conserves the weight
        hop = []
        for i in range(n):
            for j in range(i + 1, n):
                c = float(rng.normal())
                hop += [(c, PauliString.single(n, {i: p, j: p})) for p in "XY"]
        H_I = PauliOperatorSum(n, hop)
        H_F = PauliOperatorSum(n, [(float(rng.normal()), "".join("Z" if q == i else "I" for q in range(n)))
                                   for i in range(n)])
        start = prepare_initial("xy", n, weight).full()
        r = integrate(H_I, H_F, QuenchSpec(3.0), start, ground=np.eye(1 << n)[:, :1])
        full = r.final_state.full()
        # the magnetization sum Z_i equals n - 2W on the sector
        M = hamming_weight_operator(n).apply(full)
        leak = float(np.linalg.norm(M - (n - 2 * weight) * full))
        worst["sector"] = max(worst["sector"], leak)

    for _ in range(20):
        n = int(rng.integers(2, 9))
        psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        psi /= np.linalg.norm(psi)
        n1 = int(rng.integers(1, n))
        rho1 = reduced_density(psi, n1)
        # complementary reduced state by swapping the role of the two halves
        M = psi.reshape(1 << (n - n1), 1 << n1)
        rho2 = M @ M.conj().T
        worst["entropy"] = max(worst["entropy"], abs(entropy(rho1) - entropy(rho2)),
                               abs(cut_entropies(psi)[n1 - 1] - entropy(rho1)))

    for name, impl in sorted(kernels.available_backends().items()):
        saved = kernels._impl
        kernels._impl = impl
        try:
            for _ in range(10):
                n = int(rng.integers(1, 9))
                terms = random_terms(rng, n, int(rng.integers(1, 12)))
                H = PauliOperatorSum(n, terms)
                psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
                dense = kron_operator(terms, n) @ psi
                worst["apply"] = max(worst["apply"], float(np.max(np.abs(H.apply(psi) - dense))))
        finally:
            kernels._impl = saved

    limits = {"hf": 1e-4, "unitarity": 1e-8, "sector": 1e-8, "entropy": 1e-10, "apply": 1e-12}
    ok = all(worst[k] <= limits[k] for k in limits)
    criterion(12, ok, ", ".join(f"{k} {worst[k]:.1e} (<= {limits[k]:.0e})" for k in limits))
    assert ok
