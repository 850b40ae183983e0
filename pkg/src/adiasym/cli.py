"""Command line entry point (``adiasym``)."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import ec3, factoring, harness, models
from .evolve import DEFAULT_WINDOW, QuenchSpec, integrate, runtime_for_fidelity
from .pauli import LinearPath, PauliOperatorSum, StateVector, hamming_sector, parity_sector, uniform_superposition
from .spectra import find_min_gap, gap_curve, runtime_estimate

seed_option = click.option("--seed", type=int, default=0, show_default=True,
                           help="Seed for every random choice made by the command.")


def _emit_json(doc, out) -> None:
    text = json.dumps(doc, indent=1, sort_keys=True, default=float)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def _emit_csv(header, rows, out) -> None:
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    finally:
        if out:
            fh.close()


def _parse_sector(text, n):
    if text is None or text == "none":
        return None
    if text in ("even", "odd"):
        return parity_sector(n, text == "even")
    return hamming_sector(n, int(text))


def _resolve(model, n, instance, scheme, initial, final, sector):
    """``(path, psi0, ground, n)`` from one of the three problem sources."""
    ground = None
    if instance:
        inst = ec3.Ec3Instance.load(instance)
        weight = None if sector in (None, "auto") else int(sector)
        H_I, H_F, sub, psi0 = harness.ec3_setup(inst, scheme, weight)
        ground = harness._ground_for_solution(inst, sub)
        n = inst.n
    elif model:
        if n is None:
            raise click.UsageError("--n is required with --model")
        H_I, H_F = models.model_hamiltonians(model, n)
        if sector == "auto":
            sector = "even" if model in ("ising", "mixed") else None
        sub = _parse_sector(sector, n)
        full = uniform_superposition(n).astype(complex)
        psi0 = StateVector(full if sub is None else sub.project(full), sub, n)
    elif initial and final:
        H_I = PauliOperatorSum.from_json(Path(initial).read_text())
        H_F = PauliOperatorSum.from_json(Path(final).read_text())
        n = H_I.n_qubits
        sub = _parse_sector(None if sector == "auto" else sector, n)
        full = uniform_superposition(n).astype(complex)
        psi0 = StateVector(full if sub is None else sub.project(full), sub, n)
    else:
        raise click.UsageError("give --model, --instance, or both --initial and --final")
    return LinearPath(H_I, H_F, subspace=sub), psi0, ground, n


def problem_options(fn):
    opts = [
        click.option("--model", type=click.Choice(["grover", "ising", "mixed"])),
        click.option("--n", "n", type=int, help="Qubit count for --model."),
        click.option("--instance", type=click.Path(exists=True, dir_okay=False), help="EC3 instance JSON."),
        click.option("--scheme", type=click.Choice(["conventional", "xy", "xyz"]), default="conventional",
                     show_default=True),
        click.option("--initial", type=click.Path(exists=True, dir_okay=False), help="Initial operator JSON."),
        click.option("--final", type=click.Path(exists=True, dir_okay=False), help="Final operator JSON."),
        click.option("--sector", default="auto", show_default=True,
                     help="Hamming weight W, 'even'/'odd' parity, 'none', or 'auto'."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Adiabatic quantum computation simulator."""


@main.command("gen-ec3")
@click.option("--n", "n", type=int, required=True)
@click.option("--count", type=int, default=1, show_default=True)
@click.option("--cap", default="hard", show_default=True, help="Clause cap: an integer, 'hard' or 'none'.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
@seed_option
def gen_ec3(n, count, cap, out_dir, seed):
    """Generate unique-solution Exact Cover 3 instances."""
    cap_val = ec3.hard_cap(n) if cap == "hard" else None if cap == "none" else int(cap)
    insts = ec3.generate_corpus(n, count, seed, cap_val)
    if out_dir is None:
        for inst in insts:
            click.echo(json.dumps(inst.to_dict()))
        return
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    for i, inst in enumerate(insts):
        inst.save(d / f"n{n}-{i:03d}.json")
    (d / "corpus.json").write_text(json.dumps({"n": n, "count": count, "seed": seed, "cap": cap_val,
                                               "hash": ec3.corpus_hash(insts)}, indent=1) + "\n")
    click.echo(f"wrote {count} instances to {d}")


@main.command()
@problem_options
@click.option("--grid", type=int, default=101, show_default=True)
@click.option("--levels", type=int, default=3, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@seed_option
def spectrum(model, n, instance, scheme, initial, final, sector, grid, levels, out, seed):
    """Lowest energies on a uniform s grid as CSV."""
    path, _, _, _ = _resolve(model, n, instance, scheme, initial, final, sector)
    prof = gap_curve(path, grid=grid, count=levels)
    _emit_csv(["s"] + [f"E{i}" for i in range(prof.energies.shape[1])], prof.rows(), out)


@main.command()
@problem_options
@click.option("--tol-s", type=float, default=1e-5, show_default=True)
@click.option("--level", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@seed_option
def critfit(model, n, instance, scheme, initial, final, sector, tol_s, level, out, seed):
    """Locate the minimum gap and fit its curvature (JSON)."""
    path, _, _, _ = _resolve(model, n, instance, scheme, initial, final, sector)
    _emit_json(find_min_gap(path, tol_s=tol_s, level=level).to_dict(), out)


@main.command()
@problem_options
@click.option("--T", "T", type=float, default=None, help="Fixed quench time.")
@click.option("--target-window", nargs=2, type=float, default=None,
              help="Search the quench time reaching this fidelity window.")
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--samples", type=int, default=0, show_default=True, help="Trajectory points.")
@click.option("--trajectory", type=click.Path(dir_okay=False), default=None, help="CSV trajectory output.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@seed_option
def evolve(model, n, instance, scheme, initial, final, sector, T, target_window, tol, samples, trajectory,
           out, seed):
    """Integrate the linear quench (JSON result)."""
    path, psi0, ground, _ = _resolve(model, n, instance, scheme, initial, final, sector)
    if T is None and target_window is None:
        raise click.UsageError("give --T or --target-window")
    doc = {}
    if target_window is not None:
        search = runtime_for_fidelity(path, None, psi0, window=tuple(target_window), tol=tol, ground=ground)
        doc["search"] = search.to_dict()
        T = search.T
    res = integrate(path, None, QuenchSpec(T, tol, samples), psi0, ground=ground)
    doc.update(res.to_dict())
    if trajectory:
        _emit_csv(["s", "ground_fidelity", "energy"], res.trajectory, trajectory)
    _emit_json(doc, out)


@main.command()
@problem_options
@click.option("--measure/--no-measure", default=False, help="Also search the measured runtime.")
@click.option("--window", nargs=2, type=float, default=DEFAULT_WINDOW, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@seed_option
def estimate(model, n, instance, scheme, initial, final, sector, measure, window, out, seed):
    """Runtime estimate sqrt(c_min / g_min^3), optionally with the measured T."""
    path, psi0, ground, n = _resolve(model, n, instance, scheme, initial, final, sector)
    fit = find_min_gap(path)
    doc = {"g_min": fit.g_min, "c_min": fit.c_min, "s_crit": fit.s_crit, "estimator": runtime_estimate(fit)}
    if model == "grover":
        doc["analytic"] = models.grover_runtime_estimate_analytic(n)
    elif model == "ising":
        doc["analytic"] = models.ising_runtime_estimate_analytic(n)
    if measure:
        doc["measured"] = runtime_for_fidelity(path, None, psi0, window=tuple(window), ground=ground).to_dict()
    _emit_json(doc, out)


@main.command()
@click.option("--instance", "instances", multiple=True, required=True,
              type=click.Path(exists=True), help="Instance JSON file or directory (repeatable).")
@click.option("--scheme", type=click.Choice(["conventional", "xy", "xyz"]), default="conventional",
              show_default=True)
@click.option("--grid", type=int, default=21, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@seed_option
def entropy(instances, scheme, grid, out, seed):
    """Chain-averaged ground-state entropy along the path (CSV: s, mean_entropy, std)."""
    files = []
    for p in map(Path, instances):
        files += sorted(f for f in p.glob("*.json") if f.name != "corpus.json") if p.is_dir() else [p]
    insts = [ec3.Ec3Instance.load(f) for f in files]
    _emit_csv(["s", "mean_entropy", "std"], harness.entropy_profile(insts, scheme, grid), out)


@main.command()
@click.option("--model", type=click.Choice(["grover", "ising", "mixed"]), required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--s-grid", type=int, default=11, show_default=True)
@click.option("--phi-grid", type=int, default=181, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@seed_option
def landscape(model, n, s_grid, phi_grid, out, seed):
    """Semiclassical energy landscape as CSV triplets (s, phi, E)."""
    phis = np.linspace(-np.pi / 2, np.pi / 2, phi_grid)
    rows = []
    for s in np.linspace(0.0, 1.0, s_grid):
        rows += [(float(s), float(p), float(e)) for p, e in zip(phis, models.landscape(model, n, float(s), phis))]
    _emit_csv(["s", "phi", "E"], rows, out)


def _layout_from(omega, k, n, odd):
    n_tot = n if n is not None else omega.bit_length()
    return factoring.build_layout(omega, n_tot, k, odd_reduced=odd)


@main.command("factor-encode")
@click.option("--omega", type=int, required=True)
@click.option("--k", "k", type=int, required=True, help="Bit length of the first factor.")
@click.option("--n", "n", type=int, default=None, help="Bit length of omega (default: its binary length).")
@click.option("--odd/--no-odd", default=True, show_default=True, help="Apply the odd-factor reduction.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@seed_option
def factor_encode(omega, k, n, odd, out, seed):
    """Write the factoring layout and quadratic form as JSON."""
    lay = _layout_from(omega, k, n, odd)
    doc = {"layout": lay.to_dict(), "quadratic": factoring.to_quadratic(lay).to_dict()}
    _emit_json(doc, out)


@main.command("factor-verify")
@click.option("--omega", type=int, required=True)
@click.option("--k", "k", type=int, required=True)
@click.option("--n", "n", type=int, default=None)
@click.option("--odd/--no-odd", default=True, show_default=True)
@seed_option
def factor_verify(omega, k, n, odd, seed):
    """Brute-force ground-state check; exits non-zero on failure."""
    res = factoring.verify(_layout_from(omega, k, n, odd))
    _emit_json(res, None)
    if not res["ok"]:
        sys.exit(1)


@main.group()
def experiment():
    """Batch experiments from a JSON config."""


@experiment.command("run")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="Override the config's output directory.")
@click.option("--seed", type=int, default=None, help="Override the config's master seed.")
def experiment_run(config, out_dir, seed):
    cfg = harness.ExperimentConfig.load(config)
    if out_dir is not None:
        cfg.out_dir = out_dir
    if seed is not None:
        cfg.seed = seed
    res = harness.run_experiment(cfg)
    failed = sum(r.status == "failed" for r in res.records)
    click.echo(f"{len(res.records)} records ({failed} failed) -> {cfg.out_dir}")


@experiment.command("report")
@click.argument("out_dir", type=click.Path(exists=True, file_okay=False))
@seed_option
def experiment_report(out_dir, seed):
    _emit_json(harness.report(out_dir), None)


if __name__ == "__main__":
    main()
