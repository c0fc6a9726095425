"""Experiment runner: ``oscilab <command> --config <file> [--out] [--seed]``.

Each run writes a deterministic ``report.json`` (fixed key order, no
timestamps) plus CSV tables and optional binary field dumps into the
output directory.  Exit status is 0 exactly when every hard check of the
selected experiment passes.  ``OSCILAB_THREADS`` caps the worker count
used for independent experiment cells; results are identical for any
cap because cells are collected in submission order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import carleson as carleson_mod
from .amplitudes import decompose_amplitude
from .config import COMMANDS, ConfigError, ExperimentConfig, load_config
from .cutoffs import lp_partition_sum
from .dispersive import (
    SystemConfig,
    residual_check,
    solve_coupled_system,
    space_time_norm,
)
from .grid import apply_multiplier, make_grid, philox_rng, random_field, transform
from .operators import free_propagator
from .phases import builtin_phase
from .reporting import RatioTable, emit_ratio_table, write_field_dump
from .sharpness import sharpness_case, square_function_check
from .spaces import lebesgue, norm, parse_norm_kind, sobolev


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    detail: str = ""


@dataclass
class RunReport:
    """Outcome of one experiment run.

    ``wall_clock_seconds`` is kept on the object (and printed) but left
    out of report.json so that fixed seeds give byte-identical artifacts.
    """

    command: str
    config: dict
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    wall_clock_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "config": self.config,
            # basenames only, so reports are byte-identical across out dirs
            "artifacts": sorted(os.path.basename(a) for a in self.artifacts),
            "checks": [{"name": c.name, "passed": c.passed,
                        "measured": c.measured, "detail": c.detail}
                       for c in self.checks],
            "passed": self.passed,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _worker_count(n_cells: int) -> int:
    cap = os.environ.get("OSCILAB_THREADS", "")
    try:
        cap_n = max(1, int(cap)) if cap else 1
    except ValueError:
        cap_n = 1
    return max(1, min(cap_n, n_cells))


def _parallel_map(fn, items):
    """Ordered map over independent cells, honoring OSCILAB_THREADS."""
    items = list(items)
    workers = _worker_count(len(items))
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _tol(cfg: ExperimentConfig, name: str, default: float) -> float:
    return float(cfg.tolerances.get(name, default))


def _cmd_verify(cfg: ExperimentConfig, out: Path) -> RunReport:
    g = cfg.grid
    rng = philox_rng(cfg.seed)
    report = RunReport(command="verify", config=cfg.raw)

    def check(name, measured, bound, detail=""):
        report.checks.append(CheckResult(name=name, passed=bool(measured <= bound),
                                         measured=float(measured),
                                         detail=detail or f"<= {bound:g}"))

    xi = g.frequency_lattice().reshape(-1, g.dim)
    check("littlewood_paley_partition", np.max(np.abs(lp_partition_sum(xi) - 1.0)),
          _tol(cfg, "lp_partition", 1e-12))

    f = random_field(g, rng)
    back = transform(transform(f, "spectral"), "physical")
    rel = np.max(np.abs(back.samples - f.samples)) / np.max(np.abs(f.samples))
    check("transform_round_trip", rel, _tol(cfg, "round_trip", 1e-12))

    spec = transform(f, "spectral")
    lhs = np.sum(np.abs(f.samples) ** 2) * g.spacing**g.dim
    rhs = np.sum(np.abs(spec.samples) ** 2) * (g.freq_step / (2 * np.pi)) ** g.dim
    check("plancherel", abs(lhs - rhs) / lhs, _tol(cfg, "plancherel", 1e-10))

    m1 = lambda z: 1.0 / (1.0 + np.sum(z**2, axis=-1))
    m2 = lambda z: np.exp(-np.sum(z**2, axis=-1) / 100.0)
    once = apply_multiplier(lambda z: m1(z) * m2(z), f)
    twice = apply_multiplier(m1, apply_multiplier(m2, f))
    check("multiplier_composition",
          np.max(np.abs(once.samples - twice.samples)) / np.max(np.abs(once.samples)),
          _tol(cfg, "composition", 1e-12))

    names = ["water_wave", "wave", "capillary", "schrodinger", "airy", "klein_gordon"]

    def unitarity(name):
        ph = builtin_phase(name)
        worst = 0.0
        for t in (0.1, 1.0, 10.0):
            evolved = free_propagator(t, ph, f)
            worst = max(worst, abs(norm(evolved, lebesgue(2)) - norm(f, lebesgue(2)))
                        / norm(f, lebesgue(2)))
        return worst

    for name, worst in zip(names, _parallel_map(unitarity, names)):
        check(f"unitarity_{name}", worst, _tol(cfg, "unitarity", 1e-10))
    return report


def _cmd_norms(cfg: ExperimentConfig, out: Path) -> RunReport:
    report = RunReport(command="norms", config=cfg.raw)
    fname = cfg.params.get("field")
    if fname is None:
        raise ConfigError("params.field is required for the norms command")
    f = cfg.field_by_name(fname)
    kinds = cfg.params.get("norms", ["L2"])
    rows = []
    for spec in kinds:
        kind = parse_norm_kind(spec)
        value = norm(f, kind)
        rows.append((float(len(rows)), value))
        report.checks.append(CheckResult(name=f"norm[{spec}]",
                                         passed=bool(np.isfinite(value)),
                                         measured=float(value), detail=str(kind)))
    table = RatioTable(columns=("index", "value"), rows=rows)
    report.artifacts.append(emit_ratio_table(table, out / "norms.csv"))
    return report


def _cmd_decompose(cfg: ExperimentConfig, out: Path) -> RunReport:
    report = RunReport(command="decompose", config=cfg.raw)
    aname = cfg.params.get("amplitude")
    if aname is None:
        raise ConfigError("params.amplitude is required for the decompose command")
    sigma = cfg.amplitude(aname)
    n_samples = int(cfg.params.get("samples", 2000))
    rng = philox_rng(cfg.seed)
    dec = decompose_amplitude(sigma)
    N, n = sigma.arity, sigma.dim
    scales = 4.0 ** rng.integers(-2, 6, size=n_samples)
    Xi = rng.standard_normal((n_samples, N, n)) * scales[:, None, None]
    recon = dec.reconstruct(None, Xi)
    target = sigma(None, Xi)
    err = float(np.max(np.abs(recon - target)))
    report.checks.append(CheckResult(
        name="reconstruction", passed=err <= _tol(cfg, "reconstruction", 1e-10),
        measured=err))
    c = dec.constants
    norms = np.sqrt(np.sum(Xi**2, axis=-1))
    total = np.sqrt(np.sum(Xi**2, axis=(-2, -1)))
    violations = 0
    vals0 = np.abs(dec.sigma0(None, Xi))
    violations += int(np.sum((vals0 > 0) & (total > c.chi_outer + 1e-12)))
    for j, piece in enumerate(dec.sigma_j):
        vals = np.abs(piece(None, Xi))
        keep = vals > 0
        violations += int(np.sum(keep & (c.domination_c * norms[:, j] ** 2 < total**2)))
    for (j, k), piece in dec.sigma_jk.items():
        vals = np.abs(piece(None, Xi))
        keep = vals > 0
        ratio = norms[:, j] / np.maximum(norms[:, k], 1e-300)
        bad = keep & ((ratio > c.comparability_C) | (ratio < 1.0 / c.comparability_C))
        violations += int(np.sum(bad))
    report.checks.append(CheckResult(
        name="support_violations", passed=violations == 0, measured=float(violations)))
    rows = [(0.0, err), (1.0, float(violations)), (2.0, c.c1), (3.0, c.c2),
            (4.0, c.domination_c), (5.0, c.comparability_C)]
    table = RatioTable(columns=("index", "value"), rows=rows)
    report.artifacts.append(emit_ratio_table(table, out / "decompose.csv"))
    return report


def _cmd_evolve(cfg: ExperimentConfig, out: Path) -> RunReport:
    report = RunReport(command="evolve", config=cfg.raw)
    p = cfg.params
    for key in ("phases", "zeta", "fields", "exponents"):
        if key not in p:
            raise ConfigError(f"params.{key} is required for the evolve command")
    phases = tuple(cfg.phase(nm) for nm in p["phases"])
    zeta = cfg.amplitude(p["zeta"])
    data = tuple(cfg.field_by_name(nm) for nm in p["fields"])
    kappas = tuple(float(k) for k in p.get("kappas", [0.0] * len(data)))
    sys_cfg = SystemConfig(grid=cfg.grid, phases=phases, zeta=zeta,
                           initial_data=data, kappas=kappas,
                           exponents=tuple(float(x) for x in p["exponents"]),
                           horizon=float(p.get("horizon", 1.0)),
                           time_steps=int(p.get("time_steps", 16)))
    result = solve_coupled_system(sys_cfg, quadrature=p.get("quadrature", "trapezoid"))
    q = np.inf if p.get("q", "inf") in ("inf", None) else float(p["q"])
    st = space_time_norm(result, q,
                         sobolev(sys_cfg.target_sobolev_order, sys_cfg.exponents[0]))
    report.checks.append(CheckResult(name="space_time_norm_finite",
                                     passed=bool(np.isfinite(st)), measured=float(st),
                                     detail=sys_cfg.hypothesis_label))
    if p.get("residual", True):
        res = residual_check(result, sys_cfg)
        report.checks.append(CheckResult(
            name="duhamel_residual", measured=float(res),
            passed=res <= _tol(cfg, "residual", 1.0),
            detail="second-order in dt; tolerance is advisory"))
    rows = [(float(t), v) for t, v in zip(result.times, result.norm_traces)]
    table = RatioTable(columns=("t", "target_norm"), rows=rows)
    report.artifacts.append(emit_ratio_table(table, out / "norm_trace.csv"))
    if p.get("dump_fields", False):
        for i, snap in enumerate(result.u_snapshots):
            path = out / f"u_{i:04d}.field"
            report.artifacts.append(write_field_dump(snap, path))
    return report


def _cmd_sharpness(cfg: ExperimentConfig, out: Path) -> RunReport:
    from .sharpness import blowup_experiment

    report = RunReport(command="sharpness", config=cfg.raw)
    p = cfg.params
    for key in ("p", "q", "r", "eps", "s"):
        if key not in p:
            raise ConfigError(f"params.{key} is required for the sharpness command")
    bandwidths = p.get("bandwidths", [32, 64, 128, 256])
    table = blowup_experiment(float(p["p"]), float(p["q"]), float(p["r"]),
                              float(p["eps"]), float(p["s"]), bandwidths)
    report.artifacts.append(emit_ratio_table(table, out / "blowup.csv"))
    report.checks.append(CheckResult(
        name="ratio_slope", passed=True, measured=float(table.meta["slope"]),
        detail="blow-up detected" if table.meta["blowup_detected"] else "flat"))
    if p.get("identity_check", False):
        G = int(p.get("identity_grid_points", 256))
        case = sharpness_case(float(p["p"]), float(p["q"]), float(p["r"]),
                              float(p["eps"]), float(p["s"]))
        disc = square_function_check(case, make_grid(1, G, np.pi))
        report.checks.append(CheckResult(
            name="square_function_identity", measured=float(disc),
            passed=disc <= _tol(cfg, "square_function", 1e-6)))
    return report


def _cmd_carleson(cfg: ExperimentConfig, out: Path) -> RunReport:
    report = RunReport(command="carleson", config=cfg.raw)
    p = cfg.params
    s = float(p.get("s", 2.0))
    base_levels = [int(k) for k in p.get("base_levels", [2, 3, 4, 5, 6, 7])]
    draws = int(p.get("draws", 1))
    phase = builtin_phase("homogeneous_power", s=s)
    level_count = p.get("level_count")

    def one(draw):
        def make_spec(k):
            return carleson_mod.builtin_band_family(
                cfg.grid, phase, seed=cfg.seed + draw, base_level=k,
                level_count=None if level_count is None else int(level_count))
        return carleson_mod.decay_experiment(make_spec, base_levels)

    reports = _parallel_map(one, range(draws))
    slopes = [r.slope_log2 for r in reports if r.slope_log2 is not None]
    mean_slope = float(np.mean(slopes)) if slopes else np.nan
    rows = []
    for d, rep in enumerate(reports):
        for k, c in rep.rows():
            rows.append((float(k), float(d), c, rep.slope_log2))
    table = RatioTable(columns=("k", "draw", "carleson_norm", "fitted_slope"), rows=rows)
    report.artifacts.append(emit_ratio_table(table, out / "carleson_decay.csv"))
    report.checks.append(CheckResult(
        name="decay_slope", measured=mean_slope,
        passed=bool(mean_slope <= _tol(cfg, "decay_slope", -0.2)),
        detail=f"reference decay exponent {reports[0].reference_decay:g}"))
    return report


_COMMANDS = {
    "verify": _cmd_verify,
    "norms": _cmd_norms,
    "decompose": _cmd_decompose,
    "evolve": _cmd_evolve,
    "sharpness": _cmd_sharpness,
    "carleson": _cmd_carleson,
}


def run(config_path, command: str | None = None, out_dir=None,
        seed: int | None = None) -> RunReport:
    """Execute the configured experiment; write report.json and artifacts."""
    cfg = load_config(config_path, command=command)
    if seed is not None:
        doc = dict(cfg.raw)
        doc["seed"] = int(seed)
        from .config import parse_config
        cfg = parse_config(doc, command=command)
    out = Path(out_dir) if out_dir else Path(cfg.raw.get("out", "oscilab-out"))
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    report = _COMMANDS[cfg.command](cfg, out)
    report.wall_clock_seconds = time.perf_counter() - start
    report_path = out / "report.json"
    with open(report_path, "w", newline="") as fh:
        fh.write(report.to_json())
    report.artifacts.append(str(report_path))
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oscilab",
        description="config-driven experiments for oscillatory integral operators")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    args = parser.parse_args(argv)
    try:
        report = run(args.config, command=args.command, out_dir=args.out,
                     seed=args.seed)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"oscilab: error: {exc}", file=sys.stderr)
        return 2
    for c in report.checks:
        status = "pass" if c.passed else "FAIL"
        print(f"[{status}] {c.name}: {c.measured:.6g} {c.detail}")
    print(f"wall clock: {report.wall_clock_seconds:.2f} s; "
          f"artifacts: {', '.join(report.artifacts)}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
