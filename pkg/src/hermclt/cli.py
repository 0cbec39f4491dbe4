"""Command-line interface.

Subcommands
-----------
check   admissibility report per density (structure constants, gamma
        table, decay/contraction checks)
run     exact chi-square trajectory of the renormalized sums, with
        envelope, rate fit, step-bound margins, and figures
verify  operator-bound verification over an a-grid (Gershgorin chain,
        step inequality, spectral-gap contraction, calibrated
        alternative bound)
oracle  spectral results cross-checked against Gauss-Hermite quadrature
        and Monte Carlo sampling

Exit codes
----------
0  success
1  I/O or usage error
2  input is not a certified probability density
3  admissibility (structure-constant) checks failed
4  fitted convergence rate misses the target beyond tolerance
5  a verified bound was violated (or truncation loss was flagged)
6  oracle disagreement beyond tolerance

Configuration
-------------
``--config FILE`` loads a JSON object whose keys mirror the long flags
(``densities``, ``n_max``, ``dim``, ``a_grid``, ``window``, ``reps``,
``seed``, ``out``, ``format``, ``slope_tol``, ``plots``,
``assignment``). Flags given on the command line win over the config
file; the config file wins over built-in defaults.

All tabular outputs are written atomically (temp file + rename) and are
byte-deterministic for a fixed configuration and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import (
    alternative_bound,
    calibrate_cr,
    er_inequality,
    gershgorin_chain,
    improved_poincare,
)
from .clt import (
    InnovationSchedule,
    default_window,
    er_margins,
    fit_rate,
    n_zero,
    run_chain,
    scaled_chi2,
)
from .density import PolynomialDensity, load_density
from .errors import (
    BarycenterOutOfRange,
    DegenerateWindow,
    DegreeTooLarge,
    HypothesisNotSatisfied,
    MassNotOne,
    NotADensity,
    RateNotApplicable,
)
from .hypothesis import HypothesisReport, hypothesis_report
from .oracle import compare_mc, mc_coefficients, q_matrix_comparisons, qstar_suite

__all__ = ["main"]

EXIT_OK = 0
EXIT_IO = 1
EXIT_NOT_A_DENSITY = 2
EXIT_HYPOTHESIS = 3
EXIT_RATE = 4
EXIT_BOUND = 5
EXIT_ORACLE = 6

_DENSITY_ERRORS = (NotADensity, MassNotOne, DegreeTooLarge)
_TAIL_FLAG = 1e-12
_ORACLE_A_DEFAULT = (0.3, 0.6, 0.9)


@dataclass
class RunConfig:
    """Merged defaults, config-file values, and command-line flags."""

    densities: list[Path] = field(default_factory=list)
    n_max: int = 200
    dim: int | None = None
    a_grid: list[float] = field(default_factory=lambda: [0.85, 0.9, 0.95, 0.99])
    window: tuple[int, int] | None = None
    reps: int = 100_000
    seed: int = 0
    out: Path = Path(".")
    format: str = "csv"
    slope_tol: float = 0.15
    plots: bool = True
    assignment: str | list[int] = "auto"


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped onto the documented I/O exit code."""

    def error(self, message: str) -> None:  # pragma: no cover - thin wrapper
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="hermclt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "admissibility report per density"),
        ("run", "chi-square trajectory with envelope, rate fit, and figures"),
        ("verify", "operator-bound verification over an a-grid"),
        ("oracle", "quadrature and Monte Carlo cross-checks"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--density", action="append", type=Path, default=None,
                         metavar="FILE", help="density JSON file (repeatable)")
        cmd.add_argument("--config", type=Path, default=None, metavar="FILE",
                         help="JSON config file; flags override its values")
        cmd.add_argument("--n-max", type=int, default=None, dest="n_max",
                         help="largest chain index n (default 200)")
        cmd.add_argument("--dim", type=int, default=None,
                         help="coefficient truncation dimension")
        cmd.add_argument("--a-grid", type=str, default=None, dest="a_grid",
                         metavar="A1,A2,...", help="comma-separated barycenter grid")
        cmd.add_argument("--window", type=str, default=None, metavar="LO:HI",
                         help="rate-fit window of chain indices")
        cmd.add_argument("--reps", type=int, default=None,
                         help="Monte Carlo replications (default 100000)")
        cmd.add_argument("--seed", type=int, default=None,
                         help="random seed (default 0)")
        cmd.add_argument("--out", type=Path, default=None, metavar="DIR",
                         help="output directory (default current directory)")
        cmd.add_argument("--format", choices=("csv", "json"), default=None,
                         help="tabular output format (default csv)")
        cmd.add_argument("--slope-tol", type=float, default=None, dest="slope_tol",
                         help="allowed |slope - target| (default 0.15)")
        cmd.add_argument("--no-plots", action="store_true",
                         help="skip figure rendering")
    return parser


def _parse_a_grid(text: str) -> list[float]:
    values = [float(part) for part in text.split(",") if part.strip()]
    if not values:
        raise ValueError("empty a-grid")
    for a in values:
        if not 0.0 < a < 1.0:
            raise ValueError(f"a-grid entries must lie in (0, 1); got {a!r}")
    return values


def _parse_window(text: str) -> tuple[int, int]:
    lo_text, sep, hi_text = text.partition(":")
    if not sep:
        raise ValueError("window must be LO:HI")
    lo, hi = int(lo_text), int(hi_text)
    if lo >= hi:
        raise ValueError("window requires LO < HI")
    return lo, hi


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config is not None:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")
        for key, value in raw.items():
            if key == "densities":
                cfg.densities = [Path(p) for p in value]
            elif key == "n_max":
                cfg.n_max = int(value)
            elif key == "dim":
                cfg.dim = None if value is None else int(value)
            elif key == "a_grid":
                cfg.a_grid = [float(a) for a in value]
            elif key == "window":
                cfg.window = None if value is None else (int(value[0]), int(value[1]))
            elif key == "reps":
                cfg.reps = int(value)
            elif key == "seed":
                cfg.seed = int(value)
            elif key == "out":
                cfg.out = Path(value)
            elif key == "format":
                cfg.format = str(value)
            elif key == "slope_tol":
                cfg.slope_tol = float(value)
            elif key == "plots":
                cfg.plots = bool(value)
            elif key == "assignment":
                cfg.assignment = value if isinstance(value, str) else [int(i) for i in value]
            else:
                raise ValueError(f"unknown config key {key!r}")
    if args.density is not None:
        cfg.densities = list(args.density)
    if args.n_max is not None:
        cfg.n_max = args.n_max
    if args.dim is not None:
        cfg.dim = args.dim
    if args.a_grid is not None:
        cfg.a_grid = _parse_a_grid(args.a_grid)
    if args.window is not None:
        cfg.window = _parse_window(args.window)
    if args.reps is not None:
        cfg.reps = args.reps
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    if args.format is not None:
        cfg.format = args.format
    if args.slope_tol is not None:
        cfg.slope_tol = args.slope_tol
    if args.no_plots:
        cfg.plots = False
    if cfg.format not in ("csv", "json"):
        raise ValueError(f"format must be csv or json; got {cfg.format!r}")
    if not cfg.densities:
        raise ValueError("at least one density is required (--density or config)")
    return cfg


def _load_densities(cfg: RunConfig) -> list[tuple[str, PolynomialDensity]]:
    return [(Path(path).stem, load_density(path)) for path in cfg.densities]


def _make_schedule(cfg: RunConfig, densities: list[PolynomialDensity]) -> InnovationSchedule:
    if isinstance(cfg.assignment, list):
        return InnovationSchedule(tuple(densities), tuple(cfg.assignment))
    if cfg.assignment == "constant" or (cfg.assignment == "auto" and len(densities) == 1):
        if len(densities) != 1:
            raise ValueError("constant assignment requires exactly one density")
        return InnovationSchedule.constant(densities[0])
    if cfg.assignment in ("auto", "round-robin"):
        return InnovationSchedule.round_robin(densities)
    raise ValueError(f"unknown assignment {cfg.assignment!r}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _normalize(cell: object) -> object:
    if cell is None or isinstance(cell, (str, bool, int)):
        return cell
    if isinstance(cell, (float, np.floating)):
        return float(cell)
    if isinstance(cell, np.integer):
        return int(cell)
    return str(cell)


def _write_table(path_base: Path, fmt: str, header: list[str],
                 rows: list[list[object]]) -> Path:
    """Write rows as CSV (fixed header) or JSON (list of row objects)."""
    normalized = [[_normalize(cell) for cell in row] for row in rows]
    if fmt == "csv":
        path = path_base.with_suffix(".csv")
        lines = [",".join(header)]
        for row in normalized:
            cells = []
            for cell in row:
                if isinstance(cell, float):
                    cells.append(_fmt(cell))
                elif cell is None:
                    cells.append("")
                else:
                    cells.append(str(cell))
            lines.append(",".join(cells))
        _atomic_write_text(path, "\n".join(lines) + "\n")
        return path
    path = path_base.with_suffix(".json")
    objects = [dict(zip(header, row)) for row in normalized]
    _atomic_write_text(path, json.dumps(objects, indent=2, sort_keys=True) + "\n")
    return path


def _write_json(path: Path, payload: object) -> None:
    _atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _render_figure(render, *args) -> None:
    """Render atomically: draw to a temp file, then rename into place."""
    path = args[-1]
    tmp = path.with_name(path.name + ".tmp.png")
    render(*args[:-1], tmp)
    os.replace(tmp, path)


def _check_lines(name: str, phi: PolynomialDensity, report: HypothesisReport) -> list[str]:
    lines = [f"density: {name}"]
    if phi.is_gaussian:
        lines.append("  gaussian innovation: K = inf, N = 0, r = inf, chi2 = 0")
    else:
        lines.append(f"  K = {int(phi.K)}, N = {phi.N}, r = {int(phi.r)}")
        lines.append(f"  chi2 = {_fmt(phi.chi2)}")
    lines.append(f"  a_phi = {_fmt(report.a_phi)}")
    lines.append(f"  n0 = {n_zero(phi)}")
    if report.gammas:
        lines.append("  gamma:")
        for k in sorted(report.gammas):
            lines.append(f"    k={k}: {_fmt(report.gammas[k])}")
    for check in (report.h1, report.h1prime, report.h2a, report.h2b):
        detail = ""
        if check.lhs is not None and check.rhs is not None:
            detail = f" (lhs {check.lhs:.6g}, rhs {check.rhs:.6g})"
        note = f" [{check.note}]" if check.note else ""
        lines.append(f"  {check.name}: {check.status}{detail}{note}")
    lines.append(f"  overall: {'pass' if report.overall else 'fail'}")
    return lines


def _check_payload(name: str, phi: PolynomialDensity, report: HypothesisReport) -> dict:
    def check_obj(check):
        return {
            "status": check.status,
            "first_violation": check.first_violation,
            "lhs": check.lhs,
            "rhs": check.rhs,
            "note": check.note,
        }

    return {
        "density": name,
        "K": None if phi.is_gaussian else int(phi.K),
        "N": phi.N,
        "r": None if phi.is_gaussian else int(phi.r),
        "chi2": phi.chi2,
        "a_phi": report.a_phi,
        "n0": n_zero(phi),
        "gamma": {str(k): v for k, v in sorted(report.gammas.items())},
        "h1": check_obj(report.h1),
        "h1prime": check_obj(report.h1prime),
        "h2a": check_obj(report.h2a),
        "h2b": check_obj(report.h2b),
        "overall": report.overall,
    }


def cmd_check(cfg: RunConfig) -> int:
    loaded = _load_densities(cfg)
    payloads = []
    all_pass = True
    for name, phi in loaded:
        report = hypothesis_report(phi)
        all_pass = all_pass and report.overall
        if cfg.format == "json":
            payloads.append(_check_payload(name, phi, report))
        else:
            print("\n".join(_check_lines(name, phi, report)))
    if cfg.format == "json":
        print(json.dumps(payloads, indent=2, sort_keys=True))
    return EXIT_OK if all_pass else EXIT_HYPOTHESIS


def _schedule_rate_order(densities: list[PolynomialDensity]) -> float | None:
    """Shared finite rate order r, or None when every innovation is Gaussian."""
    finite = {int(phi.r) for phi in densities if not phi.is_gaussian}
    if not finite:
        return None
    if len(finite) > 1:
        raise RateNotApplicable(f"innovations carry different rate orders {sorted(finite)}")
    return float(finite.pop())


def cmd_run(cfg: RunConfig) -> int:
    loaded = _load_densities(cfg)
    densities = [phi for _, phi in loaded]
    schedule = _make_schedule(cfg, densities)
    trajectory = run_chain(schedule, cfg.n_max, dim=cfg.dim)
    notes = list(trajectory.notes)

    margins = er_margins(trajectory)
    violations = sum(1 for _, check in margins if not check.holds)
    tail_max = float(np.max(trajectory.tail_dropped)) if trajectory.tail_dropped.size else 0.0

    r_shared = _schedule_rate_order(densities)
    slope = slope_target = sup_scaled = None
    fit = None
    window = None
    if r_shared is None:
        notes.append("chi-square identically zero; no rate fit")
    else:
        sup_scaled = float(np.max(scaled_chi2(trajectory, r_shared)[trajectory.n0 - 1:]))
        if r_shared < 2.0:
            notes.append(f"rate order r = {int(r_shared)} < 2: no rate claim; fit suppressed")
        else:
            slope_target = -(r_shared - 1.0) / 2.0
            try:
                window = cfg.window if cfg.window is not None else default_window(
                    schedule, cfg.n_max)
                fit = fit_rate(trajectory, window[0], window[1])
                slope = fit.slope
            except DegenerateWindow as exc:
                notes.append(f"rate fit suppressed: {exc}")
                window = None

    non_gaussian = [phi for phi in densities if not phi.is_gaussian]
    summary = {
        "r": None if r_shared is None else int(r_shared),
        "K": min(int(phi.K) for phi in non_gaussian) if non_gaussian else None,
        "N": int(max(phi.N for phi in densities)),
        "a_phi": float(max(hypothesis_report(phi).a_phi for phi in densities)),
        "n0": int(trajectory.n0),
        "slope": None if slope is None else float(slope),
        "slope_target": None if slope_target is None else float(slope_target),
        "sup_scaled_chi2": sup_scaled,
        "er_violations": int(violations),
        "tail_max": tail_max,
        "note": "; ".join(notes),
    }

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [[int(n), float(a), float(c), float(e), float(t)]
            for n, a, c, e, t in zip(trajectory.n, trajectory.a, trajectory.chi2,
                                     trajectory.envelope, trajectory.tail_dropped)]
    _write_table(out / "trajectory", cfg.format,
                 ["n", "a_n", "chi2", "envelope", "tail_dropped"], rows)
    _write_json(out / "summary.json", summary)
    positive = trajectory.chi2 > 0.0
    plot_rows = [[float(np.log10(n)), float(np.log10(c))]
                 for n, c in zip(trajectory.n[positive], trajectory.chi2[positive])]
    _write_table(out / "plot_loglog", cfg.format, ["log10_n", "log10_chi2"], plot_rows)
    margin_rows = [[step, check.context.get("a"), check.lhs, check.rhs, check.margin,
                    "pass" if check.holds else "fail"]
                   for step, check in margins]
    _write_table(out / "er_margins", cfg.format,
                 ["step", "a", "lhs", "rhs", "margin", "status"], margin_rows)
    if cfg.plots:
        from .figures import render_trajectory_figure

        _render_figure(render_trajectory_figure, trajectory, fit, window,
                       out / "trajectory.png")

    flagged_tail = tail_max >= _TAIL_FLAG
    print(f"run: n_max={cfg.n_max} n0={trajectory.n0} "
          f"er_violations={violations} tail_max={_fmt(tail_max)}")
    if slope is not None:
        print(f"run: slope={slope:.6f} target={slope_target:g} "
              f"tol={cfg.slope_tol:g}")
    for note in notes:
        print(f"run: note: {note}")
    if violations > 0 or flagged_tail:
        return EXIT_BOUND
    if slope is not None and abs(slope - slope_target) > cfg.slope_tol:
        return EXIT_RATE
    return EXIT_OK


def _verify_density(name: str, phi: PolynomialDensity, cfg: RunConfig,
                    rows: list[list[object]], records: list[tuple[str, float, float]]) -> None:
    report = hypothesis_report(phi)
    if not report.overall:
        raise HypothesisNotSatisfied(f"density {name} fails the admissibility checks")

    if not phi.is_gaussian:
        r = int(phi.r)
        trajectory = run_chain(InnovationSchedule.constant(phi), 5, with_envelope=False)
        samples = [("phi", phi.coeffs), ("f2", trajectory.coeffs[1]),
                   ("f5", trajectory.coeffs[4])]
        for a in cfg.a_grid:
            if a <= report.a_phi:
                rows.append([f"{name}:skipped", a, None, None, None, "skipped",
                             f"a <= a_phi = {_fmt(report.a_phi)}"])
                continue
            dim = max(int(phi.K) + 4 * phi.N, 64)
            norm_check, sup_check = gershgorin_chain(phi, a, dim)
            for check in (norm_check, sup_check):
                label = f"{name}:gershgorin:{check.context['stage']}"
                rows.append([label, a, check.lhs, check.rhs, check.margin,
                             "pass" if check.holds else "fail", ""])
                records.append((label, a, check.margin))
            for tag, f in samples:
                check = er_inequality(f, phi, a)
                label = f"{name}:er:{tag}"
                rows.append([label, a, check.lhs, check.rhs, check.margin,
                             "pass" if check.holds else "fail", ""])
                records.append((label, a, check.margin))
        usable = [a for a in cfg.a_grid if a > report.a_phi]
        if usable:
            c_r = calibrate_cr([f for _, f in samples], phi, usable, r)
            rows.append([f"{name}:c_r", None, c_r, None, None, "info",
                         "calibrated cross-term constant"])
            for a in usable:
                for tag, f in samples:
                    check = alternative_bound(f, phi, a, r, c_r)
                    label = f"{name}:alt:{tag}"
                    rows.append([label, a, check.lhs, check.rhs, check.margin,
                                 "pass" if check.holds else "fail", ""])
                    records.append((label, a, check.margin))

    r_gap = 0 if phi.is_gaussian else int(phi.r)
    f_gap = np.zeros(r_gap + 8)
    f_gap[0] = 1.0
    f_gap[r_gap + 1:] = 0.25
    for t in (0.1, 1.0):
        check = improved_poincare(f_gap, t, r_gap)
        label = f"{name}:poincare"
        rows.append([label, t, check.lhs, check.rhs, check.margin,
                     "pass" if check.holds else "fail", f"t = {t}"])
        records.append((label, t, check.margin))


def cmd_verify(cfg: RunConfig) -> int:
    loaded = _load_densities(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    failures = 0
    for name, phi in loaded:
        rows: list[list[object]] = []
        records: list[tuple[str, float, float]] = []
        _verify_density(name, phi, cfg, rows, records)
        failures += sum(1 for row in rows if row[5] == "fail")
        _write_table(out / f"verify_{name}", cfg.format,
                     ["bound", "a", "lhs", "rhs", "margin", "status", "note"], rows)
        if cfg.plots and records:
            from .figures import render_margins_figure

            _render_figure(render_margins_figure, records, out / f"margins_{name}.png")
        checked = sum(1 for row in rows if row[5] in ("pass", "fail"))
        skipped = sum(1 for row in rows if row[5] == "skipped")
        print(f"verify: {name}: {checked} checks, "
              f"{sum(1 for row in rows if row[5] == 'fail')} failures, {skipped} skipped")
    return EXIT_BOUND if failures else EXIT_OK


def cmd_oracle(cfg: RunConfig) -> int:
    loaded = _load_densities(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = cfg.a_grid if cfg.a_grid != RunConfig().a_grid else list(_ORACLE_A_DEFAULT)
    failures = 0
    for name, phi in loaded:
        rows: list[list[object]] = []
        trajectory = run_chain(InnovationSchedule.constant(phi), 4, with_envelope=False)
        f2 = trajectory.coeffs[1]
        for a in grid:
            for comp in qstar_suite(phi.coeffs, phi, a):
                rows.append([f"qstar:phi:a={a}:{comp.quantity}", comp.spectral,
                             comp.oracle, comp.abs_diff, comp.tolerance,
                             "pass" if comp.passed else "fail"])
            for comp in qstar_suite(f2, phi, a):
                rows.append([f"qstar:f2:a={a}:{comp.quantity}", comp.spectral,
                             comp.oracle, comp.abs_diff, comp.tolerance,
                             "pass" if comp.passed else "fail"])
            for comp in q_matrix_comparisons(phi, a, 10):
                rows.append([f"qmatrix:a={a}:{comp.quantity}", comp.spectral,
                             comp.oracle, comp.abs_diff, comp.tolerance,
                             "pass" if comp.passed else "fail"])
        for n in (2, 5, 10):
            estimates = mc_coefficients(phi, n, 8, cfg.reps, cfg.seed)
            chain = run_chain(InnovationSchedule.constant(phi), max(n, 2),
                              with_envelope=False)
            reference = chain.coeffs[n - 1]
            for comp in compare_mc(estimates, reference, label=f"mc:n={n}"):
                rows.append([comp.quantity, comp.spectral, comp.oracle,
                             comp.abs_diff, comp.tolerance,
                             "pass" if comp.passed else "fail"])
        failures += sum(1 for row in rows if row[5] == "fail")
        _write_table(out / f"oracle_{name}", cfg.format,
                     ["quantity", "spectral", "oracle", "abs_diff", "tolerance",
                      "status"], rows)
        print(f"oracle: {name}: {len(rows)} comparisons, "
              f"{sum(1 for row in rows if row[5] == 'fail')} failures")
    return EXIT_ORACLE if failures else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"hermclt: error: {exc}", file=sys.stderr)
        return EXIT_IO
    handler = {"check": cmd_check, "run": cmd_run, "verify": cmd_verify,
               "oracle": cmd_oracle}[args.command]
    try:
        return handler(cfg)
    except _DENSITY_ERRORS as exc:
        print(f"hermclt: not a density: {exc}", file=sys.stderr)
        return EXIT_NOT_A_DENSITY
    except HypothesisNotSatisfied as exc:
        print(f"hermclt: admissibility failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (BarycenterOutOfRange, RateNotApplicable, ValueError) as exc:
        print(f"hermclt: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"hermclt: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
