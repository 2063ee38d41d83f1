"""
Command-line front end.

    qbohm well      --gammaL 1 --n 1,2,3
    qbohm solve     --gammaL 1 --n 3 --points 2000
    qbohm bohm      --gammaL 1 --n 2 --points 2001 --output snap.csv
    qbohm fisher    --gammaL -0.9 --n 1 --points 4001
    qbohm fig1      --gammaL-min -0.95 --gammaL-max 10 --n 1,2,3 --output fig1.csv --svg fig1.svg
    qbohm propagate --gammaL 1 --n 1,2 --points 401 --dt 1e-3 --steps 500

Natural units (hbar = m0 = L = 1) unless overridden.  A JSON file passed
with ``--config`` supplies any of the long option names (dashes or
underscores); flags given on the command line win.

Exit codes: 0 success, 1 domain or physics error, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields as dc_fields
from typing import List, Optional, Sequence

import numpy as np

from . import bohmian, fisher, svgplot, well
from .errors import DomainError, QBohmError
from .fields import ComplexField
from .solver import PotentialSpec, propagate, solve_direct, solve_pct

log = logging.getLogger("qbohm")

COMMANDS = ("well", "solve", "bohm", "fisher", "fig1", "propagate")
FORMATS = ("csv", "json", "svg")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    gammaL: float = 0.0
    L: float = 1.0
    n: List[int] = field(default_factory=lambda: [1])
    points: int = 2001
    hbar: float = 1.0
    m0: float = 1.0
    output: Optional[str] = None
    format: str = "csv"
    svg: Optional[str] = None
    route: str = "pct"
    gammaL_min: float = -0.95
    gammaL_max: float = 10.0
    gammaL_points: int = 41
    dt: float = 1e-3
    steps: int = 500
    store_every: int = 1

    @property
    def gamma(self) -> float:
        return self.gammaL / self.L

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}; choose from {', '.join(FORMATS)}")
        if self.format == "svg" and self.command != "fig1":
            raise UsageError("svg output is only available for fig1")
        if self.route not in ("pct", "direct"):
            raise UsageError(f"route must be 'pct' or 'direct', got {self.route!r}")
        if not self.n or any(k < 1 for k in self.n):
            raise DomainError(f"quantum numbers must be positive integers, got {self.n}")
        for name in ("L", "hbar", "m0", "dt"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 1.0 + self.gammaL > 0:
            raise DomainError(f"need 1 + gamma L > 0, got gamma L = {self.gammaL!r} "
                              f"(the mass diverges at x = -1/gamma)")
        if self.command == "fig1" and not -1.0 < self.gammaL_min < 0.0 < self.gammaL_max:
            raise DomainError("fig1 needs -1 < gammaL-min < 0 < gammaL-max")


def _int_list(text) -> List[int]:
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qbohm", description="Deformed PDM quantum well toolkit.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gamma", type=float, help="deformation parameter (units 1/L)")
    g.add_argument("--gammaL", type=float, help="dimensionless gamma*L (default 0)")
    p.add_argument("--L", type=float, help="well width (default 1)")
    p.add_argument("--n", type=_int_list, help="quantum numbers, e.g. 1,2,3 (default 1; fig1: 1,2,3)")
    p.add_argument("--points", type=int, help="grid points (default 2001)")
    p.add_argument("--hbar", type=float)
    p.add_argument("--m0", type=float)
    p.add_argument("--route", choices=("pct", "direct"), help="eigensolver route for solve")
    p.add_argument("--output", "-o", help="artifact path")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--svg", help="fig1: also write the 3-panel plot here")
    p.add_argument("--gammaL-min", dest="gammaL_min", type=float)
    p.add_argument("--gammaL-max", dest="gammaL_max", type=float)
    p.add_argument("--gammaL-points", dest="gammaL_points", type=int)
    p.add_argument("--dt", type=float, help="propagate: time step")
    p.add_argument("--steps", type=int, help="propagate: number of steps")
    p.add_argument("--store-every", dest="store_every", type=int)
    p.add_argument("--config", help="JSON file with defaults for any option")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path!r}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def make_config(args: argparse.Namespace) -> RunConfig:
    """Merge file config and flags (flags win)."""
    merged = _load_config(args.config) if args.config else {}
    known = {f.name for f in dc_fields(RunConfig)} | {"gamma"}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    for key, val in vars(args).items():
        if key in ("config", "verbose") or val is None:
            continue
        if key in ("gamma", "gammaL"):
            merged.pop("gamma", None)
            merged.pop("gammaL", None)
        merged[key] = val
    if "command" not in merged:
        raise UsageError("no command given")
    if "gamma" in merged and "gammaL" in merged:
        raise UsageError("give gamma or gammaL, not both")
    gamma = merged.pop("gamma", None)
    if "n" in merged:
        merged["n"] = _int_list(merged["n"])
    elif merged["command"] == "fig1":
        merged["n"] = [1, 2, 3]
    try:
        cfg = RunConfig(**merged)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc
    if gamma is not None:
        cfg.gammaL = float(gamma) * cfg.L
    return cfg


def _threads() -> Optional[int]:
    raw = os.environ.get("QBOHM_THREADS")
    if raw is None or raw == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"QBOHM_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise UsageError("QBOHM_THREADS must be >= 1")
    return n


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def rows_to_json(rows: Sequence[dict], columns: Sequence[str], meta: dict) -> str:
    def clean(v):
        if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
            return int(v)
        return float(v)

    doc = {"meta": meta, "columns": list(columns),
           "rows": [{c: clean(r[c]) for c in columns} for r in rows]}
    return json.dumps(doc, indent=2) + "\n"


def _write_text(path: str, text: str):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path!r}: {exc.strerror}") from exc


def _emit_table(cfg: RunConfig, rows, columns):
    if not cfg.output:
        return
    if cfg.format == "json":
        meta = {k: v for k, v in asdict(cfg).items() if k not in ("output", "svg")}
        _write_text(cfg.output, rows_to_json(rows, columns, meta))
    else:
        _write_text(cfg.output, rows_to_csv(rows, columns))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

WELL_COLUMNS = ("gamma_L", "n", "E_n", "L_q", "k_qn", "mean_x", "mean_x2", "var_x",
                "mean_p2", "I_q", "I_pdm", "I_F")


def _spec(cfg: RunConfig) -> well.WellSpec:
    return well.WellSpec.from_gammaL(cfg.gammaL, L=cfg.L, hbar=cfg.hbar, m0=cfg.m0)


def cmd_well(cfg: RunConfig, out) -> None:
    spec = _spec(cfg)
    rows = []
    for n in cfg.n:
        mo = well.moments(spec, n)
        fv = well.fisher_values(spec, n)
        rows.append(dict(gamma_L=cfg.gammaL, n=n, E_n=well.energy(spec, n), L_q=spec.L_q,
                         k_qn=spec.k(n), mean_x=mo.mean_x, mean_x2=mo.mean_x2, var_x=mo.var_x,
                         mean_p2=mo.mean_p2, I_q=fv.I_q, I_pdm=fv.I_pdm, I_F=fv.I_F))
        print(f"n={n} gammaL={cfg.gammaL:g} E={rows[-1]['E_n']:.12g} <x>={mo.mean_x:.12g} "
              f"var_x={mo.var_x:.6g} I_q={fv.I_q:.10g}", file=out)
    _emit_table(cfg, rows, WELL_COLUMNS)


SOLVE_COLUMNS = ("gamma_L", "n", "E_numeric", "E_exact", "rel_err")


def cmd_solve(cfg: RunConfig, out) -> None:
    spec = _spec(cfg)
    n_states = max(cfg.n)
    solver = solve_pct if cfg.route == "pct" else solve_direct
    sol = solver(PotentialSpec.infinite_well(cfg.L), spec.grid(cfg.points), n_states,
                 hbar=cfg.hbar, m0=cfg.m0)
    rows = []
    for n in range(1, n_states + 1):
        e, ex = float(sol.energies[n - 1]), well.energy(spec, n)
        rows.append(dict(gamma_L=cfg.gammaL, n=n, E_numeric=e, E_exact=ex, rel_err=abs(e - ex) / ex))
        print(f"n={n} gammaL={cfg.gammaL:g} E={e:.12g} exact={ex:.12g} "
              f"rel_err={rows[-1]['rel_err']:.3e} route={cfg.route}", file=out)
    _emit_table(cfg, rows, SOLVE_COLUMNS)


def _numbered(path: str, n: int) -> str:
    stem, ext = os.path.splitext(path)
    return f"{stem}_n{n}{ext}"


def cmd_bohm(cfg: RunConfig, out) -> None:
    spec = _spec(cfg)
    V = PotentialSpec.infinite_well(cfg.L)
    for n in cfg.n:
        psi, phi = well.sample_state(spec, n, cfg.points)
        snap = bohmian.snapshot(phi, cfg.hbar, cfg.m0)
        E = well.energy(spec, n)
        hj = bohmian.hamilton_jacobi_residual(phi, V, E, cfg.hbar, cfg.m0).values
        dec = snap.Q1.values + snap.Q2.values + snap.Q3.values - snap.Qq_total.values
        print(f"n={n} gammaL={cfg.gammaL:g} E={E:.12g} max|HJ|/E={np.nanmax(np.abs(hj)) / E:.3e} "
              f"max|Q1+Q2+Q3-Q_q|/E={np.nanmax(np.abs(dec)) / E:.3e} "
              f"masked={int(snap.node_mask.sum())}", file=out)
        if cfg.output:
            path = cfg.output if len(cfg.n) == 1 else _numbered(cfg.output, n)
            if cfg.format == "json":
                cols = {c: [] for c in bohmian.SNAPSHOT_COLUMNS}
                buf = io.StringIO()
                snap.write_csv(buf)
                lines = buf.getvalue().splitlines()[1:]
                for line in lines:
                    for c, v in zip(bohmian.SNAPSHOT_COLUMNS, line.split(",")):
                        cols[c].append(int(v) if c == "node_mask" else float(v))
                _write_text(path, json.dumps({"n": n, "gamma_L": cfg.gammaL, "columns": cols}) + "\n")
            else:
                buf = io.StringIO()
                snap.write_csv(buf)
                _write_text(path, buf.getvalue())


def cmd_fisher(cfg: RunConfig, out) -> None:
    spec = _spec(cfg)
    rows = []
    for n in cfg.n:
        psi, _ = well.sample_state(spec, n, cfg.points)
        rep = fisher.cramer_rao_check(psi, m0=cfg.m0, gamma_L=cfg.gammaL, n=n)
        rows.append(rep.as_row())
        print(f"n={n} gammaL={cfg.gammaL:g} I={rep.I_pdm:.10g} I_q={rep.I_q:.10g} I_F={rep.I_F:.10g} "
              f"I(dx)^2={rep.cr_pdm:.6g} margin_q={rep.margin_q:.3e} "
              f"identity_gap={rep.identity_gap:.3e}", file=out)
    _emit_table(cfg, rows, fisher.FISHER_COLUMNS)


def fig1_svg(rows: Sequence[dict], n_values: Sequence[int]) -> str:
    panels = []
    spec = (("log10_cr_pdm", "(a) I(Δx)²"),
            ("log10_cr_q", "(b) I_q(Δx)² − 2γ⟨x⟩"),
            ("log10_cr_std", "(c) I_F(Δx)²"))
    for col, title in spec:
        series = []
        for n in n_values:
            sel = [r for r in rows if r["n"] == n]
            series.append((f"n={n}", [r["gamma_L"] for r in sel], [r[col] for r in sel]))
        panels.append(dict(series=series, title=title, xlabel="γL", ylabel="log10", hline=0.0))
    return svgplot.figure(panels)


def cmd_fig1(cfg: RunConfig, out) -> None:
    grid = well.default_gammaL_values(cfg.gammaL_points, cfg.gammaL_min, cfg.gammaL_max)
    rows = well.figure1_sweep(grid, cfg.n, L=cfg.L, hbar=cfg.hbar, m0=cfg.m0, max_workers=_threads())
    for n in cfg.n:
        sel = [r for r in rows if r["n"] == n]
        worst = min(sel, key=lambda r: r["cr_pdm"])
        print(f"n={n} points={len(sel)} min I(dx)^2={worst['cr_pdm']:.6g} at gammaL={worst['gamma_L']:.4g} "
              f"min margin_q={min(r['margin_q'] for r in sel):.3e} "
              f"min I_F(dx)^2={min(r['cr_std'] for r in sel):.6g}", file=out)
    if cfg.output:
        if cfg.format == "svg":
            _write_text(cfg.output, fig1_svg(rows, cfg.n))
        else:
            _emit_table(cfg, rows, well.FIG1_COLUMNS)
    if cfg.svg:
        _write_text(cfg.svg, fig1_svg(rows, cfg.n))


PROPAGATE_COLUMNS = ("t", "q_norm", "mean_x")


def cmd_propagate(cfg: RunConfig, out) -> None:
    from .fisher import expectation_x

    spec = _spec(cfg)
    grid = spec.grid(cfg.points, "deformed_u")
    vals = sum(well.eigenfunction_phi(spec, n, grid.x) for n in cfg.n) / np.sqrt(len(cfg.n))
    phi0 = ComplexField(grid, vals.astype(complex), "phi_q")
    series = propagate(phi0, PotentialSpec.infinite_well(cfg.L), cfg.dt, cfg.steps,
                       cfg.hbar, cfg.m0, cfg.store_every)
    norms = np.array([f.norm() for f in series.frames])
    rows = [dict(t=t, q_norm=nv, mean_x=expectation_x(f, 1, "q"))
            for t, nv, f in zip(series.times, norms, series.frames)]
    msg = f"states={','.join(map(str, cfg.n))} gammaL={cfg.gammaL:g} steps={cfg.steps} " \
          f"norm_drift={np.max(np.abs(norms - norms[0])):.3e}"
    if len(series) >= 3:
        res = bohmian.continuity_residual(series, cfg.hbar, cfg.m0).values
        msg += f" continuity_max={np.max(res):.3e}"
    print(msg, file=out)
    _emit_table(cfg, rows, PROPAGATE_COLUMNS)


HANDLERS = {"well": cmd_well, "solve": cmd_solve, "bohm": cmd_bohm, "fisher": cmd_fisher,
            "fig1": cmd_fig1, "propagate": cmd_propagate}


def run(cfg: RunConfig, out=None) -> int:
    """Execute a validated configuration; returns the exit code."""
    out = sys.stdout if out is None else out
    try:
        cfg.validate()
        HANDLERS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"qbohm: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QBohmError, FloatingPointError) as exc:
        print(f"qbohm: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"qbohm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
    except UsageError as exc:
        print(f"qbohm: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qbohm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
