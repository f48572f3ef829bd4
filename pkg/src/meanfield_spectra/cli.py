"""Command-line front end.

    meanfield-spectra potential --n 1 --beta 3 --h 0.5
    meanfield-spectra gap --method chain --beta 2 --h 0 --sweep 200:2:5
    meanfield-spectra figures --figure sop --grid 1.1:5:40
    meanfield-spectra verify --quick

Exit status: 0 success, 1 failed verification, 2 invalid arguments or
config, 3 the requested method does not apply to the model.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import acceptance
from .funcineq import INEQ_CSV_COLUMNS, ineq_constants, sandwich_check
from .io import TableWriter, dumps_canonical
from .ising import GAP_CSV_COLUMNS, GapEstimate, chain_gap, full_gap, gap_row, trial_rayleigh
from .measures import magnetization_gap_bound
from .potential import (
    ModelParams,
    RegimeError,
    critical_points,
    profile_d2V,
    profile_dV,
    profile_V,
)
from .schrodinger import ConvergenceError, s1_figure, solve_renormalized, sop_figure

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_REGIME = 0, 1, 2, 3
TOL_ENV = "MEANFIELD_SPECTRA_TOL"
DEFAULT_TOLERANCES = {"schrodinger": 1e-6, "polynomial": 1e-8, "sandwich": 0.05}
METHODS = ("full", "chain", "schrodinger", "trial", "bound")
COMMANDS = ("potential", "criticalpoints", "gap", "figures", "ineq", "verify")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Sweep:
    start: float
    factor: float
    count: int

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"sweep {text!r}: expected start:factor:count")
        try:
            start, factor, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"sweep {text!r}: {exc}") from None
        if start <= 0 or factor <= 1 or count < 1:
            raise ConfigError(f"sweep {text!r}: need start > 0, factor > 1, count >= 1")
        return cls(start, factor, count)

    def values(self) -> list[int]:
        Ns = [int(round(self.start * self.factor ** i)) for i in range(self.count)]
        if len(set(Ns)) != len(Ns):
            raise ConfigError("sweep produces repeated N after rounding")
        return Ns

    def __str__(self):
        return f"{self.start:g}:{self.factor:g}:{self.count}"


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int = 1
    beta: float = 2.0
    h: float = 0.0
    N: tuple = ()
    sweep: str | None = None
    ell: int = 0
    method: str = "chain"
    figure: str = "sop"
    grid: str | None = None
    jobs: int = 1
    out: str | None = None
    format: str = "csv"
    quick: bool = False
    only: tuple = ()
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: expected csv or json, got {self.format!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method: expected one of {METHODS}, got {self.method!r}")
        if self.jobs < 1:
            raise ConfigError("jobs: must be >= 1")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"tolerances: unknown keys {sorted(unknown)}")

    @property
    def params(self) -> ModelParams:
        try:
            return ModelParams(self.n, self.beta, self.h)
        except ValueError as exc:
            raise ConfigError(f"model: {exc}") from None

    def n_values(self) -> list[int]:
        if self.sweep:
            return Sweep.parse(self.sweep).values()
        return [int(v) for v in self.N]

    def canonical(self) -> dict:
        d = dataclasses.asdict(self)
        d["N"] = list(self.N)
        d["only"] = list(self.only)
        return d

    @classmethod
    def from_canonical(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        d = dict(d)
        d["N"] = tuple(d.get("N", ()))
        d["only"] = tuple(d.get("only", ()))
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(d.get("tolerances") or {})
        d["tolerances"] = tol
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def tolerances_from_env(environ=os.environ) -> dict:
    """Defaults overridden by ``MEANFIELD_SPECTRA_TOL``.

    Accepts a JSON object, ``key=value`` pairs separated by commas, or a bare
    number (applied to the Schroedinger solver tolerance).
    """
    tol = dict(DEFAULT_TOLERANCES)
    raw = environ.get(TOL_ENV, "").strip()
    if not raw:
        return tol
    try:
        if raw.startswith("{"):
            upd = json.loads(raw)
        elif "=" in raw:
            upd = {k.strip(): float(v) for k, v in (kv.split("=", 1) for kv in raw.split(","))}
        else:
            upd = {"schrodinger": float(raw)}
    except ValueError as exc:
        raise ConfigError(f"{TOL_ENV}: {exc}") from None
    unknown = set(upd) - set(tol)
    if unknown:
        raise ConfigError(f"{TOL_ENV}: unknown keys {sorted(unknown)}")
    for k, v in upd.items():
        if not (isinstance(v, (int, float)) and v > 0):
            raise ConfigError(f"{TOL_ENV}: {k} must be a positive number")
        tol[k] = float(v)
    return tol


# -- argument parsing --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="meanfield-spectra",
                                 description="Spectral gaps of mean-field O(n) spin models.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, model=True, sweep=False):
        if model:
            p.add_argument("--n", type=int, default=1, help="number of spin components")
            p.add_argument("--beta", type=float, default=2.0, help="inverse temperature")
            p.add_argument("--h", type=float, default=0.0, help="field strength")
        if sweep:
            g = p.add_mutually_exclusive_group()
            g.add_argument("--N", type=int, nargs="+", default=(), help="system sizes")
            g.add_argument("--sweep", help="geometric sizes start:factor:count")
            p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--config", help="JSON file with any of the options above")

    common(sub.add_parser("potential", help="profile table and critical points"))
    common(sub.add_parser("criticalpoints", help="critical points of V_n"))
    g = sub.add_parser("gap", help="spectral gap series")
    common(g, sweep=True)
    g.add_argument("--method", choices=METHODS, default="chain")
    g.add_argument("--l", dest="ell", type=int, default=0, help="angular sector (n >= 2)")
    f = sub.add_parser("figures", help="eigenvalue curves of the limit operators")
    common(f, model=False)
    f.add_argument("--figure", choices=("sop", "s1"), default="sop")
    f.add_argument("--grid", help="start:stop:count (linear)")
    q = sub.add_parser("ineq", help="Muckenhoupt / Bobkov-Goetze constants")
    common(q, sweep=True)
    v = sub.add_parser("verify", help="run the acceptance suite")
    common(v, model=False)
    v.set_defaults(format="json")
    v.add_argument("--quick", action="store_true", help=f"skip sweeps with N > {acceptance.QUICK_MAX_N}")
    v.add_argument("--only", type=int, nargs="+", default=(), help="criterion numbers")
    return ap


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def config_from_args(argv=None, environ=os.environ) -> RunConfig:
    ns = build_parser().parse_args(argv)
    d = {k: v for k, v in vars(ns).items() if k != "config"}
    if isinstance(d.get("N"), list):
        d["N"] = tuple(d["N"])
    if isinstance(d.get("only"), list):
        d["only"] = tuple(d["only"])
    d["tolerances"] = tolerances_from_env(environ)
    if ns.config:
        filed = _load_config_file(ns.config)
        if filed.get("command", ns.command) != ns.command:
            raise ConfigError(f"{ns.config}: command {filed['command']!r} does not match {ns.command!r}")
        d.update(filed)
    return RunConfig.from_canonical(d)


# -- commands -----------------------------------------------------------------------------

def _open_out(cfg: RunConfig):
    return open(cfg.out, "w") if cfg.out else sys.stdout


def _writer(cfg, stream, columns):
    return TableWriter(stream, columns, cfg.format, {"config": cfg.canonical()})


def _cp_dict(cp):
    return {"location": np.atleast_1d(cp.location).tolist(), "coordinate": cp.coordinate,
            "kind": cp.kind, "value": cp.value, "hess_eigs": np.atleast_1d(cp.hess_eigs).tolist(),
            "degenerate": bool(cp.degenerate)}


def cmd_potential(cfg: RunConfig, stream) -> int:
    p = cfg.params
    cps = critical_points(p)
    reach = max([1.5] + [1.3 * abs(cp.coordinate) for cp in cps])
    radial = p.n >= 2 and p.h_norm == 0.0
    t = np.linspace(0.0 if radial else -reach, reach, 401)
    w = _writer(cfg, stream, ("phi", "V", "dV", "d2V"))
    for row in zip(t, profile_V(p, t), profile_dV(p, t), profile_d2V(p, t)):
        w.write(row)
    w.add_section("critical_points", [_cp_dict(cp) for cp in cps])
    w.close()
    return EXIT_OK


def cmd_criticalpoints(cfg: RunConfig, stream) -> int:
    w = _writer(cfg, stream, ("coordinate", "kind", "value", "degenerate", "hess_eigs"))
    for cp in critical_points(cfg.params):
        w.write((cp.coordinate, cp.kind, cp.value, bool(cp.degenerate),
                 dumps_canonical(np.atleast_1d(cp.hess_eigs).tolist())))
    w.close()
    return EXIT_OK


def gap_point(method: str, n: int, beta: float, h: float, N: int, ell: int = 0,
              tol: float = 1e-6) -> GapEstimate:
    """One gap estimate; raises :class:`RegimeError` when the method does not apply."""
    p = ModelParams(n, beta, h)
    if method in ("full", "chain", "trial") and n != 1:
        raise RegimeError(f"method {method!r} is defined for the Ising case n = 1")
    if method == "full":
        return full_gap(N, beta, h)
    if method == "chain":
        return chain_gap(N, beta, h)
    if method == "trial":
        return trial_rayleigh(N, beta, h)
    if method == "bound":
        return GapEstimate(N, beta, h, "bound", float(np.log(magnetization_gap_bound(p, N))))
    res = solve_renormalized(p, N, ell=ell, tol=tol)
    if ell == 0 or n == 1:
        lg = res.log_gap if res.log_gap is not None else float(np.log(res.eigenvalues[1]))
    else:
        lg = float(np.log(res.eigenvalues[0]))
    return GapEstimate(N, beta, h, "schrodinger", float(lg), f"l={ell}")


def _gap_task(args):
    return gap_point(*args)


def _ineq_task(args):
    N, n, beta, h, slack = args
    p = ModelParams(n, beta, h)
    c = ineq_constants(N, p)
    rep = sandwich_check(N, p, tol=slack, consts=c)
    return (N, beta, h, c.B0, c.B1, c.D0, c.D1, rep.c, rep.passed)


def _run_sweep(cfg, task, items, writer):
    """Evaluate ``task`` on ``items`` (in a pool when ``jobs > 1``), writing rows in N-order."""
    if cfg.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for row in pool.map(task, items):
                writer.write(row)
    else:
        for it in items:
            writer.write(task(it))


def _gap_row_task(args):
    return gap_row(_gap_task(args))


def cmd_gap(cfg: RunConfig, stream) -> int:
    Ns = cfg.n_values()
    if not Ns:
        raise ConfigError("gap: give --N or --sweep")
    cfg.params  # validate before any work
    items = [(cfg.method, cfg.n, cfg.beta, cfg.h, N, cfg.ell, cfg.tolerances["schrodinger"])
             for N in Ns]
    w = _writer(cfg, stream, GAP_CSV_COLUMNS)
    _run_sweep(cfg, _gap_row_task, items, w)
    w.close()
    return EXIT_OK


def _parse_grid(text: str | None, default):
    if text is None:
        return default
    parts = text.split(":")
    try:
        a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise ConfigError(f"grid {text!r}: expected start:stop:count") from None
    if k < 1:
        raise ConfigError(f"grid {text!r}: empty grid")
    return np.linspace(a, b, k)


def cmd_figures(cfg: RunConfig, stream) -> int:
    if cfg.figure == "sop":
        grid = _parse_grid(cfg.grid, np.linspace(1.1, 5.0, 40))
        rows, name = sop_figure(grid), "beta"
    else:
        grid = _parse_grid(cfg.grid, np.linspace(1.0, 100.0, 34))
        rows, name = s1_figure(grid), "lambda"
    w = _writer(cfg, stream, (name,) + tuple(f"e{i}" for i in range(1, len(rows[0]))))
    for r in rows:
        w.write(r)
    w.close()
    return EXIT_OK


def cmd_ineq(cfg: RunConfig, stream) -> int:
    Ns = cfg.n_values()
    if not Ns:
        raise ConfigError("ineq: give --N or --sweep")
    if cfg.n != 1:
        raise RegimeError("functional-inequality constants are one-dimensional (n = 1)")
    cfg.params
    items = [(N, cfg.n, cfg.beta, cfg.h, cfg.tolerances["sandwich"]) for N in Ns]
    w = _writer(cfg, stream, INEQ_CSV_COLUMNS)
    _run_sweep(cfg, _ineq_task, items, w)
    w.close()
    return EXIT_OK


def cmd_verify(cfg: RunConfig, stream) -> int:
    echo = lambda line: print(line, file=sys.stderr, flush=True)  # noqa: E731
    results = acceptance.run_all(quick=cfg.quick, only=list(cfg.only) or None, echo=echo)
    failed = [r.number for r in results if r.passed is False]
    if cfg.format == "json":
        doc = {"passed": not failed, "failed": failed,
               "results": [{"criterion": r.number, "title": r.title, "pass": r.passed,
                            "details": r.details} for r in results]}
        stream.write(json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n")
    else:
        w = _writer(cfg, stream, ("criterion", "title", "pass"))
        for r in results:
            w.write((r.number, r.title, "skip" if r.passed is None else bool(r.passed)))
        w.close()
    return EXIT_FAIL if failed else EXIT_OK


DISPATCH = {"potential": cmd_potential, "criticalpoints": cmd_criticalpoints, "gap": cmd_gap,
            "figures": cmd_figures, "ineq": cmd_ineq, "verify": cmd_verify}


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        print(f"meanfield-spectra: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse already printed the message
        return EXIT_USAGE if exc.code else EXIT_OK
    stream = None
    try:
        stream = _open_out(cfg)
        return DISPATCH[cfg.command](cfg, stream)
    except ConfigError as exc:
        print(f"meanfield-spectra: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RegimeError, ConvergenceError, ValueError) as exc:
        print(f"meanfield-spectra: {exc}", file=sys.stderr)
        return EXIT_REGIME
    finally:
        if stream is not None and stream is not sys.stdout:
            stream.close()


if __name__ == "__main__":
    sys.exit(main())
