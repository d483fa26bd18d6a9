"""Command-line driver: ``onedft {solve,family,table1}``.

Configuration comes from flags and optionally a ``key=value`` file passed with
``--config``; flags win.  All numbers are written with 17 significant digits
so repeated runs give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, NoConvergence, OneDFTError
from .experiments import SOLVERS, energy_check, family_checks, identity_check, slope_field, solve
from .functionals import PhysicalConstants, Potential
from .grid import Grid1D, make_grid
from .scf import ScfParams
from .systems import (
    IDENTITY_POINTS,
    AnalyticSystem,
    analytic_density,
    analytic_ground_energy,
    analytic_potential,
    natural_grid,
    system_from_name,
)

log = logging.getLogger("onedft")

EXIT_OK, EXIT_CONFIG, EXIT_NOCONV, EXIT_VERIFY = 0, 2, 3, 4
SYSTEMS = ("box", "oscillator", "delta", "file")
_SCF_KEYS = ("alpha", "tol_density", "tol_lambda", "max_iter", "method", "c_step")
DEFAULT_FILE_POINTS = 2001


def _parse_n_list(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    try:
        ns = tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad family index list {text!r}") from None
    if not ns or any(not (v > 0 and np.isfinite(v)) for v in ns):
        raise ConfigError(f"family indices must be positive numbers, got {text!r}")
    return ns


@dataclass(frozen=True)
class RunConfig:
    command: str = "solve"
    system: str | None = None
    L: float = 1.0
    omega: float = 1.0
    g: float = 1.0
    potential_file: str | None = None
    xmin: float | None = None
    xmax: float | None = None
    grid_points: int | None = None
    identity_points: int | None = None
    hbar: float = 1.0
    mass: float = 1.0
    solver: str = "scf"
    n: tuple[float, ...] | None = None
    out: str = "."
    seed: int = 42
    jobs: int | None = None
    alpha: float | None = None
    tol_density: float | None = None
    tol_lambda: float | None = None
    max_iter: int | None = None
    method: str | None = None
    c_step: float | None = None

    def validate(self) -> "RunConfig":
        if self.system is not None and self.system not in SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.system == "file" and not self.potential_file:
            raise ConfigError("--system file needs --potential-file")
        if self.system == "file" and self.command == "table1":
            raise ConfigError("table1 runs the built-in systems only")
        for k in ("L", "omega", "g", "hbar", "mass"):
            if not getattr(self, k) > 0:
                raise ConfigError(f"{k} must be positive")
        for k in ("grid_points", "identity_points"):
            v = getattr(self, k)
            if v is not None and v < 3:
                raise ConfigError(f"{k} must be at least 3")
        if (self.xmin is None) != (self.xmax is None):
            raise ConfigError("give both --xmin and --xmax or neither")
        if self.xmin is not None and not self.xmin < self.xmax:
            raise ConfigError("xmin must be below xmax")
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        try:
            self.scf_params()
        except ValueError as e:
            raise ConfigError(str(e)) from None
        return self

    @property
    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(self.hbar, self.mass)

    def scf_params(self) -> ScfParams:
        over = {k: getattr(self, k) for k in _SCF_KEYS if getattr(self, k) is not None}
        return ScfParams(**over)

    @property
    def family_indices(self) -> tuple[float, ...]:
        if self.n is not None:
            return self.n
        return (1.0, 2.0, 4.0) if self.command == "table1" else (1.0, 2.0, 4.0, 8.0)

    @property
    def workers(self) -> int:
        return self.jobs or os.cpu_count() or 1


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value: str):
    t = _TYPES[key]
    if key == "n":
        return _parse_n_list(value)
    try:
        if "int" in t:
            return int(value)
        if "float" in t:
            return float(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    return value


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Unknown keys are errors."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES or key == "command":
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--system", choices=SYSTEMS)
    common.add_argument("--L", type=float, help="box length")
    common.add_argument("--omega", type=float, help="oscillator frequency")
    common.add_argument("--g", type=float, help="delta strength")
    common.add_argument("--potential-file", help="two-column CSV (x, V) for --system file")
    common.add_argument("--xmin", type=float)
    common.add_argument("--xmax", type=float)
    common.add_argument("--grid-points", type=int)
    common.add_argument("--identity-points", type=int, help="grid for the V_n node comparison (table1)")
    common.add_argument("--hbar", type=float)
    common.add_argument("--mass", type=float)
    common.add_argument("--solver", choices=SOLVERS)
    common.add_argument("--n", type=_parse_n_list, help="comma-separated family indices")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--alpha", type=float, help="SCF mixing fraction")
    common.add_argument("--tol-density", type=float)
    common.add_argument("--tol-lambda", type=float)
    common.add_argument("--max-iter", type=int)
    common.add_argument("--method", choices=("pcg", "flow"), help="minimizer variant")
    common.add_argument("--c-step", type=float, help="gradient-flow step factor")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="onedft", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="ground state of one system")
    sub.add_parser("family", parents=[common], help="build and verify V_n")
    sub.add_parser("table1", parents=[common], help="check the three reference systems")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if ns.config:
        values.update(read_config_file(ns.config))
    for key in _TYPES:
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    try:
        return RunConfig(**values).validate()
    except TypeError as e:
        raise ConfigError(str(e)) from None


# ---- system setup -------------------------------------------------------------


def _grid_for(cfg: RunConfig, s: AnalyticSystem | None, default_points: int | None = None) -> Grid1D:
    if cfg.xmin is not None:
        return make_grid(cfg.xmin, cfg.xmax, cfg.grid_points or default_points or DEFAULT_FILE_POINTS)
    if s is None:
        raise ConfigError("tabulated potentials need a grid")
    return natural_grid(s, cfg.grid_points or default_points)


def _analytic(cfg: RunConfig, name: str) -> AnalyticSystem:
    params = {"box": {"L": cfg.L}, "oscillator": {"omega": cfg.omega}, "delta": {"g": cfg.g}}[name]
    return system_from_name(name, cfg.constants, **params)


def load_potential_file(path, grid: Grid1D | None) -> Potential:
    """Tabulated ``(x, V)`` resampled by linear interpolation; ``inf`` marks walls."""
    try:
        data = np.genfromtxt(path, delimiter=",", dtype=float)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read potential file: {e}") from None
    data = np.atleast_2d(data)
    if data.shape[1] != 2:
        raise ConfigError("potential file must have two columns (x, V)")
    data = data[~np.isnan(data).any(axis=1)]  # header row parses as NaN
    if len(data) < 2:
        raise ConfigError("potential file needs at least two rows")
    x, v = data[:, 0], data[:, 1]
    order = np.argsort(x, kind="stable")
    x, v = x[order], v[order]
    if np.any(np.diff(x) <= 0):
        raise ConfigError("potential file has repeated x values")
    if grid is None:
        grid = make_grid(float(x[0]), float(x[-1]), DEFAULT_FILE_POINTS)
    gx = grid.x
    if gx[0] < x[0] - 1e-12 * abs(x[0]) or gx[-1] > x[-1] + 1e-12 * abs(x[-1]):
        raise ConfigError("run grid extends beyond the tabulated potential")
    with np.errstate(invalid="ignore"):
        vals = np.interp(gx, x, v)
    walls = ~np.isfinite(vals)
    return Potential.from_values(grid, np.where(walls, 0.0, vals), walls=walls)


def _setup(cfg: RunConfig):
    """Return (system or None, grid, V)."""
    name = cfg.system or "oscillator"
    if name == "file":
        grid = make_grid(cfg.xmin, cfg.xmax, cfg.grid_points or DEFAULT_FILE_POINTS) if cfg.xmin is not None else None
        if grid is None and cfg.grid_points:
            V0 = load_potential_file(cfg.potential_file, None)
            grid = make_grid(V0.grid.x_min, V0.grid.x_max, cfg.grid_points)
        V = load_potential_file(cfg.potential_file, grid)
        return None, V.grid, V
    s = _analytic(cfg, name)
    grid = _grid_for(cfg, s)
    return s, grid, analytic_potential(s, grid)


# ---- output -------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _finite_or_none(v):
    return v if v is None or np.isfinite(v) else None


# ---- commands -----------------------------------------------------------------


def cmd_solve(cfg: RunConfig) -> int:
    s, grid, V = _setup(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        sol = solve(V, cfg.solver, cfg.scf_params(), cfg.constants)
    except NoConvergence as e:
        log.error("%s", e)
        write_json(out / "report.json", {"converged": False, "error": str(e), "solver": cfg.solver})
        return EXIT_NOCONV
    rho = sol.density
    write_csv(
        out / "density.csv",
        ["x", "rho", "sqrt_rho", "y"],
        zip(grid.x, rho.values, np.sqrt(rho.values), slope_field(rho)),
    )
    report = sol.as_dict()
    report["residual_history"] = [_finite_or_none(r) for r in report["residual_history"]]
    report.update(
        {
            "system": cfg.system or "oscillator",
            "grid": {"x_min": grid.x_min, "x_max": grid.x_max, "n_points": grid.n_points},
            "hbar": cfg.hbar,
            "mass": cfg.mass,
            "seed": cfg.seed,
            "final_residual": report["residual_history"][-1] if report["residual_history"] else None,
        }
    )
    if s is not None:
        report["E0_analytic"] = analytic_ground_energy(s)
    write_json(out / "report.json", report)
    print(f"{sol.lam:.9g}")
    return EXIT_OK if sol.converged else EXIT_NOCONV


def cmd_family(cfg: RunConfig) -> int:
    s, grid, V = _setup(cfg)
    if s is not None:
        rho, E0 = analytic_density(s, grid), analytic_ground_energy(s)
    else:
        sol = solve(V, cfg.solver, cfg.scf_params(), cfg.constants)
        if not sol.converged:
            log.error("reference solve did not converge")
            return EXIT_NOCONV
        rho, E0 = sol.density, sol.lam
    results = family_checks(cfg.family_indices, rho, V, E0, cfg.constants, cfg.workers)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for rep, Vn in results:
        vals = np.where(Vn.walls, np.inf, Vn.values)
        write_csv(out / f"potential_n{rep.n:g}.csv", ["x", "V_n"], zip(grid.x, vals))
        r = rep.as_row()
        rows.append([f"{rep.n:g}", r["E_expected"], r["E_num"], r["rel_err"], r["overlap"], r["pass"]])
        print(f"n={rep.n:g}  E_num={rep.E_num:.9g}  expected={rep.E_expected:.9g}  {'pass' if rep.passed else 'FAIL'}")
    write_csv(out / "family_report.csv", ["n", "E_expected", "E_num", "rel_err", "overlap", "pass"], rows)
    return EXIT_OK if all(rep.passed for rep, _ in results) else EXIT_VERIFY


def table1_rows(cfg: RunConfig) -> list:
    names = ("box", "oscillator", "delta") if cfg.system is None else (cfg.system,)
    systems = [_analytic(cfg, nm) for nm in names]

    def energy(s):
        row, _ = energy_check(s, _grid_for(cfg, s), cfg.solver, cfg.scf_params())
        return row

    def ident(args):
        s, n = args
        pts = cfg.identity_points or IDENTITY_POINTS[s.name]
        return identity_check(s, n, natural_grid(s, pts))

    with ThreadPoolExecutor(cfg.workers) as pool:
        e_rows = list(pool.map(energy, systems))
        i_rows = list(pool.map(ident, [(s, n) for s in systems for n in cfg.family_indices]))
    return e_rows + i_rows


def cmd_table1(cfg: RunConfig) -> int:
    rows = table1_rows(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    header = ["system", "quantity", "analytic", "numerical", "rel_err", "tolerance", "pass"]
    write_csv(out / "table1_check.csv", header, [[r.as_row()[k] for k in header] for r in rows])
    for r in rows:
        print(f"{r.system:<11}{r.quantity:<32}rel_err={r.rel_err:.3e}  {'pass' if r.passed else 'FAIL'}")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VERIFY


COMMANDS = {"solve": cmd_solve, "family": cmd_family, "table1": cmd_table1}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except NoConvergence as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOCONV
    except (OneDFTError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
