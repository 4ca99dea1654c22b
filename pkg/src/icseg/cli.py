"""Command-line front end: ``run``, ``bench``, ``validate`` and ``gen``.

Config files are flat ``key = value`` text (``#`` starts a comment);
command-line flags override file values. Every run writes the fully
resolved config next to its results.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import problems
from .solver import (CONVERGED, EXACT, MAX_ITER, ParameterError, SolverParams, Trajectory,
                     admissible_delta_interval, delta_lower_bound, solve, solve_egm,
                     validate_params)

log = logging.getLogger("icseg")

ALGORITHMS = ("icseg", "sgeg_plain", "egm")
FAMILIES = ("nash_cournot", "skew", "volterra", "strongly_pm")
TRAJECTORY_HEADER = ["n", "E_n", "lambda_n", "elapsed_s"]
EXTRA_HEADER = ["residual", "dw", "dz"]
SUMMARY_HEADER = ["algorithm", "problem", "dimension", "iterations", "final_E", "wall_s", "status"]

EXIT_OK, EXIT_ERROR, EXIT_MAX_ITER = 0, 1, 2

# solver parameters reported for each family's experiment
FAMILY_DEFAULTS = {
    "nash_cournot": dict(m=50, alpha=0.1, delta=0.9, mu=1e-5, lambda0=0.1),
    "skew": dict(m=500, alpha=0.1, delta=0.5, mu=1e-5, lambda0=0.1),
    "volterra": dict(n_grid=500, case="I", alpha=0.1, delta=0.95, mu=1e-5, lambda0=0.001),
    "strongly_pm": dict(m=50, beta=1.0, alpha=0.0, delta=0.5, mu=0.5, lambda0=0.5),
}
BENCH_GRID = {
    "nash_cournot": [50, 100, 200, 300],
    "skew": [500, 1000, 2000, 3000],
    "volterra": list(problems.VOLTERRA_CASES),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: str = "skew"
    m: Optional[int] = None
    n_grid: Optional[int] = None
    case: Optional[str] = None
    metric: str = "euclidean"
    beta: Optional[float] = None
    seed: int = 0
    instance: Optional[str] = None
    algo: str = "icseg"
    alpha: Optional[float] = None
    delta: Optional[float] = None
    mu: Optional[float] = None
    lambda0: Optional[float] = None
    max_iter: int = 5001
    eps: float = 1e-6
    out: str = "results"
    all_residuals: bool = False

    def resolved(self) -> "RunConfig":
        """Fill unset fields from the family defaults and check every value."""
        if self.problem not in FAMILIES:
            raise ConfigError(f"problem: unknown family {self.problem!r}; choose from {FAMILIES}")
        if self.algo not in ALGORITHMS:
            raise ConfigError(f"algo: unknown algorithm {self.algo!r}; choose from {ALGORITHMS}")
        cfg = replace(self)
        for k, v in FAMILY_DEFAULTS[self.problem].items():
            if getattr(cfg, k) is None:
                setattr(cfg, k, v)
        if cfg.algo == "sgeg_plain":
            cfg.alpha, cfg.delta = 0.0, 0.0
        if not 0 <= cfg.seed < 2**64:
            raise ConfigError(f"seed: must be an unsigned 64-bit integer, got {cfg.seed}")
        if cfg.algo != "egm":
            try:
                validate_params(cfg.solver_params(), allow_plain=cfg.algo == "sgeg_plain")
            except ParameterError as exc:
                raise ConfigError(f"solver parameters: {exc}") from exc
        elif not (cfg.lambda0 > 0 and cfg.max_iter >= 1 and cfg.eps > 0):
            raise ConfigError("lambda0, max_iter and eps must be positive for egm")
        return cfg

    def solver_params(self) -> SolverParams:
        return SolverParams(alpha=self.alpha, delta=self.delta, mu=self.mu,
                            lambda0=self.lambda0, max_iter=self.max_iter, eps_stop=self.eps)

    def build_instance(self) -> problems.ProblemInstance:
        if self.instance:
            return problems.load_instance(self.instance)
        if self.problem == "volterra":
            return problems.gen_volterra(self.n_grid, self.case, self.metric, self.seed)
        if self.problem == "strongly_pm":
            return problems.gen_strongly_pseudomonotone(self.m, self.beta, self.seed)
        return problems.generate(self.problem, m=self.m, rng_seed=self.seed)

    def dump(self) -> str:
        lines = []
        for fld in fields(self):
            v = getattr(self, fld.name)
            if v is None:
                continue
            lines.append(f"{fld.name} = {v!r}" if isinstance(v, float) else f"{fld.name} = {v}")
        return "\n".join(lines) + "\n"


def _convert(name: str, raw: str):
    fld = {f.name: f for f in fields(RunConfig)}.get(name)
    if fld is None:
        raise ConfigError(f"{name}: unknown config key")
    kind = str(fld.type)
    try:
        if "bool" in kind:
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {kind}") from None
    return raw.strip()


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        values[key] = _convert(key, raw)
    return values


def fmt(x: float) -> str:
    """17 significant digits; round-trips through ``float`` exactly."""
    return format(x, ".17g")


# --- CSV --------------------------------------------------------------------

@dataclass
class ResultRow:
    algorithm: str
    problem: str
    dimension: str
    iterations: int
    final_E: float
    wall_s: float
    status: str

    def cells(self) -> list[str]:
        return [self.algorithm, self.problem, self.dimension, str(self.iterations),
                fmt(self.final_E), fmt(self.wall_s), self.status]

    @classmethod
    def from_cells(cls, cells: Sequence[str]) -> "ResultRow":
        a, p, d, it, e, w, s = cells
        return cls(a, p, d, int(it), float(e), float(w), s)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def trajectory_rows(traj: Trajectory, extra: bool = False) -> list[list[str]]:
    out = []
    for r in traj.records:
        row = [str(r.n), fmt(r.E), fmt(r.lam), fmt(r.elapsed)]
        if extra:
            row += [fmt(r.residual), fmt(r.dw), fmt(r.dz)]
        out.append(row)
    return out


def format_table(rows: Sequence[ResultRow]) -> str:
    """Aligned plain-text table of bench results."""
    header = ["algorithm", "problem", "dim/case", "iter", "final E_n", "time (s)", "status"]
    body = [[r.algorithm, r.problem, r.dimension, str(r.iterations),
             "-" if math.isnan(r.final_E) else f"{r.final_E:.3e}",
             "-" if math.isnan(r.wall_s) else f"{r.wall_s:.4f}", r.status] for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.ljust(w) for c, w in zip(b, widths)) for b in body]
    return "\n".join(line.rstrip() for line in lines) + "\n"


# --- execution ------------------------------------------------------------------

def execute(cfg: RunConfig) -> tuple[np.ndarray, Trajectory, ResultRow]:
    """Solve one resolved config; no files are touched."""
    inst = cfg.build_instance()
    t0 = time.perf_counter()
    if cfg.algo == "egm":
        x0 = inst.C.project(inst.seeds[0])
        x, traj = solve_egm(inst.f, inst.C, cfg.lambda0, x0, cfg.max_iter, cfg.eps)
    else:
        x, traj = solve(inst.f, inst.C, cfg.solver_params(), *inst.seeds)
    wall = time.perf_counter() - t0
    dim = cfg.case if cfg.problem == "volterra" and not cfg.instance else str(inst.dim)
    row = ResultRow(cfg.algo, inst.family or cfg.problem, dim, traj.iterations,
                    traj.final_E, wall, traj.terminal)
    return x, traj, row


def exit_code_for(status: str) -> int:
    return {CONVERGED: EXIT_OK, EXACT: EXIT_OK, MAX_ITER: EXIT_MAX_ITER}.get(status, EXIT_ERROR)


def cmd_run(cfg: RunConfig) -> int:
    cfg = cfg.resolved()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.dump())
    _, traj, row = execute(cfg)
    header = TRAJECTORY_HEADER + (EXTRA_HEADER if cfg.all_residuals else [])
    write_csv(out / "trajectory.csv", header, trajectory_rows(traj, cfg.all_residuals))
    write_csv(out / "summary.csv", SUMMARY_HEADER, [row.cells()])
    print(f"{row.algorithm} on {row.problem} (dim {row.dimension}): {row.status} after "
          f"{row.iterations} iterations, E_n = {row.final_E:.3e}, {row.wall_s:.3f} s")
    return exit_code_for(row.status)


def _bench_cell(cfg: RunConfig) -> ResultRow:
    try:
        return execute(cfg.resolved())[2]
    except Exception as exc:  # one bad cell must not sink the grid
        log.warning("cell %s/%s failed: %s", cfg.algo, cfg.m or cfg.case, exc)
        dim = cfg.case if cfg.problem == "volterra" else str(cfg.m)
        return ResultRow(cfg.algo, cfg.problem, dim, 0, math.nan, math.nan,
                         f"error: {type(exc).__name__}")


def cmd_bench(suite: str, dims: Sequence | None = None, algorithms: Sequence[str] = ("icseg",),
              base: RunConfig | None = None, jobs: int = 1) -> list[ResultRow]:
    """Run the (algorithm x dimension) grid of one suite and write CSV + table."""
    if suite not in BENCH_GRID:
        raise ConfigError(f"suite: unknown suite {suite!r}; choose from {sorted(BENCH_GRID)}")
    base = base or RunConfig()
    dims = BENCH_GRID[suite] if dims is None else list(dims)
    cells = []
    for algo in algorithms:
        for d in dims:
            c = replace(base, problem=suite, algo=algo)
            if suite == "volterra":
                c.case = str(d)
            else:
                c.m = int(d)
            cells.append(c)
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_bench_cell, cells))
    else:
        rows = [_bench_cell(c) for c in cells]
    out = Path(base.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / f"bench_{suite}.csv", SUMMARY_HEADER, [r.cells() for r in rows])
    table = format_table(rows)
    (out / f"bench_{suite}.txt").write_text(table)
    print(table, end="")
    return rows


def cmd_validate(alpha: float, delta: float, mu: float, out=None) -> bool:
    out = out or sys.stdout
    p = SolverParams(alpha=alpha, delta=delta, mu=mu)
    try:
        validate_params(p)
        ok, reason = True, ""
    except ParameterError as exc:
        ok, reason = False, str(exc)
    print(f"alpha = {alpha:g}, delta = {delta:g}, mu = {mu:g}: "
          f"{'accepted' if ok else 'rejected'}", file=out)
    if reason:
        print(f"  reason: {reason}", file=out)
    if alpha == 0:
        print("  delta lower bound: 0 (alpha = 0)", file=out)
    elif 0 < alpha <= 0.5:
        print(f"  delta lower bound: {delta_lower_bound(alpha):.10g}", file=out)
    else:
        print("  delta lower bound: undefined (alpha must lie in [0, 1/2])", file=out)
    iv = admissible_delta_interval(alpha)
    print("  admissible delta: " + ("none" if iv is None else f"({iv[0]:.10g}, {iv[1]:g})"), file=out)
    return ok


# --- argument parsing ---------------------------------------------------------------

def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--problem", choices=FAMILIES)
    p.add_argument("--m", type=int)
    p.add_argument("--n-grid", dest="n_grid", type=int)
    p.add_argument("--case", choices=problems.VOLTERRA_CASES)
    p.add_argument("--metric", choices=("euclidean", "weighted"))
    p.add_argument("--beta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--instance", help="load a serialized instance instead of generating one")
    p.add_argument("--algo", choices=ALGORITHMS)
    p.add_argument("--alpha", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--lambda0", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icseg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one problem instance")
    _add_run_flags(run)
    run.add_argument("--all-residuals", dest="all_residuals", action="store_true", default=None,
                     help="also write ||w_n - z_n||, ||w_n - w_{n-1}||, ||z_n - z_{n-1}||")

    bench = sub.add_parser("bench", help="run a benchmark grid")
    bench.add_argument("suite", choices=sorted(BENCH_GRID))
    bench.add_argument("--dims", nargs="*", help="dimensions (or Volterra cases) to run")
    bench.add_argument("--algos", nargs="*", default=["icseg"], choices=ALGORITHMS)
    bench.add_argument("--jobs", type=int, default=1)
    _add_run_flags(bench)

    val = sub.add_parser("validate", help="check (alpha, delta, mu) against the parameter region")
    val.add_argument("--alpha", type=float, required=True)
    val.add_argument("--delta", type=float, required=True)
    val.add_argument("--mu", type=float, default=0.5)

    gen = sub.add_parser("gen", help="write a serialized problem instance")
    _add_run_flags(gen)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(parse_config_text(Path(args.config).read_text()))
    names = {f.name for f in fields(RunConfig)}
    for k, v in vars(args).items():
        if k in names and v is not None:
            values[k] = v
    return RunConfig(**values)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "validate":
            cmd_validate(args.alpha, args.delta, args.mu)
            return EXIT_OK
        cfg = config_from_args(args)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "bench":
            if args.jobs < 1:
                raise ConfigError("jobs: must be at least 1")
            cmd_bench(args.suite, args.dims, args.algos, base=cfg, jobs=args.jobs)
            return EXIT_OK
        if args.command == "gen":
            cfg = cfg.resolved()
            inst = cfg.build_instance()
            path = Path(cfg.out)
            if path.suffix != ".json":
                path.mkdir(parents=True, exist_ok=True)
                path = path / f"{inst.name}.json"
            problems.save_instance(inst, path)
            print(path)
            return EXIT_OK
    except (ConfigError, ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
