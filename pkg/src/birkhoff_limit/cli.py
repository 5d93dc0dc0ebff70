"""Command line harness: reproducible experiment runs with CSV or JSON output.

Exit status is 0 on success, 1 when a check fails or an invariant breaks,
and 2 on usage errors.  Result files carry no wall time or thread count, so
reruns with the same seed are byte-identical; timings go to a sidecar
``<name>.timing.json``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import subprocess
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _backend, experiments
from .limit_dist import COEFFS

EXPERIMENTS = ("finite-law", "limit-law", "compare", "verify")
FORMATS = ("csv", "json")

DEFAULTS = {
    "a": 0.5,
    "N": [10**3, 10**4, 10**5],
    "eps": [0.02],
    "samples": 10**4,
    "seed": 0,
    "out": ".",
    "format": "csv",
    "experiment": "compare",
    "threads": 1,
    "coeffs": "constant",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    a: float
    N_list: list[int]
    eps_list: list[float]
    samples: int
    seed: int
    out_dir: Path
    format: str = "csv"
    experiment: str = "compare"
    threads: int = 1
    coeffs: str = "constant"

    def validate(self) -> "RunConfig":
        if not self.N_list or not self.eps_list:
            raise ConfigError("N and eps lists must be nonempty")
        if not 0.0 < self.a < 1.0:
            raise ConfigError(f"a must lie in (0, 1), got {self.a}")
        if self.samples < 100:
            raise ConfigError(f"samples must be at least 100, got {self.samples}")
        if any(int(N) != N or N < 1 for N in self.N_list):
            raise ConfigError("every N must be a positive integer")
        if any(not 0.0 < e < 1.0 for e in self.eps_list):
            raise ConfigError("every eps must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if self.coeffs not in COEFFS:
            raise ConfigError(f"coeffs must be one of {COEFFS}")
        return self

    def meta(self) -> dict:
        """Config fields that determine results (no paths, no thread count)."""
        d = asdict(self)
        for k in ("out_dir", "threads"):
            d.pop(k)
        return d


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="birkhoff-limit",
        description="Monte Carlo laws of renormalized Birkhoff sums and of their lattice limit.")
    ap.add_argument("--experiment", choices=EXPERIMENTS)
    ap.add_argument("--a", type=float, help="exponent of the singularity, in (0, 1)")
    ap.add_argument("--N", type=int, action="append", help="time horizon (repeatable)")
    ap.add_argument("--eps", type=float, action="append", help="truncation level (repeatable)")
    ap.add_argument("--samples", type=int, help="Monte Carlo sample count (>= 100)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--format", choices=FORMATS)
    ap.add_argument("--threads", type=int, help="worker threads for the compiled kernels")
    ap.add_argument("--coeffs", choices=COEFFS,
                    help="coefficients of the limit kernel (default: constant)")
    ap.add_argument("--config", help="JSON file with the same keys as the flags")
    return ap


def load_config(argv=None) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    ns = build_parser().parse_args(argv)
    merged = dict(DEFAULTS)
    if ns.config:
        try:
            data = json.loads(Path(ns.config).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(data)
    for k in DEFAULTS:
        v = getattr(ns, k)
        if v is not None:
            merged[k] = v
    Ns = merged["N"] if isinstance(merged["N"], list) else [merged["N"]]
    es = merged["eps"] if isinstance(merged["eps"], list) else [merged["eps"]]
    try:
        cfg = RunConfig(float(merged["a"]), [int(N) for N in Ns], [float(e) for e in es],
                        int(merged["samples"]), int(merged["seed"]), Path(merged["out"]),
                        str(merged["format"]), str(merged["experiment"]),
                        int(merged["threads"]), str(merged["coeffs"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


# ---------------------------------------------------------------------------
# output


def git_describe() -> str:
    try:
        r = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                           cwd=Path(__file__).resolve().parent, capture_output=True,
                           text=True, timeout=10)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return r.stdout.strip() if r.returncode == 0 and r.stdout.strip() else "unknown"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


@dataclass
class Table:
    """Rows of one experiment, written as CSV or as JSON records."""

    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def csv(self, meta: dict) -> str:
        buf = io.StringIO()
        for k, v in meta.items():
            buf.write(f"# {k}: {json.dumps(_jsonable(v), sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows([_fmt(v) for v in row] for row in self.rows)
        return buf.getvalue()

    def json(self, meta: dict, experiment: str) -> str:
        recs = [dict(zip(self.columns, row)) for row in self.rows]
        doc = {"experiment": experiment, "meta": meta, "results": recs}
        return json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n"


def _token(v) -> str:
    return format(v, "g") if isinstance(v, float) else str(v)


def output_name(cfg: RunConfig, key: str) -> str:
    return f"{cfg.experiment}_{_token(cfg.a)}_{key}_{cfg.seed}.{cfg.format}"


def _write(cfg: RunConfig, key: str, table: Table, extra: dict, elapsed: float) -> Path:
    meta = {"config": cfg.meta(), "git": git_describe(), "backend": _backend.name, **extra}
    path = cfg.out_dir / output_name(cfg, key)
    text = table.csv(meta) if cfg.format == "csv" else table.json(meta, cfg.experiment)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    timing = {"file": path.name, "wall_seconds": elapsed, "threads": cfg.threads}
    with open(path.with_name(path.name + ".timing.json"), "w", newline="\n") as fh:
        fh.write(json.dumps(timing, indent=1) + "\n")
    return path


# ---------------------------------------------------------------------------
# experiments


def _values_table(v: np.ndarray) -> Table:
    return Table(["value"], [[float(x)] for x in v])


def run(cfg: RunConfig) -> int:
    """Run one experiment, write its files and return the exit status."""
    try:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {cfg.out_dir}: {exc}", file=sys.stderr)
        return 2
    status = 0
    th = cfg.threads
    if cfg.experiment == "finite-law":
        for N in cfg.N_list:
            t0 = time.perf_counter()
            v = experiments.finite_law(cfg.a, N, cfg.samples, cfg.seed, nthreads=th)
            if not experiments.finite(v):
                print(f"error: non-finite Birkhoff sums at N={N}", file=sys.stderr)
                status = 1
            _write(cfg, str(N), _values_table(v), {"N": N, "n": int(v.size)},
                   time.perf_counter() - t0)
    elif cfg.experiment == "limit-law":
        for e in cfg.eps_list:
            t0 = time.perf_counter()
            v = experiments.limit_law(cfg.a, e, cfg.samples, cfg.seed, coeffs=cfg.coeffs,
                                      nthreads=th)
            if not experiments.finite(v):
                status = 1
            _write(cfg, _token(e), _values_table(v), {"eps": e, "n": int(v.size)},
                   time.perf_counter() - t0)
    elif cfg.experiment == "compare":
        t0 = time.perf_counter()
        cells = experiments.compare(cfg.a, cfg.N_list, cfg.eps_list, cfg.samples, cfg.seed,
                                    coeffs=cfg.coeffs, nthreads=th)
        t = Table(["N", "eps", "ks", "n_finite", "n_limit", "ks_critical_95"],
                  [[c.N, c.eps, c.ks, c.n_finite, c.n_limit, c.critical] for c in cells])
        _write(cfg, grid_key(cfg), t, {}, time.perf_counter() - t0)
    else:
        t0 = time.perf_counter()
        checks = experiments.verify(cfg.a, cfg.N_list, cfg.eps_list, cfg.samples, cfg.seed,
                                    coeffs=cfg.coeffs, nthreads=th)
        t = Table(["check", "value", "threshold", "pass", "detail"],
                  [[c.name, c.value, c.threshold, c.passed,
                    json.dumps(_jsonable(c.detail), sort_keys=True)] for c in checks])
        _write(cfg, grid_key(cfg), t, {"failed": sum(not c.passed for c in checks)},
               time.perf_counter() - t0)
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {_fmt(c.value)}"
                  f" (threshold {_fmt(c.threshold)})")
        if not all(c.passed for c in checks):
            status = 1
    return status


def grid_key(cfg: RunConfig) -> str:
    """File key for grid experiments: N values and eps values joined by '-', split by 'x'."""
    return "-".join(map(str, cfg.N_list)) + "x" + "-".join(_token(e) for e in cfg.eps_list)


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else 2
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
