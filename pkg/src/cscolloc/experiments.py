"""Harness for the sparse and compressible recovery studies.

Each trial ``t`` uses seed ``seed_base + t``. The same seed drives the
collocation draw; the synthetic sparse signal uses an independent stream
spawned from it so the two are uncorrelated.
"""
from __future__ import annotations

import configparser
import csv
import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .assembly import DiffusionCoefficient, forcing_from_manufactured
from .errors import ConfigError
from .solver import (
    ManufacturedSolution,
    ProblemSpec,
    relative_l2_coeff_error,
    relative_L2_function_error,
    solve_compressive,
    solve_full,
)

__all__ = [
    "CSV_COLUMNS",
    "ExperimentConfig",
    "TrialRecord",
    "run_sparse_experiment",
    "run_compressible_experiment",
    "summarize",
    "write_csv",
    "thread_count",
]

log = logging.getLogger(__name__)

CSV_VERSION = 1
CSV_COLUMNS = ("experiment", "method", "n", "d", "s", "m", "K", "trial", "seed",
               "assembly_s", "recovery_s", "error")
KINDS = ("sparse", "compressible", "rip", "verify")
FULL_MODES = ("direct", "omp")
METHOD_ORDER = {"full-direct": 0, "full-omp": 1, "compressive": 2}


def _parse_list(text: str, cast) -> tuple:
    text = text.strip()
    if not text or text.lower() == "none":
        return ()
    return tuple(cast(v.strip()) for v in text.split(","))


@dataclass
class ExperimentConfig:
    """Settings for one experiment run; defaults match the reference study (n=32, d=2)."""

    kind: str = "sparse"
    n: int = 32
    d: int = 2
    sparsity: tuple[int, ...] = (2, 4, 8, 16, 32, 64)
    trials: int = 100
    seed_base: int = 0
    eta_affine: tuple[float, ...] | None = (0.25, 0.25)
    full_recovery: tuple[str, ...] = ("direct", "omp")
    out_dir: str = "results"

    @property
    def N(self) -> int:
        return self.n**self.d

    def eta(self) -> DiffusionCoefficient:
        if self.eta_affine is None:
            return DiffusionCoefficient.constant(self.d)
        return DiffusionCoefficient.affine(self.eta_affine)

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n < 1 or self.d < 1:
            raise ConfigError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.sparsity:
            raise ConfigError("sparsity list is empty")
        bad = [s for s in self.sparsity if not 1 <= s <= self.N]
        if bad:
            raise ConfigError(f"sparsity values {bad} outside [1, N={self.N}]")
        if self.eta_affine is not None:
            if len(self.eta_affine) != self.d:
                raise ConfigError(f"eta_affine has {len(self.eta_affine)} weights, d={self.d}")
            if any(w < 0 for w in self.eta_affine):
                raise ConfigError("eta_affine weights must be non-negative")
        unknown = set(self.full_recovery) - set(FULL_MODES)
        if unknown:
            raise ConfigError(f"unknown full recovery modes {sorted(unknown)}")
        return self

    def to_file(self, path) -> None:
        """Write the config as a single ``[experiment]`` INI section."""
        cp = configparser.ConfigParser()
        cp["experiment"] = {
            "kind": self.kind,
            "n": str(self.n),
            "d": str(self.d),
            "sparsity": ",".join(map(str, self.sparsity)),
            "trials": str(self.trials),
            "seed_base": str(self.seed_base),
            "eta_affine": "constant" if self.eta_affine is None
            else ",".join(repr(float(w)) for w in self.eta_affine),
            "full_recovery": ",".join(self.full_recovery) or "none",
            "out_dir": self.out_dir,
        }
        with open(path, "w") as fh:
            cp.write(fh)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        cp = configparser.ConfigParser()
        if not cp.read(path):
            raise ConfigError(f"cannot read config file {path}")
        if "experiment" not in cp:
            raise ConfigError(f"{path}: missing [experiment] section")
        sec = cp["experiment"]
        known = {f.name for f in fields(cls)}
        extra = set(sec) - known
        if extra:
            raise ConfigError(f"{path}: unknown keys {sorted(extra)}")
        kw = {}
        try:
            for key, raw in sec.items():
                if key in ("n", "d", "trials", "seed_base"):
                    kw[key] = int(raw)
                elif key == "sparsity":
                    kw[key] = _parse_list(raw, int)
                elif key == "eta_affine":
                    kw[key] = None if raw.strip() == "constant" else _parse_list(raw, float)
                elif key == "full_recovery":
                    kw[key] = _parse_list(raw, str)
                else:
                    kw[key] = raw
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls(**kw).validate()


@dataclass
class TrialRecord:
    experiment: str
    method: str
    n: int
    d: int
    s: int
    m: int | None
    K: int | None
    trial: int
    seed: int
    assembly_s: float
    recovery_s: float
    error: float

    def row(self) -> list[str]:
        out = []
        for col in CSV_COLUMNS:
            v = getattr(self, col)
            out.append("" if v is None else repr(v) if isinstance(v, float) else str(v))
        return out


def thread_count() -> int:
    """Parallelism cap from ``CS_COLLOC_THREADS`` (default 1)."""
    raw = os.environ.get("CS_COLLOC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"CS_COLLOC_THREADS must be an integer, got {raw!r}") from None


def _signal_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x5EED])))


def random_sparse_vector(N: int, s: int, seed: int) -> np.ndarray:
    """``s`` distinct uniform positions filled with standard normal values."""
    rng = _signal_rng(seed)
    x = np.zeros(N)
    x[rng.permutation(N)[:s]] = rng.standard_normal(s)
    return x


def _sparse_trial(cfg: ExperimentConfig, eta, s: int, trial: int) -> list[TrialRecord]:
    seed = cfg.seed_base + trial
    x = random_sparse_vector(cfg.N, s, seed)
    problem = ProblemSpec(eta=eta, n=cfg.n, d=cfg.d, coefficients=x)
    reports = [solve_full(problem, mode, K=s if mode == "omp" else None)
               for mode in cfg.full_recovery]
    reports.append(solve_compressive(problem, s=s, seed=seed))
    return [_record("sparse", cfg, r, s, trial, seed, relative_l2_coeff_error(r.coefficients, x))
            for r in reports]


def _compressible_trial(cfg: ExperimentConfig, problem: ProblemSpec, s: int,
                        trial: int) -> list[TrialRecord]:
    seed = cfg.seed_base + trial
    reports = [solve_full(problem, mode, K=s if mode == "omp" else None)
               for mode in cfg.full_recovery]
    reports.append(solve_compressive(problem, s=s, seed=seed))
    return [_record("compressible", cfg, r, s, trial, seed,
                    relative_L2_function_error(r.expansion(), problem.exact.u, cfg.d))
            for r in reports]


def _record(experiment, cfg, report, s, trial, seed, error) -> TrialRecord:
    m = report.m if report.m is not None else cfg.N
    return TrialRecord(experiment=experiment, method=report.method, n=cfg.n, d=cfg.d, s=s,
                       m=m, K=report.K, trial=trial, seed=seed,
                       assembly_s=report.assembly_seconds, recovery_s=report.recovery_seconds,
                       error=error)


def _run(cfg: ExperimentConfig, trial_fn, threads: int | None) -> list[TrialRecord]:
    cfg.validate()
    jobs = [(s, t) for s in cfg.sparsity for t in range(cfg.trials)]
    # warm-up, excluded from the records
    trial_fn(*jobs[0])
    threads = thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda job: trial_fn(*job), jobs))
    else:
        chunks = []
        for s, t in jobs:
            chunks.append(trial_fn(s, t))
            log.debug("finished s=%d trial=%d", s, t)
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (METHOD_ORDER.get(r.method, 99), r.s, r.trial))
    return records


def run_sparse_experiment(cfg: ExperimentConfig, threads: int | None = None) -> list[TrialRecord]:
    """Recover random ``s``-sparse coefficient vectors with ``c = B x``.

    Records the relative coefficient error of every configured full method and
    of the compressive method, with the assembly/recovery cost split.
    """
    eta = cfg.eta()
    return _run(cfg, lambda s, t: _sparse_trial(cfg, eta, s, t), threads)


def compressible_problem(cfg: ExperimentConfig) -> ProblemSpec:
    eta = cfg.eta()
    exact = ManufacturedSolution.bubble(cfg.d)
    forcing = forcing_from_manufactured(exact.u, exact.grad, exact.laplacian, eta)
    return ProblemSpec(eta=eta, n=cfg.n, d=cfg.d, forcing=forcing, exact=exact)


def run_compressible_experiment(cfg: ExperimentConfig,
                                threads: int | None = None) -> list[TrialRecord]:
    """Approximate the bubble solution; records relative ``L^2`` errors."""
    problem = compressible_problem(cfg)
    return _run(cfg, lambda s, t: _compressible_trial(cfg, problem, s, t), threads)


STAT_NAMES = ("count", "min", "q1", "median", "q3", "max", "mean")


def _stats(values: np.ndarray) -> dict:
    # quartiles by linear interpolation between order statistics
    q1, med, q3 = np.percentile(values, [25, 50, 75], method="linear")
    return {"count": int(values.size), "min": float(values.min()), "q1": float(q1),
            "median": float(med), "q3": float(q3), "max": float(values.max()),
            "mean": float(values.mean())}


def summarize(records, metrics=("error", "assembly_s", "recovery_s")) -> list[dict]:
    """Box-plot statistics of each metric, grouped by ``(method, s)``."""
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    groups: dict[tuple[str, int], list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.method, r.s), []).append(r)
    out = []
    for (method, s), recs in sorted(groups.items(),
                                    key=lambda kv: (METHOD_ORDER.get(kv[0][0], 99), kv[0][1])):
        entry = {"method": method, "s": s}
        for metric in metrics:
            vals = np.array([getattr(r, metric) for r in recs], dtype=float)
            vals = vals[np.isfinite(vals)]
            if vals.size == 0:
                warnings.warn(f"no finite {metric} values for method={method}, s={s}; omitted")
                continue
            entry[metric] = _stats(vals)
        out.append(entry)
    return out


def write_csv(records, path, include_timings: bool = True) -> None:
    """Write records with the fixed column set (timing columns blank if excluded)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# cscolloc trial records v{CSV_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            row = r.row()
            if not include_timings:
                row[CSV_COLUMNS.index("assembly_s")] = ""
                row[CSV_COLUMNS.index("recovery_s")] = ""
            writer.writerow(row)


def config_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["sparsity"] = list(cfg.sparsity)
    d["full_recovery"] = list(cfg.full_recovery)
    d["eta_affine"] = None if cfg.eta_affine is None else list(cfg.eta_affine)
    return d
