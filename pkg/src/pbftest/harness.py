"""Level/power studies over scenario grids, plus CSV ingestion.

Replications are independent tasks: each derives its own seed from
(config.seed, replication index), so a single replication can be re-run in
isolation and the aggregate is invariant to execution order or worker
count.
"""

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._rng import derive_seed, substream
from .curves import (
    COEFF,
    GRID,
    DataError,
    FunctionalSample,
    GridSpec,
    equispaced_grid,
    make_sample,
    read_curves_csv,
)
from .permute import permutation_test
from .simgen import Scenario, ScenarioParams, build_scenario, generate_pair
from .statistic import PhiKind

LEDGER_COLUMNS = (
    "scenario", "param", "value", "phi", "reps", "rejections", "rate", "stderr", "seed",
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Declarative description of one simulation experiment."""

    scenario: str
    n: int
    m: int
    B: int = 300
    alpha: float = 0.05
    reps: int = 400
    phis: tuple = (PhiKind.L2,)
    seed: int = 0
    r: float = 1.0
    sigma: float = 2.0
    d: int = 81
    delta: float = 1.0
    grid_points: int = 101
    normalized_cos: bool = False
    sampled_on_grid: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.n < 1 or self.m < 1:
            raise ValueError("both group sizes must be at least 1")
        object.__setattr__(self, "phis", tuple(PhiKind(p) for p in self.phis))

    def params(self) -> ScenarioParams:
        return ScenarioParams(r=self.r, sigma=self.sigma, d=self.d, delta=self.delta)

    def scenario_obj(self) -> Scenario:
        return build_scenario(
            self.scenario,
            self.params(),
            equispaced_grid(self.grid_points),
            self.normalized_cos,
            self.sampled_on_grid,
        )


@dataclass(frozen=True)
class PowerEstimate:
    """Rejection-rate estimate for one (scenario, phi) cell."""

    phi: PhiKind
    rejections: int
    reps_done: int

    @property
    def rejection_rate(self) -> float:
        return self.rejections / self.reps_done

    @property
    def mc_stderr(self) -> float:
        p = self.rejection_rate
        return math.sqrt(p * (1.0 - p) / self.reps_done)


def run_single_replication(config: ScenarioConfig, rep_index: int) -> dict:
    """One replication: fresh sample, one permutation test per phi.

    Deterministic in (config.seed, rep_index); re-running any index in
    isolation reproduces its decisions bit-for-bit.
    """
    rep_seed = derive_seed(config.seed, rep_index)
    sample = generate_pair(config.scenario_obj(), config.n, config.m, derive_seed(rep_seed, 0))
    perm_seed = derive_seed(rep_seed, 1)
    out = {}
    for phi in config.phis:
        result = permutation_test(sample, phi, B=config.B, seed=perm_seed)
        out[phi] = result.p_value <= config.alpha
    return out


def _limit_worker_blas():
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(1)
    except Exception:
        pass


def _replication_task(payload):
    config, rep_index = payload
    return run_single_replication(config, rep_index)


def run_power(config: ScenarioConfig, progress=None) -> dict:
    """Estimate rejection rates for every phi of a scenario.

    Args:
        config: Experiment description (reps, B, alpha, seeds, parameters).
        progress: Optional callback invoked with the completed-rep count.

    Returns:
        Mapping PhiKind -> PowerEstimate.  Counts are exact sums over
        replications, so results do not depend on worker count.
    """
    workers = config.workers or (os.cpu_count() or 1)
    rejections = {phi: 0 for phi in config.phis}
    done = 0
    if workers > 1 and config.reps > 1:
        payloads = [(config, i) for i in range(config.reps)]
        chunksize = max(1, config.reps // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers, initializer=_limit_worker_blas) as pool:
            for decisions in pool.map(_replication_task, payloads, chunksize=chunksize):
                for phi, rejected in decisions.items():
                    rejections[phi] += int(rejected)
                done += 1
                if progress:
                    progress(done)
    else:
        for i in range(config.reps):
            for phi, rejected in run_single_replication(config, i).items():
                rejections[phi] += int(rejected)
            done += 1
            if progress:
                progress(done)
    return {phi: PowerEstimate(phi, rejections[phi], config.reps) for phi in config.phis}


def run_sweep(base: ScenarioConfig, parameter: str, values, progress=None) -> list[dict]:
    """One run_power per parameter value; returns tidy ledger rows.

    Each value gets an independently derived seed, so adding or reordering
    sweep points never changes the others.
    """
    if parameter not in ("r", "sigma", "d", "delta", "n", "m", "B"):
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    rows = []
    for index, value in enumerate(values):
        bound = replace(
            base,
            seed=derive_seed(base.seed, 1000 + index),
            **{parameter: type(getattr(base, parameter))(value)},
        )
        for phi, est in run_power(bound, progress=progress).items():
            rows.append(
                {
                    "scenario": base.scenario,
                    "param": parameter,
                    "value": value,
                    "phi": phi.value,
                    "reps": est.reps_done,
                    "rejections": est.rejections,
                    "rate": est.rejection_rate,
                    "stderr": est.mc_stderr,
                    "seed": bound.seed,
                }
            )
    return rows


def power_rows(config: ScenarioConfig, estimates: dict) -> list[dict]:
    """Ledger rows for a plain (non-sweep) power run."""
    return [
        {
            "scenario": config.scenario,
            "param": "",
            "value": "",
            "phi": phi.value,
            "reps": est.reps_done,
            "rejections": est.rejections,
            "rate": est.rejection_rate,
            "stderr": est.mc_stderr,
            "seed": config.seed,
        }
        for phi, est in estimates.items()
    ]


def append_ledger(path, rows: list[dict]) -> None:
    """Append result rows to the CSV ledger, writing the header once."""
    new_file = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=LEDGER_COLUMNS)
        if new_file:
            writer.writeheader()
        for row in rows:
            writer.writerow(row)


def run_subsample_power(
    sample: FunctionalSample,
    pooled_size: int,
    reps: int,
    kind: PhiKind,
    B: int = 300,
    alpha: float = 0.05,
    seed: int = 0,
) -> PowerEstimate:
    """Power over stratified subsamples of a fixed dataset.

    Each replication draws, without replacement, a subsample of the given
    pooled size whose group split preserves the original proportions, then
    runs the permutation test on it.
    """
    n_total, m_total = sample.n, sample.m
    N = n_total + m_total
    n_sub = int(round(pooled_size * n_total / N))
    n_sub = min(max(n_sub, 1), pooled_size - 1)
    m_sub = pooled_size - n_sub
    if n_sub > n_total or m_sub > m_total:
        raise ValueError("pooled_size too large for the available groups")
    x_idx = np.flatnonzero(sample.labels == 0)
    y_idx = np.flatnonzero(sample.labels == 1)
    rejections = 0
    for i in range(reps):
        rng = substream(derive_seed(seed, i))
        keep_x = rng.choice(x_idx, size=n_sub, replace=False)
        keep_y = rng.choice(y_idx, size=m_sub, replace=False)
        sub = make_sample(
            sample.values[keep_x], sample.values[keep_y], sample.kind, sample.grid
        )
        result = permutation_test(sub, kind, B=B, seed=derive_seed(seed, 10_000_000 + i))
        rejections += int(result.p_value <= alpha)
    return PowerEstimate(PhiKind(kind), rejections, reps)


def ingest_csv(
    path,
    repr_kind: str = GRID,
    grid: GridSpec | None = None,
    header: bool = False,
) -> tuple[FunctionalSample, int]:
    """Ingest a labeled curve CSV into a two-group sample.

    The first column of every row is the group tag; the two distinct tags
    define the groups in order of first appearance.  Rows with missing value
    cells are dropped and counted.

    Returns:
        (sample, dropped_row_count).
    """
    raw, abscissae, dropped = _read_labeled_rows(path, header)
    tags = [tag for tag, _ in raw]
    distinct = list(dict.fromkeys(tags))
    if len(distinct) != 2:
        raise DataError(f"{path}: expected exactly 2 group tags, found {distinct}")
    values = np.array([vals for _, vals in raw], dtype=float)
    labels = np.array([distinct.index(tag) for tag in tags], dtype=np.int8)
    sample_grid = _resolve_grid(repr_kind, grid, abscissae, values.shape[1])
    sample = FunctionalSample(values, labels, repr_kind, sample_grid)
    return sample, dropped


def ingest_pair(
    x_path,
    y_path,
    repr_kind: str = GRID,
    grid: GridSpec | None = None,
    header: bool = False,
) -> tuple[FunctionalSample, int]:
    """Ingest two unlabeled curve CSVs as groups X and Y.

    Returns:
        (sample, dropped_row_count) with drops summed over both files.
    """
    x_values, x_abs, x_dropped = read_curves_csv(x_path, header)
    y_values, y_abs, y_dropped = read_curves_csv(y_path, header)
    if x_values.shape[1] != y_values.shape[1]:
        raise DataError("the two files have different curve lengths")
    sample_grid = _resolve_grid(
        repr_kind, grid, x_abs if x_abs is not None else y_abs, x_values.shape[1]
    )
    sample = make_sample(x_values, y_values, repr_kind, sample_grid)
    return sample, x_dropped + y_dropped


def _resolve_grid(repr_kind, grid, abscissae, width) -> GridSpec | None:
    if repr_kind == COEFF:
        return None
    if grid is not None:
        spec = grid
    elif abscissae is not None:
        spec = GridSpec(abscissae)
    else:
        spec = equispaced_grid(width)
    if spec.points.size != width:
        raise DataError("grid length does not match the curve length")
    return spec


_MISSING = {"", "na", "nan"}


def _read_labeled_rows(path, header):
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: file contains no rows")
    abscissae = None
    if header:
        # first header cell sits over the label column and is ignored
        try:
            abscissae = np.array([float(c) for c in rows[0][1:]], dtype=float)
        except ValueError as exc:
            raise DataError(f"{path}: header row is not numeric") from exc
        rows = rows[1:]
    width = len(rows[0]) if rows else 0
    if width < 2:
        raise DataError(f"{path}: labeled rows need a tag plus at least one value")
    kept, dropped = [], 0
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        tag, cells = row[0].strip(), [c.strip() for c in row[1:]]
        if any(c.lower() in _MISSING for c in cells):
            dropped += 1
            continue
        try:
            kept.append((tag, [float(c) for c in cells]))
        except ValueError as exc:
            raise DataError(f"{path}: row {lineno} has a non-numeric cell") from exc
    if not kept:
        raise DataError(f"{path}: no usable rows (dropped {dropped})")
    if abscissae is not None and abscissae.size != width - 1:
        raise DataError(f"{path}: header length does not match data width")
    return kept, abscissae, dropped


_CONFIG_TYPES = {
    "scenario": str,
    "n": int,
    "m": int,
    "B": int,
    "alpha": float,
    "reps": int,
    "seed": int,
    "r": float,
    "sigma": float,
    "d": int,
    "delta": float,
    "grid_points": int,
    "normalized_cos": lambda s: s.lower() in ("1", "true", "yes"),
    "sampled_on_grid": lambda s: s.lower() in ("1", "true", "yes"),
    "workers": int,
}


def read_config_file(path) -> dict:
    """Parse a flat key=value scenario config file.

    Lines are `key=value`; blank lines and `#` comments are skipped.  The
    `phi` key takes a comma-separated list.  CLI flags override these values.
    """
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}: line {lineno} is not key=value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "phi":
            out["phis"] = tuple(PhiKind(p.strip()) for p in value.split(","))
        elif key in _CONFIG_TYPES:
            out[key] = _CONFIG_TYPES[key](value)
        else:
            raise DataError(f"{path}: unknown config key {key!r}")
    return out
