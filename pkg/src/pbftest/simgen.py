"""Synthetic functional samples for the level/power experiments.

Wiener-path families are produced on a shared grid (cumulative Gaussian
increments); all basis families are produced directly as coefficients in a
shared orthonormal system, so their Gram entries are exact.  Each generator
is deterministic given its seed.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._rng import derive_seed, substream
from .curves import COEFF, GRID, FunctionalSample, GridSpec, equispaced_grid, make_sample

MU_LINEAR = "linear"  # mu(t) = r * t
MU_QUADRATIC = "quadratic"  # mu(t) = r * t^2
MU_EXPONENTIAL = "exponential"  # mu(t) = r * e^t

_MU_FUNCS = {
    MU_LINEAR: lambda t: t,
    MU_QUADRATIC: lambda t: t**2,
    MU_EXPONENTIAL: np.exp,
}

SIN_SIDE = "sin"
COS_SIDE = "cos"


def _require_equispaced(grid: GridSpec) -> np.ndarray:
    t = grid.points
    steps = np.diff(t)
    if t[0] != 0.0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise ValueError("Wiener paths need an equispaced grid starting at 0")
    return t


def gen_wiener(count: int, grid: GridSpec, seed: int) -> np.ndarray:
    """Standard Wiener paths on [0, 1]: zero at t=0, N(0, dt) increments."""
    t = _require_equispaced(grid)
    rng = substream(seed)
    steps = np.sqrt(np.diff(t)) * rng.standard_normal((count, t.size - 1))
    values = np.zeros((count, t.size))
    np.cumsum(steps, axis=1, out=values[:, 1:])
    return values


def gen_shifted_wiener(count: int, mu_kind: str, r: float, grid: GridSpec, seed: int) -> np.ndarray:
    """Wiener paths plus the deterministic trend r * mu(t)."""
    if mu_kind not in _MU_FUNCS:
        raise ValueError(f"unknown mean shift {mu_kind!r}")
    values = gen_wiener(count, grid, seed)
    return values + r * _MU_FUNCS[mu_kind](grid.points)


def _draw(dist, rng: np.random.Generator, shape) -> np.ndarray:
    """Draw from a ("normal", mean, sd) / ("cauchy", scale) / ("t", df) spec."""
    name = dist[0]
    if name == "normal":
        _, mean, sd = dist
        return mean + sd * rng.standard_normal(shape)
    if name == "cauchy":
        # inverse-CDF construction from the uniform stream
        _, scale = dist
        return scale * np.tan(np.pi * (rng.random(shape) - 0.5))
    if name == "t":
        _, df = dist
        z = rng.standard_normal(shape)
        v = rng.chisquare(df, shape)
        return z / np.sqrt(v / df)
    raise ValueError(f"unknown coefficient distribution {name!r}")


def gen_basis(count: int, weights, dist, seed: int) -> np.ndarray:
    """Coefficient curves c_i = w_i * draw_i in an orthonormal basis."""
    weights = np.asarray(weights, dtype=float)
    if weights.size == 0:
        raise ValueError("weights must be non-empty")
    rng = substream(seed)
    return weights * _draw(dist, rng, (count, weights.size))


def gen_sincos(
    count: int,
    d: int,
    side: str,
    dist,
    seed: int,
    normalized_cos: bool = False,
) -> np.ndarray:
    """Coefficient curves in the joint sin/cos frame of dimension 2d.

    Sine-side curves live on coordinates 0..d-1 (orthonormal sqrt(2)*sin
    basis functions, weight 1/sqrt(d)); cosine-side curves live on
    coordinates d..2d-1.  The cosine family is generated from the literal
    cos(2*pi*i*t) functions of norm 1/sqrt(2) unless `normalized_cos` asks
    for the orthonormal sqrt(2)-scaled variant.  Cross inner products
    between the two sides are exactly zero.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    if side not in (SIN_SIDE, COS_SIDE):
        raise ValueError(f"unknown side {side!r}")
    rng = substream(seed)
    draws = _draw(dist, rng, (count, d))
    values = np.zeros((count, 2 * d))
    if side == SIN_SIDE:
        values[:, :d] = draws / math.sqrt(d)
    else:
        scale = 1.0 if normalized_cos else 1.0 / math.sqrt(2.0)
        values[:, d:] = scale * draws / math.sqrt(d)
    return values


def gen_mixture(count: int, base_fn, contaminant_fn, delta: float, seed: int) -> np.ndarray:
    """Contiguous mixture: each curve is a contaminant draw with probability
    delta / sqrt(count), otherwise a base draw.

    `base_fn` and `contaminant_fn` map (count, seed) to value arrays of the
    same shape.
    """
    rate = delta / math.sqrt(count)
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"mixture rate delta/sqrt(count) = {rate:.4g} outside [0, 1]")
    base = base_fn(count, derive_seed(seed, 1))
    contaminant = contaminant_fn(count, derive_seed(seed, 2))
    if base.shape != contaminant.shape:
        raise ValueError("mixture components must share shape")
    mask = substream(seed).random(count) < rate
    return np.where(mask[:, None], contaminant, base)


# Example 3/5/8/9 coefficient weights: 1/i^2.5 on the 9 leading basis
# functions of the trigonometric system (indexing is irrelevant to Gram
# values; only the weights matter).
BASIS_WEIGHTS = 1.0 / np.arange(1, 10, dtype=float) ** 2.5


def trig_basis_on_grid(dim: int, t: np.ndarray) -> np.ndarray:
    """First `dim` orthonormal trigonometric basis functions sampled at t.

    Ordering: 1, sqrt(2) cos(2 pi t), sqrt(2) sin(2 pi t), sqrt(2) cos(4 pi t), ...
    """
    rows = np.empty((dim, t.size))
    rows[0] = 1.0
    for k in range(1, dim):
        freq = 2.0 * np.pi * ((k + 1) // 2) * t
        rows[k] = np.sqrt(2.0) * (np.cos(freq) if k % 2 == 1 else np.sin(freq))
    return rows


def sincos_frame_on_grid(d: int, t: np.ndarray) -> np.ndarray:
    """Orthonormal sin/cos frame of gen_sincos sampled at t (2d rows)."""
    freqs = 2.0 * np.pi * np.outer(np.arange(1, d + 1), t)
    return np.vstack([np.sqrt(2.0) * np.sin(freqs), np.sqrt(2.0) * np.cos(freqs)])

_STD_NORMAL = ("normal", 0.0, 1.0)


@dataclass(frozen=True)
class ScenarioParams:
    """Free parameters of the simulation scenarios."""

    r: float = 1.0
    sigma: float = 2.0
    d: int = 81
    delta: float = 1.0


@dataclass(frozen=True)
class Scenario:
    """How to draw the two groups of one experiment."""

    scenario_id: str
    kind: str  # curve representation of both groups
    x_fn: object
    y_fn: object
    grid: GridSpec | None = None
    description: str = ""


def build_scenario(
    scenario_id: str,
    params: ScenarioParams | None = None,
    grid: GridSpec | None = None,
    normalized_cos: bool = False,
    sampled_on_grid: bool = False,
) -> Scenario:
    """Bind a scenario id and its parameters to concrete generators.

    Known ids: ex1, ex2, ex3, ex4i, ex4ii, ex5i, ex5ii, ex6i, ex6ii, ex7,
    ex8, ex9.

    `sampled_on_grid` renders the basis scenarios as grid curves instead of
    exact coefficients.  High-frequency modes then alias on the simulation
    grid (e.g. d = 81 on 101 points), which matters for power at weak
    alternatives; the published operating characteristics for the sine/cosine
    mixtures correspond to this discretized evaluation.
    """
    params = params or ScenarioParams()
    grid = grid or equispaced_grid()
    sid = scenario_id.lower()

    def wiener(count, seed):
        return gen_wiener(count, grid, seed)

    def shifted(mu_kind, r):
        return lambda count, seed: gen_shifted_wiener(count, mu_kind, r, grid, seed)

    def basis(dist):
        return lambda count, seed: gen_basis(count, BASIS_WEIGHTS, dist, seed)

    def sincos(side, dist):
        return lambda count, seed: gen_sincos(count, params.d, side, dist, seed, normalized_cos)

    def on_grid(scenario: Scenario) -> Scenario:
        if not sampled_on_grid or scenario.kind == GRID:
            return scenario
        if scenario.scenario_id in ("ex6i", "ex6ii", "ex7"):
            frame = sincos_frame_on_grid(params.d, grid.points)
        else:
            frame = trig_basis_on_grid(BASIS_WEIGHTS.size, grid.points)

        def render(fn):
            return lambda count, seed: fn(count, seed) @ frame

        return Scenario(
            scenario.scenario_id, GRID, render(scenario.x_fn), render(scenario.y_fn),
            grid, scenario.description + " (sampled on grid)",
        )

    if sid == "ex1":
        return Scenario(sid, GRID, wiener, wiener, grid, "null: both groups Wiener")
    if sid == "ex2":
        f = shifted(MU_LINEAR, 1.0)
        return Scenario(sid, GRID, f, f, grid, "null: both groups t + Wiener")
    if sid == "ex3":
        f = basis(_STD_NORMAL)
        return on_grid(Scenario(sid, COEFF, f, f, None, "null: both groups weighted Gaussian basis curves"))
    if sid == "ex4i":
        return Scenario(sid, GRID, wiener, shifted(MU_QUADRATIC, params.r), grid, "location: r*t^2 trend")
    if sid == "ex4ii":
        return Scenario(sid, GRID, wiener, shifted(MU_EXPONENTIAL, params.r), grid, "location: r*e^t trend")
    if sid == "ex5i":
        return on_grid(Scenario(
            sid, COEFF, basis(_STD_NORMAL), basis(("normal", 0.0, params.sigma)), None,
            "scale: Gaussian coefficient sd sigma",
        ))
    if sid == "ex5ii":
        return on_grid(Scenario(
            sid, COEFF, basis(("cauchy", 1.0)), basis(("cauchy", params.sigma)), None,
            "scale: Cauchy coefficient scale sigma",
        ))
    if sid in ("ex6i", "ex6ii"):
        sd = math.sqrt(2.0)
        y_dist = ("normal", 0.0, sd) if sid == "ex6i" else ("t", 4)
        return on_grid(Scenario(
            sid, COEFF, sincos(SIN_SIDE, ("normal", 0.0, sd)), sincos(COS_SIDE, y_dist), None,
            "orthogonal bases: sine group vs cosine group",
        ))
    if sid == "ex7":
        base = sincos(SIN_SIDE, ("normal", 0.0, math.sqrt(2.0)))
        contaminant = sincos(COS_SIDE, ("normal", 0.0, math.sqrt(2.0)))

        def mixture(count, seed):
            return gen_mixture(count, base, contaminant, params.delta, seed)

        return on_grid(Scenario(sid, COEFF, base, mixture, None, "contiguous mixture of sine and cosine groups"))
    if sid in ("ex8", "ex9"):
        base = basis(_STD_NORMAL)
        cont_dist = ("normal", 1.0, 1.0) if sid == "ex8" else ("normal", 0.0, math.sqrt(2.0))
        contaminant = basis(cont_dist)

        def mixture(count, seed):
            return gen_mixture(count, base, contaminant, params.delta, seed)

        return on_grid(Scenario(sid, COEFF, base, mixture, None, "contiguous mixture of basis families"))
    raise ValueError(f"unknown scenario {scenario_id!r}")


def generate_pair(scenario: Scenario, n: int, m: int, seed: int) -> FunctionalSample:
    """Draw one (X, Y) sample for a scenario; groups use disjoint substreams."""
    x_values = scenario.x_fn(n, derive_seed(seed, 101))
    y_values = scenario.y_fn(m, derive_seed(seed, 202))
    return make_sample(x_values, y_values, scenario.kind, scenario.grid)


SCENARIO_IDS = (
    "ex1", "ex2", "ex3", "ex4i", "ex4ii", "ex5i", "ex5ii",
    "ex6i", "ex6ii", "ex7", "ex8", "ex9",
)
