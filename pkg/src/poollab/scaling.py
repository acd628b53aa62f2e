"""Compute-versus-loss analysis: frontiers, crossings, and threshold laws.

The central object is the crossing point: for one model size and pool
size, the minimal training-token count at which the unfiltered pool's
loss beats the best loss achieved by the filtered dataset.  Crossings
observed on the eval grid are returned directly; otherwise the pool's
loss curve is extrapolated with a saturating power law
``L(N) = c + a * N**(-b)`` and the crossing is solved in closed form
(or declared to never happen when the asymptote is too high).

Crossings as a function of pool size are summarized by a quadratic in
log10-log10 space, and two constructions turn those quadratics into a
compute threshold law ``compute = alpha * pool_tokens**beta``: fixing a
tokens-per-parameter ratio, or fixing an epoch count.

All fits are deterministic: identical inputs give identical coefficients.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import FitError, ValidationError
from .runlog import ModelConfig, RunRecord, best_achievable, point_loss

#: Crossings needing more epochs than this are flagged as unreliable
#: extrapolations (validation loss can turn non-monotone at extreme
#: epoch counts); they are flagged but still fit.
EXTREME_EPOCHS_FLAG = 121.6


# ---------------------------------------------------------------------------
# Pareto frontier.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrontierPoint:
    compute: float
    loss: float
    dataset_label: str
    record_ref: str

    def __post_init__(self) -> None:
        if self.compute <= 0 or self.loss <= 0:
            raise ValidationError("frontier points need positive compute and loss")


def pareto_frontier(points: Sequence[FrontierPoint]) -> list[FrontierPoint]:
    """Non-dominated subset, sorted by compute ascending.

    A point is dominated when another point has no larger compute and no
    larger loss, with at least one strict.  Exact (compute, loss)
    duplicates keep the lexicographically smallest record_ref.  The
    result's losses are strictly decreasing.
    """
    ordered = sorted(points, key=lambda p: (p.compute, p.loss, p.record_ref))
    frontier: list[FrontierPoint] = []
    best_loss = math.inf
    for point in ordered:
        if point.loss < best_loss:
            frontier.append(point)
            best_loss = point.loss
    return frontier


# ---------------------------------------------------------------------------
# Saturating power-law fit.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLawFit:
    """Model ``L(N) = c + a * N**(-b)`` with a >= 0 asymptote c."""

    a: float
    b: float
    c: float
    r2: float
    n_points: int

    def predict(self, n: float) -> float:
        return self.c + self.a * n ** (-self.b)

    def solve_for(self, target: float) -> float:
        """Tokens where the fitted curve reaches ``target`` (requires target > c)."""
        if target <= self.c:
            raise FitError(
                f"target {target} is at or below the fitted asymptote {self.c}; never reached"
            )
        return (self.a / (target - self.c)) ** (1.0 / self.b)

    def near_zero_asymptote(self, tol: float = 1e-8) -> bool:
        return self.c <= tol


def _loglog_regression(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Least-squares line y = intercept + slope*x; returns sse and sst too."""
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    sse = float(np.sum((y - fitted) ** 2))
    sst = float(np.sum((y - np.mean(y)) ** 2))
    return float(coef[0]), float(coef[1]), sse, sst


def _golden_section_min(fn, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section minimizer over [lo, hi] to interval width ``tol``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _asymptote_grid(loss_min: float, c_hi: float, losses: np.ndarray, grid_size: int) -> np.ndarray:
    """Candidate asymptotes in [0, c_hi].

    The squared-residual landscape in c has a well at the true asymptote
    whose width scales with the gap ``min(L) - c``, so a uniform grid
    alone can step right over it.  Combine a linear grid with a
    log-spaced sweep of the gap down to the allowed floor, plus the
    closed-form three-point solve (exact for geometrically spaced N).
    """
    parts = [np.linspace(0.0, c_hi, grid_size)]
    gap_floor = loss_min - c_hi
    # ~24 points per decade keeps the nearest candidate within ~5% of
    # the true gap, close enough that the well beats rival local minima.
    decades = math.log10(loss_min / gap_floor)
    n_log = min(600, max(2, int(decades * 24)))
    parts.append(loss_min - np.geomspace(loss_min, gap_floor, n_log))

    first, middle, last = losses[0], losses[len(losses) // 2], losses[-1]
    denom = 2.0 * middle - first - last
    if denom != 0.0:
        three_point = (middle * middle - first * last) / denom
        if math.isfinite(three_point) and 0.0 <= three_point <= c_hi:
            parts.append(np.array([three_point]))

    grid = np.unique(np.concatenate(parts))
    return np.clip(grid, 0.0, c_hi)


def fit_power_law(points: Sequence[tuple[float, float]], grid_size: int = 33) -> PowerLawFit:
    """Fit ``L(N) = c + a * N**(-b)`` to (N, loss) samples.

    The asymptote c is located by a grid over [0, min(L)) (see
    :func:`_asymptote_grid`) followed by golden-section refinement of
    every grid-local minimum (tolerance 1e-10 in c); at each c the
    remaining parameters come from linear least squares of log(L - c)
    against log N.  r2 is reported on those log residuals.

    Raises:
        FitError: fewer than 3 points, N not strictly increasing,
            non-positive losses, or a non-decaying loss sequence.
    """
    if len(points) < 3:
        raise FitError(f"power-law fit needs >= 3 points, got {len(points)}")
    n = np.array([p[0] for p in points], dtype=float)
    losses = np.array([p[1] for p in points], dtype=float)
    if np.any(np.diff(n) <= 0):
        raise FitError("token counts must be strictly increasing")
    if np.any(losses <= 0):
        raise FitError("losses must be positive")
    if np.all(np.diff(losses) >= 0):
        raise FitError("losses are not decaying; cannot fit a decreasing power law")

    log_n = np.log(n)
    design = np.column_stack([np.ones_like(log_n), log_n])
    solve = np.linalg.pinv(design)  # fixed across c; avoids per-candidate lstsq

    def sse_at(c: float) -> float:
        y = np.log(losses - c)
        coef = solve @ y
        resid = y - design @ coef
        return float(resid @ resid)

    loss_min = float(losses.min())
    # c strictly below min(L); the epsilon keeps log(L - c) finite.
    c_hi = loss_min - 1e-9 * max(1.0, abs(loss_min))
    if c_hi <= 0.0:
        best_c = 0.0
    else:
        grid = _asymptote_grid(loss_min, c_hi, losses, grid_size)
        sses = np.array([sse_at(float(c)) for c in grid])
        candidates = [float(grid[int(np.argmin(sses))])]
        for i in range(len(grid)):
            left = sses[i - 1] if i > 0 else math.inf
            right = sses[i + 1] if i + 1 < len(grid) else math.inf
            if sses[i] <= left and sses[i] <= right:
                lo = float(grid[max(i - 1, 0)])
                hi = float(grid[min(i + 1, len(grid) - 1)])
                candidates.append(_golden_section_min(sse_at, lo, hi, tol=1e-10))
        best_c = min(candidates, key=sse_at)

    y = np.log(losses - best_c)
    intercept, slope, sse, sst = _loglog_regression(log_n, y)
    b = -slope
    if b <= 0:
        raise FitError("fitted exponent is not positive; losses are not decaying")
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    return PowerLawFit(a=float(np.exp(intercept)), b=b, c=best_c, r2=r2, n_points=len(points))


# ---------------------------------------------------------------------------
# Crossing points.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrossingPoint:
    """Minimal training tokens where the pool beats the filtered target.

    ``crossing_tokens`` is None when no crossing is observed and the
    fitted pool asymptote never reaches the target ("never" case).
    """

    model_params: int
    pool_tokens: int
    crossing_tokens: float | None
    observed: bool

    @property
    def never(self) -> bool:
        return self.crossing_tokens is None

    @property
    def epochs_at_cross(self) -> float | None:
        if self.crossing_tokens is None:
            return None
        return self.crossing_tokens / self.pool_tokens

    @property
    def extreme_epochs(self) -> bool:
        ep = self.epochs_at_cross
        return ep is not None and ep > EXTREME_EPOCHS_FLAG


def _loss_curve(
    runs: Sequence[RunRecord], eval_sets: Sequence[str]
) -> list[tuple[float, float]]:
    """(tokens_seen, mean loss) over all eval points; duplicates take the min."""
    by_tokens: dict[int, float] = {}
    for record in runs:
        for point in record.eval_points:
            loss = point_loss(point, eval_sets)
            prev = by_tokens.get(point.tokens_seen)
            by_tokens[point.tokens_seen] = loss if prev is None else min(prev, loss)
    return sorted(by_tokens.items())


def crossing_point(
    pool_runs: Sequence[RunRecord],
    filtered_runs: Sequence[RunRecord],
    model_params: int,
    pool_tokens: int,
    eval_sets: Sequence[str] | None = None,
) -> CrossingPoint:
    """Estimate the minimal winning token count for one (model, pool) cell.

    The filtered target is the best loss over ``filtered_runs``.  If any
    pool eval point already beats it, the smallest such tokens_seen is
    returned as an observed crossing.  Otherwise the pool curve is
    extrapolated with :func:`fit_power_law`: a finite answer comes from
    inverting the fitted law, and an asymptote at or above the target
    means the crossing never happens.
    """
    if not pool_runs or not filtered_runs:
        raise ValidationError("crossing_point requires non-empty pool and filtered runs")
    for record in list(pool_runs) + list(filtered_runs):
        if record.model.total_params != model_params:
            raise ValidationError(
                f"record {record.dataset_label!r} has model size "
                f"{record.model.total_params}, expected {model_params}"
            )
        if record.pool_tokens != pool_tokens:
            raise ValidationError(
                f"record {record.dataset_label!r} has pool_tokens "
                f"{record.pool_tokens}, expected {pool_tokens}"
            )
    sets = list(eval_sets) if eval_sets else sorted(pool_runs[0].eval_points[0].losses)
    target = best_achievable(filtered_runs, sets)
    curve = _loss_curve(pool_runs, sets)

    winning = [tokens for tokens, loss in curve if loss < target]
    if winning:
        return CrossingPoint(
            model_params=model_params,
            pool_tokens=pool_tokens,
            crossing_tokens=float(min(winning)),
            observed=True,
        )

    fit = fit_power_law(curve)
    if fit.c < target:
        return CrossingPoint(
            model_params=model_params,
            pool_tokens=pool_tokens,
            crossing_tokens=fit.solve_for(target),
            observed=False,
        )
    return CrossingPoint(
        model_params=model_params,
        pool_tokens=pool_tokens,
        crossing_tokens=None,
        observed=False,
    )


# ---------------------------------------------------------------------------
# Quadratic crossing fits in log10-log10 space.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadFit:
    """Degree-2 fit of log10(crossing tokens) against log10(pool tokens)."""

    model_params: int
    coeffs: tuple[float, float, float]  # highest degree first
    residuals: tuple[float, ...]
    points: tuple[tuple[float, float], ...]  # (pool_tokens, crossing_tokens)

    def predict_log10(self, log10_pool: float) -> float:
        c2, c1, c0 = self.coeffs
        return c2 * log10_pool**2 + c1 * log10_pool + c0

    def predict(self, pool_tokens: float) -> float:
        return 10.0 ** self.predict_log10(math.log10(pool_tokens))

    def invert_smaller_root(self, crossing_tokens: float) -> float:
        """Pool tokens whose predicted crossing equals ``crossing_tokens``.

        Solves the quadratic in log10 space and takes the smaller root:
        the smaller pool reaches a given crossing-token count first.
        """
        c2, c1, c0 = self.coeffs
        y = math.log10(crossing_tokens)
        if abs(c2) < 1e-12:
            if abs(c1) < 1e-12:
                raise FitError("degenerate constant fit cannot be inverted")
            return 10.0 ** ((y - c0) / c1)
        disc = c1 * c1 - 4.0 * c2 * (c0 - y)
        if disc < 0:
            raise FitError(f"no real pool size reaches crossing tokens {crossing_tokens:g}")
        root = math.sqrt(disc)
        candidates = sorted([(-c1 - root) / (2 * c2), (-c1 + root) / (2 * c2)])
        return 10.0 ** candidates[0]


def fit_crossing_quadratic(crossings: Sequence[CrossingPoint]) -> QuadFit:
    """Least-squares quadratic through one model size's finite crossings."""
    finite = [c for c in crossings if not c.never]
    if len(finite) < 3:
        never_pools = [c.pool_tokens for c in crossings if c.never]
        raise FitError(
            f"need >= 3 finite crossings, got {len(finite)} "
            f"(never at pool sizes: {never_pools})"
        )
    sizes = {c.model_params for c in finite}
    if len(sizes) > 1:
        raise ValidationError(f"crossings span multiple model sizes: {sorted(sizes)}")
    x = np.log10([c.pool_tokens for c in finite])
    y = np.log10([c.crossing_tokens for c in finite])
    coeffs = np.polyfit(x, y, 2)
    residuals = y - np.polyval(coeffs, x)
    return QuadFit(
        model_params=finite[0].model_params,
        coeffs=(float(coeffs[0]), float(coeffs[1]), float(coeffs[2])),
        residuals=tuple(float(r) for r in residuals),
        points=tuple((float(c.pool_tokens), float(c.crossing_tokens)) for c in finite),
    )


# ---------------------------------------------------------------------------
# Compute threshold laws.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdPoint:
    model_params: int
    pool_tokens: float
    crossing_tokens: float
    compute: float


@dataclass(frozen=True)
class ThresholdLaw:
    """Power law ``compute = alpha * pool_tokens**beta`` through threshold points."""

    method: str  # "tokens_per_param" | "epoch_constraint"
    parameter: float
    points: tuple[ThresholdPoint, ...]
    alpha: float
    beta: float
    r2: float

    def predict_compute(self, pool_tokens: float) -> float:
        return self.alpha * pool_tokens**self.beta


def extrapolate_compute(law: ThresholdLaw, pool_tokens: float) -> float:
    """Compute needed for the unfiltered pool to win at ``pool_tokens``."""
    if pool_tokens <= 0:
        raise ValidationError("pool_tokens must be positive")
    return law.predict_compute(pool_tokens)


def _fit_threshold_points(
    method: str, parameter: float, points: list[ThresholdPoint]
) -> ThresholdLaw:
    if len(points) < 3:
        raise FitError(f"threshold law needs >= 3 model sizes, got {len(points)}")
    x = np.log10([p.pool_tokens for p in points])
    y = np.log10([p.compute for p in points])
    intercept, slope, sse, sst = _loglog_regression(x, y)
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    return ThresholdLaw(
        method=method,
        parameter=parameter,
        points=tuple(points),
        alpha=10.0**intercept,
        beta=slope,
        r2=r2,
    )


def fit_threshold_tokens_per_param(
    quads: Mapping[int, QuadFit],
    configs: Sequence[ModelConfig],
    ratio: float = 600.0,
) -> ThresholdLaw:
    """Threshold law from a fixed training-tokens-per-non-embedding-parameter ratio.

    For each model size the ratio pins the crossing-token count
    (ratio * non-embedding params) and hence the compute (6 * tokens *
    total params); the pool size is recovered by inverting that model's
    quadratic.  Models whose quadratic has no real inverse are excluded
    with a warning.
    """
    by_total = {cfg.total_params: cfg for cfg in configs}
    points: list[ThresholdPoint] = []
    for model_params in sorted(quads):
        cfg = by_total.get(model_params)
        if cfg is None:
            raise ValidationError(f"no ModelConfig with total_params={model_params}")
        crossing_tokens = ratio * cfg.non_embedding_params
        compute = 6.0 * crossing_tokens * cfg.total_params
        try:
            pool_tokens = quads[model_params].invert_smaller_root(crossing_tokens)
        except FitError as exc:
            warnings.warn(
                f"model {model_params}: excluded from tokens-per-param law ({exc})",
                RuntimeWarning,
                stacklevel=2,
            )
            continue
        points.append(ThresholdPoint(model_params, pool_tokens, crossing_tokens, compute))
    return _fit_threshold_points("tokens_per_param", ratio, points)


def fit_threshold_epoch_constraint(
    quads: Mapping[int, QuadFit],
    epochs: float = 4.0,
) -> ThresholdLaw:
    """Threshold law from a fixed epoch count.

    The epoch constraint is the unit-slope line
    ``log10(crossing tokens) = log10(pool) + log10(epochs)``; its
    intersection with each model's quadratic (smaller root, the
    increasing branch) yields that model's pool size and compute.
    Models without a real intersection are excluded with a warning; a
    quadratic coinciding with the line has no unique intersection and is
    an error.
    """
    if epochs <= 0:
        raise ValidationError("epochs must be positive")
    log_e = math.log10(epochs)
    points: list[ThresholdPoint] = []
    for model_params in sorted(quads):
        c2, c1, c0 = quads[model_params].coeffs
        # q(x) - (x + log10(epochs)) == 0
        a2, a1, a0 = c2, c1 - 1.0, c0 - log_e
        if abs(a2) < 1e-12 and abs(a1) < 1e-12:
            if abs(a0) < 1e-12:
                raise FitError(
                    f"model {model_params}: quadratic coincides with the "
                    f"{epochs:g}-epoch line; intersection is not unique"
                )
            warnings.warn(
                f"model {model_params}: no intersection with the {epochs:g}-epoch line",
                RuntimeWarning,
                stacklevel=2,
            )
            continue
        if abs(a2) < 1e-12:
            roots = [-a0 / a1]
        else:
            disc = a1 * a1 - 4.0 * a2 * a0
            if disc < 0:
                warnings.warn(
                    f"model {model_params}: no intersection with the {epochs:g}-epoch line",
                    RuntimeWarning,
                    stacklevel=2,
                )
                continue
            root = math.sqrt(disc)
            roots = sorted([(-a1 - root) / (2 * a2), (-a1 + root) / (2 * a2)])
        x = roots[0]
        pool_tokens = 10.0**x
        crossing_tokens = epochs * pool_tokens
        compute = 6.0 * crossing_tokens * model_params
        points.append(ThresholdPoint(model_params, pool_tokens, crossing_tokens, compute))
    return _fit_threshold_points("epoch_constraint", epochs, points)
