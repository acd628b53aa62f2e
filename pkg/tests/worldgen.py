"""Synthetic world builders shared by the scaling, CLI, and acceptance tests.

The threshold-law tests need per-model crossing quadratics that are
exactly consistent with a target power law ``compute = alpha * pool**beta``
under BOTH constructions (fixed tokens-per-parameter ratio and fixed
epoch count).  A quadratic has three degrees of freedom, and each
construction pins one point on it, so we build each model's quadratic
through its two constraint points with a chosen curvature and then
sample synthetic crossing points directly on the curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from poollab import EvalPoint, ModelConfig, RunRecord, bundled_model_configs
from poollab.scaling import CrossingPoint


def quadratic_through(
    p1: tuple[float, float], p2: tuple[float, float], curvature: float
) -> tuple[float, float, float]:
    """Coefficients (c2, c1, c0) of the parabola with given curvature
    passing through two points."""
    (x1, y1), (x2, y2) = p1, p2
    c2 = curvature
    c1 = (y2 - y1) / (x2 - x1) - c2 * (x1 + x2)
    c0 = y1 - c2 * x1 * x1 - c1 * x1
    return c2, c1, c0


def qeval(coeffs: tuple[float, float, float], x: float) -> float:
    c2, c1, c0 = coeffs
    return c2 * x * x + c1 * x + c0


@dataclass
class PlantedWorld:
    alpha: float
    beta: float
    ratio: float
    epochs: float
    configs: list[ModelConfig]
    coeffs_by_model: dict[int, tuple[float, float, float]]
    crossings_by_model: dict[int, list[CrossingPoint]]
    epoch_points: dict[int, tuple[float, float]]  # (log10 pool, log10 crossing)
    tpp_points: dict[int, tuple[float, float]]


def planted_threshold_world(
    alpha: float = 3.3,
    beta: float = 2.05,
    ratio: float = 600.0,
    epochs: float = 4.0,
    curvature: float = -0.22,
    config_names: tuple[str, ...] = ("330M", "1B", "7B"),
    samples_per_model: int = 4,
) -> PlantedWorld:
    """World where both threshold constructions sit exactly on one law.

    For each model size M with non-embedding count P:
      - epoch point: pool m_e solving alpha*m**beta == 6*epochs*M*m,
      - ratio point: pool m_t solving alpha*m**beta == 6*(ratio*P)*M,
    and the model's quadratic passes through both (log-log) points.
    Synthetic crossings are sampled on the quadratic around them.
    """
    configs = [c for c in bundled_model_configs() if c.name in config_names]
    assert len(configs) == len(config_names)
    log_alpha = math.log10(alpha)

    coeffs_by_model: dict[int, tuple[float, float, float]] = {}
    crossings_by_model: dict[int, list[CrossingPoint]] = {}
    epoch_points: dict[int, tuple[float, float]] = {}
    tpp_points: dict[int, tuple[float, float]] = {}

    for cfg in configs:
        m_total = cfg.total_params
        x_e = (math.log10(6.0 * epochs * m_total) - log_alpha) / (beta - 1.0)
        y_e = x_e + math.log10(epochs)
        crossing_t = ratio * cfg.non_embedding_params
        y_t = math.log10(crossing_t)
        x_t = (math.log10(6.0 * crossing_t * m_total) - log_alpha) / beta
        coeffs = quadratic_through((x_e, y_e), (x_t, y_t), curvature)

        # both constraint points must sit on the increasing branch, left
        # of the relevant vertices, so the smaller-root solves pick them
        vertex = -coeffs[1] / (2 * coeffs[0])
        line_vertex = -(coeffs[1] - 1.0) / (2 * coeffs[0])
        assert x_t < vertex and x_e < line_vertex, "planted world is not self-consistent"

        xs = np.linspace(x_e - 0.4, x_t + 0.3, samples_per_model)
        crossings = []
        for x in xs:
            pool_tokens = int(round(10.0**x))
            exact_x = math.log10(pool_tokens)
            crossings.append(
                CrossingPoint(
                    model_params=m_total,
                    pool_tokens=pool_tokens,
                    crossing_tokens=10.0 ** qeval(coeffs, exact_x),
                    observed=True,
                )
            )
        coeffs_by_model[m_total] = coeffs
        crossings_by_model[m_total] = crossings
        epoch_points[m_total] = (x_e, y_e)
        tpp_points[m_total] = (x_t, y_t)

    return PlantedWorld(
        alpha=alpha,
        beta=beta,
        ratio=ratio,
        epochs=epochs,
        configs=configs,
        coeffs_by_model=coeffs_by_model,
        crossings_by_model=crossings_by_model,
        epoch_points=epoch_points,
        tpp_points=tpp_points,
    )


def curve_run(
    label: str,
    model: ModelConfig,
    pool_tokens: int,
    a: float,
    b: float,
    c: float,
    tokens_grid: list[int],
    eval_set: str = "avg",
) -> RunRecord:
    """RunRecord whose eval losses follow ``c + a * tokens**(-b)`` exactly."""
    points = tuple(
        EvalPoint(tokens_seen=n, losses={eval_set: c + a * n ** (-b)})
        for n in sorted(tokens_grid)
    )
    return RunRecord(
        dataset_label=label,
        model=model,
        train_tokens=max(tokens_grid),
        pool_tokens=pool_tokens,
        eval_points=points,
    )


def bisect_root(fn, lo: float, hi: float, tol: float = 1e-12, iters: int = 200) -> float:
    """Plain bisection; fn(lo) and fn(hi) must differ in sign."""
    f_lo = fn(lo)
    assert f_lo * fn(hi) <= 0, "bisection bracket does not straddle a root"
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if fn(lo) * f_mid <= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)
