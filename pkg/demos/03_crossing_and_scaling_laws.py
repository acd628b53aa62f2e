#!/usr/bin/env python3
"""Walkthrough: crossing points, quadratic fits, and compute threshold laws.

Part 1 estimates a single crossing point from synthetic training-run
logs: the token count where an unfiltered pool's loss curve overtakes
the best loss of its filtered counterpart, extrapolated with a
saturating power law when the eval grid stops short.

Part 2 builds the full extrapolation: per-model quadratics of crossing
tokens versus pool size (anchored at the reference 1B-model crossings
of 1, 3, and 10 epochs at 670M/2B/10B-token pools), then the two
compute threshold laws (600 tokens per non-embedding parameter, and a
4-epoch constraint), both extrapolated to a 240-trillion-token pool.
"""

import math

from poollab import (
    bundled_model_configs,
    crossing_point,
    extrapolate_compute,
    fit_crossing_quadratic,
    fit_threshold_epoch_constraint,
    fit_threshold_tokens_per_param,
)
from poollab.runlog import EvalPoint, RunRecord
from poollab.scaling import CrossingPoint

CONFIGS = {c.name: c for c in bundled_model_configs()}


def curve_record(label, model, pool_tokens, a, b, c, grid):
    points = tuple(
        EvalPoint(tokens_seen=n, losses={"avg": c + a * n ** (-b)}) for n in grid
    )
    return RunRecord(dataset_label=label, model=model, train_tokens=max(grid),
                     pool_tokens=pool_tokens, eval_points=points)


def part1_single_crossing():
    print("=" * 70)
    print("Part 1: one crossing point from run logs")
    print("=" * 70)
    model = CONFIGS["1B"]
    pool_tokens = 670_000_000
    grid = [2**k * 10**8 for k in range(0, 6)]  # 100M .. 3.2B tokens

    # pool loss decays past the filtered floor; filtered saturates higher
    pool_runs = [curve_record("cc", model, pool_tokens, 14.0, 0.12, 2.2, grid)]
    filtered_runs = [curve_record("refinedweb", model, pool_tokens, 9.0, 0.14, 2.75, grid)]

    cp = crossing_point(pool_runs, filtered_runs, model.total_params, pool_tokens)
    kind = "observed on the eval grid" if cp.observed else "extrapolated"
    print(f"filtered best loss is beaten at {cp.crossing_tokens:.3e} tokens "
          f"({kind}), i.e. {cp.epochs_at_cross:.1f} epochs of the "
          f"{pool_tokens / 1e6:.0f}M-token pool")
    if cp.extreme_epochs:
        print("flagged: beyond the trusted epoch range, treat as unreliable")
    print()


def quadratic_value(coeffs, x):
    c2, c1, c0 = coeffs
    return c2 * x * x + c1 * x + c0


def anchored_world():
    """Per-model crossing quadratics anchored at the reference scale.

    The 1B quadratic interpolates the three reference crossings (1, 3,
    10 epochs at 670M/2B/10B-token pools).  Both threshold laws are
    pinned through the 1B model's constraint points and a 1e30-FLOP
    threshold at a 240T-token pool; the 330M and 7B quadratics are then
    placed consistently with those laws.
    """
    ratio, epoch_count = 600.0, 4.0
    anchors = [(670e6, 670e6), (2e9, 6e9), (10e9, 100e9)]  # (pool, crossing tokens)
    base = fit_crossing_quadratic([
        CrossingPoint(model_params=CONFIGS["1B"].total_params, pool_tokens=int(m),
                      crossing_tokens=n, observed=True)
        for m, n in anchors
    ])
    curvature = base.coeffs[0]
    target = (math.log10(240e12), 30.0)  # (log10 pool, log10 FLOPs) anchor

    def law_through(point):
        (x1, y1), (x2, y2) = point, target
        beta = (y2 - y1) / (x2 - x1)
        return y1 - beta * x1, beta  # (log10 alpha, beta)

    cfg_1b = CONFIGS["1B"]
    # epoch-constraint point of the 1B quadratic
    c2, c1, c0 = base.coeffs
    a2, a1, a0 = c2, c1 - 1.0, c0 - math.log10(epoch_count)
    x_e = min(sorted([(-a1 - math.sqrt(a1 * a1 - 4 * a2 * a0)) / (2 * a2),
                      (-a1 + math.sqrt(a1 * a1 - 4 * a2 * a0)) / (2 * a2)]))
    compute_e = math.log10(6.0 * epoch_count * cfg_1b.total_params) + x_e
    law_epoch = law_through((x_e, compute_e))

    # tokens-per-parameter point of the 1B quadratic
    crossing_t = ratio * cfg_1b.non_embedding_params
    x_t = math.log10(base.invert_smaller_root(crossing_t))
    compute_t = math.log10(6.0 * crossing_t * cfg_1b.total_params)
    law_tpp = law_through((x_t, compute_t))

    crossings_by_model = {cfg_1b.total_params: [
        CrossingPoint(model_params=cfg_1b.total_params, pool_tokens=int(m),
                      crossing_tokens=n, observed=True) for m, n in anchors
    ]}
    for name in ("330M", "7B"):
        cfg = CONFIGS[name]
        m_total = cfg.total_params
        log_a, beta = law_epoch
        x_e = (math.log10(6.0 * epoch_count * m_total) - log_a) / (beta - 1.0)
        y_e = x_e + math.log10(epoch_count)
        log_a, beta = law_tpp
        crossing = ratio * cfg.non_embedding_params
        y_t = math.log10(crossing)
        x_t = (math.log10(6.0 * crossing * m_total) - log_a) / beta
        c1 = (y_t - y_e) / (x_t - x_e) - curvature * (x_t + x_e)
        c0 = y_e - curvature * x_e * x_e - c1 * x_e
        coeffs = (curvature, c1, c0)
        xs = [x_e - 0.4 + i * (x_t - x_e + 0.7) / 3 for i in range(4)]
        crossings_by_model[m_total] = [
            CrossingPoint(model_params=m_total, pool_tokens=int(round(10**x)),
                          crossing_tokens=10 ** quadratic_value(coeffs, math.log10(round(10**x))),
                          observed=True)
            for x in xs
        ]
    return crossings_by_model, ratio, epoch_count


def part2_threshold_laws():
    print("=" * 70)
    print("Part 2: threshold laws extrapolated to a 240T-token pool")
    print("=" * 70)
    crossings_by_model, ratio, epoch_count = anchored_world()

    quads = {}
    for model_params, crossings in sorted(crossings_by_model.items()):
        quad = fit_crossing_quadratic(crossings)
        quads[model_params] = quad
        epochs_list = [f"{c.epochs_at_cross:.1f}" for c in crossings]
        print(f"model {model_params / 1e9:5.2f}B: quadratic through crossings at "
              f"epochs {', '.join(epochs_list)}")

    configs = list(CONFIGS.values())
    tpp = fit_threshold_tokens_per_param(quads, configs, ratio=ratio)
    epoch = fit_threshold_epoch_constraint(quads, epochs=epoch_count)

    print()
    for law, desc in [(tpp, f"{ratio:.0f} tokens per non-embedding parameter"),
                      (epoch, f"{epoch_count:.0f}-epoch constraint")]:
        threshold = extrapolate_compute(law, 240e12)
        print(f"{law.method:18s} ({desc}):")
        print(f"  compute = {law.alpha:.3g} * pool^{law.beta:.4f}   (r2 = {law.r2:.5f})")
        print(f"  240T-token pool threshold: {threshold:.2e} FLOPs")

    gap = abs(math.log10(extrapolate_compute(tpp, 240e12))
              - math.log10(extrapolate_compute(epoch, 240e12)))
    print(f"\nthe two constructions agree to {gap:.2f} orders of magnitude")


if __name__ == "__main__":
    part1_single_crossing()
    part2_threshold_laws()
