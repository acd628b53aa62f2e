"""Training-run records: ingestion, validation, and derived quantities.

Runs are consumed as JSONL, one record per line.  This package never
trains anything; it computes compute (6 * tokens * params), epochs
(train tokens / pool tokens), best-checkpoint losses, and positional
loss slices from externally produced logs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ValidationError

DEFAULT_BATCH_TOKENS = 2**19
DEFAULT_CONTEXT_LENGTH = 1024


@dataclass(frozen=True)
class ModelConfig:
    name: str
    hidden_dim: int
    layers: int
    heads: int
    head_dim: int
    ffn_dim: int
    vocab_size: int
    total_params: int
    non_embedding_params: int

    def __post_init__(self) -> None:
        if self.hidden_dim != self.heads * self.head_dim:
            raise ValidationError(
                f"{self.name}: hidden_dim {self.hidden_dim} != heads*head_dim "
                f"{self.heads * self.head_dim}"
            )
        if self.total_params <= 0 or self.non_embedding_params <= 0:
            raise ValidationError(f"{self.name}: parameter counts must be positive")
        if self.non_embedding_params > self.total_params:
            raise ValidationError(f"{self.name}: non_embedding_params exceeds total_params")


def non_embedding_params(cfg: ModelConfig) -> int:
    """Parameter count excluding the embedding/unembedding tables.

    Accounting: per layer 4*hidden^2 attention (QKVO) plus 3*hidden*ffn
    gated feed-forward, plus (2*layers + 1)*hidden normalization weights.
    """
    if min(cfg.hidden_dim, cfg.layers, cfg.ffn_dim) <= 0:
        raise ValidationError("all dims must be positive")
    per_layer = 4 * cfg.hidden_dim**2 + 3 * cfg.hidden_dim * cfg.ffn_dim
    return cfg.layers * per_layer + (2 * cfg.layers + 1) * cfg.hidden_dim

#: Human-readable record of the accounting above, embedded in outputs.
NON_EMBEDDING_FORMULA = (
    "layers*(4*hidden_dim^2 + 3*hidden_dim*ffn_dim) + (2*layers + 1)*hidden_dim"
)


@dataclass(frozen=True)
class EvalPoint:
    tokens_seen: int
    losses: dict[str, float]
    benchmarks: dict[str, float] | None = None


@dataclass(frozen=True)
class RunRecord:
    dataset_label: str
    model: ModelConfig
    train_tokens: int
    pool_tokens: int
    eval_points: tuple[EvalPoint, ...]
    batch_tokens: int = DEFAULT_BATCH_TOKENS
    weight_decay: float = 0.1
    learning_rate: float = 5e-3

    def __post_init__(self) -> None:
        if not self.eval_points:
            raise ValidationError(f"{self.dataset_label}: record has no eval points")
        seen = [p.tokens_seen for p in self.eval_points]
        if any(b < a for a, b in zip(seen, seen[1:])):
            raise ValidationError(f"{self.dataset_label}: eval_points not sorted by tokens_seen")
        for point in self.eval_points:
            if any(v <= 0 for v in point.losses.values()):
                raise ValidationError(
                    f"{self.dataset_label}: non-positive loss at tokens_seen={point.tokens_seen}"
                )
        if self.train_tokens < max(seen):
            raise ValidationError(
                f"{self.dataset_label}: train_tokens {self.train_tokens} < last eval "
                f"tokens_seen {max(seen)}"
            )


def compute_flops(record: RunRecord) -> float:
    """Training compute under the 6 * tokens * params approximation."""
    if record.train_tokens <= 0:
        raise ValidationError("train_tokens must be positive")
    return 6.0 * record.train_tokens * record.model.total_params


def epochs(record: RunRecord) -> float:
    """Passes over the pool: train_tokens / pool_tokens."""
    if record.pool_tokens <= 0:
        raise ValidationError("pool_tokens must be positive")
    return record.train_tokens / record.pool_tokens


def point_loss(point: EvalPoint, eval_sets: Sequence[str]) -> float:
    missing = [s for s in eval_sets if s not in point.losses]
    if missing:
        raise ValidationError(
            f"eval point at tokens_seen={point.tokens_seen} missing sets {missing}"
        )
    return sum(point.losses[s] for s in eval_sets) / len(eval_sets)


def best_eval(record: RunRecord, eval_sets: Sequence[str] | None = None) -> float:
    """Best-checkpoint loss: min over eval points of the mean across sets.

    ``eval_sets`` defaults to every set present at the first eval point;
    each point must carry all requested sets.
    """
    sets = list(eval_sets) if eval_sets else sorted(record.eval_points[0].losses)
    if not sets:
        raise ValidationError("record has no eval sets")
    return min(point_loss(p, sets) for p in record.eval_points)


def best_achievable(records: Sequence[RunRecord], eval_sets: Sequence[str] | None = None) -> float:
    """Best loss over a dataset's (model size, step count) sweep."""
    if not records:
        raise ValidationError("best_achievable requires at least one record")
    labels = {r.dataset_label for r in records}
    if len(labels) > 1:
        raise ValidationError(f"records span multiple dataset labels: {sorted(labels)}")
    return min(best_eval(r, eval_sets) for r in records)


@dataclass(frozen=True)
class EvalSlice:
    """Mean loss at each context position for one evaluation."""

    position_losses: tuple[float, ...]
    context_length: int = DEFAULT_CONTEXT_LENGTH

    def __post_init__(self) -> None:
        if len(self.position_losses) != self.context_length:
            raise ValidationError(
                f"position_losses length {len(self.position_losses)} != "
                f"context_length {self.context_length}"
            )
        if any(v < 0 for v in self.position_losses):
            raise ValidationError("position losses must be non-negative")


def slice_loss(slc: EvalSlice, t: int) -> float:
    """Mean loss over the first ``t`` context positions (1 <= t <= length)."""
    if not 1 <= t <= slc.context_length:
        raise ValidationError(f"t must be in [1, {slc.context_length}], got {t}")
    return sum(slc.position_losses[:t]) / t


# ---------------------------------------------------------------------------
# JSONL serialization.
# ---------------------------------------------------------------------------


def record_to_dict(record: RunRecord) -> dict:
    return {
        "dataset_label": record.dataset_label,
        "model": {
            "name": record.model.name,
            "hidden_dim": record.model.hidden_dim,
            "layers": record.model.layers,
            "heads": record.model.heads,
            "head_dim": record.model.head_dim,
            "ffn_dim": record.model.ffn_dim,
            "vocab_size": record.model.vocab_size,
            "total_params": record.model.total_params,
            "non_embedding_params": record.model.non_embedding_params,
        },
        "train_tokens": record.train_tokens,
        "pool_tokens": record.pool_tokens,
        "batch_tokens": record.batch_tokens,
        "eval_points": [
            {
                "tokens_seen": p.tokens_seen,
                "losses": dict(p.losses),
                **({"benchmarks": dict(p.benchmarks)} if p.benchmarks else {}),
            }
            for p in record.eval_points
        ],
        "weight_decay": record.weight_decay,
        "learning_rate": record.learning_rate,
    }


def record_from_dict(obj: dict) -> RunRecord:
    try:
        model = ModelConfig(**obj["model"])
        eval_points = tuple(
            EvalPoint(
                tokens_seen=p["tokens_seen"],
                losses={str(k): float(v) for k, v in p["losses"].items()},
                benchmarks=(
                    {str(k): float(v) for k, v in p["benchmarks"].items()}
                    if p.get("benchmarks")
                    else None
                ),
            )
            for p in obj["eval_points"]
        )
        return RunRecord(
            dataset_label=obj["dataset_label"],
            model=model,
            train_tokens=int(obj["train_tokens"]),
            pool_tokens=int(obj["pool_tokens"]),
            eval_points=eval_points,
            batch_tokens=int(obj.get("batch_tokens", DEFAULT_BATCH_TOKENS)),
            weight_decay=float(obj.get("weight_decay", 0.1)),
            learning_rate=float(obj.get("learning_rate", 5e-3)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed run record: {exc}") from exc


@dataclass
class LineError:
    lineno: int
    message: str


def parse_run_log(path: str | Path) -> tuple[list[RunRecord], list[LineError]]:
    """Parse a JSONL run log, collecting malformed lines with line numbers."""
    records: list[RunRecord] = []
    errors: list[LineError] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(record_from_dict(json.loads(line)))
            except json.JSONDecodeError as exc:
                errors.append(LineError(lineno, f"invalid JSON: {exc}"))
            except ValidationError as exc:
                errors.append(LineError(lineno, str(exc)))
    return records, errors


def load_run_log(path: str | Path) -> list[RunRecord]:
    """Parse a run log, raising if any line is malformed."""
    records, errors = parse_run_log(path)
    if errors:
        detail = "; ".join(f"line {e.lineno}: {e.message}" for e in errors[:5])
        more = f" (+{len(errors) - 5} more)" if len(errors) > 5 else ""
        raise ValidationError(f"{path}: {len(errors)} malformed line(s): {detail}{more}")
    return records


def write_run_log(path: str | Path, records: Iterable[RunRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), sort_keys=True) + "\n")


def bundled_model_configs() -> list[ModelConfig]:
    """The five reference model configurations shipped with the package."""
    data = resources.files("poollab.data").joinpath("model_configs.json").read_text("utf-8")
    return [ModelConfig(**obj) for obj in json.loads(data)]
