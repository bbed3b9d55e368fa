"""Deterministic federated simulation loop and evaluation metrics.

One experiment: generate synthetic data, partition it across clients, poison
the shards named by the attack plan, then run T rounds of broadcast, local
SGD, attack injection, aggregation, and test-set evaluation.  Every random
draw comes from a stream keyed by (master seed, purpose, client, round), so
client i's honest training never depends on what other clients do.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .aggregators import AggregatorSpec, run_rule
from .attacks import AttackContext, AttackPlan, apply_attack_plan, attack_label_flip
from .data import (  # noqa: F401  (re-exported as part of the harness surface)
    LabeledDataset,
    generate_synthetic,
    make_train_test,
    partition_iid,
    partition_label_skew,
)
from .errors import ConfigError, ExperimentError
from .models import ModelSpec, init_params, loss_and_grad, predict_proba
from .params import check_weights


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    local_steps: int = 1  # epochs over the client's shard per round
    batch_size: int = 12
    rounds: int = 100

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.local_steps < 1 or self.batch_size < 1 or self.rounds < 0:
            raise ConfigError("need local_steps >= 1, batch_size >= 1, rounds >= 0")


@dataclass(frozen=True)
class Metrics:
    macro_auc: float
    pairwise_auc: float
    accuracy: float
    skipped_classes: tuple[int, ...] = ()

    def as_dict(self) -> dict[str, float]:
        return {"macro_auc": self.macro_auc, "pairwise_auc": self.pairwise_auc,
                "accuracy": self.accuracy}


@dataclass(frozen=True)
class RoundRecord:
    round: int
    aggregator: str
    weights: np.ndarray | None  # ascending client id; None for order-statistic rules
    attack_kinds: tuple[str, ...]
    metrics: Metrics
    scores: np.ndarray | None = None


def seed_stream(master_seed: int, purpose: str, client: int = 0,
                round_index: int = 0) -> np.random.Generator:
    """Independent generator keyed by (master seed, purpose, client, round)."""
    tag = int.from_bytes(hashlib.sha256(purpose.encode()).digest()[:8], "big")
    return np.random.default_rng(np.random.SeedSequence([master_seed, tag, client, round_index]))


def local_train(model: ModelSpec, params: np.ndarray, data: LabeledDataset,
                cfg: TrainConfig, rng: np.random.Generator) -> np.ndarray:
    """Run ``local_steps`` epochs of seeded mini-batch SGD; returns new params."""
    if params.size != model.param_count:
        raise ConfigError(f"params have {params.size} entries, model needs {model.param_count}")
    theta = params.copy()
    m = len(data)
    for _ in range(cfg.local_steps):
        order = rng.permutation(m)
        for start in range(0, m, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            _, grad = loss_and_grad(model, theta, data.features[batch], data.labels[batch])
            theta -= cfg.learning_rate * grad
    return theta


def binary_rank_auc(scores: np.ndarray, positive: np.ndarray) -> float | None:
    """Mann-Whitney AUC with midrank tie correction; None if one side is empty."""
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def evaluate(model: ModelSpec, params: np.ndarray, test: LabeledDataset) -> Metrics:
    """Macro one-vs-rest AUC, mean pairwise-class AUC, and argmax accuracy.

    Classes (or class pairs) absent from the test set are excluded from the
    means and flagged via ``skipped_classes``.
    """
    proba = predict_proba(model, params, test.features)
    labels = test.labels
    c = test.class_count

    skipped = tuple(k for k in range(c) if not np.any(labels == k))
    per_class = []
    for k in range(c):
        auc = binary_rank_auc(proba[:, k], labels == k)
        if auc is not None:
            per_class.append(auc)
    macro = float(np.mean(per_class)) if per_class else 0.5

    per_pair = []
    for i in range(c):
        for j in range(i + 1, c):
            mask = (labels == i) | (labels == j)
            if not (np.any(labels == i) and np.any(labels == j)):
                continue
            a_ij = binary_rank_auc(proba[mask, i], labels[mask] == i)
            a_ji = binary_rank_auc(proba[mask, j], labels[mask] == j)
            per_pair.append((a_ij + a_ji) / 2.0)
    pairwise = float(np.mean(per_pair)) if per_pair else 0.5

    accuracy = float(np.mean(proba.argmax(axis=1) == labels))
    return Metrics(macro_auc=macro, pairwise_auc=pairwise, accuracy=accuracy,
                   skipped_classes=skipped)


@dataclass(frozen=True)
class SimulationSetup:
    """Everything run_experiment needs, already validated."""

    seed: int
    clients: int
    model: ModelSpec
    train: TrainConfig
    aggregator: AggregatorSpec
    plan: AttackPlan = field(default_factory=AttackPlan)
    samples_per_class: int = 200
    test_per_class: int = 50
    class_separation: float = 6.0
    partition: str = "iid"  # or "label_skew"
    skew_alpha: float = 0.5

    def __post_init__(self):
        if self.clients < 2:
            raise ConfigError(f"need at least 2 clients, got {self.clients}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.partition not in ("iid", "label_skew"):
            raise ConfigError(f"unknown partition {self.partition!r}")
        if self.samples_per_class < 1 or self.test_per_class < 1:
            raise ConfigError("need samples_per_class >= 1 and test_per_class >= 1")
        bad = [i for i in self.plan.assignments if not 0 <= i < self.clients]
        if bad:
            raise ConfigError(f"attack plan names unknown clients: {bad}")
        if len(self.plan.assignments) >= self.clients:
            raise ConfigError("attack plan must leave at least one honest client")
        if self.aggregator.kind == "krum":
            f = self.aggregator.resolve_krum_f(self.clients)
            if self.clients - f - 2 < 1:
                raise ConfigError(f"krum needs n - f - 2 >= 1, got n={self.clients}, f={f}")
        if self.aggregator.kind == "trimmed_mean":
            k = int(self.aggregator.trim_fraction * self.clients)
            if self.clients - 2 * k < 1:
                raise ConfigError(f"trim_fraction {self.aggregator.trim_fraction} removes "
                                  f"all {self.clients} values")


def prepare_shards(setup: SimulationSetup) -> tuple[list[LabeledDataset], LabeledDataset]:
    """Generate data, split train/test, partition, and poison label-flip shards."""
    rng_data = seed_stream(setup.seed, "data")
    train, test = make_train_test(setup.model.class_count, setup.model.input_dim,
                                  setup.samples_per_class, setup.test_per_class,
                                  setup.class_separation, rng_data)
    rng_part = seed_stream(setup.seed, "partition")
    if setup.partition == "iid":
        shards = partition_iid(train, setup.clients, rng_part)
    else:
        shards = partition_label_skew(train, setup.clients, setup.skew_alpha, rng_part)
    for cid, flip in setup.plan.label_flip_items():
        shards[cid] = attack_label_flip(shards[cid], flip.source, flip.target,
                                        flip.fraction, seed_stream(setup.seed, "labelflip", cid))
    return shards, test


def run_experiment(setup: SimulationSetup) -> list[RoundRecord]:
    """Algorithm loop: broadcast, local training, attack injection, aggregate,
    evaluate.  Fully deterministic under the master seed."""
    shards, test = prepare_shards(setup)
    theta = init_params(setup.model, seed_stream(setup.seed, "init"))
    attack_names = tuple(setup.plan.kind_name_for(i) for i in range(setup.clients))

    records: list[RoundRecord] = []
    for t in range(setup.train.rounds):
        try:
            honest = {
                cid: local_train(setup.model, theta, shards[cid], setup.train,
                                 seed_stream(setup.seed, "train", cid, t))
                for cid in range(setup.clients)
            }
            context = AttackContext(
                rng_for=lambda cid, _t=t: seed_stream(setup.seed, "attack", cid, _t),
                global_prev=theta,
            )
            updates = apply_attack_plan(setup.plan, honest, context)
            result = run_rule(setup.aggregator, updates)
            if result.weights is not None:
                check_weights(result.weights)
            theta = result.new_global
            metrics = evaluate(setup.model, theta, test)
        except Exception as exc:
            raise ExperimentError(f"round {t} failed: {exc}") from exc
        records.append(RoundRecord(round=t, aggregator=setup.aggregator.kind,
                                   weights=result.weights, attack_kinds=attack_names,
                                   metrics=metrics, scores=result.scores))
    return records
