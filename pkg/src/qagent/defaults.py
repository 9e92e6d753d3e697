"""Per-task default configurations and the task registry.

Every benchmark task is registered here with its objective builder, its
tuned training configuration, the analytic optimum of its headline
metric, and (where applicable) the task it warm-starts from.  The CLI
and the acceptance suite both read this table, so a configuration change
propagates everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from . import trainer
from .tasks import coinflip, games, grover, qft

COS2_PI_8 = math.cos(math.pi / 8) ** 2


@dataclass(frozen=True)
class TaskSpec:
    """Registry entry: how to build, train and score one benchmark task."""

    name: str
    description: str
    build: Callable[[], trainer.Objective]
    config: trainer.TrainConfig
    optimal: float                  # analytic optimum of the headline metric
    n_seeds: int = 1                # best-of-n restarts
    depth: int = 1                  # stacked policy blocks
    transfer_from: Optional[str] = None
    # metric(record) -> {"name": value}; default reports the reward
    metrics: Optional[Callable] = None
    # parts() -> [(label, ParamCircuit), ...] in parameter-vector order
    parts: Optional[Callable] = None


def _cfg(**kw) -> trainer.TrainConfig:
    base = dict(epochs=300, learning_rate=0.1, seed=0,
                init=("uniform", math.pi), lr_decay=1e-3)
    base.update(kw)
    return trainer.TrainConfig(**base)


def _game_metrics(game):
    def metrics(record):
        spec = games.trainable_interaction()
        f_a, f_b = games.expected_payoffs(spec, record.final_params, game)
        return {"payoff_a": f_a, "payoff_b": f_b}
    return metrics


def _qft_parts(n, depth):
    return lambda: [("policy", qft.build_circuit(n, depth))]


def _grover_parts(n, queries, depth):
    def parts():
        prep, posts = grover.build_circuits(n, queries, depth)
        return [("prep", prep)] + [(f"post{j}", c)
                                   for j, c in enumerate(posts)]
    return parts


def _coinflip_parts(cheater):
    def parts():
        r1, r2 = coinflip.trainable_cheater_policies(cheater)
        return [("round1", r1.circuit), ("round2", r2.circuit)]
    return parts


def _game_parts():
    spec = games.trainable_interaction()
    pols = spec.trainable_policies()
    return [("shared", pols[0].circuit), ("alice", pols[1].circuit),
            ("bob", pols[2].circuit)]


TASKS = {}


def _register(spec: TaskSpec):
    TASKS[spec.name] = spec


_register(TaskSpec(
    name="qft4",
    description="discover the 4-qubit Fourier transform",
    build=lambda: qft.objective(4, depth=2),
    config=_cfg(learning_rate=0.3, lr_decay=0.1, seed=1),
    optimal=1.0,
    depth=2,
    parts=_qft_parts(4, 2),
))

_register(TaskSpec(
    name="qft6",
    description="discover the 6-qubit Fourier transform (pyramid layer only)",
    build=lambda: qft.objective(6, depth=1),
    config=_cfg(epochs=600, learning_rate=0.3, lr_decay=0.1,
                init=("masked", math.pi), frozen_mask=qft.pyramid_mask(6)),
    optimal=1.0,
    n_seeds=5,
    parts=_qft_parts(6, 1),
))

_register(TaskSpec(
    name="grover4x1",
    description="one-query search over 4 items",
    build=lambda: grover.objective(2, 1, depth=2),
    config=_cfg(),
    optimal=grover.closed_form_success(2, 1),
    depth=2,
    parts=_grover_parts(2, 1, 2),
))

_register(TaskSpec(
    name="grover8x1",
    description="one-query search over 8 items",
    build=lambda: grover.objective(3, 1, depth=2),
    config=_cfg(epochs=1000, learning_rate=0.2, lr_decay=1e-2),
    optimal=grover.closed_form_success(3, 1),
    depth=2,
    parts=_grover_parts(3, 1, 2),
))

_register(TaskSpec(
    name="grover8x2",
    description="two-query search over 8 items, seeded by grover8x1",
    build=lambda: grover.objective(3, 2, depth=2),
    config=_cfg(epochs=2000, lr_decay=1e-2),
    optimal=grover.closed_form_success(3, 2),
    depth=2,
    transfer_from="grover8x1",
    parts=_grover_parts(3, 2, 2),
))

_register(TaskSpec(
    name="coinflip-alice",
    description="optimal cheating Alice in the coin-flipping protocol",
    build=lambda: coinflip.objective("alice"),
    config=_cfg(epochs=1000, learning_rate=0.2, lr_decay=1e-2,
                init=("uniform", 0.1)),
    optimal=0.75,
    parts=_coinflip_parts("alice"),
))

_register(TaskSpec(
    name="coinflip-bob",
    description="optimal cheating Bob in the coin-flipping protocol",
    build=lambda: coinflip.objective("bob"),
    config=_cfg(epochs=400, init=("uniform", 0.1)),
    optimal=0.75,
    parts=_coinflip_parts("bob"),
))

_register(TaskSpec(
    name="chsh",
    description="optimal strategy for the CHSH game",
    build=lambda: games.objective("chsh"),
    config=_cfg(),
    optimal=COS2_PI_8,
    metrics=_game_metrics("chsh"),
    parts=_game_parts,
))

_register(TaskSpec(
    name="conflicting",
    description="optimal fair strategy for the conflicting-interest game",
    build=lambda: games.objective("conflicting"),
    config=_cfg(epochs=500, learning_rate=0.05, seed=1, init=("uniform", 0.1)),
    optimal=0.75 * COS2_PI_8,
    metrics=_game_metrics("conflicting"),
    parts=_game_parts,
))


def get(name: str) -> TaskSpec:
    if name not in TASKS:
        raise KeyError(f"unknown task {name!r}; choose from "
                       + ", ".join(sorted(TASKS)))
    return TASKS[name]


def task_metric(spec: TaskSpec, record: trainer.TrainRecord) -> dict:
    """Headline metric(s) of a trained record."""
    if spec.metrics is not None:
        return spec.metrics(record)
    return {"reward": record.final_reward}


def circuit_dumps(spec: TaskSpec, record: trainer.TrainRecord) -> dict:
    """Rendered text of each trained circuit part, keyed by label."""
    from . import pqc
    if spec.parts is None:
        return {}
    out = {}
    off = 0
    for label, circuit in spec.parts():
        p = record.final_params[off:off + circuit.n_params]
        out[label] = pqc.render(circuit, p)
        off += circuit.n_params
    return out


def run_task(name: str, config: trainer.TrainConfig = None,
             records: dict = None) -> trainer.TrainRecord:
    """Train a registry task with its defaults (or an override config),
    resolving warm-start dependencies recursively.  ``records`` caches
    completed prerequisite records across calls.
    """
    spec = get(name)
    cfg = config if config is not None else spec.config
    objective = spec.build()
    if spec.transfer_from is not None:
        if records is not None and spec.transfer_from in records:
            src = records[spec.transfer_from]
        else:
            src = run_task(spec.transfer_from, records=records)
            if records is not None:
                records[spec.transfer_from] = src
        n_frozen = len(src.final_params)
        cfg = trainer.transfer(src, objective.n_params,
                               [slice(0, n_frozen)], cfg)
    if spec.n_seeds > 1:
        record, _ = trainer.multi_seed(objective, cfg, spec.n_seeds)
    else:
        record = trainer.train(objective, cfg)
    if records is not None:
        records[name] = record
    return record
