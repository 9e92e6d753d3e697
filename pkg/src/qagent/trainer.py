"""Episodic direct policy search.

Parameters are updated by gradient ascent on the episode reward.  The
default optimizer is adaptive-moment gradient ascent (bias-corrected
first/second moments) with a geometric learning-rate decay over the
epoch budget; convergence is defined as exhausting the budget, there is
no early stopping.  Runs are deterministic given the config seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
import torch

from . import framework

OPTIMUM_SLACK = 1e-6


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Objective:
    """A differentiable scalar reward over a flat parameter vector.

    ``optimum``, when known analytically, is asserted as an upper bound on
    every epoch's reward (within OPTIMUM_SLACK).
    """

    reward_fn: Callable[[torch.Tensor], torch.Tensor]
    n_params: int
    name: str = ""
    optimum: Optional[float] = None


def episode_objective(episode: framework.EpisodeSpec, name: str = "",
                      optimum: Optional[float] = None) -> Objective:
    return Objective(lambda p: framework.run_episode(episode, p),
                     episode.n_params, name=name, optimum=optimum)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    learning_rate: float = 0.05
    seed: int = 0
    # "zeros" | ("uniform", r) | ("masked", r) | ("explicit", array)
    # "masked" draws uniform(-r, r) on trainable parameters and starts
    # frozen ones at zero (identity gates), for structured warm starts.
    init: object = ("uniform", 0.1)
    frozen_mask: Optional[np.ndarray] = None
    optimizer: str = "adam"  # "adam" | "sgd"
    # final/initial learning-rate ratio, applied geometrically over epochs
    lr_decay: float = 1e-3

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if not (0 < self.lr_decay <= 1):
            raise ValueError("lr_decay must be in (0, 1]")


@dataclass(frozen=True)
class TrainRecord:
    rewards: np.ndarray        # reward at the start of each epoch
    grad_norms: np.ndarray
    final_params: np.ndarray
    final_reward: float
    config: TrainConfig
    seconds: float

    def log_text(self) -> str:
        """Line-delimited epoch log: epoch, reward, gradient norm."""
        lines = [f"epoch={i} reward={r!r} gnorm={g!r}"
                 for i, (r, g) in enumerate(zip(self.rewards, self.grad_norms))]
        lines.append(f"final reward={self.final_reward!r}")
        return "\n".join(lines) + "\n"


def _init_params(n: int, config: TrainConfig) -> np.ndarray:
    init = config.init
    if isinstance(init, str) and init == "zeros":
        return np.zeros(n)
    if isinstance(init, tuple) and init[0] in ("uniform", "masked"):
        r = float(init[1])
        rng = np.random.default_rng(config.seed)
        p = rng.uniform(-r, r, n)
        if init[0] == "masked":
            if config.frozen_mask is None:
                raise ValueError("masked init requires a frozen_mask")
            p = np.where(np.asarray(config.frozen_mask, dtype=bool), 0.0, p)
        return p
    if isinstance(init, tuple) and init[0] == "explicit":
        p = np.asarray(init[1], dtype=np.float64).copy()
        if p.shape != (n,):
            raise ValueError(f"explicit init has length {p.shape}, need {n}")
        return p
    raise ValueError(f"unknown init spec {init!r}")


def _eval_with_grad(objective: Objective, params: np.ndarray):
    p = torch.tensor(params, requires_grad=True)
    r = objective.reward_fn(p)
    reward = float(r.detach())
    if r.requires_grad:
        r.backward()
    g = (p.grad.detach().numpy().copy() if p.grad is not None
         else np.zeros_like(params))
    return reward, g


def train(objective: Objective, config: TrainConfig) -> TrainRecord:
    """Run the epoch budget of gradient-ascent updates on the reward."""
    if objective.n_params < 1:
        raise ValueError("objective has no trainable parameters")
    t0 = time.perf_counter()
    params = _init_params(objective.n_params, config)
    frozen = config.frozen_mask
    if frozen is not None:
        frozen = np.asarray(frozen, dtype=bool)
        if frozen.shape != params.shape:
            raise ValueError("frozen_mask length mismatch")
    active = ~frozen if frozen is not None else np.ones_like(params, dtype=bool)

    m = np.zeros_like(params)
    v = np.zeros_like(params)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    rewards = np.zeros(config.epochs)
    gnorms = np.zeros(config.epochs)

    for epoch in range(config.epochs):
        reward, g = _eval_with_grad(objective, params)
        if not np.isfinite(reward):
            raise TrainingError(f"non-finite reward at epoch {epoch}")
        if not np.all(np.isfinite(g)):
            bad = int(np.flatnonzero(~np.isfinite(g))[0])
            raise TrainingError(
                f"non-finite gradient at epoch {epoch}, parameter {bad}")
        if objective.optimum is not None and reward > objective.optimum + OPTIMUM_SLACK:
            raise TrainingError(
                f"reward {reward} exceeds analytic optimum "
                f"{objective.optimum} at epoch {epoch}")
        g = np.where(active, g, 0.0)
        rewards[epoch] = reward
        gnorms[epoch] = float(np.linalg.norm(g))

        if config.epochs > 1:
            lr = config.learning_rate * config.lr_decay ** (
                epoch / (config.epochs - 1))
        else:
            lr = config.learning_rate
        if config.optimizer == "adam":
            m = beta1 * m + (1 - beta1) * g
            v = beta2 * v + (1 - beta2) * g * g
            mhat = m / (1 - beta1 ** (epoch + 1))
            vhat = v / (1 - beta2 ** (epoch + 1))
            step = lr * mhat / (np.sqrt(vhat) + eps)
        else:
            step = lr * g
        params = params + np.where(active, step, 0.0)

    final_reward, _ = _eval_with_grad(objective, params)
    return TrainRecord(rewards=rewards, grad_norms=gnorms,
                       final_params=params, final_reward=final_reward,
                       config=config, seconds=time.perf_counter() - t0)


def transfer(record: TrainRecord, n_params: int,
             frozen: Sequence[slice], base: TrainConfig) -> TrainConfig:
    """Config for a new objective that copies the record's final parameters
    into the ``frozen`` slots (in order) and freezes them; the remaining
    slots are initialized per ``base``."""
    init = _init_params(n_params, base)
    mask = np.zeros(n_params, dtype=bool)
    if base.frozen_mask is not None:
        mask |= np.asarray(base.frozen_mask, dtype=bool)
    src = record.final_params
    off = 0
    for s in frozen:
        idx = np.arange(n_params)[s]
        if off + len(idx) > len(src):
            raise ValueError("frozen ranges exceed the source parameter count")
        init[idx] = src[off:off + len(idx)]
        mask[idx] = True
        off += len(idx)
    if off != len(src):
        raise ValueError(
            f"frozen ranges cover {off} parameters, source has {len(src)}")
    return replace(base, init=("explicit", init), frozen_mask=mask)


def warm_start(record: TrainRecord, base: TrainConfig) -> TrainConfig:
    """Continue training from a record's final parameters."""
    return replace(base, init=("explicit", record.final_params.copy()))


def multi_seed(objective: Objective, config: TrainConfig, n_seeds: int):
    """Run ``train`` with seeds seed..seed+n_seeds-1; returns the
    best-reward record plus a per-seed summary list."""
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    best = None
    summary = []
    for k in range(n_seeds):
        cfg = replace(config, seed=config.seed + k)
        rec = train(objective, cfg)
        summary.append({"seed": cfg.seed, "final_reward": rec.final_reward})
        if best is None or rec.final_reward > best.final_reward:
            best = rec
    return best, summary
