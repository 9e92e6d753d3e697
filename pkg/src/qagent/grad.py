"""Exact gradients of scalar rewards with respect to circuit parameters.

Rewards are evaluated by reverse-mode differentiation through the
simulator primitives (all of :mod:`qagent.statevec` is built on torch
complex tensors, so any composition of them is traversable).  The
contract is accuracy: analytic gradients must match central finite
differences, which live here as the verification oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch


class DifferentiationError(RuntimeError):
    """A reward function invoked a non-differentiable primitive."""


def _reward_value(reward_fn, p: torch.Tensor) -> torch.Tensor:
    r = reward_fn(p)
    if not isinstance(r, torch.Tensor):
        r = torch.as_tensor(r, dtype=torch.float64)
    if r.numel() != 1:
        raise ValueError("reward function must return a scalar")
    if r.is_complex():
        raise ValueError("reward must be real-valued")
    return r.reshape(())


def gradient(reward_fn, params) -> np.ndarray:
    """d reward / d params, one entry per parameter (radians)."""
    p = torch.tensor(np.asarray(params, dtype=np.float64), requires_grad=True)
    try:
        r = _reward_value(reward_fn, p)
        if r.requires_grad:
            r.backward()
    except RuntimeError as exc:
        raise DifferentiationError(
            f"reward function is not differentiable: {exc}") from exc
    if p.grad is None:
        return np.zeros(p.shape[0])
    g = p.grad.detach().numpy().copy()
    if not np.all(np.isfinite(g)):
        bad = int(np.flatnonzero(~np.isfinite(g))[0])
        raise DifferentiationError(f"non-finite gradient at parameter {bad}")
    return g


def reward_value(reward_fn, params) -> float:
    """Evaluate the reward without building a graph."""
    with torch.no_grad():
        p = torch.as_tensor(np.asarray(params, dtype=np.float64))
        return float(_reward_value(reward_fn, p))


def finite_difference(reward_fn, params, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient; test/diagnostic oracle only."""
    if h <= 0:
        raise ValueError("step h must be positive")
    p = np.asarray(params, dtype=np.float64)
    g = np.zeros_like(p)
    with torch.no_grad():
        for i in range(len(p)):
            hi = p.copy()
            lo = p.copy()
            hi[i] += h
            lo[i] -= h
            rp = float(_reward_value(reward_fn, torch.as_tensor(hi)))
            rm = float(_reward_value(reward_fn, torch.as_tensor(lo)))
            g[i] = (rp - rm) / (2 * h)
    return g


@dataclass(frozen=True)
class GradientCheck:
    max_abs_error: float
    worst_index: int
    ok: bool

    def __str__(self):
        status = "OK" if self.ok else "MISMATCH"
        return (f"gradient check {status}: max abs error "
                f"{self.max_abs_error:.3e} at parameter {self.worst_index}")


def check_gradient(reward_fn, params, h: float = 1e-5,
                   tol: float = 1e-5) -> GradientCheck:
    """Compare analytic and finite-difference gradients, reporting the
    worst parameter index."""
    ga = gradient(reward_fn, params)
    gf = finite_difference(reward_fn, params, h)
    if len(ga) == 0:
        return GradientCheck(0.0, -1, True)
    err = np.abs(ga - gf)
    worst = int(np.argmax(err))
    return GradientCheck(float(err[worst]), worst, bool(err[worst] < tol))
