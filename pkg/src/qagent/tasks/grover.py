"""Search-algorithm discovery with a black-box phase-flip oracle.

An agent runs a preparation circuit, then ``queries`` rounds of
(oracle call, post-processing circuit).  The oracle marks one of the
N = 2**n items by flipping its amplitude sign; the reward is the success
probability of reading out the marked item, averaged uniformly over all
N possible marked items.  All N oracle instances are evaluated in one
batched pass.

The parameter vector is laid out [prep, post_0, .., post_{k-1}], which
lets a k-query solution seed the frozen prefix of a (k+1)-query run.
"""

from __future__ import annotations

import math

import numpy as np
import torch

from .. import pqc, statevec, trainer
from ..statevec import StateVector


def build_circuits(n: int, queries: int, depth: int = 1):
    """(prep_circuit, (post_0, .., post_{queries-1})), independent params."""
    if queries < 1:
        raise ValueError("need at least one oracle query")
    block = pqc.stack(pqc.build_policy(n), depth)
    return block, tuple(block for _ in range(queries))


def param_slices(n: int, queries: int, depth: int = 1):
    """Slices of the flat parameter vector: [prep, post_0, .., post_k-1]."""
    b = pqc.stack(pqc.build_policy(n), depth).n_params
    return [slice(i * b, (i + 1) * b) for i in range(queries + 1)]


def success_probability(n: int, queries: int, params,
                        depth: int = 1) -> torch.Tensor:
    """Mean over all marked items w of P(measure w), exact and batched."""
    prep, posts = build_circuits(n, queries, depth)
    slices = param_slices(n, queries, depth)
    dim = 2 ** n
    if not isinstance(params, torch.Tensor):
        params = torch.as_tensor(np.asarray(params, dtype=np.float64))
    state = StateVector.basis(n, [0] * dim)  # batch element w marks item w
    state = pqc.apply(prep, params[slices[0]], state)
    for j, post in enumerate(posts):
        state = statevec.apply_batched_phase_oracle(state, list(range(dim)))
        state = pqc.apply(post, params[slices[j + 1]], state)
    amps = state.amps[torch.arange(dim), torch.arange(dim)]
    return (amps.real ** 2 + amps.imag ** 2).mean()


def objective(n: int, queries: int, depth: int = 1) -> trainer.Objective:
    prep, _ = build_circuits(n, queries, depth)
    return trainer.Objective(
        lambda p: success_probability(n, queries, p, depth),
        n_params=(queries + 1) * prep.n_params,
        name=f"grover{2 ** n}q{queries}",
        optimum=closed_form_success(n, queries),
    )


def canonical_success(n: int, queries: int) -> float:
    """Success probability of the textbook algorithm (uniform preparation,
    oracle, inversion about the mean), computed by direct linear algebra
    independent of the simulator."""
    dim = 2 ** n
    s = np.full(dim, 1.0 / np.sqrt(dim))
    diffusion = 2.0 * np.outer(s, s) - np.eye(dim)
    psi = s.copy()
    for _ in range(queries):
        psi = psi.copy()
        psi[0] = -psi[0]  # marked item w = 0; symmetry makes w irrelevant
        psi = diffusion @ psi
    return float(abs(psi[0]) ** 2)


def closed_form_success(n: int, queries: int) -> float:
    """sin**2((2k+1) * arcsin(1/sqrt(N))): the optimal k-query success."""
    theta = math.asin(2.0 ** (-n / 2))
    return math.sin((2 * queries + 1) * theta) ** 2
