"""Two-player nonlocal games played through the register formalism.

Layout: R_A = {q0} holds player A's input bit, R_M = {q1, q2} holds a
shared two-qubit resource (q1 is A's half, q2 is B's half), R_B = {q3}
holds B's input bit.  Round 1 prepares the shared resource on (q1, q2)
before any input-dependent gate can act, so it cannot depend on the
inputs.  Round 2 applies A's local strategy on (q0, q1) and B's on
(q2, q3).  Outputs are the Born marginals of (q1, q2); payoffs are
averaged over the four equally likely input pairs.

Games:

* ``chsh``        - both players score 1 iff y_A xor y_B = x_A and x_B.
* ``conflicting`` - same win condition, but the spoils are split
  unevenly: on x_A and x_B = 0 a win pays (1, 1/2) for outputs (0, 0)
  and (1/2, 1) for (1, 1); on x_A and x_B = 1 a win pays (3/4, 3/4).
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import torch

from .. import framework, pqc, statevec, trainer
from ..statevec import StateVector

GAMES = ("chsh", "conflicting")

LAYOUT = framework.RegisterLayout(1, 2, 1)


def payoff_matrices(game: str):
    """(U_A, U_B) with rows indexed by input pair x_A x_B and columns by
    output pair y_A y_B."""
    if game not in GAMES:
        raise ValueError(f"unknown game {game!r}")
    u_a = np.zeros((4, 4))
    u_b = np.zeros((4, 4))
    for xa, xb, ya, yb in itertools.product((0, 1), repeat=4):
        if (ya ^ yb) != (xa & xb):
            continue
        row, col = 2 * xa + xb, 2 * ya + yb
        if game == "chsh":
            u_a[row, col] = u_b[row, col] = 1.0
        elif xa & xb:
            u_a[row, col] = u_b[row, col] = 0.75
        elif ya == 0:
            u_a[row, col], u_b[row, col] = 1.0, 0.5
        else:
            u_a[row, col], u_b[row, col] = 0.5, 1.0
    return u_a, u_b


def input_states():
    """Basis preparations for the four input pairs, in row order."""
    return tuple(LAYOUT.basis_index({0: xa, 3: xb})
                 for xa in (0, 1) for xb in (0, 1))


def interaction(shared, a_local, b_local) -> framework.InteractionSpec:
    """Shared preparation in round 1 (A's slot, message register only),
    then both local strategies in round 2."""
    return framework.InteractionSpec(
        LAYOUT, ((shared, None), (a_local, b_local)))


def trainable_interaction(depth: int = 1) -> framework.InteractionSpec:
    block = pqc.stack(pqc.build_policy(2), depth)
    return interaction(
        framework.CircuitPolicy(block.with_window((1, 2))),
        framework.CircuitPolicy(block.with_window((0, 1))),
        framework.CircuitPolicy(block.with_window((2, 3))),
    )


def _payoff_terms(game: str):
    u_a, u_b = payoff_matrices(game)
    return torch.as_tensor(u_a), torch.as_tensor(u_b)


def episode(spec: framework.InteractionSpec, game: str) -> framework.EpisodeSpec:
    """Reward = F_A + F_B, the players' summed expected payoffs."""
    t_a, t_b = _payoff_terms(game)

    def utility(final: StateVector) -> torch.Tensor:
        probs = statevec.probabilities(final, (1, 2))
        return ((probs * t_a).sum(dim=-1) + (probs * t_b).sum(dim=-1)).mean()

    return framework.EpisodeSpec(spec, input_states(), utility)


def expected_payoffs(spec: framework.InteractionSpec, params, game: str):
    """(F_A, F_B) for a strategy, exact."""
    t_a, t_b = _payoff_terms(game)
    with torch.no_grad():
        final = framework.run_interaction(spec, list(input_states()), params)
        probs = statevec.probabilities(final, (1, 2))
        return (float((probs * t_a).sum(dim=-1).mean()),
                float((probs * t_b).sum(dim=-1).mean()))


def objective(game: str, depth: int = 1) -> trainer.Objective:
    spec = trainable_interaction(depth)
    cos2 = math.cos(math.pi / 8) ** 2
    optimum = 2 * cos2 if game == "chsh" else 1.5 * cos2
    return trainer.episode_objective(episode(spec, game), name=game,
                                     optimum=optimum)


def optimal_policies():
    """A known optimal strategy in the native gate set: a maximally
    entangled resource plus input-controlled local rotations.  Wins with
    probability cos(pi/8)**2 on every game in this module."""
    shared = framework.CircuitPolicy(
        pqc.fixed_circuit(2, [("u", (0,), (math.pi / 2, math.pi)),
                              ("cry", (0, 1), (math.pi,))],
                          window=(1, 2)),
        trainable=False)
    a_local = framework.CircuitPolicy(
        pqc.fixed_circuit(2, [("cry", (0, 1), (-math.pi / 2,))],
                          window=(0, 1)),
        trainable=False)
    b_local = framework.CircuitPolicy(
        pqc.fixed_circuit(2, [("u", (0,), (-math.pi / 4, 0.0)),
                              ("cry", (1, 0), (math.pi / 2,))],
                          window=(2, 3)),
        trainable=False)
    return shared, a_local, b_local


def classical_game_bound(game: str):
    """Best deterministic classical strategies, by enumeration.

    Returns (max of F_A + F_B, max of min(F_A, F_B)) over all 16 pairs of
    deterministic response functions.
    """
    u_a, u_b = payoff_matrices(game)
    best_sum = 0.0
    best_min = 0.0
    funcs = list(itertools.product((0, 1), repeat=2))  # f = (f(0), f(1))
    for f, g in itertools.product(funcs, funcs):
        f_a = f_b = 0.0
        for xa, xb in itertools.product((0, 1), repeat=2):
            col = 2 * f[xa] + g[xb]
            f_a += u_a[2 * xa + xb, col] / 4
            f_b += u_b[2 * xa + xb, col] / 4
        best_sum = max(best_sum, f_a + f_b)
        best_min = max(best_min, min(f_a, f_b))
    return best_sum, best_min
