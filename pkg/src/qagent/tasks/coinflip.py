"""Two-round strong coin flipping and its cheating strategies.

Wire map (12 qubits, qubit 0 = MSB):

  R_A (private to Alice)   q0  Alice's coin bit a
                           q1  Alice's record of Bob's announced bit
                           q2-3  Alice's half of the entangled qutrit pair
  R_M (message register)   q4-5  transmitted qutrit
                           q6  Bob's announced-bit wire
                           q7  Alice's reveal wire
  R_B (private to Bob)     q8  Bob's coin bit b
                           q9  Bob's record of Alice's revealed bit
                           q10-11  Bob's qutrit store

A qutrit value t lives on a qubit pair as enc(0)=|10>, enc(1)=|01>,
enc(2)=|00>.  The honest protocol:

  round 1: Alice draws a and prepares (|2,2> + |a,a>)/sqrt(2) across her
           qutrit and the message qutrit; Bob draws b, announces it on
           q6, and stores the message qutrit.
  round 2: Alice records b, reveals a on q7, and sends her qutrit; Bob
           records a and verifies that the two qutrit pairs are in the
           state Alice claimed, uncomputing it to |0000> (any other
           outcome on q4,q5,q10,q11 is an abort).

The coin is c = a xor b; each party reads it from their own coin bit and
record bit.  A cheating party replaces both of their round unitaries and
is scored on forcing c = 0: Bob by P(q0 = q1), Alice by
P(q8 = q9 and no abort).  Both cheat values are capped at 3/4 by the
distinguishability of the two honest message states.
"""

from __future__ import annotations

import numpy as np
import torch

from .. import framework, pqc, statevec, trainer
from ..statevec import StateVector

N_QUBITS = 12
LAYOUT = framework.RegisterLayout(4, 4, 4)
PASS_QUBITS = (4, 5, 10, 11)  # all-zero after honest verification

_ENC = {0: 0b10, 1: 0b01, 2: 0b00}

_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0.0]])
_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0.0]])
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1.0]])


def enc(t: int) -> int:
    """Two-qubit encoding of qutrit value t."""
    return _ENC[t]


def pair_index(t1: int, t2: int) -> int:
    """Basis index of |enc(t1), enc(t2)> on four qubits."""
    return (enc(t1) << 2) | enc(t2)


def honest_message_state(a: int) -> np.ndarray:
    """(|2,2> + |a,a>)/sqrt(2) across (own qutrit, message qutrit)."""
    v = np.zeros(16)
    v[pair_index(2, 2)] = 1 / np.sqrt(2)
    v[pair_index(a, a)] = 1 / np.sqrt(2)
    return v


def householder(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Reflection exchanging unit vectors u and v (needs real <u|v>)."""
    w = u - v
    nrm = np.linalg.norm(w)
    if nrm < 1e-12:
        return np.eye(len(u))
    w = w / nrm
    return np.eye(len(u)) - 2.0 * np.outer(w, w.conj())


def _prep_reflection(a: int) -> np.ndarray:
    e0 = np.zeros(16)
    e0[0] = 1.0
    return householder(e0, honest_message_state(a))


def _controlled(mats) -> np.ndarray:
    """Block-diagonal unitary selecting mats[s] on control value s."""
    d = mats[0].shape[0]
    out = np.zeros((len(mats) * d, len(mats) * d), dtype=complex)
    for s, m in enumerate(mats):
        out[s * d:(s + 1) * d, s * d:(s + 1) * d] = m
    return out


def honest_alice_policies():
    prep = _controlled([_prep_reflection(0), _prep_reflection(1)])
    r1 = framework.FixedUnitaryPolicy(((_H, (0,)), (prep, (0, 2, 3, 4, 5))))
    r2 = framework.FixedUnitaryPolicy(((_CX, (6, 1)), (_CX, (0, 7)),
                                       (_SWAP, (2, 4)), (_SWAP, (3, 5))))
    return r1, r2


def honest_bob_policies():
    verify = _controlled([_prep_reflection(0), _prep_reflection(1)])
    r1 = framework.FixedUnitaryPolicy(((_H, (8,)), (_CX, (8, 6)),
                                       (_SWAP, (4, 10)), (_SWAP, (5, 11))))
    r2 = framework.FixedUnitaryPolicy(((_CX, (7, 9)),
                                       (verify, (9, 4, 5, 10, 11))))
    return r1, r2


def interaction(alice=None, bob=None) -> framework.InteractionSpec:
    """Two-round spec; either side defaults to the honest policy pair."""
    a1, a2 = alice if alice is not None else honest_alice_policies()
    b1, b2 = bob if bob is not None else honest_bob_policies()
    return framework.InteractionSpec(LAYOUT, ((a1, b1), (a2, b2)))


def honest_outcome() -> dict:
    """Exact outcome statistics of fully honest play."""
    with torch.no_grad():
        final = framework.run_interaction(interaction(), 0, None)
        pa = statevec.probabilities(final, (0, 1))
        pb = statevec.probabilities(final, (8, 9))
        ppass = statevec.probabilities(final, PASS_QUBITS)
    return {
        "p_c0": float(pa[0b00] + pa[0b11]),
        "p_c1": float(pa[0b01] + pa[0b10]),
        "p_c0_bob": float(pb[0b00] + pb[0b11]),
        "p_abort": float(1.0 - ppass[0]),
    }


# ---------------------------------------------------------------------------
# cheating
# ---------------------------------------------------------------------------

CHEATERS = ("alice", "bob")


def cheater_windows(cheater: str):
    if cheater == "alice":
        return tuple(range(0, 8))  # R_A + R_M
    if cheater == "bob":
        return tuple(range(4, 12))  # R_M + R_B
    raise ValueError(f"unknown cheater {cheater!r}")


def trainable_cheater_policies(cheater: str, depth: int = 1):
    window = cheater_windows(cheater)
    block = pqc.stack(pqc.build_policy(len(window)), depth)
    circ = block.with_window(window)
    return (framework.CircuitPolicy(circ), framework.CircuitPolicy(circ))


def cheat_interaction(cheater: str, policies) -> framework.InteractionSpec:
    if cheater == "alice":
        return interaction(alice=policies)
    if cheater == "bob":
        return interaction(bob=policies)
    raise ValueError(f"unknown cheater {cheater!r}")


def _bob_cheat_utility(final: StateVector) -> torch.Tensor:
    p = statevec.probabilities(final, (0, 1))
    return (p[..., 0b00] + p[..., 0b11]).mean()


def _alice_cheat_utility(final: StateVector) -> torch.Tensor:
    p = statevec.probabilities(final, PASS_QUBITS + (8, 9))
    return (p[..., 0b000000] + p[..., 0b000011]).mean()


def episode(cheater: str, policies) -> framework.EpisodeSpec:
    utility = (_alice_cheat_utility if cheater == "alice"
               else _bob_cheat_utility)
    return framework.EpisodeSpec(cheat_interaction(cheater, policies), (0,),
                                 utility)


def objective(cheater: str, depth: int = 1) -> trainer.Objective:
    policies = trainable_cheater_policies(cheater, depth)
    return trainer.episode_objective(episode(cheater, policies),
                                     name=f"coinflip_{cheater}",
                                     optimum=0.75)


def cheat_value(cheater: str, policies, params=None) -> float:
    """Exact forcing probability of a concrete cheating policy pair."""
    with torch.no_grad():
        return float(framework.run_episode(episode(cheater, policies), params))


def optimal_alice_policies():
    """Known optimal dishonest Alice: commit to a symmetric superposition
    over all three claim states, then reveal whatever Bob announced."""
    psi = np.zeros(16)
    psi[pair_index(0, 0)] = 1 / np.sqrt(6)
    psi[pair_index(1, 1)] = 1 / np.sqrt(6)
    psi[pair_index(2, 2)] = 2 / np.sqrt(6)
    e0 = np.zeros(16)
    e0[0] = 1.0
    r1 = framework.FixedUnitaryPolicy(((householder(e0, psi), (2, 3, 4, 5)),))
    r2 = framework.FixedUnitaryPolicy(((_CX, (6, 1)), (_CX, (6, 7)),
                                       (_SWAP, (2, 4)), (_SWAP, (3, 5))))
    return r1, r2


def optimal_bob_policies():
    """Known optimal dishonest Bob: store the message qutrit, guess
    Alice's bit from it (certain on enc(0)/enc(1), fair coin on enc(2)),
    and announce the guess."""
    guess = _controlled([_H, _X, np.eye(2), np.eye(2)])
    r1 = framework.FixedUnitaryPolicy(((_SWAP, (4, 10)), (_SWAP, (5, 11)),
                                       (guess, (10, 11, 6))))
    _, r2 = honest_bob_policies()
    return r1, r2


def bob_cheat_bound() -> float:
    """1/2 + ||rho_0 - rho_1||_tr / 4 for the two honest message states:
    the information-theoretic cap on Bob's forcing probability."""
    rhos = []
    for a in (0, 1):
        v = honest_message_state(a).reshape(4, 4)  # (own pair, message pair)
        rhos.append(v.T @ v.conj())
    diff = rhos[0] - rhos[1]
    tracenorm = float(np.sum(np.linalg.svd(diff, compute_uv=False)))
    return 0.5 + tracenorm / 4.0
