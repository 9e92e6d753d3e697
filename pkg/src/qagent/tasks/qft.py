"""Quantum Fourier transform discovery task.

The agent's circuit is scored on all 2**n computational basis inputs at
once; the reward is the mean output fidelity

    F = mean_j |<QFT j| U(params) |j>| ** 2.

F = 1 exactly when the circuit implements the QFT up to one phase per
basis input, i.e. U = QFT . D for a diagonal phase matrix D (see
``qagent.analysis.diagonal_phase_factor``, which recovers D from a
trained circuit).  The reward is computed from batched state overlaps,
so no dense unitary is ever formed during training.
"""

from __future__ import annotations

import numpy as np
import torch

from .. import framework, pqc, statevec, trainer
from ..statevec import StateVector


def qft_matrix(n: int) -> np.ndarray:
    """Dense QFT on n qubits: F[j, k] = omega**(j*k) / sqrt(N)."""
    if n < 1:
        raise ValueError("need at least one qubit")
    dim = 2 ** n
    j, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    return np.exp(2j * np.pi * j * k / dim) / np.sqrt(dim)


def build_circuit(n: int, depth: int = 1) -> pqc.ParamCircuit:
    """The trainable policy: ``depth`` stacked standard blocks."""
    return pqc.stack(pqc.build_policy(n), depth)


def pyramid_mask(n: int, depth: int = 1) -> np.ndarray:
    """Boolean mask (True = frozen) over the policy's parameter vector
    that keeps only the matchgate-pyramid layer trainable.

    The exact Fourier transform fits inside the pyramid alone (a fused
    matchgate equals a controlled phase followed by a swap), and on six
    qubits the restricted landscape trains far more reliably than the
    full one; the frozen layers stay at zero, i.e. identity.
    """
    block = []
    for kind in pqc.BLOCK_LAYERS:
        _, length = pqc._LAYER_BUILDERS[kind](n, 0)
        block.append(np.full(length, kind != "MatchgatePyramid", dtype=bool))
    return np.tile(np.concatenate(block), depth)


def episode(n: int, depth: int = 1) -> framework.EpisodeSpec:
    layout = framework.RegisterLayout(0, n, 0)
    policy = framework.CircuitPolicy(build_circuit(n, depth))
    spec = framework.InteractionSpec(layout, ((policy, None),))
    target = StateVector.from_amplitudes(qft_matrix(n).T.copy())

    def utility(final: StateVector) -> torch.Tensor:
        o = statevec.overlap(target, final)
        return (o.conj() * o).real.mean()

    return framework.EpisodeSpec(spec, tuple(range(2 ** n)), utility)


def objective(n: int, depth: int = 1) -> trainer.Objective:
    return trainer.episode_objective(episode(n, depth), name=f"qft{n}",
                                     optimum=1.0)


def fidelity(circuit: pqc.ParamCircuit, params) -> float:
    """Mean basis-input fidelity of a circuit against the QFT (the same
    metric as the training reward, from the dense unitary)."""
    u = pqc.circuit_unitary(circuit, params)
    f = qft_matrix(circuit.n_qubits)
    return float(np.mean(np.abs(np.diag(f.conj().T @ u)) ** 2))
