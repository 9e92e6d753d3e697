"""Agent-environment formalism: registers, rounds, interactions, episodes.

The global system is split into a private register R_A, a shared message
register R_M and a private register R_B.  An interaction runs T rounds;
in round t agent A acts on R_A (+) R_M, then agent B acts on R_M (+) R_B.
An episode evaluates K interactions (one per input) and scores them with
a single scalar utility over the exact final-state distributions.

Measurement is deferred: interactions return final states and utilities
consume exact Born distributions, which keeps episode rewards
deterministic and differentiable end to end.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
import torch

from . import pqc, statevec
from .statevec import StateVector


class ConfigurationError(ValueError):
    """A policy or layout violates the interaction's register contract."""


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit counts for R_A, R_M, R_B; qubits are numbered A then M then B."""

    n_a: int
    n_m: int
    n_b: int

    def __post_init__(self):
        if min(self.n_a, self.n_m, self.n_b) < 0 or self.n_total < 1:
            raise ConfigurationError("invalid register layout")

    @property
    def n_total(self) -> int:
        return self.n_a + self.n_m + self.n_b

    @property
    def a_indices(self) -> tuple:
        return tuple(range(self.n_a))

    @property
    def m_indices(self) -> tuple:
        return tuple(range(self.n_a, self.n_a + self.n_m))

    @property
    def b_indices(self) -> tuple:
        return tuple(range(self.n_a + self.n_m, self.n_total))

    def basis_index(self, bits: dict) -> int:
        """Basis index with the given qubits set to 1 (qubit 0 = MSB)."""
        idx = 0
        for q, bit in bits.items():
            if q < 0 or q >= self.n_total:
                raise ConfigurationError(f"qubit {q} outside layout")
            if bit:
                idx |= 1 << (self.n_total - 1 - q)
        return idx


@dataclass(frozen=True)
class CircuitPolicy:
    """A (possibly trainable) parameterized circuit placed on an absolute
    qubit window."""

    circuit: pqc.ParamCircuit
    trainable: bool = True
    fixed_params: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.trainable:
            fp = np.asarray(self.fixed_params if self.fixed_params is not None
                            else np.zeros(self.circuit.n_params), dtype=np.float64)
            if fp.shape != (self.circuit.n_params,):
                raise ConfigurationError("fixed parameter length mismatch")
            object.__setattr__(self, "fixed_params", fp)

    @property
    def touched(self) -> frozenset:
        return frozenset(self.circuit.window)

    @property
    def n_params(self) -> int:
        return self.circuit.n_params if self.trainable else 0

    def apply(self, state: StateVector, params=None) -> StateVector:
        if self.trainable:
            return pqc.apply(self.circuit, params, state)
        return pqc.apply(self.circuit, self.fixed_params, state)


@dataclass(frozen=True)
class FixedUnitaryPolicy:
    """A fixed sequence of dense unitaries on listed absolute qubits.

    Used for environment preparations and frozen protocol steps whose
    natural description is a matrix rather than a gate-set circuit.
    """

    ops: tuple  # ((matrix, qubits), ...)

    def __post_init__(self):
        checked = []
        for mat, qubits in self.ops:
            t = torch.as_tensor(np.asarray(mat), dtype=statevec.CDTYPE)
            qs = tuple(int(q) for q in qubits)
            if t.shape != (2 ** len(qs), 2 ** len(qs)):
                raise ConfigurationError("unitary shape does not match qubits")
            eye = torch.eye(t.shape[0], dtype=statevec.CDTYPE)
            if (t.conj().T @ t - eye).abs().max() > 1e-9:
                raise ConfigurationError("fixed operation is not unitary")
            checked.append((t, qs))
        object.__setattr__(self, "ops", tuple(checked))

    @property
    def touched(self) -> frozenset:
        out = set()
        for _, qs in self.ops:
            out.update(qs)
        return frozenset(out)

    @property
    def n_params(self) -> int:
        return 0

    def apply(self, state: StateVector, params=None) -> StateVector:
        for mat, qs in self.ops:
            state = statevec.apply_matrix(state, mat, qs)
        return state


Policy = Union[CircuitPolicy, FixedUnitaryPolicy]


@dataclass(frozen=True)
class InteractionSpec:
    """Register layout plus per-round (A-policy, B-policy) assignments.

    A-policies may touch only R_A and R_M; B-policies only R_M and R_B.
    Either slot may be None (agent skips the round).
    """

    layout: RegisterLayout
    round_policies: tuple  # ((a_policy|None, b_policy|None), ...)

    def __post_init__(self):
        a_ok = set(self.layout.a_indices) | set(self.layout.m_indices)
        b_ok = set(self.layout.m_indices) | set(self.layout.b_indices)
        for t, (pa, pb) in enumerate(self.round_policies):
            if pa is not None and not pa.touched <= a_ok:
                raise ConfigurationError(
                    f"round {t}: A-policy touches {sorted(pa.touched - a_ok)} "
                    "outside R_A+R_M")
            if pb is not None and not pb.touched <= b_ok:
                raise ConfigurationError(
                    f"round {t}: B-policy touches {sorted(pb.touched - b_ok)} "
                    "outside R_M+R_B")

    @property
    def rounds(self) -> int:
        return len(self.round_policies)

    def trainable_policies(self) -> list:
        """Trainable policies in application order (round-major, A then B)."""
        out = []
        for pa, pb in self.round_policies:
            for p in (pa, pb):
                if p is not None and p.n_params > 0:
                    out.append(p)
        return out

    @property
    def n_params(self) -> int:
        return sum(p.n_params for p in self.trainable_policies())

    def param_slices(self) -> list:
        """One slice into the flat episode parameter vector per trainable
        policy, in application order."""
        out = []
        off = 0
        for p in self.trainable_policies():
            out.append(slice(off, off + p.n_params))
            off += p.n_params
        return out


def _prepare(layout: RegisterLayout, prep) -> StateVector:
    if isinstance(prep, StateVector):
        if prep.n_qubits != layout.n_total:
            raise ConfigurationError("prepared state size mismatch")
        return prep
    if isinstance(prep, FixedUnitaryPolicy):
        return prep.apply(StateVector.zero(layout.n_total))
    return StateVector.basis(layout.n_total, prep)


def run_interaction(spec: InteractionSpec, prep, params) -> StateVector:
    """Prepare inputs, run T rounds of (A-unitary, B-unitary), return the
    final state.  ``prep`` is a basis index, a list of basis indices (a
    batched interaction), a FixedUnitaryPolicy, or a StateVector."""
    state = _prepare(spec.layout, prep)
    slices = spec.param_slices()
    i = 0
    if params is not None and not isinstance(params, torch.Tensor):
        params = torch.as_tensor(np.asarray(params, dtype=np.float64))
    for pa, pb in spec.round_policies:
        for p in (pa, pb):
            if p is None:
                continue
            if p.n_params > 0:
                state = p.apply(state, params[slices[i]])
                i += 1
            else:
                state = p.apply(state)
    return state


@dataclass(frozen=True)
class EpisodeSpec:
    """K interactions sharing one InteractionSpec, varying only in input,
    scored by a pure utility over the batched final state."""

    interaction: InteractionSpec
    inputs: tuple
    utility: Callable[[StateVector], torch.Tensor]

    def __post_init__(self):
        if len(self.inputs) < 1:
            raise ConfigurationError("episode needs at least one interaction")

    @property
    def n_params(self) -> int:
        return self.interaction.n_params


def run_episode(episode: EpisodeSpec, params) -> torch.Tensor:
    """Scalar episode reward; deterministic given (episode, params)."""
    preps = list(episode.inputs)
    if all(isinstance(x, (int, np.integer)) for x in preps):
        final = run_interaction(episode.interaction, list(map(int, preps)),
                                params)
    else:
        states = [run_interaction(episode.interaction, x, params)
                  for x in preps]
        final = StateVector(states[0].n_qubits,
                            torch.stack([s.amps for s in states]))
    return episode.utility(final)
