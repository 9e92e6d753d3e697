"""Exact complex state-vector simulation of the three parameterized gates.

Conventions, stated once and enforced everywhere:

* Qubit 0 is the most significant bit of a basis index (the top wire of a
  circuit diagram).  Basis index ``b`` on ``n`` qubits therefore means
  qubit ``q`` is in state ``(b >> (n - 1 - q)) & 1``.
* Amplitudes are complex128.  Rewards are exact Born probabilities; there
  is no shot sampling anywhere in this package.
* Global phase is physically meaningless.  Equality claims about circuits
  use the phase-invariant metrics in :mod:`qagent.analysis`.

Amplitude arrays are torch tensors so that any reward built from these
primitives is differentiable end to end (see :mod:`qagent.grad`).  A
leading batch dimension is supported: ``amps`` has shape ``(2**n,)`` or
``(B, 2**n)``, and every operation maps over the batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

CDTYPE = torch.complex128
RDTYPE = torch.float64

_NORM_TOL = 1e-10


def _scalar(x) -> torch.Tensor:
    """Coerce an angle to a float64 scalar tensor, preserving autograd."""
    if isinstance(x, torch.Tensor):
        return x.to(RDTYPE)
    return torch.tensor(float(x), dtype=RDTYPE)


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude array over ``n_qubits`` qubits.

    Treat instances as immutable: every operation returns a new state.
    """

    n_qubits: int
    amps: torch.Tensor

    def __post_init__(self):
        dim = 2 ** self.n_qubits
        if self.amps.shape[-1] != dim:
            raise ValueError(
                f"amplitude length {self.amps.shape[-1]} != 2**{self.n_qubits}"
            )
        if self.amps.dtype != CDTYPE:
            object.__setattr__(self, "amps", self.amps.to(CDTYPE))
        norms = torch.linalg.vector_norm(self.amps.detach(), dim=-1)
        if not torch.all((norms - 1.0).abs() < _NORM_TOL):
            raise ValueError("state vector is not normalized")

    @property
    def batch_shape(self) -> tuple:
        return tuple(self.amps.shape[:-1])

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        return cls.basis(n_qubits, 0)

    @classmethod
    def basis(cls, n_qubits: int, index) -> "StateVector":
        """Computational basis state(s).  ``index`` may be an int or a list
        of ints, the latter producing a batched state."""
        dim = 2 ** n_qubits
        idx = np.atleast_1d(np.asarray(index, dtype=np.int64))
        if np.any(idx < 0) or np.any(idx >= dim):
            raise ValueError(f"basis index out of range for {n_qubits} qubits")
        amps = torch.zeros((len(idx), dim), dtype=CDTYPE)
        amps[np.arange(len(idx)), idx] = 1.0
        if np.isscalar(index) or np.asarray(index).ndim == 0:
            amps = amps[0]
        return cls(n_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amps) -> "StateVector":
        t = torch.as_tensor(np.asarray(amps), dtype=CDTYPE)
        n = int(round(np.log2(t.shape[-1])))
        return cls(n, t)

    def numpy(self) -> np.ndarray:
        return self.amps.detach().numpy()


# ---------------------------------------------------------------------------
# gate matrices
# ---------------------------------------------------------------------------

def u_matrix(theta, phi) -> torch.Tensor:
    """2x2 single-qubit rotation/phase-shift matrix.

    Equals RY(theta) . PhaseShift(phi); U(pi/2, pi) = H, U(pi, pi) = X.
    """
    theta, phi = _scalar(theta), _scalar(phi)
    c = torch.cos(theta / 2).to(CDTYPE)
    s = torch.sin(theta / 2).to(CDTYPE)
    e = torch.exp(1j * phi.to(CDTYPE))
    return torch.stack(
        [torch.stack([c, -e * s]), torch.stack([s, e * c])]
    )


def matchgate_matrix(theta, phi1, phi2) -> torch.Tensor:
    """4x4 matchgate in the {|00>,|01>,|10>,|11>} basis of the pair.

    M(pi, pi, 0) = SWAP; block-diagonal on parity sectors.
    """
    theta, phi1, phi2 = _scalar(theta), _scalar(phi1), _scalar(phi2)
    c = torch.cos(theta / 2).to(CDTYPE)
    s = torch.sin(theta / 2).to(CDTYPE)
    e1 = torch.exp(1j * phi1.to(CDTYPE))
    e2 = torch.exp(1j * phi2.to(CDTYPE))
    one = torch.ones((), dtype=CDTYPE)
    zero = torch.zeros((), dtype=CDTYPE)
    return torch.stack([
        torch.stack([one, zero, zero, zero]),
        torch.stack([zero, c, -e1 * s, zero]),
        torch.stack([zero, s, e1 * c, zero]),
        torch.stack([zero, zero, zero, e2]),
    ])


def cry_matrix(theta) -> torch.Tensor:
    """4x4 controlled-RY in the (control, target) basis order."""
    theta = _scalar(theta)
    c = torch.cos(theta / 2).to(CDTYPE)
    s = torch.sin(theta / 2).to(CDTYPE)
    one = torch.ones((), dtype=CDTYPE)
    zero = torch.zeros((), dtype=CDTYPE)
    return torch.stack([
        torch.stack([one, zero, zero, zero]),
        torch.stack([zero, one, zero, zero]),
        torch.stack([zero, zero, c, -s]),
        torch.stack([zero, zero, s, c]),
    ])


# ---------------------------------------------------------------------------
# gate application
# ---------------------------------------------------------------------------

def _check_qubits(n: int, qubits: Sequence[int]) -> tuple:
    qs = tuple(int(q) for q in qubits)
    for q in qs:
        if q < 0 or q >= n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")
    if len(set(qs)) != len(qs):
        raise ValueError(f"duplicate qubit indices in {qs}")
    return qs


def apply_matrix(state: StateVector, mat: torch.Tensor,
                 qubits: Sequence[int]) -> StateVector:
    """Apply a 2^k x 2^k matrix to the listed qubits (first listed qubit is
    the most significant bit of the matrix's basis order)."""
    n = state.n_qubits
    qs = _check_qubits(n, qubits)
    k = len(qs)
    if mat.shape != (2 ** k, 2 ** k):
        raise ValueError(f"matrix shape {tuple(mat.shape)} does not match "
                         f"{k} qubits")
    amps = state.amps
    batch = amps.shape[:-1]
    nb = len(batch)
    t = amps.reshape(batch + (2,) * n)
    src = [nb + q for q in qs]
    dst = list(range(nb, nb + k))
    t = torch.movedim(t, src, dst)
    flat_batch = int(np.prod(batch)) if batch else 1
    t2 = t.reshape(flat_batch, 2 ** k, 2 ** (n - k))
    t2 = torch.einsum("ab,ibj->iaj", mat.to(CDTYPE), t2)
    t2 = t2.reshape((batch if batch else ()) + (2,) * n)
    t2 = torch.movedim(t2, dst, src)
    return StateVector(n, t2.reshape(batch + (2 ** n,)))


def apply_u(state: StateVector, qubit: int, theta, phi) -> StateVector:
    return apply_matrix(state, u_matrix(theta, phi), (qubit,))


def apply_matchgate(state: StateVector, q_low: int, theta, phi1,
                    phi2) -> StateVector:
    """Apply a matchgate to the nearest-neighbor pair (q_low, q_low + 1)."""
    if q_low < 0 or q_low + 1 >= state.n_qubits:
        raise ValueError(f"matchgate pair ({q_low}, {q_low + 1}) out of range")
    return apply_matrix(state, matchgate_matrix(theta, phi1, phi2),
                        (q_low, q_low + 1))


def apply_cry(state: StateVector, control: int, target: int,
              theta) -> StateVector:
    if control == target:
        raise ValueError("control and target must differ")
    return apply_matrix(state, cry_matrix(theta), (control, target))


def apply_phase_oracle(state: StateVector, marked: int) -> StateVector:
    """Negate the amplitude of one basis state: |x> -> (-1)^{x==marked} |x>."""
    dim = 2 ** state.n_qubits
    if marked < 0 or marked >= dim:
        raise ValueError(f"marked index {marked} out of range")
    mask = torch.ones(dim, dtype=CDTYPE)
    mask[marked] = -1.0
    return StateVector(state.n_qubits, state.amps * mask)


def apply_batched_phase_oracle(state: StateVector,
                               marked: Sequence[int]) -> StateVector:
    """Per-batch-element phase oracle: element i marks ``marked[i]``."""
    dim = 2 ** state.n_qubits
    idx = np.asarray(marked, dtype=np.int64)
    if state.amps.ndim != 2 or state.amps.shape[0] != len(idx):
        raise ValueError("batch size does not match number of marked indices")
    mask = torch.ones((len(idx), dim), dtype=CDTYPE)
    mask[np.arange(len(idx)), idx] = -1.0
    return StateVector(state.n_qubits, state.amps * mask)


# ---------------------------------------------------------------------------
# measurement and overlaps
# ---------------------------------------------------------------------------

def probabilities(state: StateVector, qubits: Sequence[int]) -> torch.Tensor:
    """Marginal Born-rule distribution over the listed qubits, in their
    listed order.  Shape ``(2**k,)`` or ``(B, 2**k)`` for batched states."""
    n = state.n_qubits
    qs = _check_qubits(n, qubits)
    k = len(qs)
    amps = state.amps
    batch = amps.shape[:-1]
    nb = len(batch)
    p = (amps.real ** 2 + amps.imag ** 2).reshape(batch + (2,) * n)
    drop = [nb + q for q in range(n) if q not in qs]
    if drop:
        p = p.sum(dim=drop)
    # after dropping, the kept qubit axes sit at nb.. in ascending-qubit
    # order; permute them into the requested order
    kept_sorted = sorted(qs)
    perm = list(range(nb)) + [nb + kept_sorted.index(q) for q in qs]
    p = p.permute(perm)
    return p.reshape(batch + (2 ** k,))


def overlap(a: StateVector, b: StateVector) -> torch.Tensor:
    """Inner product <a|b>; |overlap|**2 is the fidelity."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("qubit counts differ")
    return (a.amps.conj() * b.amps).sum(dim=-1)
