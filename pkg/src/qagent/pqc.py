"""Six-layer parameterized policy-circuit architecture.

A circuit is an ordered list of typed gates over a qubit window, plus a
flat parameter vector.  Gate angles are either learnable (an index into
the parameter vector) or fixed constants (e.g. the SWAP layer's phi1=pi).

Layer kinds:

1. ``RYPhaseShift``        - U(theta, phi) on every qubit.
2. ``CRYDownLadder``       - CRY on pairs (i, i+1), i = 0..n-2.
3. ``MatchgatePyramid``    - matchgates in descending-run rows, with a
   U gate on the window's first qubit before every row and one after the
   last row ("enhanced" pyramid).
4. ``CRYUpLadder``         - CRY on pairs (i+1, i) in reverse order.
5. ``RYPhaseShiftAdjoint`` - U(theta, phi)^dagger on every qubit, with
   its own independent parameters.
6. ``SwapLayer``           - M(theta, pi, 0) in a diamond pattern that
   exchanges the two halves of the window when every theta = pi.

Every two-qubit gate touches adjacent window indices (nearest-neighbor),
asserted at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import torch

from . import statevec
from .statevec import StateVector

LAYER_KINDS = (
    "RYPhaseShift",
    "CRYDownLadder",
    "MatchgatePyramid",
    "CRYUpLadder",
    "RYPhaseShiftAdjoint",
    "SwapLayer",
)

BLOCK_LAYERS = LAYER_KINDS[:5]  # the standard block without the optional swap

_GATE_ARITY = {"u": 1, "m": 2, "cry": 2}
_GATE_ANGLES = {"u": 2, "m": 3, "cry": 1}


class ParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Gate:
    """One gate instance.

    ``angles`` holds one entry per gate angle: an ``int`` is an index into
    the circuit's parameter vector, a ``float`` is a fixed constant.
    ``dagger`` applies the conjugate transpose of the gate matrix.
    """

    kind: str
    qubits: tuple
    angles: tuple
    dagger: bool = False

    def __post_init__(self):
        if self.kind not in _GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != _GATE_ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_GATE_ARITY[self.kind]} qubits")
        if len(self.angles) != _GATE_ANGLES[self.kind]:
            raise ValueError(f"{self.kind} takes {_GATE_ANGLES[self.kind]} angles")

    def param_indices(self):
        return [a for a in self.angles if isinstance(a, int)]


@dataclass(frozen=True)
class ParamCircuit:
    """Ordered gate list with a flat parameter vector of length n_params.

    ``window`` maps window-relative qubit indices to absolute register
    indices when the circuit is placed inside a larger system.
    """

    n_qubits: int
    gates: tuple
    n_params: int
    layers: tuple = ()
    window: tuple = None

    def __post_init__(self):
        if self.window is None:
            object.__setattr__(self, "window", tuple(range(self.n_qubits)))
        if len(self.window) != self.n_qubits:
            raise ValueError("window length must equal n_qubits")
        for g in self.gates:
            for q in g.qubits:
                if q < 0 or q >= self.n_qubits:
                    raise ValueError(f"gate qubit {q} outside window")
            if len(g.qubits) == 2 and abs(g.qubits[0] - g.qubits[1]) != 1:
                raise ValueError(
                    f"{g.kind} on {g.qubits} violates nearest-neighbor layout")
            for a in g.param_indices():
                if a < 0 or a >= self.n_params:
                    raise ValueError(f"parameter index {a} out of range")

    def with_window(self, window: Sequence[int]) -> "ParamCircuit":
        return replace(self, window=tuple(int(q) for q in window))


# ---------------------------------------------------------------------------
# layer constructors
# ---------------------------------------------------------------------------

def _ry_phase_layer(n, p0, dagger=False):
    gates = [Gate("u", (q,), (p0 + 2 * q, p0 + 2 * q + 1), dagger=dagger)
             for q in range(n)]
    return gates, p0 + 2 * n


def _cry_down_layer(n, p0):
    gates = [Gate("cry", (i, i + 1), (p0 + i,)) for i in range(n - 1)]
    return gates, p0 + max(n - 1, 0)


def _cry_up_layer(n, p0):
    gates = [Gate("cry", (i + 1, i), (p0 + (n - 2 - i),))
             for i in range(n - 2, -1, -1)]
    return gates, p0 + max(n - 1, 0)


def _pyramid_layer(n, p0):
    """Matchgate rows of descending length n-1, n-2, .., 1 starting at pair
    (0, 1), with a U on qubit 0 before each row and one after the last."""
    gates = []
    p = p0
    for row in range(max(n - 1, 0)):
        gates.append(Gate("u", (0,), (p, p + 1)))
        p += 2
        for j in range(n - 1 - row):
            gates.append(Gate("m", (j, j + 1), (p, p + 1, p + 2)))
            p += 3
    gates.append(Gate("u", (0,), (p, p + 1)))
    p += 2
    return gates, p


def swap_diamond_pairs(n: int):
    """Adjacent-transposition diamond that exchanges the two halves of an
    even-sized window: columns of pairs (i, i+1) with run lengths
    1, 2, .., n/2, .., 2, 1."""
    if n % 2 != 0:
        raise ValueError("SwapLayer requires an even window size")
    k = n // 2
    pairs = []
    for col in range(2 * k - 1):
        lo = abs(k - 1 - col)
        pairs.extend((i, i + 1) for i in range(lo, 2 * k - 1 - lo, 2))
    return pairs


def _swap_layer(n, p0):
    gates = []
    p = p0
    for pair in swap_diamond_pairs(n):
        gates.append(Gate("m", pair, (p, math.pi, 0.0)))
        p += 1
    return gates, p


_LAYER_BUILDERS = {
    "RYPhaseShift": _ry_phase_layer,
    "CRYDownLadder": _cry_down_layer,
    "MatchgatePyramid": _pyramid_layer,
    "CRYUpLadder": _cry_up_layer,
    "RYPhaseShiftAdjoint": lambda n, p0: _ry_phase_layer(n, p0, dagger=True),
    "SwapLayer": _swap_layer,
}


def build_policy(n: int, layers: Sequence[str] = BLOCK_LAYERS) -> ParamCircuit:
    """Lay out the policy architecture over ``n`` qubits."""
    if n < 1:
        raise ValueError("need at least one qubit")
    layers = tuple(layers)
    if not layers:
        raise ValueError("layer list must be non-empty")
    for kind in layers:
        if kind not in _LAYER_BUILDERS:
            raise ValueError(f"unknown layer kind {kind!r}")
    gates = []
    p = 0
    for kind in layers:
        new, p = _LAYER_BUILDERS[kind](n, p)
        gates.extend(new)
    return ParamCircuit(n, tuple(gates), p, layers=layers)


def fixed_circuit(n: int, gate_specs: Sequence[tuple],
                  window: Sequence[int] = None) -> ParamCircuit:
    """Circuit with all angles fixed; ``gate_specs`` entries are
    (kind, qubits, angles[, dagger]) with numeric angles."""
    gates = []
    for spec in gate_specs:
        kind, qubits, angles = spec[0], tuple(spec[1]), tuple(float(a) for a in spec[2])
        dagger = bool(spec[3]) if len(spec) > 3 else False
        gates.append(Gate(kind, qubits, angles, dagger=dagger))
    c = ParamCircuit(n, tuple(gates), 0)
    return c.with_window(window) if window is not None else c


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _as_params(params, n_params) -> torch.Tensor:
    if isinstance(params, torch.Tensor):
        t = params.to(torch.float64)
    else:
        t = torch.as_tensor(np.asarray(params, dtype=np.float64))
    if t.ndim != 1 or t.shape[0] != n_params:
        raise ValueError(f"expected {n_params} parameters, got shape {tuple(t.shape)}")
    return t


def resolve_angles(gate: Gate, params: torch.Tensor):
    return [params[a] if isinstance(a, int) else a for a in gate.angles]


def gate_matrix(gate: Gate, params: torch.Tensor) -> torch.Tensor:
    a = resolve_angles(gate, params)
    if gate.kind == "u":
        mat = statevec.u_matrix(a[0], a[1])
    elif gate.kind == "m":
        mat = statevec.matchgate_matrix(a[0], a[1], a[2])
    else:
        mat = statevec.cry_matrix(a[0])
    if gate.dagger:
        mat = mat.conj().T
    return mat


def apply(circuit: ParamCircuit, params, state: StateVector) -> StateVector:
    """Apply the circuit's gates in order, mapping window-relative qubit
    indices through ``circuit.window``."""
    p = _as_params(params, circuit.n_params)
    for g in circuit.gates:
        mat = gate_matrix(g, p)
        qubits = tuple(circuit.window[q] for q in g.qubits)
        state = statevec.apply_matrix(state, mat, qubits)
    return state


def adjoint(circuit: ParamCircuit) -> ParamCircuit:
    """Reversed-dagger circuit sharing the same parameter vector."""
    gates = tuple(replace(g, dagger=not g.dagger)
                  for g in reversed(circuit.gates))
    return replace(circuit, gates=gates, layers=())


def stack(circuit: ParamCircuit, depth: int) -> ParamCircuit:
    """Repeat the circuit ``depth`` times with independent parameters."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth == 1:
        return circuit
    gates = []
    for d in range(depth):
        off = d * circuit.n_params
        for g in circuit.gates:
            angles = tuple(a + off if isinstance(a, int) else a
                           for a in g.angles)
            gates.append(replace(g, angles=angles))
    return replace(circuit, gates=tuple(gates),
                   n_params=depth * circuit.n_params,
                   layers=circuit.layers * depth)


def circuit_unitary(circuit: ParamCircuit, params) -> np.ndarray:
    """Dense unitary of the circuit on its own window (columns = images of
    basis states).  Feasible for n <= 10."""
    n = circuit.n_qubits
    if n > 10:
        raise ValueError(f"dense unitary infeasible for n={n}")
    local = replace(circuit, window=tuple(range(n)))
    basis = StateVector.basis(n, list(range(2 ** n)))
    with torch.no_grad():
        out = apply(local, params, basis)
    return out.numpy().T.copy()


# ---------------------------------------------------------------------------
# pruning
# ---------------------------------------------------------------------------

_SNAP_GRID = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)


def _angdist(x, ref=0.0, period=2 * math.pi):
    d = (x - ref) % period
    return min(d, period - d)


def _is_identity_config(gate: Gate, params, tol: float) -> bool:
    a = [float(params[x]) if isinstance(x, int) else x for x in gate.angles]
    if gate.kind == "u":
        return _angdist(a[0]) <= tol and _angdist(a[1]) <= tol
    if gate.kind == "cry":
        return _angdist(a[0]) <= tol
    return _angdist(a[0]) <= tol and _angdist(a[2]) <= tol


def _phase_fid(u, v):
    d = u.shape[0]
    return abs(np.trace(u.conj().T @ v)) ** 2 / d ** 2


def prune(circuit: ParamCircuit, params, tol: float):
    """Remove gates near an identity configuration and snap surviving
    parameters to the {0, pi/2, pi, 3pi/2} grid, keeping the circuit's
    phase-invariant process fidelity to the original >= 1 - 10*tol.

    Returns ``(pruned_circuit, pruned_params)``.
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    p = np.asarray(params, dtype=np.float64).copy()
    if tol == 0:
        return circuit, p
    ref = circuit_unitary(circuit, p)
    bound = 1.0 - 10.0 * tol

    def fid_of(gate_list, values):
        c = ParamCircuit(circuit.n_qubits, tuple(gate_list), circuit.n_params)
        return _phase_fid(ref, circuit_unitary(c, values))

    kept = list(circuit.gates)
    for g in list(circuit.gates):
        if not _is_identity_config(g, p, tol):
            continue
        trial = [x for x in kept if x is not g]
        if fid_of(trial, p) >= bound:
            kept = trial

    # snap remaining learnable angles to the grid where close
    for g in kept:
        for a in g.param_indices():
            v = p[a]
            for gridval in _SNAP_GRID:
                if 0 < _angdist(v, gridval) <= tol:
                    snapped = gridval + 2 * math.pi * round((v - gridval) / (2 * math.pi))
                    old = p[a]
                    p[a] = snapped
                    if fid_of(kept, p) < bound:
                        p[a] = old
                    break

    # reindex surviving parameters into a compact vector
    used = []
    for g in kept:
        for a in g.param_indices():
            if a not in used:
                used.append(a)
    remap = {a: i for i, a in enumerate(used)}
    new_gates = tuple(
        replace(g, angles=tuple(remap[a] if isinstance(a, int) else a
                                for a in g.angles))
        for g in kept)
    new_circuit = ParamCircuit(circuit.n_qubits, new_gates, len(used),
                               layers=(), window=circuit.window)
    return new_circuit, p[used]


# ---------------------------------------------------------------------------
# serialization (CircuitDump text format)
# ---------------------------------------------------------------------------
#
# Line-oriented grammar (comments after '#' are ignored):
#
#   qubits N
#   window i0 i1 ... (optional)
#   layers Tag1 Tag2 ... (optional)
#   gate KIND[!] q... angle...     angle := pI (parameter) | cVALUE (const)
#   params v0 v1 ... vK-1
#
# '!' marks the dagger variant.  Parameters are written in full precision;
# the per-gate comment shows resolved angles to 2 decimals, in the style
# of trained-circuit listings.

def _gate_label(gate: Gate, params) -> str:
    vals = [float(params[a]) if isinstance(a, int) else a for a in gate.angles]
    names = {"u": "U", "m": "M", "cry": "CRY"}
    args = ",".join(f"{v:.2f}" for v in vals)
    dag = "^" if gate.dagger else ""
    return f"{names[gate.kind]}({args}){dag}"


def render(circuit: ParamCircuit, params) -> str:
    p = np.asarray(params, dtype=np.float64)
    if p.shape != (circuit.n_params,):
        raise ValueError("parameter vector length mismatch")
    lines = ["# qagent circuit v1", f"qubits {circuit.n_qubits}"]
    if circuit.window != tuple(range(circuit.n_qubits)):
        lines.append("window " + " ".join(str(q) for q in circuit.window))
    if circuit.layers:
        lines.append("layers " + " ".join(circuit.layers))
    for g in circuit.gates:
        toks = ["gate", g.kind + ("!" if g.dagger else "")]
        toks += [str(q) for q in g.qubits]
        toks += [f"p{a}" if isinstance(a, int) else f"c{a!r}" for a in g.angles]
        lines.append(" ".join(toks) + f"  # {_gate_label(g, p)}")
    lines.append("params " + " ".join(repr(float(v)) for v in p))
    return "\n".join(lines) + "\n"


def parse(text: str):
    """Parse a circuit dump; returns ``(circuit, params)``."""
    n = None
    window = None
    layers = ()
    gates = []
    params = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        try:
            if toks[0] == "qubits":
                n = int(toks[1])
            elif toks[0] == "window":
                window = tuple(int(t) for t in toks[1:])
            elif toks[0] == "layers":
                layers = tuple(toks[1:])
            elif toks[0] == "gate":
                kind = toks[1]
                dagger = kind.endswith("!")
                kind = kind.rstrip("!")
                if kind not in _GATE_ARITY:
                    raise ValueError(f"unknown gate kind {kind!r}")
                nq = _GATE_ARITY[kind]
                qubits = tuple(int(t) for t in toks[2:2 + nq])
                angles = []
                for t in toks[2 + nq:]:
                    if t.startswith("p"):
                        angles.append(int(t[1:]))
                    elif t.startswith("c"):
                        angles.append(float(t[1:]))
                    else:
                        raise ValueError(f"bad angle token {t!r}")
                gates.append(Gate(kind, qubits, tuple(angles), dagger=dagger))
            elif toks[0] == "params":
                params = np.array([float(t) for t in toks[1:]], dtype=np.float64)
            else:
                raise ValueError(f"unknown directive {toks[0]!r}")
        except ParseError:
            raise
        except Exception as exc:
            raise ParseError(str(exc), ln) from exc
    if n is None:
        raise ParseError("missing 'qubits' line", 0)
    if params is None:
        params = np.zeros(0)
    circuit = ParamCircuit(n, tuple(gates), len(params), layers=layers,
                           window=window)
    return circuit, params


# ---------------------------------------------------------------------------
# bookkeeping helpers
# ---------------------------------------------------------------------------

def gate_counts(circuit: ParamCircuit) -> dict:
    counts = {"u": 0, "m": 0, "cry": 0}
    for g in circuit.gates:
        counts[g.kind] += 1
    return counts
