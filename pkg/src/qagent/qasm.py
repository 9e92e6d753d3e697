"""OpenQASM 2.0 export of circuits.

Each native gate expands to qelib1 primitives:

* U(theta, phi)          -> u1(phi); ry(theta)            (same qubit)
* CRY(theta) on (c, t)   -> ry(theta/2) t; cx c,t; ry(-theta/2) t; cx c,t
* M(theta, phi1, phi2)   -> u1(phi1) a; cu1(phi2-phi1) a,b;
                            cx a,b; CRY(theta) on (b, a); cx a,b

with (a, b) the matchgate pair.  Daggered gates emit the reversed
expansion with negated angles.  :func:`primitive_unitary` rebuilds the
dense matrix from the emitted primitives so the expansion can be checked
numerically against the simulator.
"""

from __future__ import annotations

import numpy as np

from . import pqc

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def _cry_ops(c, t, theta):
    return [("ry", (t,), theta / 2), ("cx", (c, t), None),
            ("ry", (t,), -theta / 2), ("cx", (c, t), None)]


def _gate_ops(gate: pqc.Gate, params):
    a = [float(params[x]) if isinstance(x, int) else float(x)
         for x in gate.angles]
    q = gate.qubits
    if gate.kind == "u":
        ops = [("u1", (q[0],), a[1]), ("ry", (q[0],), a[0])]
    elif gate.kind == "cry":
        ops = _cry_ops(q[0], q[1], a[0])
    else:
        lo, hi = q
        ops = [("u1", (lo,), a[1]), ("cu1", (lo, hi), a[2] - a[1]),
               ("cx", (lo, hi), None)]
        ops += _cry_ops(hi, lo, a[0])
        ops.append(("cx", (lo, hi), None))
    if gate.dagger:
        ops = [(name, qs, None if ang is None else -ang)
               for name, qs, ang in reversed(ops)]
    return ops


def primitive_ops(circuit: pqc.ParamCircuit, params):
    """Flat (name, qubits, angle|None) list over absolute qubit indices."""
    p = np.asarray(params, dtype=np.float64)
    out = []
    for g in circuit.gates:
        for name, qs, ang in _gate_ops(g, p):
            out.append((name, tuple(circuit.window[x] for x in qs), ang))
    return out


def to_qasm(circuit: pqc.ParamCircuit, params, n_qubits: int = None) -> str:
    """OpenQASM 2.0 program text for the circuit on register q."""
    n = n_qubits if n_qubits is not None else max(circuit.window) + 1
    lines = [HEADER + f"qreg q[{n}];"]
    for name, qs, ang in primitive_ops(circuit, params):
        args = ",".join(f"q[{i}]" for i in qs)
        if ang is None:
            lines.append(f"{name} {args};")
        else:
            lines.append(f"{name}({ang!r}) {args};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# numerical verification of the expansion
# ---------------------------------------------------------------------------

def _prim_matrix(name, ang):
    if name == "ry":
        c, s = np.cos(ang / 2), np.sin(ang / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if name == "u1":
        return np.diag([1.0, np.exp(1j * ang)])
    if name == "cx":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                         [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if name == "cu1":
        return np.diag([1.0, 1.0, 1.0, np.exp(1j * ang)])
    raise ValueError(f"unknown primitive {name!r}")


def primitive_unitary(ops, n: int) -> np.ndarray:
    """Dense unitary of a primitive-op list (qubit 0 = MSB), built by
    plain kron/permutation algebra independent of the simulator."""
    dim = 2 ** n
    u = np.eye(dim, dtype=complex)
    for name, qs, ang in ops:
        m = _prim_matrix(name, ang)
        full = _embed(m, qs, n)
        u = full @ u
    return u


def _embed(m: np.ndarray, qs, n: int) -> np.ndarray:
    k = len(qs)
    full = np.zeros((2 ** n, 2 ** n), dtype=complex)
    rest = [q for q in range(n) if q not in qs]
    for col in range(2 ** n):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        sub = 0
        for q in qs:
            sub = (sub << 1) | bits[q]
        for sub_out in range(2 ** k):
            amp = m[sub_out, sub]
            if amp == 0:
                continue
            out_bits = list(bits)
            for i, q in enumerate(qs):
                out_bits[q] = (sub_out >> (k - 1 - i)) & 1
            row = 0
            for b in out_bits:
                row = (row << 1) | b
            full[row, col] += amp
    return full
