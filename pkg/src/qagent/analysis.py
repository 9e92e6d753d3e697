"""Post-training inspection of learned circuits.

Tools to compare a trained circuit against a reference unitary modulo
the phase freedoms the rewards do not fix (global phase; per-basis-input
diagonal phases for transform-learning rewards), plus exact reference
constructions on the nearest-neighbor gate set.
"""

from __future__ import annotations

import math

import numpy as np

from . import pqc


def reconstruct(circuit: pqc.ParamCircuit, params) -> np.ndarray:
    """Dense unitary of a (trained) circuit."""
    return pqc.circuit_unitary(circuit, params)


def phase_invariant_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|tr(u^dagger v)|**2 / d**2: 1 iff u = v up to global phase."""
    if u.shape != v.shape or u.shape[0] != u.shape[1]:
        raise ValueError("need two square matrices of equal shape")
    d = u.shape[0]
    return float(abs(np.trace(u.conj().T @ v)) ** 2 / d ** 2)


def mean_basis_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """mean_j |<u e_j | v e_j>|**2: 1 iff v = u . diag(phases)."""
    if u.shape != v.shape or u.shape[0] != u.shape[1]:
        raise ValueError("need two square matrices of equal shape")
    return float(np.mean(np.abs(np.diag(u.conj().T @ v)) ** 2))


def diagonal_phase_factor(u: np.ndarray, target: np.ndarray):
    """Extract D with u ~= target . D for diagonal D of pure phases.

    Returns ``(phases, residual)``: ``phases[j]`` is arg(D_jj) and
    ``residual`` is the phase-invariant fidelity between u and
    target . D — equal to 1 exactly when the factorization is exact.
    """
    m = np.diag(target.conj().T @ u)
    phases = np.angle(m)
    d = np.exp(1j * phases)
    return phases, phase_invariant_fidelity(target @ np.diag(d), u)


# ---------------------------------------------------------------------------
# reference constructions
# ---------------------------------------------------------------------------

def general_qft_circuit(n: int) -> pqc.ParamCircuit:
    """Exact QFT on n qubits using only nearest-neighbor matchgates and
    single-qubit gates.

    Stage d (d = 0..n-2) applies U(pi/2, pi) on qubit 0, then for
    j = 0..n-2-d a controlled phase M(0, 0, pi/2**(j+1)) followed by a
    swap M(pi, pi, 0) on the pair (j, j+1); a final U(pi/2, pi) on
    qubit 0 closes the circuit.  Gate totals: n(n-1)/2 controlled
    phases, n(n-1)/2 swaps, n single-qubit gates.
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    h = (math.pi / 2, math.pi)
    specs = []
    for d in range(n - 1):
        specs.append(("u", (0,), h))
        for j in range(n - 1 - d):
            specs.append(("m", (j, j + 1), (0.0, 0.0, math.pi / 2 ** (j + 1))))
            specs.append(("m", (j, j + 1), (math.pi, math.pi, 0.0)))
    specs.append(("u", (0,), h))
    return pqc.fixed_circuit(n, specs)


def qft_gate_totals(n: int) -> dict:
    """Closed-form gate counts of :func:`general_qft_circuit`."""
    return {"controlled_phase": n * (n - 1) // 2,
            "swap": n * (n - 1) // 2,
            "single": n}


def classify_qft_gates(circuit: pqc.ParamCircuit) -> dict:
    """Count a fixed circuit's gates as controlled phases (matchgates
    with theta = 0), swaps (M(pi, pi, 0)) or single-qubit gates."""
    counts = {"controlled_phase": 0, "swap": 0, "single": 0}
    for g in circuit.gates:
        if g.kind == "u":
            counts["single"] += 1
        elif g.kind == "m" and abs(g.angles[0]) < 1e-12:
            counts["controlled_phase"] += 1
        elif g.kind == "m":
            counts["swap"] += 1
        else:
            raise ValueError(f"unclassifiable gate {g}")
    return counts


def format_matrix(u: np.ndarray, digits: int = 3) -> str:
    """Readable fixed-width rendering of a complex matrix."""
    w = digits + 4
    rows = []
    for row in u:
        cells = []
        for z in row:
            re, im = round(float(z.real), digits), round(float(z.imag), digits)
            cells.append(f"{re:+.{digits}f}{im:+.{digits}f}j".rjust(2 * w))
        rows.append(" ".join(cells))
    return "\n".join(rows)
