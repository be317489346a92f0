"""Gate matrices and composite sub-circuits (QFT, ripple-carry adder, half subtractor).

Rotation convention: rotation(axis, theta) = exp(-i * theta * P / 2) for Pauli P,
so rz(pi) = diag(-i, i). The two-qubit squeezing gate is exp(-i * theta * Z^2)
with Z the collective Pauli-Z sum (eigenvalues +2, 0, 0, -2), i.e. the diagonal
phases (e^{-4i theta}, 1, 1, e^{-4i theta}).
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, CircuitOp, GateSpec
from .errors import CapacityError
from .statevector import UnitaryMatrix

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

# V is the square root of NOT; v_inv its adjoint.
V = (1 + 1j) / 2 * np.array([[1, -1j], [-1j, 1]], dtype=complex)
V_INV = (1 - 1j) / 2 * np.array([[1, 1j], [1j, 1]], dtype=complex)

_PAULI = {"x": X, "y": Y, "z": Z}


def rotation(axis: str, theta: float) -> UnitaryMatrix:
    """Single-qubit rotation exp(-i theta P/2) about the named axis."""
    if axis not in _PAULI:
        raise ValueError(f"axis must be one of x/y/z, got {axis!r}")
    if not np.isfinite(theta):
        raise ValueError("rotation angle must be finite")
    t = theta / 2.0
    if axis == "x":
        m = np.array([[np.cos(t), -1j * np.sin(t)], [-1j * np.sin(t), np.cos(t)]])
    elif axis == "y":
        m = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    else:
        m = np.diag([np.exp(-1j * t), np.exp(1j * t)])
    return UnitaryMatrix(m)


def phase(theta: float) -> UnitaryMatrix:
    """diag(1, e^{i theta}); controlled-phase blocks of the QFT."""
    if not np.isfinite(theta):
        raise ValueError("phase angle must be finite")
    return UnitaryMatrix(np.diag([1.0, np.exp(1j * theta)]))


def squeeze(theta: float) -> UnitaryMatrix:
    """Two-qubit one-axis-twisting gate exp(-i theta Z^2), Z collective."""
    if not np.isfinite(theta):
        raise ValueError("squeeze angle must be finite")
    zsq = np.array([4.0, 0.0, 0.0, 4.0])
    return UnitaryMatrix(np.diag(np.exp(-1j * theta * zsq)))


def hadamard() -> UnitaryMatrix:
    return UnitaryMatrix(H)


def pauli_x() -> UnitaryMatrix:
    return UnitaryMatrix(X)


def v_gate() -> UnitaryMatrix:
    return UnitaryMatrix(V)


def v_inv_gate() -> UnitaryMatrix:
    return UnitaryMatrix(V_INV)


def collective_z_diag(n: int) -> np.ndarray:
    """Eigenvalues of the collective Pauli-Z sum on the computational basis."""
    idx = np.arange(1 << n)
    z = np.zeros(idx.size)
    for q in range(n):
        z += 1.0 - 2.0 * ((idx >> q) & 1)
    return z


# --- op builders -----------------------------------------------------------

def op_h(q: int) -> CircuitOp:
    return CircuitOp("h", hadamard(), (q,))


def op_x(q: int) -> CircuitOp:
    return CircuitOp("x", pauli_x(), (q,))


def op_cnot(control: int, target: int) -> CircuitOp:
    return CircuitOp("cnot", pauli_x(), (target,), (control,))


def op_toffoli(c1: int, c2: int, target: int) -> CircuitOp:
    return CircuitOp("toffoli", pauli_x(), (target,), (c1, c2))


def op_rotation(axis: str, theta: float, q: int) -> CircuitOp:
    return CircuitOp(f"r{axis}", rotation(axis, theta), (q,), angle=theta)


def op_squeeze(theta: float, q0: int, q1: int) -> CircuitOp:
    if q0 == q1:
        raise ValueError("squeeze needs two distinct qubits")
    return CircuitOp("squeeze", squeeze(theta), (q0, q1), angle=theta)


def op_cv(control: int, target: int) -> CircuitOp:
    return CircuitOp("cv", v_gate(), (target,), (control,))


def op_cvinv(control: int, target: int) -> CircuitOp:
    return CircuitOp("cvinv", v_inv_gate(), (target,), (control,))


def op_cphase(theta: float, control: int, target: int) -> CircuitOp:
    return CircuitOp("cphase", phase(theta), (target,), (control,))


def build_ops(spec: GateSpec) -> tuple[CircuitOp, ...]:
    """Materialize a GateSpec into concrete CircuitOps."""
    kind, t, c = spec.kind, spec.targets, spec.controls
    if kind == "h":
        return (op_h(t[0]),)
    if kind == "x":
        return (op_x(t[0]),)
    if kind == "cnot":
        return (op_cnot(c[0], t[0]),)
    if kind == "toffoli":
        return (op_toffoli(c[0], c[1], t[0]),)
    if kind in ("rx", "ry", "rz"):
        return (op_rotation(kind[1], spec.angle, t[0]),)
    if kind == "squeeze":
        return (op_squeeze(spec.angle, t[0], t[1]),)
    if kind == "v":
        return (CircuitOp("v", v_gate(), t),)
    if kind == "vinv":
        return (CircuitOp("vinv", v_inv_gate(), t),)
    if kind == "cv":
        return (op_cv(c[0], t[0]),)
    if kind == "cvinv":
        return (op_cvinv(c[0], t[0]),)
    if kind == "qft":
        return qft(len(t)).remap(dict(enumerate(t))).ops
    if kind == "qftinv":
        return qft_inv(len(t)).remap(dict(enumerate(t))).ops
    raise ValueError(f"gate kind {kind!r} has no direct op form")


# --- quantum Fourier transform ---------------------------------------------

MAX_QFT_QUBITS = 8


def qft(n: int) -> Circuit:
    """QFT on n qubits (little-endian): |j> -> sum_k e^{2 pi i jk / 2^n} |k> / 2^{n/2}."""
    if not 1 <= n <= MAX_QFT_QUBITS:
        raise CapacityError(f"qft size {n} outside 1..{MAX_QFT_QUBITS}")
    ops: list[CircuitOp] = []
    for i in reversed(range(n)):
        ops.append(op_h(i))
        for j in range(i):
            ops.append(op_cphase(np.pi / (1 << (i - j)), j, i))
    for i in range(n // 2):
        a, b = i, n - 1 - i
        ops += [op_cnot(a, b), op_cnot(b, a), op_cnot(a, b)]
    return Circuit(n, tuple(ops))


def qft_inv(n: int) -> Circuit:
    return qft(n).inverse()


# --- ripple-carry adder (MAJ/UMA decomposition) -----------------------------

MAX_ADDER_BITS = 3


def _maj(c: int, b: int, a: int) -> list[CircuitOp]:
    return [op_cnot(a, b), op_cnot(a, c), op_toffoli(c, b, a)]


def _uma(c: int, b: int, a: int) -> list[CircuitOp]:
    return [op_toffoli(c, b, a), op_cnot(a, c), op_cnot(c, b)]


def cdkm_adder(n_bits: int) -> Circuit:
    """Ripple-carry adder on the canonical layout
    a = qubits [0, n), b = [n, 2n), carry ancilla = 2n, carry out = 2n+1.

    Maps |a>|b>|0>|0> to |a>|(a+b) mod 2^n>|0>|carry>, i.e. b:carry holds the
    (n+1)-bit sum. Use .remap() to embed into other registers.
    """
    if not 1 <= n_bits <= MAX_ADDER_BITS:
        raise CapacityError(f"adder width {n_bits} outside 1..{MAX_ADDER_BITS}")
    a_q = list(range(n_bits))
    b_q = list(range(n_bits, 2 * n_bits))
    c_q = 2 * n_bits
    z_q = 2 * n_bits + 1
    ops: list[CircuitOp] = []
    carries = [c_q] + a_q[:-1]
    for i in range(n_bits):
        ops += _maj(carries[i], b_q[i], a_q[i])
    ops.append(op_cnot(a_q[-1], z_q))
    for i in reversed(range(n_bits)):
        ops += _uma(carries[i], b_q[i], a_q[i])
    return Circuit(2 * n_bits + 2, tuple(ops))


def cdkm_adder_inv(n_bits: int) -> Circuit:
    """Inverse ripple-carry adder: subtracts a from the (n+1)-bit value in b:carry,
    |a>|s> -> |a>|(s-a) mod 2^{n+1}>; the carry qubit carries the borrow sign."""
    return cdkm_adder(n_bits).inverse()


# --- half subtractor ---------------------------------------------------------

def half_subtractor(minuend: int, subtrahend: int, borrow: int) -> Circuit:
    """Reversible half subtractor: one CNOT, two CV, one CVinv.

    |x>|y>|0> -> |x>|x XOR y>|x' AND y> (difference on the subtrahend wire,
    borrow set when x < y). The V powers telescope to X exactly on the borrow
    branch, so the truth table is exact.
    """
    qs = (minuend, subtrahend, borrow)
    if len(set(qs)) != 3:
        raise ValueError("half subtractor needs three distinct qubits")
    x, y, b = qs
    ops = (op_cv(y, b), op_cnot(x, y), op_cv(y, b), op_cvinv(x, b))
    n = max(qs) + 1
    return Circuit(n, ops)
