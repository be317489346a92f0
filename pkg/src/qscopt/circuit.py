"""Gate sequences: a CircuitOp is one placed unitary, a Circuit an ordered list."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .statevector import Statevector, UnitaryMatrix, apply_gate, as_unitary


@dataclass(frozen=True)
class CircuitOp:
    """One gate application: unitary + target/control qubits (+ angle, if parametric)."""

    name: str
    gate: UnitaryMatrix
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "gate", as_unitary(self.gate))
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "controls", tuple(self.controls))
        if self.gate.dim != 1 << len(self.targets):
            raise ValueError(f"{self.name}: gate dim {self.gate.dim} mismatches targets {self.targets}")
        if set(self.targets) & set(self.controls):
            raise ValueError(f"{self.name}: targets and controls overlap")

    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    def inverse(self) -> "CircuitOp":
        return replace(self, gate=self.gate.adjoint(),
                       angle=None if self.angle is None else -self.angle)

    def remap(self, mapping: dict[int, int]) -> "CircuitOp":
        return replace(self,
                       targets=tuple(mapping[q] for q in self.targets),
                       controls=tuple(mapping[q] for q in self.controls))


@dataclass(frozen=True)
class Circuit:
    """Ordered gate sequence over `n_qubits`, optionally tagging measured qubits."""

    n_qubits: int
    ops: tuple[CircuitOp, ...]
    measure_qubits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "measure_qubits", tuple(self.measure_qubits))
        for op in self.ops:
            if max(op.qubits(), default=0) >= self.n_qubits:
                raise ValueError(f"op {op.name} touches qubit outside 0..{self.n_qubits - 1}")

    def apply(self, state: Statevector) -> Statevector:
        if state.n_qubits < self.n_qubits:
            raise ValueError(f"circuit needs {self.n_qubits} qubits, state has {state.n_qubits}")
        for op in self.ops:
            state = apply_gate(state, op.gate, op.targets, op.controls)
        return state

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, tuple(op.inverse() for op in reversed(self.ops)),
                       self.measure_qubits)

    def remap(self, mapping: dict[int, int], n_qubits: int | None = None) -> "Circuit":
        n = n_qubits if n_qubits is not None else max(mapping.values()) + 1
        return Circuit(n, tuple(op.remap(mapping) for op in self.ops),
                       tuple(mapping[q] for q in self.measure_qubits))

    def extend(self, other: "Circuit") -> "Circuit":
        n = max(self.n_qubits, other.n_qubits)
        return Circuit(n, self.ops + other.ops,
                       self.measure_qubits or other.measure_qubits)

    def gate_counts(self) -> dict[str, int]:
        census: dict[str, int] = {}
        for op in self.ops:
            census[op.name] = census.get(op.name, 0) + 1
        return census

    def unitary(self) -> np.ndarray:
        """Dense matrix of the whole circuit (column k = circuit applied to |k>)."""
        dim = 1 << self.n_qubits
        cols = np.empty((dim, dim), dtype=complex)
        for k in range(dim):
            a = np.zeros(dim, dtype=complex)
            a[k] = 1.0
            cols[:, k] = self.apply(Statevector(a, self.n_qubits)).amplitudes
        return cols

    def __len__(self):
        return len(self.ops)


# Declarative gate descriptions, used by config parsing and policy alphabets.

PARAMETRIC_KINDS = frozenset({"rx", "ry", "rz", "squeeze"})

# kind -> (n_targets, n_controls); None means variable arity
GATE_ARITY: dict[str, tuple[int | None, int]] = {
    "h": (1, 0),
    "x": (1, 0),
    "cnot": (1, 1),
    "toffoli": (1, 2),
    "rx": (1, 0),
    "ry": (1, 0),
    "rz": (1, 0),
    "squeeze": (2, 0),
    "v": (1, 0),
    "vinv": (1, 0),
    "cv": (1, 1),
    "cvinv": (1, 1),
    "qft": (None, 0),
    "qftinv": (None, 0),
    "adderinv": (None, 0),
    "measure": (None, 0),
}


@dataclass(frozen=True)
class GateSpec:
    """A named gate with qubit roles; materializes to CircuitOps via gates.build_ops."""

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "controls", tuple(self.controls))
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        has_angle = self.angle is not None
        if has_angle != (self.kind in PARAMETRIC_KINDS):
            raise ValueError(f"{self.kind}: angle must be present iff kind is parametric")
        if has_angle and not np.isfinite(self.angle):
            raise ValueError(f"{self.kind}: angle must be finite")
        nt, nc = GATE_ARITY[self.kind]
        if nt is not None and (len(self.targets), len(self.controls)) != (nt, nc):
            raise ValueError(f"{self.kind}: expected {nt} target(s), {nc} control(s), "
                             f"got {self.targets}/{self.controls}")
        if set(self.targets) & set(self.controls) or len(set(self.targets)) != len(self.targets):
            raise ValueError(f"{self.kind}: qubit roles must be distinct")
