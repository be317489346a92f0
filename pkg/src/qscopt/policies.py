"""Enumerable policy space: gate sequences over a small collective-action alphabet.

A policy is one candidate preparation sequence for the two-qubit sensor pair.
Rotations act collectively (same gate on both qubits), the squeeze acts on the
pair, cnot uses the first pair qubit as control. Sequences are enumerated
breadth-first (shorter first, alphabet order within a length), starting from
the empty sequence, and capped at `max_policies`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .circuit import Circuit, CircuitOp
from .gates import op_cnot, op_rotation, op_squeeze
from .qfi import DEFAULT_SQUEEZE_ANGLE, qfi_analytic
from .statevector import Statevector, new_zero_state

DEFAULT_ALPHABET = ("rx", "ry", "rz", "s", "cnot")
NOON_ALPHABET = ("rx", "ry", "s")
SQUEEZE_FREE_ALPHABET = ("rx", "ry", "rz")

DEFAULT_ANGLES = {"rx": math.pi / 2, "ry": math.pi / 2, "rz": 0.05,
                  "s": DEFAULT_SQUEEZE_ANGLE}

DEFAULT_HORIZON = 4
MAX_POLICIES = 64


def action_ops(name: str, pair=(0, 1), angles=DEFAULT_ANGLES) -> tuple[CircuitOp, ...]:
    if name in ("rx", "ry", "rz"):
        return tuple(op_rotation(name[1], angles[name], q) for q in pair)
    if name == "s":
        return (op_squeeze(angles["s"], pair[0], pair[1]),)
    if name == "cnot":
        return (op_cnot(pair[0], pair[1]),)
    raise ValueError(f"unknown action {name!r}")


@dataclass(frozen=True)
class Policy:
    """One enumerated gate sequence."""

    id: int
    actions: tuple[str, ...]
    horizon: int

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        if len(self.actions) > self.horizon:
            raise ValueError("policy longer than its horizon")

    @property
    def gate_count(self) -> int:
        return len(self.actions)

    def circuit(self, pair=(0, 1), angles=DEFAULT_ANGLES) -> Circuit:
        ops: tuple[CircuitOp, ...] = ()
        for name in self.actions:
            ops += action_ops(name, pair, angles)
        return Circuit(max(pair) + 1, ops)


def enumerate_policies(alphabet=DEFAULT_ALPHABET, horizon: int = DEFAULT_HORIZON,
                       max_policies: int = MAX_POLICIES) -> tuple[Policy, ...]:
    if not alphabet:
        raise ValueError("empty action alphabet")
    if max_policies < 2:
        raise ValueError("need at least two policies")
    out: list[Policy] = []
    for length in range(horizon + 1):
        for seq in itertools.product(alphabet, repeat=length):
            if len(out) == max_policies:
                return tuple(out)
            out.append(Policy(id=len(out), actions=seq, horizon=horizon))
    return tuple(out)


def policy_state(policy: Policy, pair=(0, 1), angles=DEFAULT_ANGLES) -> Statevector:
    n = max(pair) + 1
    return policy.circuit(pair, angles).apply(new_zero_state(n))


def policy_return(policy: Policy, pair=(0, 1), angles=DEFAULT_ANGLES) -> float:
    """The policy's return: normalized QFI of the state it prepares."""
    return qfi_analytic(policy_state(policy, pair, angles), pair).normalized


def exact_returns(policies) -> dict[int, float]:
    return {p.id: policy_return(p) for p in policies}
