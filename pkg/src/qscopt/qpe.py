"""Policy evaluation by phase estimation over a return-encoding Grover operator.

A policy's return g (its normalized QFI) is mapped to [0, 1] by the affine
bounds map phi = (g - g_lo)/(g_hi - g_lo) and loaded into a return qubit as

    A |0> = sqrt(1 - phi) |0> + sqrt(phi) |1>.

The estimated operator is the Grover-type reflection Q = -A S0 A^dag Z
(reflection about A|0> composed with the return-qubit phase flip), whose
eigenphases are +-2 arcsin(sqrt(phi)). Phase estimation with t counting
qubits therefore reads out x with sin^2(pi x / 2^t) ~= phi, and the decoded
value maps back through the bounds. Both x and 2^t - x decode identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, CircuitOp
from .errors import CapacityError
from .gates import op_h, phase, qft_inv, rotation
from .policies import Policy, policy_return
from .statevector import (ShotHistogram, Statevector, UnitaryMatrix,
                          as_unitary, new_zero_state, make_rng, sample_measure,
                          spawn_seed)

DEFAULT_T = 4
MIN_T, MAX_T = 1, 6


@dataclass(frozen=True)
class ReturnBounds:
    """Promised lower/upper bounds on all policy returns."""

    g_lo: float = 0.0
    g_hi: float = 1.0

    def __post_init__(self):
        if not self.g_hi > self.g_lo:
            raise ValueError("upper return bound must exceed the lower bound")

    def unit(self, x: float) -> float:
        if not self.g_lo <= x <= self.g_hi:
            raise ValueError(f"return {x} outside promised bounds [{self.g_lo}, {self.g_hi}]")
        return (x - self.g_lo) / (self.g_hi - self.g_lo)

    def value(self, phi: float) -> float:
        return self.g_lo + phi * (self.g_hi - self.g_lo)


def normalize_return(x: float, bounds: ReturnBounds) -> float:
    return bounds.unit(x)


def denormalize_return(phi: float, bounds: ReturnBounds) -> float:
    return bounds.value(phi)


def phi_rotation(phi: float) -> UnitaryMatrix:
    """Return-qubit loading rotation A (a Ry by 2 arcsin sqrt(phi))."""
    if not 0.0 <= phi <= 1.0:
        raise ValueError("phi must lie in [0, 1]")
    return rotation("y", 2.0 * math.asin(math.sqrt(phi)))


def build_phi_oracle(policies, bounds: ReturnBounds, values=None) -> Circuit:
    """Return-encoding oracle |x>|0> -> |x>(sqrt(1-phi_x)|0> + sqrt(phi_x)|1>).

    For a single policy this is the bare loading rotation on the return qubit.
    For a sequence of policies, qubits 0..p-1 form the policy register (p =
    ceil(log2 len(policies))) and the rotation is selected by register value.
    """
    if isinstance(policies, Policy):
        phi = bounds.unit(values if values is not None else policy_return(policies))
        return Circuit(1, (CircuitOp("phi", phi_rotation(phi), (0,)),))
    policies = tuple(policies)
    if not policies:
        raise ValueError("empty policy set")
    values = values or {p.id: policy_return(p) for p in policies}
    p_bits = max(1, (len(policies) - 1).bit_length())
    ret = p_bits  # return qubit sits above the register
    ops = []
    for index, pol in enumerate(policies):
        phi = bounds.unit(values[pol.id])
        flips = [q for q in range(p_bits) if not (index >> q) & 1]
        for q in flips:
            ops.append(CircuitOp("x", as_unitary(np.array([[0, 1], [1, 0]])), (q,)))
        ops.append(CircuitOp("phi", phi_rotation(phi), (ret,), tuple(range(p_bits))))
        for q in flips:
            ops.append(CircuitOp("x", as_unitary(np.array([[0, 1], [1, 0]])), (q,)))
    return Circuit(p_bits + 1, tuple(ops))


def grover_value_operator(phi: float) -> UnitaryMatrix:
    """Q = -A S0 A^dag Z on the return qubit; eigenphases +-2 arcsin sqrt(phi)."""
    a = phi_rotation(phi).matrix
    s0 = np.diag([-1.0, 1.0])
    z = np.diag([1.0, -1.0])
    return UnitaryMatrix(-a @ s0 @ a.conj().T @ z)


def build_qpe_circuit(t: int, target=None, ctrl_angle: float | None = None) -> Circuit:
    """Phase-estimation circuit: Hadamards on t counting qubits, controlled
    powers of the target on the environment register, inverse QFT, and
    measurement of the counting qubits only.

    `target` is a UnitaryMatrix or Circuit on the environment qubits (which
    sit above the counting register). If omitted, a single-qubit phase gate
    with angle `ctrl_angle` is estimated (the textbook configuration; angle
    pi/4 puts the eigenphase exactly on grid point 2 at t = 4).
    """
    if not MIN_T <= t <= MAX_T:
        raise CapacityError(f"counting width {t} outside {MIN_T}..{MAX_T}")
    if target is None:
        if ctrl_angle is None:
            raise ValueError("need a target unitary or a ctrl_angle")
        target = phase(ctrl_angle)
    if isinstance(target, Circuit):
        env_qubits = target.n_qubits
        base = target.unitary()
    else:
        target = as_unitary(target)
        env_qubits = target.n_qubits
        base = np.asarray(target.matrix)

    env = tuple(range(t, t + env_qubits))
    ops = [op_h(q) for q in range(t)]
    power = base
    for j in range(t):
        ops.append(CircuitOp(f"cu_pow{1 << j}", as_unitary(power), env, (j,)))
        power = power @ power
    ops += qft_inv(t).ops
    return Circuit(t + env_qubits, tuple(ops), measure_qubits=tuple(range(t)))


def decode_readout(x: int, t: int) -> float:
    # x and 2^t - x are the two eigenphase readouts of the same value; folding
    # makes the mirror pair decode bit-identically
    x = min(x % (1 << t), (1 << t) - x % (1 << t))
    return math.sin(math.pi * x / (1 << t)) ** 2


@dataclass(frozen=True)
class ValueEstimate:
    """Phase-estimation readout for one policy."""

    policy_id: int
    readout_x: int
    t: int
    value: float            # sin^2(pi x / 2^t) for the modal readout
    estimate: float         # value mapped back through the bounds
    mean_value: float       # shot-frequency-weighted decode (alternative reduction)
    mean_estimate: float
    histogram: ShotHistogram

    def __post_init__(self):
        if abs(self.value - decode_readout(self.readout_x, self.t)) > 1e-12:
            raise ValueError("value inconsistent with modal readout")


def value_qpe_circuit(phi: float, t: int = DEFAULT_T) -> Circuit:
    """Return-qubit preparation followed by phase estimation of Q."""
    prep = CircuitOp("phi", phi_rotation(phi), (t,))
    qpe = build_qpe_circuit(t, grover_value_operator(phi))
    return Circuit(t + 1, (prep,) + qpe.ops, measure_qubits=qpe.measure_qubits)


def exact_readout_distribution(phi: float, t: int = DEFAULT_T) -> np.ndarray:
    """Infinite-shot counting-register distribution for a return phi."""
    circuit = value_qpe_circuit(phi, t)
    state = circuit.apply(new_zero_state(circuit.n_qubits))
    from .statevector import marginal_distribution
    return marginal_distribution(state, circuit.measure_qubits)


def estimate_value(policy: Policy, t: int = DEFAULT_T, shots: int = 4096,
                   seed: int = 0, bounds: ReturnBounds = ReturnBounds()) -> ValueEstimate:
    """Run the value-estimation circuit for one policy and decode the readout."""
    phi = bounds.unit(policy_return(policy))
    circuit = value_qpe_circuit(phi, t)
    state = circuit.apply(new_zero_state(circuit.n_qubits))
    hist = sample_measure(state, circuit.measure_qubits, shots, seed)
    x = int(hist.modal_outcome(), 2)
    value = decode_readout(x, t)
    mean_value = sum(freq * decode_readout(int(key, 2), t)
                     for key, freq in hist.frequencies().items())
    return ValueEstimate(policy_id=policy.id, readout_x=x, t=t, value=value,
                         estimate=bounds.value(value), mean_value=mean_value,
                         mean_estimate=bounds.value(mean_value), histogram=hist)


def mae_curve(policy: Policy, t: int, shots_grid, seeds,
              bounds: ReturnBounds = ReturnBounds()):
    """Median absolute error of the decoded estimate vs the exact return,
    per shot count, median across seeds."""
    grid = [int(s) for s in shots_grid]
    if not grid:
        raise ValueError("empty shots grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("shots grid must be increasing")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("need at least one seed")

    g_true = policy_return(policy)
    phi = bounds.unit(g_true)
    dist = exact_readout_distribution(phi, t)
    curve = []
    for i, shots in enumerate(grid):
        errors = []
        for j, seed in enumerate(seeds):
            rng = make_rng(spawn_seed(seed, i, j))
            draws = rng.multinomial(shots, dist)
            x = int(min(np.flatnonzero(draws == draws.max())))
            errors.append(abs(bounds.value(decode_readout(x, t)) - g_true))
        curve.append((shots, float(np.median(errors))))
    return curve
