"""Policy improvement: Grover amplification over the evaluated policy space.

The search space is the uniform superposition over policy slots, each
entangled with its value-estimation register state. The threshold oracle
phase-flips counting-register basis states whose decoded value strictly
exceeds a reference, and one Grover rotation is that flip followed by the
reflection about the prepared state. With initial flipped-subspace
probability p, the exact probability after L rotations is
sin^2((2L+1) arcsin(sqrt(p))).

The rotation count follows L = min(int(k (r + v_next)), int(pi/(4 theta) - 1/2));
the angle in the cap is the Grover angle of the current space when known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .policies import Policy, exact_returns
from .qpe import DEFAULT_T, ReturnBounds, decode_readout, grover_value_operator, value_qpe_circuit
from .statevector import Statevector, make_rng


def rotation_count(k: float, r: float, v_next: float, theta: float) -> int:
    """Grover rotation count rule (truncating both terms to integers)."""
    if not 0.0 < theta <= math.pi / 2:
        raise ValueError("theta must lie in (0, pi/2]")
    if k < 0 or r < 0 or v_next < 0:
        raise ValueError("k, r and v_next must be non-negative")
    drive = int(k * (r + v_next))
    cap = int(math.pi / (4.0 * theta) - 0.5)
    return min(drive, cap)


@dataclass(frozen=True)
class RotationPlan:
    """Materialized rotation-count rule; L = min(int(k(r+v_next)), int(pi/4theta - 1/2))."""

    k: float
    r: float
    v_next: float
    theta: float
    L: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "L", rotation_count(self.k, self.r, self.v_next, self.theta))


@dataclass(frozen=True)
class ThresholdOracle:
    """Diagonal +-1 phase on the counting register (Eq.-style strict threshold)."""

    v_ref: float
    t: int
    bounds: ReturnBounds
    flips: np.ndarray  # bool per counting outcome
    signs: np.ndarray  # +-1 per counting outcome

    def good_probability(self, counting_probs: np.ndarray) -> float:
        return float(counting_probs[self.flips].sum())


def build_threshold_oracle(v_ref: float, t: int,
                           bounds: ReturnBounds = ReturnBounds()) -> ThresholdOracle:
    if not bounds.g_lo <= v_ref <= bounds.g_hi:
        raise ValueError(f"threshold {v_ref} outside bounds [{bounds.g_lo}, {bounds.g_hi}]")
    xs = np.arange(1 << t)
    decoded = np.array([bounds.value(decode_readout(int(x), t)) for x in xs])
    flips = decoded > v_ref
    signs = np.where(flips, -1.0, 1.0)
    flips.setflags(write=False)
    signs.setflags(write=False)
    return ThresholdOracle(v_ref=v_ref, t=t, bounds=bounds, flips=flips, signs=signs)


class SearchSpace:
    """Prepared policy-evaluation superposition with its per-policy blocks.

    State arrays have shape (|P|, 2, 2^t): policy slot x return qubit x
    counting register, so each policy block flattens to the little-endian
    basis order of its value-estimation circuit (counting bits low). The
    preparation is a uniform mixer on the policy axis followed by each
    policy's value-estimation unitary on its block, so reflections about the
    prepared state implement the policy-improvement operator exactly.
    """

    def __init__(self, policies, t: int, bounds: ReturnBounds, values: dict[int, float]):
        self.policies = tuple(policies)
        if len(self.policies) < 2:
            raise ValueError("need at least two policies to search")
        self.t = t
        self.bounds = bounds
        self.values = dict(values)
        p = len(self.policies)

        # uniform mixer: unitary with first column 1/sqrt(p) (Householder form)
        u = np.full(p, 1.0 / math.sqrt(p))
        w = np.zeros(p)
        w[0] = 1.0
        w = w - u
        norm2 = w @ w
        self.mixer = np.eye(p) - 2.0 * np.outer(w, w) / norm2 if norm2 > 1e-30 else np.eye(p)

        self.blocks = []
        for pol in self.policies:
            circuit = value_qpe_circuit(bounds.unit(self.values[pol.id]), t)
            self.blocks.append(circuit.unitary())

        zero = np.zeros((p, 2, 1 << t), dtype=complex)
        zero[0, 0, 0] = 1.0
        self.psi0 = self.apply_prep(zero)

    # -- preparation as an honest unitary (blockwise) --
    def apply_prep(self, arr: np.ndarray) -> np.ndarray:
        p, e, c = arr.shape
        mixed = np.tensordot(self.mixer, arr, axes=(1, 0))
        out = np.empty_like(mixed)
        flat = mixed.reshape(p, e * c)
        for i, block in enumerate(self.blocks):
            out[i] = (block @ flat[i]).reshape(e, c)
        return out

    def apply_prep_adjoint(self, arr: np.ndarray) -> np.ndarray:
        p, e, c = arr.shape
        out = np.empty_like(arr)
        flat = arr.reshape(p, e * c)
        for i, block in enumerate(self.blocks):
            out[i] = (block.conj().T @ flat[i]).reshape(e, c)
        return np.tensordot(self.mixer.conj().T, out, axes=(1, 0))

    def policy_marginal(self, arr: np.ndarray) -> np.ndarray:
        return (np.abs(arr) ** 2).sum(axis=(1, 2))

    def counting_marginal(self, arr: np.ndarray) -> np.ndarray:
        return (np.abs(arr) ** 2).sum(axis=(0, 1))

    def good_probability(self, arr: np.ndarray, oracle: ThresholdOracle) -> float:
        return oracle.good_probability(self.counting_marginal(arr))

    def grover_angle(self, oracle: ThresholdOracle) -> float:
        p = self.good_probability(self.psi0, oracle)
        return math.asin(math.sqrt(min(max(p, 0.0), 1.0)))

    def to_statevector(self, arr: np.ndarray) -> Statevector:
        """Flatten to a Statevector (counting bits 0..t-1, return qubit t,
        policy register above); requires |P| to be a power of two."""
        p = len(self.policies)
        if p & (p - 1):
            raise ValueError("policy count is not a power of two")
        return Statevector(arr.reshape(-1), (p * (1 << self.t) * 2).bit_length() - 1)


def prepare_search_space(policies, t: int = DEFAULT_T,
                         bounds: ReturnBounds = ReturnBounds(),
                         values: dict[int, float] | None = None) -> SearchSpace:
    """Uniform superposition over policies, each with its evaluation register.

    `values` defaults to the exact policy returns; pass phase-estimation
    estimates to search over measured values instead.
    """
    policies = tuple(policies)
    if values is None:
        values = exact_returns(policies)
    return SearchSpace(policies, t, bounds, values)


def grover_iterate(space: SearchSpace, oracle: ThresholdOracle, L: int,
                   state: np.ndarray | None = None, record=None) -> np.ndarray:
    """Apply L Grover rotations (oracle then reflection about the prepared
    state). `record(round_index, state)` is called after each rotation."""
    if L < 0:
        raise ValueError("rotation count must be >= 0")
    v = (space.psi0 if state is None else state).copy()
    psi0 = space.psi0
    for i in range(L):
        v *= oracle.signs[None, None, :]
        overlap = np.vdot(psi0, v)
        v = 2.0 * overlap * psi0 - v
        if record is not None:
            record(i + 1, v)
    return v


def improve_policy(space: SearchSpace, v_current: float, plan, seed: int = 0):
    """One improvement round: amplify above-threshold policies, then measure
    the policy register. Returns (measured policy, per-rotation good-probability
    trace). `plan` is a RotationPlan or a fixed rotation count."""
    L = plan if isinstance(plan, int) else plan.L
    oracle = build_threshold_oracle(v_current, space.t, space.bounds)
    trace: list[float] = []
    final = grover_iterate(space, oracle, L,
                           record=lambda i, s: trace.append(space.good_probability(s, oracle)))
    probs = space.policy_marginal(final)
    probs = probs / probs.sum()
    rng = make_rng(seed)
    idx = int(rng.choice(probs.size, p=probs))
    return space.policies[idx], trace
