"""Quantum Fisher information: analytic variance form and counts-based readouts.

Analytic form (collective Pauli-Z generator on n sensing qubits):

    raw        = 4 (<Z^2> - <Z>^2) / n
    normalized = raw / (4 n)  =  Var(Z) / n^2

so the two-qubit NOON state scores 1 and a separable two-qubit state at most
0.5. The 4n normalization is the unique linear scale with both properties.

Counts-based readouts decode the signed difference `d` carried by a
subtraction circuit's difference/sign qubits and come in two documented modes:

* ``variance``  - normalized = 2 Var(d) / n_block^2 over the decoded outcome
  distribution; used for the six-qubit circuit that subtracts two identically
  prepared two-qubit blocks (the difference of excitation counts carries the
  collective-Z statistics; the NOON family decodes exactly).
* ``sensitivity`` - normalized = (TV / gamma)^2 / 2, where TV is the total
  variation between the decoded distribution and its zero-angle calibration
  and gamma the generator angle; defined as 0 at gamma = 0. Used for the
  three-qubit episode circuits, whose 0.1-radian sweep produces shifts of
  order gamma. Because a rotation by gamma on a single qubit moves any state
  by trace distance at most sin(gamma/2), this reading is strictly below
  0.5 * (sin(gamma/2)/(gamma/2))^2 < 0.5 for every squeeze-free preparation,
  which is exactly the no-squeezing ceiling.

Sampled histograms feed the same decoders, but the sensitivity reading is
noise-biased at small angles (|shift| ~ gamma competes with multinomial
noise), so sweep traces default to exact distributions (shots = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, CircuitOp
from .gates import (cdkm_adder_inv, collective_z_diag, half_subtractor,
                    op_rotation, op_squeeze)
from .statevector import (ATOL_ALGEBRAIC, ATOL_CIRCUIT, ShotHistogram,
                          Statevector, expectation_diag, marginal_distribution,
                          new_zero_state, sample_measure, spawn_seed)

RZ_SWEEP_MAX = 0.1
DEFAULT_SQUEEZE_ANGLE = math.pi / 8


@dataclass(frozen=True)
class QfiValue:
    raw: float
    normalized: float
    n_qubits: int
    method: str  # "analytic" | "counts"

    def __post_init__(self):
        if self.method not in ("analytic", "counts"):
            raise ValueError(f"unknown QFI method {self.method!r}")
        if abs(self.normalized - self.raw / (4 * self.n_qubits)) > ATOL_ALGEBRAIC:
            raise ValueError("normalized/raw inconsistent with the 4n scale")


def _qfi_value(normalized: float, n: int, method: str) -> QfiValue:
    return QfiValue(raw=4.0 * n * normalized, normalized=normalized,
                    n_qubits=n, method=method)


def qfi_analytic(state: Statevector, qubits=None) -> QfiValue:
    """Eq.-style variance QFI of the collective-Z generator over `qubits`
    (default: all qubits of the state). Global-phase invariant."""
    if qubits is None:
        qubits = tuple(range(state.n_qubits))
    qubits = tuple(qubits)
    n = len(qubits)
    if n < 1:
        raise ValueError("need at least one sensing qubit")
    idx = np.arange(state.amplitudes.size)
    z = np.zeros(idx.size)
    for q in qubits:
        if not 0 <= q < state.n_qubits:
            raise ValueError(f"sensing qubit {q} out of range")
        z += 1.0 - 2.0 * ((idx >> q) & 1)
    ez = expectation_diag(state, z)
    ez2 = expectation_diag(state, z * z)
    variance = ez2 - ez * ez
    if -ATOL_CIRCUIT < variance < 0.0:  # subtraction noise on a true zero
        variance = 0.0
    return _qfi_value(variance / (n * n), n, "analytic")


# --- sensor circuit configurations ------------------------------------------

@dataclass(frozen=True)
class EpisodeLayout:
    """One three-qubit episode: Ramsey arm, reference arm, borrow qubit."""

    signal: int
    reference: int
    borrow: int
    rx_angle: float
    ry_angle: float

    def qubits(self):
        return (self.signal, self.reference, self.borrow)


DEFAULT_EPISODES = (
    EpisodeLayout(0, 1, 2, math.pi / 2, math.pi / 2),
    EpisodeLayout(3, 4, 5, math.pi / 4, math.pi / 4),
)


@dataclass(frozen=True)
class QscConfig:
    """Configuration of the sensor circuit build.

    variant "full": six qubits; the preparation sequence `prep_actions` is
    applied collectively to both sensing pairs (0,1) and (2,3), the Rz
    generator tags every sensing qubit, and the inverse ripple-carry adder
    subtracts pair (0,1) from pair (2,3) with carry/sign on qubits 4-5.

    variant "simplified": two three-qubit episodes (see EpisodeLayout), each
    a Ramsey sandwich Rx - Rz - Ry on the signal arm followed by the
    CNOT/CV/CVinv half subtractor against the reference arm.
    """

    variant: str = "full"
    rx_angle: float = math.pi / 2
    ry_angle: float = math.pi / 2
    rz_angle: float = 0.05
    squeeze_angle: float | None = DEFAULT_SQUEEZE_ANGLE
    prep_actions: tuple[str, ...] = ("rx", "squeeze", "ry", "rx")
    episodes: tuple[EpisodeLayout, ...] = DEFAULT_EPISODES

    def __post_init__(self):
        if self.variant not in ("full", "simplified"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "simplified":
            if self.squeeze_angle is not None:
                raise ValueError("simplified variant has no squeeze gate")
            if not 0.0 <= self.rz_angle <= RZ_SWEEP_MAX:
                raise ValueError(f"simplified rz_angle must be in 0 to {RZ_SWEEP_MAX}")
        else:
            if "squeeze" in self.prep_actions and self.squeeze_angle is None:
                raise ValueError("full variant prep uses squeeze but no angle given")
        for a in self.prep_actions:
            if a not in ("rx", "ry", "squeeze"):
                raise ValueError(f"unsupported prep action {a!r}")

    def with_rz(self, rz_angle: float) -> "QscConfig":
        return QscConfig(variant=self.variant, rx_angle=self.rx_angle,
                         ry_angle=self.ry_angle, rz_angle=rz_angle,
                         squeeze_angle=self.squeeze_angle,
                         prep_actions=self.prep_actions, episodes=self.episodes)


FULL_PAIRS = ((0, 1), (2, 3))
FULL_CARRY, FULL_SIGN = 4, 5


def _pair_prep_ops(config: QscConfig, pair) -> list[CircuitOp]:
    ops: list[CircuitOp] = []
    for action in config.prep_actions:
        if action == "rx":
            ops += [op_rotation("x", config.rx_angle, q) for q in pair]
        elif action == "ry":
            ops += [op_rotation("y", config.ry_angle, q) for q in pair]
        else:
            ops.append(op_squeeze(config.squeeze_angle, pair[0], pair[1]))
    ops += [op_rotation("z", config.rz_angle, q) for q in pair]
    return ops


def _episode_ops(ep: EpisodeLayout, rz_angle: float) -> tuple[CircuitOp, ...]:
    ops = (op_rotation("x", ep.rx_angle, ep.signal),
           op_rotation("z", rz_angle, ep.signal),
           op_rotation("y", ep.ry_angle, ep.signal))
    return ops + half_subtractor(ep.signal, ep.reference, ep.borrow).ops


def build_qsc(config: QscConfig) -> Circuit:
    """Materialize the configured sensor circuit (see QscConfig docstring)."""
    if config.variant == "full":
        ops: list[CircuitOp] = []
        for pair in FULL_PAIRS:
            ops += _pair_prep_ops(config, pair)
        sub = cdkm_adder_inv(2).remap(
            {0: FULL_PAIRS[0][0], 1: FULL_PAIRS[0][1],
             2: FULL_PAIRS[1][0], 3: FULL_PAIRS[1][1],
             4: FULL_CARRY, 5: FULL_SIGN})
        ops += sub.ops
        measured = (FULL_PAIRS[1][0], FULL_PAIRS[1][1], FULL_CARRY, FULL_SIGN)
        return Circuit(6, tuple(ops), measure_qubits=measured)
    ops = ()
    measured = ()
    for ep in config.episodes:
        ops += _episode_ops(ep, config.rz_angle)
        measured += (ep.reference, ep.borrow)
    n = max(q for ep in config.episodes for q in ep.qubits()) + 1
    return Circuit(n, ops, measure_qubits=measured)


# --- counts-based decoding ---------------------------------------------------

@dataclass(frozen=True)
class MeasurementLayout:
    """Decoding recipe for one subtraction readout.

    `decode` maps each measured outcome (integer, bit j = measured_qubits[j])
    to its signed difference. Sensitivity mode additionally carries the
    generator angle and the exact zero-angle calibration distribution over
    decoded values.
    """

    measured_qubits: tuple[int, ...]
    decode: dict[int, int]
    mode: str  # "variance" | "sensitivity"
    n_block: int
    sensor_qubits: int
    rz_angle: float = 0.0
    baseline: dict[int, float] | None = None

    def __post_init__(self):
        if self.mode not in ("variance", "sensitivity"):
            raise ValueError(f"unknown layout mode {self.mode!r}")
        if self.mode == "sensitivity" and self.baseline is None:
            raise ValueError("sensitivity layout needs a zero-angle baseline")

    def decode_distribution(self, probs: np.ndarray) -> dict[int, float]:
        out: dict[int, float] = {}
        for outcome, p in enumerate(probs):
            if p <= 0.0:
                continue
            d = self.decode.get(outcome, 0)
            out[d] = out.get(d, 0.0) + float(p)
        return out


def _full_decode_table() -> dict[int, int]:
    # measured (b2, b3, carry, sign); difference register value r = b2 + 2 b3
    # + 4 sign, two's complement mod 8; |d| = binary weight of the magnitude.
    table = {}
    for outcome in range(16):
        b2, b3 = outcome & 1, (outcome >> 1) & 1
        carry, sign = (outcome >> 2) & 1, (outcome >> 3) & 1
        if carry:
            table[outcome] = 0  # returned ancilla, unreachable
            continue
        r = b2 + 2 * b3 + 4 * sign
        mag = r if sign == 0 else 8 - r
        table[outcome] = (1 if sign == 0 else -1) * int(bin(mag).count("1"))
    return table


EPISODE_DECODE = {0b00: 0, 0b01: 1, 0b10: 0, 0b11: -1}  # bits (diff, borrow)


def measurement_layout(config: QscConfig) -> tuple[MeasurementLayout, ...]:
    """Layouts for qfi_from_counts, one per episode (one for the full variant).

    Sensitivity baselines are computed from the exact zero-angle circuit, so
    the layout is a pure function of the configuration.
    """
    if config.variant == "full":
        return (MeasurementLayout(
            measured_qubits=(FULL_PAIRS[1][0], FULL_PAIRS[1][1], FULL_CARRY, FULL_SIGN),
            decode=_full_decode_table(), mode="variance", n_block=2,
            sensor_qubits=2),)
    zero_state = build_qsc(config.with_rz(0.0)).apply(
        new_zero_state(max(q for ep in config.episodes for q in ep.qubits()) + 1))
    layouts = []
    for ep in config.episodes:
        measured = (ep.reference, ep.borrow)
        probs0 = marginal_distribution(zero_state, measured)
        stub = MeasurementLayout(measured, EPISODE_DECODE, "variance", 1, 2)
        layouts.append(MeasurementLayout(
            measured_qubits=measured, decode=EPISODE_DECODE, mode="sensitivity",
            n_block=1, sensor_qubits=2, rz_angle=config.rz_angle,
            baseline=stub.decode_distribution(probs0)))
    return tuple(layouts)


def _probs_from(hist, n_measured: int) -> np.ndarray:
    size = 1 << n_measured
    if isinstance(hist, ShotHistogram):
        if hist.n_measured != n_measured:
            raise ValueError(f"histogram width {hist.n_measured} != layout width {n_measured}")
        probs = np.zeros(size)
        for key, count in hist.counts.items():
            probs[int(key, 2)] = count / hist.total_shots
        return probs
    probs = np.asarray(hist, dtype=float)
    if probs.shape != (size,):
        raise ValueError(f"distribution length {probs.size} != layout size {size}")
    total = probs.sum()
    if total <= 0:
        raise ValueError("empty distribution")
    return probs / total


def qfi_from_counts(hist, layout: MeasurementLayout) -> QfiValue:
    """Counts-method QFI from a histogram (or exact distribution) and layout."""
    probs = _probs_from(hist, len(layout.measured_qubits))
    dist = layout.decode_distribution(probs)
    if layout.mode == "variance":
        m1 = sum(d * p for d, p in dist.items())
        m2 = sum(d * d * p for d, p in dist.items())
        normalized = 2.0 * (m2 - m1 * m1) / (layout.n_block ** 2)
    else:
        gamma = layout.rz_angle
        if gamma == 0.0:
            normalized = 0.0
        else:
            support = set(dist) | set(layout.baseline)
            tv = sum(abs(dist.get(d, 0.0) - layout.baseline.get(d, 0.0)) for d in support)
            if tv < ATOL_ALGEBRAIC:  # below numerical noise of the exact baseline
                tv = 0.0
            normalized = (tv / gamma) ** 2 / 2.0
    return _qfi_value(normalized, layout.sensor_qubits, "counts")


def qfi_sweep(config: QscConfig, rz_grid, shots: int = 0, seed: int = 0):
    """Counts-method QFI across the generator-angle grid.

    Returns a list of (angle, per-episode QfiValue tuple). shots = 0 decodes
    exact distributions (the default for traces); shots > 0 samples per angle
    with per-point derived seeds.
    """
    grid = [float(g) for g in rz_grid]
    if not grid:
        raise ValueError("empty rz grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("rz grid must be monotone non-decreasing")
    if config.variant == "simplified" and not all(0.0 <= g <= RZ_SWEEP_MAX for g in grid):
        raise ValueError(f"simplified rz grid must stay in 0 to {RZ_SWEEP_MAX}")

    trace = []
    for i, angle in enumerate(grid):
        cfg = config.with_rz(angle)
        circuit = build_qsc(cfg)
        state = circuit.apply(new_zero_state(circuit.n_qubits))
        values = []
        for j, layout in enumerate(measurement_layout(cfg)):
            if shots:
                hist = sample_measure(state, layout.measured_qubits, shots,
                                      spawn_seed(seed, i, j))
                values.append(qfi_from_counts(hist, layout))
            else:
                probs = marginal_distribution(state, layout.measured_qubits)
                values.append(qfi_from_counts(probs, layout))
        trace.append((angle, tuple(values)))
    return trace
