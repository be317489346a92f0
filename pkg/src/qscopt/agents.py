"""End-to-end agents: the Grover policy agent (GPA) and the gate-per-step
amplified baseline agent (GAQA), plus their paired comparison.

The GPA evaluates every enumerated policy by phase estimation, then runs
Grover-amplified improvement rounds until no policy's estimated value exceeds
the incumbent, and finally tie-breaks equally-valued winners toward fewer
gates (then lower id). The two simplified-variant episodes are evaluated in
parallel within one register over the generator-angle schedule; the GAQA
builds its circuit one measured action at a time and pays its rotation budget
sequentially, which is the comparison the paired traces expose.

The shared angle schedule is linear from 0 to 0.1 across the rotation budget
(rotation 1 sits at angle 0, so every trace starts at QFI 0).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError
from .gates import op_cnot, op_rotation
from .circuit import Circuit, CircuitOp
from .policies import (DEFAULT_ANGLES, Policy, enumerate_policies,
                       exact_returns, policy_state)
from .qfi import (EPISODE_DECODE, EpisodeLayout, MeasurementLayout, QfiValue,
                  QscConfig, RZ_SWEEP_MAX, build_qsc, measurement_layout,
                  qfi_analytic, qfi_from_counts)
from .qpe import DEFAULT_T, ReturnBounds, estimate_value
from .qpi import (RotationPlan, SearchSpace, build_threshold_oracle,
                  grover_iterate, prepare_search_space, rotation_count)
from .statevector import (Statevector, make_rng, marginal_distribution,
                          new_zero_state, sample_measure, spawn_seed)

DEFAULT_ROTATIONS = 40
DEFAULT_K = 4.0  # scales k(r + v') into the useful rotation range at |P| <= 64
GAQA_MAX_ACTIONS = 10
GAQA_ACTIONS = ("rx", "ry", "rz", "cnot")
_IMPROVE_ROUND_CAP = 256


def rotation_schedule(rotations: int, rz_max: float = RZ_SWEEP_MAX) -> list[float]:
    """Generator angle per rotation index: linear 0 -> rz_max inclusive."""
    if rotations < 2:
        raise ValueError("need at least two rotations for a schedule")
    return [rz_max * i / (rotations - 1) for i in range(rotations)]


@dataclass(frozen=True)
class EpisodeResult:
    """Outcome of one agent episode."""

    policy: Policy
    qfi: QfiValue
    gate_count: int
    trace: tuple
    seed: int
    wall_time: float

    def to_dict(self) -> dict:
        # canonical form: wall_time excluded so serializations are reproducible
        return {
            "policy_id": self.policy.id,
            "actions": list(self.policy.actions),
            "gate_count": self.gate_count,
            "qfi_raw": self.qfi.raw,
            "qfi_normalized": self.qfi.normalized,
            "qfi_method": self.qfi.method,
            "trace": [list(entry) for entry in self.trace],
            "seed": self.seed,
        }


# --- GPA ----------------------------------------------------------------------


def gpa_run(policies=None, t: int = DEFAULT_T, shots: int = 4096, seed: int = 1,
            rotations: int | None = None, k: float = DEFAULT_K,
            bounds: ReturnBounds = ReturnBounds()) -> EpisodeResult:
    """Full GPA loop: QPE evaluation of every policy, Grover improvement
    rounds, and gate-count tie-breaking of the measured optimum.

    `rotations`, when given, fixes the per-round rotation count; otherwise the
    rotation-count rule runs with theta set to the current Grover angle.
    """
    started = time.perf_counter()
    policies = tuple(policies) if policies is not None else enumerate_policies()
    if not policies:
        raise ValueError("empty policy space")

    true_qfi = exact_returns(policies)
    if len(policies) == 1:
        lone = policies[0]
        q = qfi_analytic(policy_state(lone))
        return EpisodeResult(lone, q, lone.gate_count, (), seed,
                             time.perf_counter() - started)

    estimates = {
        p.id: estimate_value(p, t=t, shots=shots, seed=spawn_seed(seed, 1, p.id),
                             bounds=bounds).estimate
        for p in policies
    }
    space = prepare_search_space(policies, t, bounds, estimates)
    qfi_by_index = np.array([true_qfi[p.id] for p in policies])

    rng = make_rng(spawn_seed(seed, 2))
    incumbent = policies[int(rng.integers(len(policies)))]
    v_cur = estimates[incumbent.id]

    trace: list[tuple[int, float, float]] = []
    rotation_index = 0
    for round_index in range(_IMPROVE_ROUND_CAP):
        above = [p for p in policies if estimates[p.id] > v_cur]
        if not above:
            break
        oracle = build_threshold_oracle(v_cur, t, bounds)
        theta = space.grover_angle(oracle)
        if theta <= 0.0:
            break
        if rotations is not None:
            L = rotations
        else:
            v_next = max(estimates[p.id] for p in above)
            L = rotation_count(k, v_cur, v_next, theta)

        entries: list[tuple[int, float, float]] = []

        def record(i, s):
            nonlocal rotation_index
            rotation_index += 1
            good = space.good_probability(s, oracle)
            expected = float(space.policy_marginal(s) @ qfi_by_index)
            entries.append((rotation_index, good, expected))

        final = grover_iterate(space, oracle, L, record=record)
        probs = space.policy_marginal(final)
        measured = space.policies[int(make_rng(spawn_seed(seed, 3, round_index))
                                      .choice(probs.size, p=probs / probs.sum()))]
        trace.extend(entries)
        if estimates[measured.id] > v_cur:
            incumbent, v_cur = measured, estimates[measured.id]
    else:
        raise InvariantError("policy improvement failed to converge")

    tied = [p for p in policies if estimates[p.id] >= v_cur - 1e-12]
    selected = min(tied, key=lambda p: (p.gate_count, p.id))
    final_qfi = qfi_analytic(policy_state(selected))
    return EpisodeResult(selected, final_qfi, selected.gate_count, tuple(trace),
                         seed, time.perf_counter() - started)


# --- parallel two-episode run ---------------------------------------------------


def _episode_qfi_values(config: QscConfig, shots: int, seed: int, key: int):
    """Counts-method QFI of each episode of the built circuit at its angle."""
    circuit = build_qsc(config)
    state = circuit.apply(new_zero_state(circuit.n_qubits))
    out = []
    for j, layout in enumerate(measurement_layout(config)):
        if shots:
            hist = sample_measure(state, layout.measured_qubits, shots,
                                  spawn_seed(seed, key, j))
            out.append(qfi_from_counts(hist, layout))
        else:
            probs = marginal_distribution(state, layout.measured_qubits)
            out.append(qfi_from_counts(probs, layout))
    return out


def gpa_run_parallel_episodes(config: QscConfig, rotations: int = DEFAULT_ROTATIONS,
                              seed: int = 1, shots: int = 0):
    """Evaluate both simplified-variant episodes in one register across the
    angle schedule. Returns (per-episode EpisodeResult tuple, winner index);
    the winner has the higher final counts-method QFI (ties -> lower index).
    """
    started = time.perf_counter()
    if config.variant != "simplified":
        raise ValueError("parallel episodes need the simplified variant")
    schedule = rotation_schedule(rotations)
    traces: list[list[tuple[int, float, float]]] = [[] for _ in config.episodes]
    finals: list[QfiValue] = [None] * len(config.episodes)
    for r, gamma in enumerate(schedule, start=1):
        values = _episode_qfi_values(config.with_rz(gamma), shots, seed, r)
        for e, q in enumerate(values):
            traces[e].append((r, gamma, q.normalized))
            finals[e] = q

    winner = max(range(len(finals)), key=lambda e: (finals[e].normalized, -e))
    elapsed = time.perf_counter() - started
    results = tuple(
        EpisodeResult(
            policy=Policy(id=e, actions=("rx", "rz", "ry"), horizon=3),
            qfi=finals[e], gate_count=3, trace=tuple(traces[e]),
            seed=seed, wall_time=elapsed)
        for e in range(len(config.episodes)))
    return results, winner


# --- GAQA -----------------------------------------------------------------------


@dataclass
class GaqaState:
    """Loop bookkeeping for one GAQA episode."""

    history: list[str]
    state: Statevector
    qfi: float
    steps: int


def _gaqa_circuit(seq, gamma: float, ep: EpisodeLayout,
                  angles=DEFAULT_ANGLES) -> Circuit:
    """The agent's gate sequence with the generator inserted before the last
    signal-arm rotation, followed by the subtraction readout block."""
    arm_gates = {"rx", "ry", "rz"}
    last_arm = max((i for i, a in enumerate(seq) if a in arm_gates), default=None)
    ops: list[CircuitOp] = []
    for i, a in enumerate(seq):
        if i == last_arm:
            ops.append(op_rotation("z", gamma, ep.signal))
        if a in arm_gates:
            ops.append(op_rotation(a[1], angles[a], ep.signal))
        else:
            ops.append(op_cnot(ep.signal, ep.reference))
    from .gates import half_subtractor
    ops += half_subtractor(ep.signal, ep.reference, ep.borrow).ops
    return Circuit(max(ep.qubits()) + 1, tuple(ops),
                   measure_qubits=(ep.reference, ep.borrow))


def _gaqa_counts_qfi(seq, gamma: float, ep: EpisodeLayout) -> float:
    measured = (ep.reference, ep.borrow)
    state0 = _gaqa_circuit(seq, 0.0, ep).apply(new_zero_state(max(ep.qubits()) + 1))
    stub = MeasurementLayout(measured, EPISODE_DECODE, "variance", 1, 2)
    baseline = stub.decode_distribution(marginal_distribution(state0, measured))
    layout = MeasurementLayout(measured, EPISODE_DECODE, "sensitivity", 1, 2,
                               rz_angle=gamma, baseline=baseline)
    state = _gaqa_circuit(seq, gamma, ep).apply(new_zero_state(max(ep.qubits()) + 1))
    return qfi_from_counts(marginal_distribution(state, measured), layout).normalized


def _amplify_and_pick(good_index, n_actions: int, L: int, rng) -> int:
    """Grover-amplify the action register (uniform start) and measure it."""
    v = np.full(n_actions, 1.0 / math.sqrt(n_actions))
    u = v.copy()
    for _ in range(L):
        v = v.copy()
        v[good_index] *= -1.0
        v = 2.0 * (u @ v) * u - v
    probs = v * v
    return int(rng.choice(n_actions, p=probs / probs.sum()))


def gaqa_run(action_set=GAQA_ACTIONS, rotations: int = DEFAULT_ROTATIONS,
             max_actions: int = GAQA_MAX_ACTIONS, episodes: int = 2,
             k: float = 1.0, seed: int = 1,
             ep: EpisodeLayout | None = None):
    """Sequential gate-per-step agent: amplitude-amplify the action register
    (rotation count from the k(r + v') rule), measure-collapse to pick a gate,
    apply it, and score the circuit's counts-method QFI as the reward.

    Episodes share one rotation budget; each stops at `max_actions` actions or
    a QFI of 1. Returns (per-episode EpisodeResult tuple, per-rotation trace of
    the best circuit so far at that rotation's angle).
    """
    started = time.perf_counter()
    if not action_set:
        raise ValueError("empty action set")
    ep = ep or EpisodeLayout(0, 1, 2, math.pi / 2, math.pi / 2)
    schedule = rotation_schedule(rotations)
    rng = make_rng(spawn_seed(seed, 11))

    rot_used = 0
    # (first busy slot, sequence built so far, episode index) per step
    snapshots: list[tuple[int, tuple[str, ...], int]] = []
    results = []
    for episode in range(episodes):
        agent = GaqaState(history=[], state=new_zero_state(max(ep.qubits()) + 1),
                          qfi=0.0, steps=0)
        best_seq: tuple[str, ...] = ()
        best_q = 0.0
        while agent.steps < max_actions and rot_used < rotations:
            gamma = schedule[min(rot_used, rotations - 1)]
            q_cur = _gaqa_counts_qfi(agent.history, gamma, ep)
            lookahead = {a: _gaqa_counts_qfi(agent.history + [a], gamma, ep)
                         for a in action_set}
            good = [i for i, a in enumerate(action_set)
                    if lookahead[a] > q_cur + 1e-12]
            if good:
                theta = math.asin(math.sqrt(len(good) / len(action_set)))
                v_next = max(lookahead.values())
                L = rotation_count(k, q_cur, v_next, theta)
            else:
                L = 0
            pick = _amplify_and_pick(good, len(action_set), L, rng)
            action = action_set[pick]
            agent.history.append(action)
            agent.steps += 1
            snapshots.append((rot_used + 1, tuple(agent.history), episode))
            rot_used += max(L, 1)
            agent.qfi = _gaqa_counts_qfi(agent.history, gamma, ep)
            agent.state = _gaqa_circuit(agent.history, gamma, ep).apply(
                new_zero_state(max(ep.qubits()) + 1))
            if agent.qfi > best_q:
                best_seq, best_q = tuple(agent.history), agent.qfi
            if agent.qfi >= 1.0 - 1e-6:
                break
        # the agent keeps the best-rewarded circuit it built, classical bookkeeping
        final_q = _gaqa_counts_qfi(list(best_seq), schedule[-1], ep)
        results.append(EpisodeResult(
            policy=Policy(id=episode, actions=best_seq, horizon=max_actions),
            qfi=QfiValue(raw=8.0 * final_q, normalized=final_q, n_qubits=2,
                         method="counts"),
            gate_count=len(best_seq), trace=(), seed=seed,
            wall_time=time.perf_counter() - started))

    # trace: the circuit the agent holds at each rotation (the active episode's
    # sequence so far), floored by completed episodes' kept circuits
    episode_bests = [tuple(r.policy.actions) for r in results]
    trace = []
    for r, gamma in enumerate(schedule, start=1):
        done = [snap for snap in snapshots if snap[0] <= r]
        if done:
            current_ep = done[-1][2]
            candidates = [done[-1][1]]
            candidates += [episode_bests[e] for e in range(current_ep)
                           if episode_bests[e]]
        else:
            candidates = []
        best = max((_gaqa_counts_qfi(list(seq), gamma, ep) for seq in candidates),
                   default=0.0)
        trace.append((r, gamma, best))
    return tuple(results), tuple(trace)


# --- paired comparison -----------------------------------------------------------


@dataclass(frozen=True)
class ComparisonResult:
    rotations: int
    gpa_trace: tuple          # (rotation, angle, qfi) of the parallel-run winner
    gaqa_trace: tuple         # (rotation, angle, median qfi across seeds)
    gpa_final: float
    gaqa_finals: tuple        # per-seed final values
    gaqa_median_final: float

    def paired_rows(self):
        return [(r, g[2], q[2]) for (r, *_), g, q in
                zip(self.gpa_trace, self.gpa_trace, self.gaqa_trace)]


def compare_agents(config: QscConfig, rotations: int = DEFAULT_ROTATIONS,
                   seeds=(1,), k: float = 1.0) -> ComparisonResult:
    """Aligned per-rotation QFI traces for the GPA (parallel episodes, exact
    readout) and the GAQA (sequential, per-seed stochastic), both on the
    simplified sensor at the shared angle schedule."""
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    episodes, winner = gpa_run_parallel_episodes(config, rotations, seed=seeds[0])
    gpa_trace = episodes[winner].trace

    gaqa_traces = []
    finals = []
    for seed in seeds:
        _, trace = gaqa_run(rotations=rotations, k=k, seed=seed)
        gaqa_traces.append(trace)
        finals.append(trace[-1][2])
    median_trace = tuple(
        (r + 1, gpa_trace[r][1],
         float(np.median([tr[r][2] for tr in gaqa_traces])))
        for r in range(rotations))

    if len(gpa_trace) != len(median_trace):
        raise InvariantError("comparison traces misaligned")
    return ComparisonResult(
        rotations=rotations, gpa_trace=gpa_trace, gaqa_trace=median_trace,
        gpa_final=gpa_trace[-1][2], gaqa_finals=tuple(finals),
        gaqa_median_final=float(np.median(finals)))
