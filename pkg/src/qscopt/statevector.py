"""Dense complex statevector simulation with seeded Born-rule sampling.

Conventions fixed library-wide:

* Bit ordering is little-endian: qubit ``j`` is bit ``j`` of the basis index,
  so applying X on qubit ``j`` maps index ``i`` to ``i ^ (1 << j)``.
* Measurement outcomes are reported as the integer ``x`` whose bit ``j``
  is the observed value of ``qubits[j]``; bitstrings render ``x`` zero-padded,
  most significant bit (the last listed qubit) first.
* Tolerances: ATOL_ALGEBRAIC (1e-12) for single algebraic identities,
  ATOL_CIRCUIT (1e-9) for composed circuits.
* Randomness comes from numpy's PCG64, seeded explicitly everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError

ATOL_ALGEBRAIC = 1e-12
ATOL_CIRCUIT = 1e-9
MAX_QUBITS = 24
RNG_ALGORITHM = "numpy-pcg64"


def make_rng(seed: int) -> np.random.Generator:
    """The library-wide seeded generator (PCG64)."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_seed(seed: int, *key: int) -> int:
    """Derive a child seed deterministically from a root seed and a key path."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class UnitaryMatrix:
    """A dim x dim unitary, validated to 1e-12 on construction."""

    __slots__ = ("matrix", "dim")

    def __init__(self, matrix: np.ndarray):
        m = np.ascontiguousarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"unitary must be square, got shape {m.shape}")
        dim = m.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"unitary dimension must be a power of two >= 2, got {dim}")
        err = np.abs(m @ m.conj().T - np.eye(dim)).max()
        if err > ATOL_ALGEBRAIC:
            raise ValueError(f"matrix is not unitary (deviation {err:.3g})")
        m.setflags(write=False)
        self.matrix = m
        self.dim = dim

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def adjoint(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.matrix.conj().T)

    def __repr__(self):
        return f"UnitaryMatrix(dim={self.dim})"


def as_unitary(gate) -> UnitaryMatrix:
    return gate if isinstance(gate, UnitaryMatrix) else UnitaryMatrix(np.asarray(gate))


class Statevector:
    """Immutable dense state over 2**n_qubits amplitudes, unit norm to 1e-12."""

    __slots__ = ("amplitudes", "n_qubits")

    def __init__(self, amplitudes: np.ndarray, n_qubits: int | None = None):
        a = np.ascontiguousarray(amplitudes, dtype=complex)
        if a.ndim != 1:
            raise ValueError("amplitudes must be one-dimensional")
        dim = a.size
        if n_qubits is None:
            n_qubits = dim.bit_length() - 1
        if dim != 1 << n_qubits:
            raise ValueError(f"expected {1 << n_qubits} amplitudes, got {dim}")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > ATOL_ALGEBRAIC:
            raise ValueError(f"state norm {norm!r} is not 1 within {ATOL_ALGEBRAIC}")
        a.setflags(write=False)
        self.amplitudes = a
        self.n_qubits = n_qubits

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __repr__(self):
        return f"Statevector(n_qubits={self.n_qubits})"


def new_zero_state(n: int) -> Statevector:
    """|0...0> on n qubits. 1 <= n <= 24."""
    if not 1 <= n <= MAX_QUBITS:
        raise CapacityError(f"qubit count {n} outside supported range 1..{MAX_QUBITS}")
    a = np.zeros(1 << n, dtype=complex)
    a[0] = 1.0
    return Statevector(a, n)


def _check_qubits(n: int, targets, controls):
    targets = tuple(targets)
    controls = tuple(controls)
    seen = set()
    for q in targets + controls:
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range for {n}-qubit state")
        if q in seen:
            raise ValueError(f"qubit index {q} repeated across targets/controls")
        seen.add(q)
    if not targets:
        raise ValueError("at least one target qubit required")
    return targets, controls


def apply_gate(state: Statevector, gate, targets, controls=()) -> Statevector:
    """Apply a (controlled) unitary to the listed target qubits.

    Bit j of the gate's own index space corresponds to targets[j]. Controls
    activate on |1>. Returns a new Statevector; the input is untouched.
    """
    u = as_unitary(gate)
    n = state.n_qubits
    targets, controls = _check_qubits(n, targets, controls)
    k = len(targets)
    if u.dim != 1 << k:
        raise ValueError(f"gate dim {u.dim} does not match {k} target qubit(s)")

    non_targets = [q for q in range(n) if q not in targets]
    rest = np.arange(1 << (n - k), dtype=np.int64)
    base = np.zeros(rest.size, dtype=np.int64)
    for j, q in enumerate(non_targets):
        base |= ((rest >> j) & 1) << q
    if controls:
        cmask = 0
        for c in controls:
            cmask |= 1 << c
        base = base[(base & cmask) == cmask]

    sub = np.arange(1 << k, dtype=np.int64)
    offsets = np.zeros(sub.size, dtype=np.int64)
    for j, q in enumerate(targets):
        offsets |= ((sub >> j) & 1) << q

    gather = offsets[:, None] + base[None, :]
    out = state.amplitudes.copy()
    out[gather] = u.matrix @ out[gather]
    return Statevector(out, n)


def expectation_diag(state: Statevector, diagonal) -> float:
    """<psi| D |psi> for a diagonal observable given by its basis values."""
    d = np.asarray(diagonal, dtype=float)
    if d.shape != state.amplitudes.shape:
        raise ValueError(f"diagonal length {d.size} != state dimension {state.amplitudes.size}")
    return float(state.probabilities() @ d)


def marginal_distribution(state: Statevector, qubits) -> np.ndarray:
    """Exact Born distribution over the listed qubits (outcome integer x,
    bit j of x = qubits[j])."""
    qubits = tuple(qubits)
    if not qubits:
        raise ValueError("at least one measured qubit required")
    targets, _ = _check_qubits(state.n_qubits, qubits, ())
    idx = np.arange(state.amplitudes.size, dtype=np.int64)
    x = np.zeros(idx.size, dtype=np.int64)
    for j, q in enumerate(targets):
        x |= ((idx >> q) & 1) << j
    return np.bincount(x, weights=state.probabilities(), minlength=1 << len(targets))


def outcome_str(x: int, n_measured: int) -> str:
    return format(x, f"0{n_measured}b")


@dataclass(frozen=True)
class ShotHistogram:
    """Measured bitstring counts from repeated sampling of one state."""

    counts: dict[str, int]
    total_shots: int
    seed: int
    n_measured: int = field(default=0)

    def __post_init__(self):
        if self.total_shots < 1:
            raise ValueError("total_shots must be >= 1")
        n = self.n_measured or len(next(iter(self.counts)))
        object.__setattr__(self, "n_measured", n)
        if sum(self.counts.values()) != self.total_shots:
            raise ValueError("histogram counts do not sum to total_shots")
        for key in self.counts:
            if len(key) != n or set(key) - {"0", "1"}:
                raise ValueError(f"malformed outcome key {key!r}")

    def frequencies(self) -> dict[str, float]:
        return {k: v / self.total_shots for k, v in self.counts.items()}

    def modal_outcome(self) -> str:
        # ties broken toward the smaller outcome value for determinism
        return min(self.counts, key=lambda k: (-self.counts[k], int(k, 2)))


def sample_measure(state: Statevector, qubits, shots: int, seed: int) -> ShotHistogram:
    """Draw `shots` outcomes from the exact marginal distribution of `qubits`."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    qubits = tuple(qubits)
    probs = marginal_distribution(state, qubits)
    rng = make_rng(seed)
    draws = rng.multinomial(shots, probs / probs.sum())
    m = len(qubits)
    counts = {outcome_str(x, m): int(c) for x, c in enumerate(draws) if c}
    return ShotHistogram(counts=counts, total_shots=shots, seed=seed, n_measured=m)


def collapse_measure(state: Statevector, qubits, seed: int) -> tuple[str, Statevector]:
    """Sample one outcome and project the state onto it (renormalized)."""
    qubits = tuple(qubits)
    probs = marginal_distribution(state, qubits)
    rng = make_rng(seed)
    x = int(rng.choice(probs.size, p=probs / probs.sum()))

    idx = np.arange(state.amplitudes.size, dtype=np.int64)
    keep = np.ones(idx.size, dtype=bool)
    for j, q in enumerate(qubits):
        keep &= ((idx >> q) & 1) == ((x >> j) & 1)
    post = np.where(keep, state.amplitudes, 0.0)
    post = post / np.linalg.norm(post)
    return outcome_str(x, len(qubits)), Statevector(post, state.n_qubits)
