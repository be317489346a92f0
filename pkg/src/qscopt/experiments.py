"""Experiment harness: flat key = value configs, seeded runs, CSV/JSON artifacts.

Config format: one experiment per file, lines of ``key = value``, blank lines
and ``#`` comments allowed, no repeated keys. Unknown keys are rejected with
their line number. Floats serialize with 9 significant digits everywhere, so
re-running a config byte-reproduces its outputs.

CSV schemas (headers are exact):

    qfi-sweep     rotation,rz_angle,qfi_qsc1,qfi_qsc2
    gpa-parallel  rotation,rz_angle,qfi_qsc1,qfi_qsc2
    compare       rotation,qfi_gpa,qfi_gaqa
    mae-curve     shots,mae
    qpe-eval      outcome,count
    gpa-run       policy_id,gates,value,qfi,selected
    qpi-search    rotation,good_probability
    gaqa-run      rotation,qfi_gaqa
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, asdict

import numpy as np

from . import __version__
from .agents import (DEFAULT_K, DEFAULT_ROTATIONS, compare_agents, gaqa_run,
                     gpa_run, gpa_run_parallel_episodes, rotation_schedule)
from .errors import ConfigError
from .policies import (DEFAULT_HORIZON, MAX_POLICIES, NOON_ALPHABET, Policy,
                       enumerate_policies, exact_returns, policy_return)
from .qfi import QscConfig, RZ_SWEEP_MAX, DEFAULT_SQUEEZE_ANGLE, qfi_sweep
from .qpe import ReturnBounds, estimate_value, mae_curve
from .qpi import build_threshold_oracle, improve_policy, prepare_search_space
from .statevector import RNG_ALGORITHM, spawn_seed

KINDS = ("qpe-eval", "mae-curve", "qpi-search", "gpa-run", "gpa-parallel",
         "gaqa-run", "compare", "qfi-sweep")

SIMPLIFIED_KINDS = ("qfi-sweep", "gpa-parallel", "compare", "gaqa-run")

_KEY_ORDER = ("kind", "variant", "seed", "seeds", "t", "shots", "rotations",
              "horizon", "max_policies", "actions", "policy", "rx_angle",
              "ry_angle", "rz_angle", "squeeze_angle", "bounds_lo", "bounds_hi",
              "k", "v_ref", "shots_grid", "plot", "csv_name", "svg_name")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    variant: str = ""            # defaulted per kind
    seed: int = 1
    seeds: tuple[int, ...] = ()  # multi-seed kinds; empty means derived from seed
    t: int = 4
    shots: int = 4096
    rotations: int = DEFAULT_ROTATIONS
    horizon: int = DEFAULT_HORIZON
    max_policies: int = MAX_POLICIES
    actions: tuple[str, ...] = NOON_ALPHABET
    policy: tuple[str, ...] = ("rx", "s", "rx")
    rx_angle: float = math.pi / 2
    ry_angle: float = math.pi / 2
    rz_angle: float = 0.05
    squeeze_angle: float = DEFAULT_SQUEEZE_ANGLE
    bounds_lo: float = 0.0
    bounds_hi: float = 1.0
    k: float = 1.0
    v_ref: float = 0.5
    shots_grid: tuple[int, ...] = (1, 4, 16, 64, 256, 1024)
    plot: bool = False
    csv_name: str = ""
    svg_name: str = ""

    def bounds(self) -> ReturnBounds:
        return ReturnBounds(self.bounds_lo, self.bounds_hi)

    def seed_list(self) -> tuple[int, ...]:
        return self.seeds or tuple(range(self.seed, self.seed + 20))

    def qsc_config(self) -> QscConfig:
        if self.variant == "simplified":
            return QscConfig(variant="simplified", rz_angle=self.rz_angle,
                             squeeze_angle=None)
        return QscConfig(variant="full", rx_angle=self.rx_angle,
                         ry_angle=self.ry_angle, rz_angle=self.rz_angle,
                         squeeze_angle=self.squeeze_angle)

    def csv_path(self) -> str:
        return self.csv_name or f"{self.kind}.csv"

    def svg_path(self) -> str:
        return self.svg_name or f"{self.kind}.svg"


def _parse_bool(raw: str) -> bool:
    if raw in ("true", "false"):
        return raw == "true"
    raise ValueError(f"expected true/false, got {raw!r}")


_PARSERS = {
    "kind": str, "variant": str,
    "seed": int, "t": int, "shots": int, "rotations": int,
    "horizon": int, "max_policies": int,
    "rx_angle": float, "ry_angle": float, "rz_angle": float,
    "squeeze_angle": float, "bounds_lo": float, "bounds_hi": float,
    "k": float, "v_ref": float,
    "seeds": lambda raw: tuple(int(x.strip()) for x in raw.split(",") if x.strip()),
    "shots_grid": lambda raw: tuple(int(x.strip()) for x in raw.split(",") if x.strip()),
    "actions": lambda raw: tuple(x.strip() for x in raw.split(",") if x.strip()),
    "policy": lambda raw: tuple(x.strip() for x in raw.split(",") if x.strip()),
    "plot": _parse_bool, "csv_name": str, "svg_name": str,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate an experiment description."""
    values: dict = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
        lines[key] = lineno

    def fail(key: str, message: str):
        raise ConfigError(message, lines.get(key))

    if "kind" not in values:
        raise ConfigError("missing required key 'kind'")
    if values["kind"] not in KINDS:
        fail("kind", f"unknown experiment kind {values['kind']!r}; expected one of {', '.join(KINDS)}")
    values.setdefault("variant",
                      "simplified" if values["kind"] in SIMPLIFIED_KINDS else "full")
    # trace kinds read exact distributions unless shots are requested explicitly
    if values["kind"] in SIMPLIFIED_KINDS:
        values.setdefault("shots", 0)
    if values["variant"] not in ("full", "simplified"):
        fail("variant", f"variant must be full or simplified, got {values['variant']!r}")

    config = ExperimentConfig(**values)
    if not 2 <= config.t <= 6:
        fail("t", f"counting width t = {config.t} outside 2..6")
    if config.shots < 0:
        fail("shots", "shots must be >= 0 (0 = exact distributions)")
    if config.rotations < 2:
        fail("rotations", "rotations must be >= 2")
    if not 1 <= config.horizon <= 6:
        fail("horizon", f"horizon {config.horizon} outside 1..6")
    if not 2 <= config.max_policies <= 64:
        fail("max_policies", f"max_policies {config.max_policies} outside 2..64")
    if config.variant == "simplified" and not 0.0 <= config.rz_angle <= RZ_SWEEP_MAX:
        fail("rz_angle", f"rz_angle {config.rz_angle:g} outside the simplified sweep range 0 to {RZ_SWEEP_MAX}")
    if not config.bounds_hi > config.bounds_lo:
        fail("bounds_hi", "bounds_hi must exceed bounds_lo")
    if not config.bounds_lo <= config.v_ref <= config.bounds_hi:
        fail("v_ref", f"v_ref {config.v_ref:g} outside the return bounds")
    for key in ("actions", "policy"):
        for name in getattr(config, key):
            if name not in ("rx", "ry", "rz", "s", "cnot"):
                fail(key, f"unknown action {name!r}")
    if any(s < 1 for s in config.shots_grid):
        fail("shots_grid", "shot counts must be >= 1")
    if list(config.shots_grid) != sorted(config.shots_grid):
        fail("shots_grid", "shots_grid must be increasing")
    return config


def format_float(x: float) -> str:
    """Canonical 9-significant-digit float rendering used in all artifacts."""
    return f"{x:.9g}"


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical config text; parse_config(serialize_config(c)) == c."""
    out = []
    for key in _KEY_ORDER:
        value = getattr(config, key)
        if isinstance(value, tuple):
            rendered = ",".join(str(v) for v in value)
            if not rendered:
                continue
        elif isinstance(value, bool):
            rendered = "true" if value else "false"
        elif isinstance(value, float):
            rendered = format_float(value)
        else:
            rendered = str(value)
            if not rendered:
                continue
        out.append(f"{key} = {rendered}")
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class RunRecord:
    """Reproducibility record: config + generator identity + traces + results."""

    config: ExperimentConfig
    generator: dict
    traces: dict
    results: dict
    content_hash: str = field(default="")

    def canonical_dict(self) -> dict:
        body = {
            "config": asdict(self.config),
            "generator": self.generator,
            "traces": self.traces,
            "results": self.results,
        }
        return body

    def to_json(self) -> str:
        body = self.canonical_dict()
        body["content_hash"] = self.content_hash
        return json.dumps(body, sort_keys=True, indent=1)


def _finish_record(config, traces, results) -> RunRecord:
    generator = {"algorithm": RNG_ALGORITHM, "numpy": np.__version__,
                 "library": __version__}
    body = json.dumps({"config": asdict(config), "generator": generator,
                       "traces": traces, "results": results}, sort_keys=True)
    digest = hashlib.sha256(body.encode()).hexdigest()
    return RunRecord(config, generator, traces, results, digest)


def _atomic_write(path: str, data: str):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _write_csv(path: str, header: list[str], rows: list[list]):
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(format_float(v) if isinstance(v, float) else str(v)
                            for v in row))
    _atomic_write(path, "\n".join(out) + "\n")


def _policy_from_actions(actions, horizon: int) -> Policy:
    return Policy(id=0, actions=tuple(actions), horizon=max(horizon, len(actions)))


def _dispatch(config: ExperimentConfig):
    """Run the configured experiment; returns (csv header, csv rows, traces, results)."""
    bounds = config.bounds()
    kind = config.kind

    if kind == "qpe-eval":
        policy = _policy_from_actions(config.policy, config.horizon)
        estimate = estimate_value(policy, t=config.t, shots=max(config.shots, 1),
                                  seed=config.seed, bounds=bounds)
        rows = [[key, count] for key, count in
                sorted(estimate.histogram.counts.items(), key=lambda kv: int(kv[0], 2))]
        results = {"readout_x": estimate.readout_x, "value": estimate.value,
                   "estimate": estimate.estimate, "mean_value": estimate.mean_value,
                   "exact_return": policy_return(policy)}
        return ["outcome", "count"], rows, {}, results

    if kind == "mae-curve":
        policy = _policy_from_actions(config.policy, config.horizon)
        curve = mae_curve(policy, config.t, config.shots_grid,
                          config.seed_list(), bounds)
        rows = [[shots, mae] for shots, mae in curve]
        return ["shots", "mae"], rows, {"mae_curve": [list(r) for r in curve]}, {}

    if kind == "qpi-search":
        policies = enumerate_policies(config.actions, config.horizon,
                                      config.max_policies)
        space = prepare_search_space(policies, config.t, bounds)
        measured, trace = improve_policy(space, config.v_ref, config.rotations,
                                         seed=config.seed)
        rows = [[r + 1, p] for r, p in enumerate(trace)]
        results = {"measured_policy": measured.id,
                   "measured_actions": list(measured.actions)}
        return ["rotation", "good_probability"], rows, {"good_probability": list(trace)}, results

    if kind == "gpa-run":
        policies = enumerate_policies(config.actions, config.horizon,
                                      config.max_policies)
        result = gpa_run(policies, t=config.t, shots=max(config.shots, 1),
                         seed=config.seed, k=config.k or DEFAULT_K, bounds=bounds)
        returns = exact_returns(policies)
        estimates = {
            p.id: estimate_value(p, t=config.t, shots=max(config.shots, 1),
                                 seed=spawn_seed(config.seed, 1, p.id),
                                 bounds=bounds).estimate
            for p in policies}
        rows = [[p.id, p.gate_count, estimates[p.id], returns[p.id],
                 int(p.id == result.policy.id)] for p in policies]
        results = {"selected_policy": result.policy.id,
                   "selected_actions": list(result.policy.actions),
                   "selected_qfi": result.qfi.normalized,
                   "gate_count": result.gate_count}
        return (["policy_id", "gates", "value", "qfi", "selected"], rows,
                {"improvement": [list(e) for e in result.trace]}, results)

    if kind in ("gpa-parallel", "qfi-sweep"):
        qsc = config.qsc_config()
        if kind == "gpa-parallel":
            episodes, winner = gpa_run_parallel_episodes(
                qsc, config.rotations, seed=config.seed, shots=config.shots)
            rows = [[r, gamma, episodes[0].trace[r - 1][2], episodes[1].trace[r - 1][2]]
                    for r, gamma, _ in episodes[0].trace]
            results = {"winner": winner,
                       "final_qfi": episodes[winner].qfi.normalized}
            traces = {"episodes": [e.to_dict() for e in episodes]}
        else:
            grid = rotation_schedule(config.rotations)
            sweep = qfi_sweep(qsc, grid, shots=config.shots, seed=config.seed)
            rows = [[r + 1, angle, values[0].normalized, values[1].normalized]
                    for r, (angle, values) in enumerate(sweep)]
            results = {"final_qsc1": rows[-1][2], "final_qsc2": rows[-1][3]}
            traces = {"sweep": [[angle, [v.normalized for v in values]]
                                for angle, values in sweep]}
        return ["rotation", "rz_angle", "qfi_qsc1", "qfi_qsc2"], rows, traces, results

    if kind == "gaqa-run":
        results_eps, trace = gaqa_run(rotations=config.rotations, k=config.k,
                                      seed=config.seed)
        rows = [[r, q] for r, _, q in trace]
        results = {"episodes": [e.to_dict() for e in results_eps],
                   "final_qfi": trace[-1][2]}
        return ["rotation", "qfi_gaqa"], rows, {"trace": [list(e) for e in trace]}, results

    if kind == "compare":
        cmp = compare_agents(config.qsc_config(), config.rotations,
                             config.seed_list(), k=config.k)
        rows = [[r, g, q] for r, g, q in cmp.paired_rows()]
        results = {"gpa_final": cmp.gpa_final,
                   "gaqa_median_final": cmp.gaqa_median_final,
                   "gaqa_finals": list(cmp.gaqa_finals)}
        traces = {"gpa": [list(e) for e in cmp.gpa_trace],
                  "gaqa_median": [list(e) for e in cmp.gaqa_trace]}
        return ["rotation", "qfi_gpa", "qfi_gaqa"], rows, traces, results

    raise ConfigError(f"unhandled kind {kind!r}")


def run(config: ExperimentConfig, out_dir: str = ".",
        seed_override: int | None = None) -> RunRecord:
    """Execute one experiment; writes the CSV, the JSON run record, and the
    SVG chart when `plot` is set. All writes land after computation."""
    if seed_override is not None:
        config = ExperimentConfig(**{**asdict(config), "seed": seed_override})
    header, rows, traces, results = _dispatch(config)
    record = _finish_record(config, traces, results)

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, config.csv_path())
    _write_csv(csv_path, header, rows)
    _atomic_write(os.path.splitext(csv_path)[0] + "_record.json",
                  record.to_json() + "\n")
    if config.plot:
        from .plotting import emit_plot
        emit_plot(csv_path, os.path.join(out_dir, config.svg_path()))
    return record
