"""qscopt: statevector simulation and Grover-based search for quantum sensor
circuits that maximize quantum Fisher information with few gates."""

__version__ = "0.1.0"

from .errors import CapacityError, ConfigError, InvariantError
from .statevector import (ATOL_ALGEBRAIC, ATOL_CIRCUIT, MAX_QUBITS,
                          RNG_ALGORITHM, ShotHistogram, Statevector,
                          UnitaryMatrix, apply_gate, collapse_measure,
                          expectation_diag, make_rng, marginal_distribution,
                          new_zero_state, sample_measure, spawn_seed)
from .circuit import Circuit, CircuitOp, GateSpec
from .gates import (cdkm_adder, cdkm_adder_inv, collective_z_diag,
                    half_subtractor, phase, qft, qft_inv, rotation, squeeze,
                    v_gate, v_inv_gate)
from .qfi import (EpisodeLayout, MeasurementLayout, QfiValue, QscConfig,
                  build_qsc, measurement_layout, qfi_analytic, qfi_from_counts,
                  qfi_sweep)
from .policies import (DEFAULT_ALPHABET, NOON_ALPHABET, SQUEEZE_FREE_ALPHABET,
                       Policy, enumerate_policies, exact_returns, policy_return,
                       policy_state)
from .qpe import (ReturnBounds, ValueEstimate, build_phi_oracle,
                  build_qpe_circuit, decode_readout, estimate_value,
                  exact_readout_distribution, grover_value_operator, mae_curve,
                  normalize_return, denormalize_return, value_qpe_circuit)
from .qpi import (RotationPlan, SearchSpace, ThresholdOracle,
                  build_threshold_oracle, grover_iterate, improve_policy,
                  prepare_search_space, rotation_count)
from .agents import (ComparisonResult, EpisodeResult, GaqaState, compare_agents,
                     gaqa_run, gpa_run, gpa_run_parallel_episodes,
                     rotation_schedule)
