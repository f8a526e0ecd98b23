"""Secure dense coding over tripartite GHZ states in cavity QED: exact simulator and verification toolkit."""

__version__ = "0.1.0"

from .adversary import (
    AdversaryModel,
    AncillaTradeoff,
    CheatReport,
    ancilla_attack_tradeoff,
    cheat_success,
    check_violation_rate,
    intercept_resend_detection,
    monte_carlo_confirm,
    solo_guess_probability,
)
from .cavity import (
    CANONICAL_PULSE,
    CavityParams,
    FockSpace,
    PulseParams,
    TruncationWarning,
    drive_hamiltonian,
    effective_hamiltonian,
    effective_model_sweep,
    effective_unitary,
    evolution_operator,
    full_hamiltonian,
    timing_error_fidelity,
    validate_effective_model,
)
from .protocol import (
    DecodeKey,
    EncodingOp,
    Role,
    SessionConfig,
    SessionRecord,
    bob_interaction,
    decode,
    decode_n,
    decode_table,
    encode,
    parity_accept_set,
    prepare_ghz,
    prepare_ghz_n,
    run_rounds,
    run_session,
    security_check_round,
)
from .qstate import (
    COMPUTATIONAL,
    PLUS_MINUS,
    Y_BASIS,
    MeasurementBasis,
    MeasurementOutcome,
    QuantumState,
    apply_gate,
    apply_two_qubit,
    born_probabilities,
    fidelity,
    global_phase_equal,
    measure,
)
