"""Dishonest-party and eavesdropper analysis, by exact enumeration plus Monte Carlo.

Solo-guess and cheat probabilities are computed by enumerating messages,
Born-rule outcomes, and lie randomness, then snapped to exact rationals.
"Lying" means reporting a value drawn uniformly from the report alphabet,
independent of the true outcome (a fabricated record); the stricter
always-flip variants are exposed separately.  A cheat succeeds when the
deceived party decodes the wrong message.

Eavesdropping is modeled two ways: intercept-resend on an atom in transit
during distribution, and a one-parameter family that entangles a fresh
ancilla with the second share through a controlled rotation of angle theta.
Both are scored by the security-check violation rate; the ancilla family
additionally reports how much the best projective ancilla measurement
reveals about the legitimate decode key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .cavity import CANONICAL_PULSE, PulseParams
from .protocol import (
    PAIRS,
    SIGNS,
    DecodeKey,
    EncodingOp,
    Role,
    _combo_outcome_probs,
    bob_interaction,
    decode,
    encode_on,
    measure_decode,
    parity_accept_set,
    prepare_ghz,
    round_rng,
    security_check_round,
)
from .qstate import (
    COMPUTATIONAL,
    PLUS_MINUS,
    Y_BASIS,
    QuantumState,
    apply_two_qubit,
    collapse,
    measure,
)

MODEL_KINDS = frozenset(
    {
        "honest",
        "bob_alone_guess",
        "charlie_alone_guess",
        "charlie_lies",
        "bob_lies",
        "charlie_flips",
        "bob_flips",
        "intercept_resend",
        "ancilla_attack",
    }
)

INTERCEPT_BASES = {"computational": COMPUTATIONAL, "x": PLUS_MINUS, "y": Y_BASIS}


@dataclass(frozen=True)
class AdversaryModel:
    """Tagged strategy description; use the classmethod constructors."""

    kind: str
    target_qubit: int | None = None
    basis: str | None = None
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        if self.kind == "intercept_resend":
            if self.target_qubit not in (2, 3):
                raise ValueError("intercept target must be qubit 2 or 3 (atoms in transit)")
            if self.basis not in INTERCEPT_BASES:
                raise ValueError(f"intercept basis must be one of {sorted(INTERCEPT_BASES)}")
        if self.kind == "ancilla_attack":
            if self.theta is None or not 0.0 <= self.theta <= math.pi / 2:
                raise ValueError("theta must lie in [0, pi/2]")

    @classmethod
    def honest(cls):
        return cls("honest")

    @classmethod
    def bob_alone_guess(cls):
        return cls("bob_alone_guess")

    @classmethod
    def charlie_alone_guess(cls):
        return cls("charlie_alone_guess")

    @classmethod
    def charlie_lies(cls):
        return cls("charlie_lies")

    @classmethod
    def bob_lies(cls):
        return cls("bob_lies")

    @classmethod
    def charlie_flips(cls):
        return cls("charlie_flips")

    @classmethod
    def bob_flips(cls):
        return cls("bob_flips")

    @classmethod
    def intercept_resend(cls, target_qubit: int, basis: str = "computational"):
        return cls("intercept_resend", target_qubit=target_qubit, basis=basis)

    @classmethod
    def ancilla_attack(cls, theta: float):
        return cls("ancilla_attack", theta=theta)


def _snap(p: float, max_denominator: int = 4096, tol: float = 1e-12) -> Fraction:
    """Recover the exact rational a Born-rule enumeration converged to."""
    frac = Fraction(p).limit_denominator(max_denominator)
    if abs(float(frac) - p) > tol:
        raise ValueError(f"probability {p!r} is not rational within tolerance")
    return frac


def decode_distribution(
    op: EncodingOp, pulse: PulseParams = CANONICAL_PULSE
) -> dict[DecodeKey, Fraction]:
    """Exact joint outcome distribution of one message round, by enumeration."""
    state = bob_interaction(encode_on(prepare_ghz(), op), pulse)
    tensor = state.amplitudes.reshape(2, 2, 2)
    plus_minus = PLUS_MINUS.matrix().conj()
    rotated = np.tensordot(plus_minus, tensor, axes=([1], [2]))  # sign axis first
    dist: dict[DecodeKey, Fraction] = {}
    for b1, b2 in product((0, 1), repeat=2):
        for s, sign in enumerate(SIGNS):
            p = float(np.abs(rotated[s, b1, b2]) ** 2)
            dist[DecodeKey("eg"[b1] + "eg"[b2], sign)] = _snap(p)
    return dist


def _joint_message_key() -> dict[tuple[EncodingOp, DecodeKey], Fraction]:
    quarter = Fraction(1, 4)
    joint = {}
    for op in EncodingOp:
        for key, p in decode_distribution(op).items():
            joint[(op, key)] = quarter * p
    return joint


def solo_guess_probability(party: Role) -> Fraction:
    """Best success probability of guessing the message from one party's record alone.

    Uniform messages; the guess is the maximum-a-posteriori choice given
    the receiver pair (Bob) or the sign (Charlie).  Alice trivially knows
    her own message.
    """
    if party == Role.ALICE:
        return Fraction(1)
    if party not in (Role.BOB, Role.CHARLIE):
        raise ValueError(f"party must be a Role, got {party!r}")
    joint = _joint_message_key()
    success = Fraction(0)
    views = PAIRS if party == Role.BOB else SIGNS
    for view in views:
        by_op = {}
        for (op, key), p in joint.items():
            observed = key.pair if party == Role.BOB else key.sign
            if observed == view:
                by_op[op] = by_op.get(op, Fraction(0)) + p
        if by_op:
            success += max(by_op.values())
    return success


def cheat_success(model: AdversaryModel) -> Fraction:
    """Probability that the victim decodes the wrong message under the model.

    Liars submit a uniformly random report; flippers submit a uniformly
    random *false* report.  The honest model deceives no one.
    """
    if model.kind == "honest":
        return Fraction(0)
    if model.kind not in ("charlie_lies", "bob_lies", "charlie_flips", "bob_flips"):
        raise ValueError(f"cheat_success does not apply to {model.kind!r}")
    charlie_cheats = model.kind.startswith("charlie")
    exclude_truth = model.kind.endswith("flips")
    joint = _joint_message_key()
    wrong = Fraction(0)
    for (op, key), p in joint.items():
        alphabet = SIGNS if charlie_cheats else PAIRS
        truth = key.sign if charlie_cheats else key.pair
        reports = [r for r in alphabet if r != truth] if exclude_truth else list(alphabet)
        weight = Fraction(1, len(reports))
        for report in reports:
            decoded = (
                decode(DecodeKey(key.pair, report))
                if charlie_cheats
                else decode(DecodeKey(report, key.sign))
            )
            if decoded != op:
                wrong += p * weight
    return wrong


# ---------------------------------------------------------------------------
# Eavesdropping
# ---------------------------------------------------------------------------


def check_violation_rate(state: QuantumState, n_parties: int = 3) -> float:
    """Per-check-round probability of landing in the accept set with bad parity.

    Parties choose bases independently and uniformly; qubits beyond
    ``n_parties`` (an ancilla) are traced out by the enumeration.
    """
    accept = parity_accept_set(n_parties)
    combo_weight = 1.0 / 2**n_parties
    total = 0.0
    for combo, expected in accept.items():
        probs = _combo_outcome_probs(state, tuple(combo))
        # Same support threshold as the accept-set derivation, so states that
        # pass every check exactly report a rate of exactly zero.
        total += combo_weight * sum(
            p for bits, p in probs.items() if p > 1e-12 and sum(bits) % 2 != expected
        )
    return total


def intercept_resend_detection(target_qubit: int, basis) -> Fraction:
    """Exact detection probability per check round for an intercept-resend attack.

    The attacked resource is the ensemble of post-measurement states the
    eavesdropper forwards; every branch probability here is an exact dyadic
    rational, recovered from the enumeration by snapping.
    """
    if isinstance(basis, str):
        basis = INTERCEPT_BASES[basis]
    if target_qubit not in (2, 3):
        raise ValueError("intercept target must be qubit 2 or 3")
    ghz = prepare_ghz()
    total = Fraction(0)
    for result in (0, 1):
        prob, resent = collapse(ghz, target_qubit, basis, result)
        total += _snap(prob) * _snap(check_violation_rate(resent))
    return total


def _controlled_rotation(theta: float) -> np.ndarray:
    """On (share, ancilla): rotate the ancilla by theta when the share is |g>."""
    c, s = math.cos(theta), math.sin(theta)
    u = np.eye(4, dtype=complex)
    u[2:, 2:] = np.array([[c, -s], [s, c]])
    return u


def attach_ancilla(state: QuantumState, theta: float, target_qubit: int = 2) -> QuantumState:
    """Append a fresh ancilla (as the last qubit) entangled with the target share."""
    amps = np.zeros(2 * state.amplitudes.size, dtype=complex)
    amps[0::2] = state.amplitudes  # ancilla starts in |e>
    attacked = QuantumState(amps)
    return apply_two_qubit(
        attacked, _controlled_rotation(theta), (target_qubit, attacked.num_qubits)
    )


def _grid_normals(polar_n: int, azimuth_n: int) -> np.ndarray:
    polar = np.linspace(0.0, math.pi, polar_n)
    azimuth = np.linspace(0.0, 2.0 * math.pi, azimuth_n)
    pol, azi = np.meshgrid(polar, azimuth, indexing="ij")
    return np.stack(
        [np.sin(pol) * np.cos(azi), np.sin(pol) * np.sin(azi), np.cos(pol)], axis=-1
    ).reshape(-1, 3)


def _best_grid_information(rhos: np.ndarray, normals: np.ndarray) -> float:
    """Max mutual information (bits) between key and a projective ancilla readout.

    For a measurement direction n the outcome probabilities given key k are
    (w_k +/- n . r_k)/2 with w_k the key probability and r_k the ancilla
    Bloch vector, so the whole grid reduces to dot products.
    """
    weights = np.real(np.trace(rhos, axis1=1, axis2=2))
    blochs = np.stack(
        [
            2.0 * np.real(rhos[:, 1, 0]),
            2.0 * np.imag(rhos[:, 1, 0]),
            np.real(rhos[:, 0, 0] - rhos[:, 1, 1]),
        ],
        axis=-1,
    )
    dots = normals @ blochs.T  # (grid, keys)
    joint = np.stack([(weights + dots) / 2.0, (weights - dots) / 2.0], axis=-1)
    joint = np.clip(joint, 0.0, None)
    pk = weights[None, :, None]
    pe = joint.sum(axis=1, keepdims=True)
    mask = joint > 1e-15
    safe_p = np.where(mask, joint, 1.0)
    safe_q = np.where(mask, pk * pe, 1.0)
    info = np.sum(np.where(mask, joint * np.log2(safe_p / safe_q), 0.0), axis=(1, 2))
    return float(info.max())


@dataclass(frozen=True)
class AncillaTradeoff:
    theta: float
    error_rate: float
    information_bits: float


def ancilla_attack_tradeoff(theta: float, grid: tuple[int, int] = (31, 61)) -> AncillaTradeoff:
    """Detection-vs-leakage point of the controlled-rotation attack family.

    ``error_rate`` is the security-check violation rate on the attacked
    state.  ``information_bits`` is the mutual information between the best
    projective ancilla measurement (maximized over a polar-azimuth grid of
    the given resolution) and the decode key of a message round; the
    encoding is held fixed, which by symmetry gives the same value for
    every message and captures what the eavesdropper learns about the
    parties' measurement records.
    """
    if not 0.0 <= theta <= math.pi / 2:
        raise ValueError("theta must lie in [0, pi/2]")
    attacked = attach_ancilla(prepare_ghz(), theta)
    error = check_violation_rate(attacked, n_parties=3)

    evolved = bob_interaction(attacked, CANONICAL_PULSE)
    tensor = evolved.amplitudes.reshape(2, 2, 2, 2)  # (q1, q2, q3, ancilla)
    sign_rot = PLUS_MINUS.matrix().conj()
    rotated = np.tensordot(sign_rot, tensor, axes=([1], [2]))  # (sign, q1, q2, anc)
    # Sub-normalized ancilla density matrix per decode key.
    rhos = np.array(
        [
            np.outer(rotated[s, b1, b2], rotated[s, b1, b2].conj())
            for b1, b2, s in product((0, 1), (0, 1), (0, 1))
        ]
    )
    best = _best_grid_information(rhos, _grid_normals(*grid))
    return AncillaTradeoff(theta=theta, error_rate=error, information_bits=best)


# ---------------------------------------------------------------------------
# Monte Carlo confirmation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheatReport:
    """Analytic value next to its seeded empirical estimate."""

    model: AdversaryModel
    analytic_success: float
    empirical_success: float
    std_error: float
    rounds: int

    def to_json_dict(self) -> dict:
        return {
            "model": self.model.kind,
            "target_qubit": self.model.target_qubit,
            "basis": self.model.basis,
            "theta": self.model.theta,
            "analytic_success": self.analytic_success,
            "empirical_success": self.empirical_success,
            "std_error": self.std_error,
            "rounds": self.rounds,
        }


def _map_guess_tables() -> tuple[dict[str, EncodingOp], dict[str, EncodingOp]]:
    joint = _joint_message_key()
    bob_guess, charlie_guess = {}, {}
    for view_set, table, attr in ((PAIRS, bob_guess, "pair"), (SIGNS, charlie_guess, "sign")):
        for view in view_set:
            by_op = {}
            for (op, key), p in joint.items():
                if getattr(key, attr) == view:
                    by_op[op] = by_op.get(op, Fraction(0)) + p
            table[view] = max(sorted(by_op, key=lambda o: o.bits), key=lambda o: by_op[o])
    return bob_guess, charlie_guess


def _simulate_success(model: AdversaryModel, rounds: int, seed: int) -> float:
    bob_guess, charlie_guess = (
        _map_guess_tables() if model.kind.endswith("alone_guess") else (None, None)
    )
    hits = 0
    for idx in range(rounds):
        rng = round_rng(seed, idx)
        if model.kind in ("intercept_resend", "ancilla_attack"):
            # Attacked check round.
            if model.kind == "intercept_resend":
                _, state = measure(
                    prepare_ghz(), model.target_qubit, INTERCEPT_BASES[model.basis], rng.random()
                )
            else:
                state = attach_ancilla(prepare_ghz(), model.theta)
            bases = ["XY"[rng.integers(2)] for _ in range(3)]
            rands = [rng.random() for _ in range(3)]
            record = security_check_round(state, bases, rands)
            hits += record.violation
            continue
        # Message round with a uniformly random message.
        op = EncodingOp(int(rng.integers(4)))
        state = bob_interaction(encode_on(prepare_ghz(), op), CANONICAL_PULSE)
        pair, signs = measure_decode(state, rng)
        sign = signs[0]
        if model.kind == "honest":
            hits += decode(DecodeKey(pair, sign)) != op  # deception count: stays 0
        elif model.kind == "bob_alone_guess":
            hits += bob_guess[pair] == op
        elif model.kind == "charlie_alone_guess":
            hits += charlie_guess[sign] == op
        elif model.kind in ("charlie_lies", "charlie_flips"):
            options = [s for s in SIGNS if s != sign] if model.kind.endswith("flips") else list(SIGNS)
            report = options[int(rng.integers(len(options)))]
            hits += decode(DecodeKey(pair, report)) != op
        elif model.kind in ("bob_lies", "bob_flips"):
            options = [p for p in PAIRS if p != pair] if model.kind.endswith("flips") else list(PAIRS)
            report = options[int(rng.integers(len(options)))]
            hits += decode(DecodeKey(report, sign)) != op
        else:
            raise ValueError(f"unsupported model {model.kind!r}")
    return hits / rounds


def analytic_success(model: AdversaryModel) -> float:
    """Reference value matching what the Monte Carlo run estimates."""
    if model.kind == "honest":
        return 0.0
    if model.kind == "bob_alone_guess":
        return float(solo_guess_probability(Role.BOB))
    if model.kind == "charlie_alone_guess":
        return float(solo_guess_probability(Role.CHARLIE))
    if model.kind in ("charlie_lies", "bob_lies", "charlie_flips", "bob_flips"):
        return float(cheat_success(model))
    if model.kind == "intercept_resend":
        return float(intercept_resend_detection(model.target_qubit, model.basis))
    if model.kind == "ancilla_attack":
        return ancilla_attack_tradeoff(model.theta).error_rate
    raise ValueError(f"unsupported model {model.kind!r}")


def monte_carlo_confirm(model: AdversaryModel, rounds: int, seed: int) -> CheatReport:
    """Seeded empirical estimate of the model's success/detection frequency."""
    if rounds < 100:
        raise ValueError("rounds must be >= 100 for a meaningful estimate")
    analytic = analytic_success(model)
    empirical = _simulate_success(model, rounds, seed)
    std_error = math.sqrt(analytic * (1.0 - analytic) / rounds)
    return CheatReport(
        model=model,
        analytic_success=analytic,
        empirical_success=empirical,
        std_error=std_error,
        rounds=rounds,
    )
