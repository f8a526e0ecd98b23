"""Dispersive two-atom cavity dynamics behind the receiver's decoding step.

Two identical two-level atoms sit in a single-mode cavity, far detuned from
it, while a resonant classical field drives both atoms. Three descriptions
of that system live here:

1. ``effective_unitary`` -- the closed-form 4x4 map on the two atoms, for a
   dimensionless pulse (coupling angle ``lambda*t``, drive angle
   ``Omega*t``).  Each input ``|ab>`` goes to
   ``exp(-i*lambda*t) [cos(lambda*t) R|a>R|b> - i sin(lambda*t) R|a~>R|b~>]``
   with ``R|a> = cos(Omega*t)|a> - i sin(Omega*t)|a~>`` the single-atom
   drive rotation and ``~`` the flipped level.
2. ``drive_hamiltonian`` / ``effective_hamiltonian`` -- the generators whose
   ordered exponentials reproduce that map (``evolution_operator``).
3. ``full_hamiltonian`` -- the driven Tavis-Cummings model on a truncated
   Fock space, expressed in the frame rotating at the drive frequency so the
   generator is time independent.  ``validate_effective_model`` evolves it
   numerically and reports how far the reduced atomic dynamics strays from
   the closed form.

Operator convention: the raising operator is ``S+ = |e><g|`` (so the
``a_dagger S-`` coupling term conserves excitation number).  Atom ordering
in 4-dim matrices follows qstate: atom 1 is the most significant bit and
``|e> -> 0``.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .qstate import I_SIGMA_Y, IDENTITY, SIGMA_X, SIGMA_Z, QuantumState

S_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)   # |e><g|
S_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |g><e|


@dataclass(frozen=True)
class CavityParams:
    """Physical parameters of the driven atoms-cavity system.

    ``delta`` is the atom-cavity detuning ``omega0 - omega_a`` and must be
    positive (dispersive regime sign choice); the drive is resonant with
    the atoms when ``omega_drive == omega0``.
    """

    g: float
    delta: float
    omega_rabi: float
    omega0: float
    omega_a: float
    omega_drive: float

    def __post_init__(self):
        if self.g < 0:
            raise ValueError("coupling g must be >= 0")
        if self.delta <= 0:
            raise ValueError("detuning delta must be > 0")
        if self.omega_rabi < 0:
            raise ValueError("Rabi frequency must be >= 0")
        scale = max(abs(self.omega0), abs(self.omega_a), 1.0)
        if abs((self.omega0 - self.omega_a) - self.delta) > 1e-9 * scale:
            raise ValueError("delta must equal omega0 - omega_a")

    @classmethod
    def resonant(cls, g: float, delta: float, omega_rabi: float, omega_a: float = 0.0) -> "CavityParams":
        """Parameters with the classical drive locked to the atomic transition."""
        omega0 = omega_a + delta
        return cls(g=g, delta=delta, omega_rabi=omega_rabi,
                   omega0=omega0, omega_a=omega_a, omega_drive=omega0)

    @classmethod
    def from_ratios(cls, delta_over_g: float, omega_over_delta: float, g: float = 1.0) -> "CavityParams":
        """Resonant-drive parameters from the two dimensionless regime ratios."""
        delta = delta_over_g * g
        return cls.resonant(g=g, delta=delta, omega_rabi=omega_over_delta * delta)

    @property
    def dispersive_coupling(self) -> float:
        """Effective atom-atom coupling rate g^2 / (2 delta)."""
        return self.g * self.g / (2.0 * self.delta)

    @property
    def is_drive_resonant(self) -> bool:
        return self.omega_drive == self.omega0

    def regime_ok(self, drive_factor: float = 10.0, detuning_factor: float = 10.0) -> bool:
        """Whether the strong-driving and dispersive conditions both hold."""
        return (
            self.omega_rabi >= drive_factor * self.delta
            and self.delta >= detuning_factor * self.g
        )


@dataclass(frozen=True)
class PulseParams:
    """Dimensionless pulse areas: coupling angle lambda*t and drive angle Omega*t."""

    lambda_t: float
    omega_t: float

    def __post_init__(self):
        if self.lambda_t < 0 or self.omega_t < 0:
            raise ValueError("pulse areas must be >= 0")


# Pulse that turns the encoded states into the product-decodable form:
# coupling angle pi/4, drive angle pi.
CANONICAL_PULSE = PulseParams(lambda_t=np.pi / 4, omega_t=np.pi)


@dataclass(frozen=True)
class FockSpace:
    """Cavity truncation: photon numbers 0..n_max retained."""

    n_max: int = 8

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def levels(self) -> int:
        return self.n_max + 1

    @property
    def dimension(self) -> int:
        return 4 * (self.n_max + 1)


class TruncationWarning(UserWarning):
    """Raised as a warning when population reaches the top retained Fock level."""


def _drive_rotation(omega_t: float) -> np.ndarray:
    # Single-atom factor of exp(-i * Omega t * sigma_x): cos|a> - i sin|a~>.
    c, s = np.cos(omega_t), np.sin(omega_t)
    return np.array([[c, -1j * s], [-1j * s, c]])


@functools.lru_cache(maxsize=256)
def effective_unitary(pulse: PulseParams) -> np.ndarray:
    """Closed-form two-atom map for the given pulse, including its overall phase.

    Results are cached per pulse and returned read-only.
    """
    rot = _drive_rotation(pulse.omega_t)
    cos_l, sin_l = np.cos(pulse.lambda_t), np.sin(pulse.lambda_t)
    prefactor = np.exp(-1j * pulse.lambda_t)
    out = np.zeros((4, 4), dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            direct = np.kron(rot[:, a], rot[:, b])
            flipped = np.kron(rot[:, a ^ 1], rot[:, b ^ 1])
            out[:, 2 * a + b] = prefactor * (cos_l * direct - 1j * sin_l * flipped)
    out.setflags(write=False)
    return out


def drive_hamiltonian(params: CavityParams) -> np.ndarray:
    """Classical-drive generator Omega * (sx (x) I + I (x) sx) on the atom pair."""
    return params.omega_rabi * (np.kron(SIGMA_X, IDENTITY) + np.kron(IDENTITY, SIGMA_X))


def effective_hamiltonian(params: CavityParams) -> np.ndarray:
    """Dispersive atom-atom generator.

    Built term by term as (lambda/2) [ sum_j (|e><e| + |g><g|)_j
    + sum_{j!=k} (S+_j S+_k + S+_j S-_k + h.c.) ]; the first sum is the
    identity on each atom and contributes only the overall phase that the
    closed-form map carries.
    """
    lam = params.dispersive_coupling
    h = np.zeros((4, 4), dtype=complex)
    single = IDENTITY  # |e><e| + |g><g|
    h += np.kron(single, IDENTITY) + np.kron(IDENTITY, single)
    for first, second in ((0, 1), (1, 0)):
        for op_k in (S_PLUS, S_MINUS):
            pair = [None, None]
            pair[first] = S_PLUS
            pair[second] = op_k
            term = np.kron(pair[0], pair[1])
            h += term + term.conj().T
    return (lam / 2.0) * h


def evolution_operator(params: CavityParams, t: float) -> np.ndarray:
    """Ordered product exp(-i H_drive t) exp(-i H_eff t) on the atom pair."""
    if t < 0:
        raise ValueError("t must be >= 0")
    u_drive = expm(-1j * drive_hamiltonian(params) * t)
    u_eff = expm(-1j * effective_hamiltonian(params) * t)
    return u_drive @ u_eff


def full_hamiltonian(params: CavityParams, fock: FockSpace) -> np.ndarray:
    """Driven two-atom Tavis-Cummings generator in the drive rotating frame.

    Ordering is atoms (x) cavity with the atom pair index major.  In this
    frame the bare terms become (omega0 - omega_drive) Sz and
    (omega_a - omega_drive) n, so a resonant drive leaves ``-delta n`` plus
    the exchange coupling and the now-static drive.
    """
    nc = fock.levels
    lower = np.diag(np.sqrt(np.arange(1, nc)), 1)  # photon annihilation
    raise_ = lower.conj().T
    number = raise_ @ lower
    eye_cav = np.eye(nc)
    eye_atoms = np.eye(4)

    def on_atom(op: np.ndarray, j: int) -> np.ndarray:
        return np.kron(op, IDENTITY) if j == 0 else np.kron(IDENTITY, op)

    sz = 0.5 * (on_atom(SIGMA_Z, 0) + on_atom(SIGMA_Z, 1))
    h = (params.omega0 - params.omega_drive) * np.kron(sz, eye_cav)
    h = h + (params.omega_a - params.omega_drive) * np.kron(eye_atoms, number)
    for j in (0, 1):
        h = h + params.g * (
            np.kron(on_atom(S_MINUS, j), raise_) + np.kron(on_atom(S_PLUS, j), lower)
        )
        h = h + params.omega_rabi * np.kron(on_atom(SIGMA_X, j), eye_cav)
    return h


def _expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    # Spectral exponential: exact unitarity even for very large ||H t||.
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def _trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    eigs = np.linalg.eigvalsh(rho - sigma)
    return float(0.5 * np.sum(np.abs(eigs)))


def _cavity_weights(initial_cavity, levels: int) -> np.ndarray:
    if isinstance(initial_cavity, (int, np.integer)):
        if not 0 <= initial_cavity < levels:
            raise ValueError(f"Fock index {initial_cavity} outside 0..{levels - 1}")
        weights = np.zeros(levels)
        weights[initial_cavity] = 1.0
        return weights
    weights = np.asarray(initial_cavity, dtype=float)
    if weights.ndim != 1 or weights.size > levels or np.any(weights < 0):
        raise ValueError("mixture weights must be a nonnegative vector within the truncation")
    total = weights.sum()
    if total <= 0:
        raise ValueError("mixture weights must not all vanish")
    padded = np.zeros(levels)
    padded[: weights.size] = weights / total
    return padded


def validate_effective_model(
    params: CavityParams,
    fock: FockSpace,
    pulse: PulseParams,
    initial_cavity=0,
    duration: float | None = None,
) -> float:
    """Worst-case trace distance between full-model and closed-form atom outputs.

    The full model runs for ``t = pulse.lambda_t / lambda`` (or the explicit
    ``duration``), the cavity (Fock state or classical mixture of Fock
    states) is traced out, and each of the four computational atom inputs is
    compared against the prediction of ``effective_unitary`` for the pulse
    actually realized in that time.  Emits ``TruncationWarning`` when any
    branch puts more than 1e-6 of its population on the top retained level.
    """
    lam = params.dispersive_coupling
    if duration is None:
        if lam == 0.0:
            if pulse.lambda_t != 0.0:
                raise ValueError("lambda is zero: a nonzero coupling angle needs an explicit duration")
            duration = 0.0
        else:
            duration = pulse.lambda_t / lam
    realized = PulseParams(lambda_t=lam * duration, omega_t=params.omega_rabi * duration)
    u_eff = effective_unitary(realized)
    u_full = _expm_hermitian(full_hamiltonian(params, fock), duration)

    levels = fock.levels
    weights = _cavity_weights(initial_cavity, levels)
    worst = 0.0
    worst_leak = 0.0
    for atom_in in range(4):
        rho = np.zeros((4, 4), dtype=complex)
        for n, w in enumerate(weights):
            if w == 0.0:
                continue
            psi0 = np.zeros(4 * levels, dtype=complex)
            psi0[atom_in * levels + n] = 1.0
            branch = (u_full @ psi0).reshape(4, levels)
            worst_leak = max(worst_leak, float(np.sum(np.abs(branch[:, -1]) ** 2)))
            rho += w * (branch @ branch.conj().T)
        target = u_eff[:, atom_in]
        worst = max(worst, _trace_distance(rho, np.outer(target, target.conj())))
    if worst_leak > 1e-6:
        warnings.warn(
            f"population {worst_leak:.2e} reached Fock level {fock.n_max}; "
            "increase n_max for a trustworthy comparison",
            TruncationWarning,
            stacklevel=2,
        )
    return worst


@dataclass(frozen=True)
class SweepPoint:
    delta_over_g: float
    omega_over_delta: float
    n_max: int
    error: float


def effective_model_sweep(
    delta_over_g_values,
    omega_over_delta: float,
    n_max: int = 8,
    pulse: PulseParams = CANONICAL_PULSE,
    initial_cavity=0,
) -> list[SweepPoint]:
    """Validation error along a detuning sweep at fixed drive ratio."""
    points = []
    for ratio in delta_over_g_values:
        params = CavityParams.from_ratios(ratio, omega_over_delta)
        err = validate_effective_model(params, FockSpace(n_max), pulse, initial_cavity)
        points.append(SweepPoint(float(ratio), float(omega_over_delta), int(n_max), err))
    return points


def _encoded_ghz_inputs() -> list[QuantumState]:
    # The four locally encoded variants of (|eee> + i|ggg>)/sqrt(2).
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = 1.0 / np.sqrt(2.0)
    ghz[7] = 1j / np.sqrt(2.0)
    states = []
    for op in (IDENTITY, SIGMA_X, I_SIGMA_Y, SIGMA_Z):
        amps = (np.kron(op, np.eye(4)) @ ghz)
        states.append(QuantumState(amps))
    return states


def timing_error_fidelity(epsilon: float) -> float:
    """Worst-case decoding fidelity when the coupling angle is off by a factor 1+epsilon.

    The drive angle stays at pi (it is set by the field, not the transit
    time); only the coupling angle scales.  Returns the minimum squared
    overlap with the ideal output over the four encoded inputs.
    """
    if abs(epsilon) >= 1.0:
        raise ValueError("epsilon must satisfy |epsilon| < 1")
    ideal = effective_unitary(CANONICAL_PULSE)
    perturbed = effective_unitary(
        PulseParams(lambda_t=(1.0 + epsilon) * np.pi / 4, omega_t=np.pi)
    )
    eye2 = np.eye(2)
    worst = 1.0
    for state in _encoded_ghz_inputs():
        target = np.kron(ideal, eye2) @ state.amplitudes
        output = np.kron(perturbed, eye2) @ state.amplitudes
        overlap = float(np.abs(np.vdot(target, output)) ** 2)
        worst = min(worst, overlap)
    return worst
