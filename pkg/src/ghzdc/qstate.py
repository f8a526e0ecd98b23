"""Dense state-vector engine for small atomic-qubit registers.

Conventions used everywhere in this package:

- Qubit 1 is the *most significant* bit of the basis-state index, so for a
  three-qubit register the amplitude order is
  ``|eee>, |eeg>, |ege>, ..., |ggg>``.
- The excited level ``|e>`` maps to bit 0 and the ground level ``|g>`` to
  bit 1, which makes ``sigma_z |e> = +|e>``.
- Amplitudes are plain complex doubles; all operations are pure functions
  returning new states, so values can be shared freely across threads.
- No hidden randomness: measurement consumes an explicit uniform draw in
  ``[0, 1)``, which keeps every transcript replayable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

# Amplitude/probability equality tolerance; input-validation unitarity tolerance.
TOL_EQ = 1e-10
TOL_UNITARY = 1e-8

SQRT_HALF = 1.0 / np.sqrt(2.0)

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# i*sigma_y == sigma_z @ sigma_x; real-valued representative of the y rotation.
I_SIGMA_Y = np.array([[0, 1], [-1, 0]], dtype=complex)


class QuantumState:
    """Immutable normalized amplitude vector over an ordered qubit register."""

    __slots__ = ("num_qubits", "_amps")

    def __init__(self, amplitudes, *, normalize: bool = False):
        amps = np.array(amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 2 or amps.size & (amps.size - 1):
            raise ValueError(f"amplitude vector length {amps.size} is not a power of two >= 2")
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("amplitudes must be finite")
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            amps /= norm
        amps.setflags(write=False)
        self.num_qubits = int(amps.size).bit_length() - 1
        self._amps = amps

    @property
    def amplitudes(self) -> np.ndarray:
        """Read-only view of the amplitude vector."""
        return self._amps

    @classmethod
    def _from_trusted(cls, amps: np.ndarray) -> "QuantumState":
        # Fast path for freshly allocated output of a norm-preserving
        # operation on an already validated state.
        obj = cls.__new__(cls)
        amps.setflags(write=False)
        obj.num_qubits = int(amps.size).bit_length() - 1
        obj._amps = amps
        return obj

    @classmethod
    def basis_state(cls, label: str) -> "QuantumState":
        """Computational basis state from a string of 'e'/'g' characters, qubit 1 first."""
        bits = []
        for ch in label:
            if ch not in "eg":
                raise ValueError(f"basis label must use only 'e' and 'g', got {label!r}")
            bits.append(0 if ch == "e" else 1)
        index = 0
        for b in bits:
            index = (index << 1) | b
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    def amplitude(self, label: str) -> complex:
        """Amplitude of the given computational basis string."""
        if len(label) != self.num_qubits:
            raise ValueError(f"label {label!r} does not match {self.num_qubits} qubits")
        index = 0
        for ch in label:
            index = (index << 1) | (0 if ch == "e" else 1)
        return complex(self._amps[index])

    def norm(self) -> float:
        return float(np.linalg.norm(self._amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self._amps) ** 2

    def allclose(self, other: "QuantumState", tol: float = TOL_EQ) -> bool:
        return (
            self.num_qubits == other.num_qubits
            and bool(np.max(np.abs(self._amps - other._amps)) <= tol)
        )

    def to_json(self) -> str:
        """JSON with qubit count and [re, im] pairs in index order; round-trips exactly."""
        pairs = [[float(a.real), float(a.imag)] for a in self._amps]
        return json.dumps({"num_qubits": self.num_qubits, "amplitudes": pairs})

    @classmethod
    def from_json(cls, text: str) -> "QuantumState":
        obj = json.loads(text)
        amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
        state = cls(amps)
        if state.num_qubits != obj["num_qubits"]:
            raise ValueError("num_qubits field disagrees with amplitude count")
        return state

    def __repr__(self) -> str:
        return f"QuantumState(num_qubits={self.num_qubits})"


@dataclass(frozen=True)
class MeasurementBasis:
    """Single-qubit orthonormal measurement basis.

    ``eigenvectors`` holds the two basis kets as rows, in the (e, g)
    component ordering; result r of a measurement refers to row r.
    """

    name: str
    eigenvectors: tuple[tuple[complex, complex], tuple[complex, complex]]

    def __post_init__(self):
        m = np.array(self.eigenvectors, dtype=complex)
        if np.max(np.abs(m @ m.conj().T - np.eye(2))) > TOL_EQ:
            raise ValueError(f"basis {self.name!r} eigenvectors are not orthonormal")
        m.setflags(write=False)
        object.__setattr__(self, "_matrix", m)

    def matrix(self) -> np.ndarray:
        """Basis kets as rows, read-only."""
        return self._matrix

    def rotation_gate(self) -> np.ndarray:
        """Unitary mapping this basis onto the computational one (rows are bras)."""
        return self._matrix.conj()


COMPUTATIONAL = MeasurementBasis("computational", ((1, 0), (0, 1)))
PLUS_MINUS = MeasurementBasis(
    "plus_minus", ((SQRT_HALF, SQRT_HALF), (SQRT_HALF, -SQRT_HALF))
)
Y_BASIS = MeasurementBasis(
    "y", ((SQRT_HALF, SQRT_HALF * 1j), (SQRT_HALF, -SQRT_HALF * 1j))
)


@dataclass(frozen=True)
class MeasurementOutcome:
    qubit: int
    basis: str
    result: int
    probability: float


def _check_qubit(state: QuantumState, qubit: int) -> int:
    if not 1 <= qubit <= state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range 1..{state.num_qubits}")
    return qubit - 1  # axis in the reshaped amplitude tensor


def _check_unitary(matrix: np.ndarray, dim: int) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix, got {matrix.shape}")
    if np.max(np.abs(matrix @ matrix.conj().T - np.eye(dim))) > TOL_UNITARY:
        raise ValueError("matrix is not unitary within tolerance")
    return matrix


def apply_gate(state: QuantumState, gate, qubit: int) -> QuantumState:
    """Apply a single-qubit unitary to the given qubit (1-based)."""
    axis = _check_qubit(state, qubit)
    gate = _check_unitary(gate, 2)
    n = state.num_qubits
    tensor = state.amplitudes.reshape([2] * n)
    out = np.tensordot(gate, tensor, axes=([1], [axis]))
    out = np.moveaxis(out, 0, axis)
    return QuantumState._from_trusted(np.ascontiguousarray(out).reshape(-1))


def apply_two_qubit(state: QuantumState, unitary, qubits: tuple[int, int]) -> QuantumState:
    """Apply a 4x4 unitary to the ordered qubit pair (1-based indices)."""
    qa, qb = qubits
    if qa == qb:
        raise ValueError("two-qubit unitary needs distinct qubits")
    axa, axb = _check_qubit(state, qa), _check_qubit(state, qb)
    unitary = _check_unitary(unitary, 4)
    n = state.num_qubits
    tensor = state.amplitudes.reshape([2] * n)
    u = unitary.reshape(2, 2, 2, 2)  # (out_a, out_b, in_a, in_b)
    out = np.tensordot(u, tensor, axes=([2, 3], [axa, axb]))
    out = np.moveaxis(out, [0, 1], [axa, axb])
    return QuantumState._from_trusted(np.ascontiguousarray(out).reshape(-1))


def born_probabilities(state: QuantumState, qubit: int, basis: MeasurementBasis) -> tuple[float, float]:
    """Probabilities of the two outcomes of measuring one qubit in the basis."""
    axis = _check_qubit(state, qubit)
    n = state.num_qubits
    tensor = state.amplitudes.reshape([2] * n)
    probs = []
    for vec in basis.matrix():
        amp = np.tensordot(vec.conj(), tensor, axes=([0], [axis]))
        probs.append(float(np.sum(np.abs(amp) ** 2)))
    return probs[0], probs[1]


def _project(state: QuantumState, axis: int, vec: np.ndarray) -> tuple[float, np.ndarray]:
    # One contraction yields both the branch probability and its amplitudes.
    tensor = state.amplitudes.reshape([2] * state.num_qubits)
    amp = np.tensordot(vec.conj(), tensor, axes=([0], [axis]))
    prob = float(np.sum(np.abs(amp) ** 2))
    return prob, amp


def _rebuild(vec: np.ndarray, amp: np.ndarray, axis: int, prob: float) -> QuantumState:
    collapsed = np.tensordot(vec, amp, axes=0)  # re-insert the measured factor
    collapsed = np.moveaxis(collapsed, 0, axis)
    collapsed = np.ascontiguousarray(collapsed).reshape(-1) / np.sqrt(prob)
    return QuantumState._from_trusted(collapsed)


def collapse(
    state: QuantumState, qubit: int, basis: MeasurementBasis, result: int
) -> tuple[float, QuantumState]:
    """Probability and renormalized post-state of a forced measurement outcome.

    Raises when the requested outcome has (numerically) zero probability,
    since no post-measurement state exists there.
    """
    if result not in (0, 1):
        raise ValueError("result must be 0 or 1")
    axis = _check_qubit(state, qubit)
    vec = basis.matrix()[result]
    prob, amp = _project(state, axis, vec)
    if prob <= 1e-300:
        raise ValueError(f"outcome {result} has zero probability")
    return prob, _rebuild(vec, amp, axis, prob)


def measure(
    state: QuantumState, qubit: int, basis: MeasurementBasis, rand: float
) -> tuple[MeasurementOutcome, QuantumState]:
    """Projective measurement of one qubit, decided by the supplied uniform draw.

    The outcome is result 0 when ``rand`` falls below its Born probability,
    result 1 otherwise, so identical inputs always reproduce the same
    outcome and post-measurement state.
    """
    if not 0.0 <= rand < 1.0:
        raise ValueError("rand must lie in [0, 1)")
    if abs(state.norm() - 1.0) > TOL_UNITARY:
        raise ValueError("measurement requires a normalized state")
    axis = _check_qubit(state, qubit)
    vec0 = basis.matrix()[0]
    p0, amp0 = _project(state, axis, vec0)
    if rand < p0:
        result, prob, vec, amp = 0, p0, vec0, amp0
    else:
        vec = basis.matrix()[1]
        prob, amp = _project(state, axis, vec)
        result = 1
    post = _rebuild(vec, amp, axis, prob)
    outcome = MeasurementOutcome(qubit=qubit, basis=basis.name, result=result, probability=prob)
    return outcome, post


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """Squared overlap |<a|b>|^2 of two normalized states."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("fidelity requires equal qubit counts")
    for s in (a, b):
        if abs(s.norm() - 1.0) > TOL_UNITARY:
            raise ValueError("fidelity requires normalized states")
    val = float(np.abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    return min(val, 1.0)


def global_phase_equal(a: QuantumState, b: QuantumState, tol: float = TOL_EQ) -> bool:
    """True when a equals exp(i*theta)*b for some real theta, within tol."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states must have equal qubit counts")
    overlap = np.vdot(b.amplitudes, a.amplitudes)
    if abs(overlap) < tol:
        return bool(np.max(np.abs(a.amplitudes - b.amplitudes)) <= tol)
    phase = overlap / abs(overlap)
    return bool(np.max(np.abs(a.amplitudes - phase * b.amplitudes)) <= tol)
