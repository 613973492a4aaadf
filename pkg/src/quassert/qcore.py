"""Quantum domain objects: circuits, states, channels, and fidelity measures.

Conventions used throughout the package:

* Qubit ordering is little-endian: qubit 0 is the least significant bit of a
  computational-basis index.  Bitstrings in human-readable output are printed
  most-significant qubit first.
* Choi matrices are stored unnormalized, ``C = sum_ij |i><j| (x) Phi(|i><j|)``
  with the input factor first, so a trace-preserving channel has
  ``tr(C) = 2**n``.  Normalization by ``2**n`` happens only inside
  :func:`process_fidelity`.

All types are immutable after construction and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from quassert import qmath
from quassert.qmath import DimensionError, NumericError

_SQ2 = 1.0 / np.sqrt(2.0)

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

FIXED_GATES = {
    "x": PAULI_X,
    "y": PAULI_Y,
    "z": PAULI_Z,
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128),
    "s": np.array([[1, 0], [0, 1j]], dtype=np.complex128),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=np.complex128),
    "t": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=np.complex128),
    "tdg": np.array([[1, 0], [0, np.exp(-1j * np.pi / 4)]], dtype=np.complex128),
}
ROTATION_GATES = ("rx", "ry", "rz")
TWO_QUBIT_GATES = ("cx", "cz", "swap")
GATE_NAMES = tuple(FIXED_GATES) + ROTATION_GATES + TWO_QUBIT_GATES


class UnsupportedGateError(ValueError):
    """Gate name outside the fixed gate set."""


def rotation_matrix(name: str, angle: float) -> np.ndarray:
    """2x2 matrix of rx/ry/rz at the given angle (radians)."""
    c = np.cos(angle / 2.0)
    s = np.sin(angle / 2.0)
    if name == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if name == "ry":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if name == "rz":
        return np.array(
            [[np.exp(-1j * angle / 2.0), 0], [0, np.exp(1j * angle / 2.0)]],
            dtype=np.complex128,
        )
    raise UnsupportedGateError(f"unknown rotation gate {name!r}")


@dataclass(frozen=True)
class GateOp:
    """A single gate application: name, target qubits, optional angle."""

    name: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.name not in GATE_NAMES:
            raise UnsupportedGateError(
                f"unsupported gate {self.name!r}; supported: {', '.join(GATE_NAMES)}"
            )
        arity = 2 if self.name in TWO_QUBIT_GATES else 1
        if len(self.qubits) != arity:
            raise ValueError(
                f"gate {self.name!r} takes {arity} qubit(s), got {self.qubits}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"gate {self.name!r} applied to duplicate qubits {self.qubits}")
        if (self.angle is not None) != (self.name in ROTATION_GATES):
            raise ValueError(
                f"gate {self.name!r}: angle must be given for rotation gates and only for them"
            )
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")


def gate(name: str, *qubits: int, angle: float | None = None) -> GateOp:
    """Convenience constructor: ``gate("cx", 0, 1)``, ``gate("rx", 0, angle=0.3)``."""
    return GateOp(name, tuple(qubits), angle)


@dataclass(frozen=True)
class Circuit:
    """An ordered list of gates on ``n_qubits`` qubits."""

    n_qubits: int
    ops: tuple[GateOp, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        for op in self.ops:
            if max(op.qubits) >= self.n_qubits:
                raise ValueError(
                    f"gate {op.name!r} on qubits {op.qubits} exceeds register of "
                    f"{self.n_qubits} qubit(s)"
                )

    @property
    def dim(self) -> int:
        return 2**self.n_qubits


def embed_single_qubit(mat2: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Kron-expand a 2x2 operator onto ``qubit`` of an n-qubit register."""
    left = np.eye(2 ** (n_qubits - 1 - qubit), dtype=np.complex128)
    right = np.eye(2**qubit, dtype=np.complex128)
    return qmath.kron(left, qmath.kron(mat2, right))


_P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
_P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)


def expanded_gate_matrix(op: GateOp, n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n unitary of one gate in the little-endian convention."""
    if op.name in FIXED_GATES:
        return embed_single_qubit(FIXED_GATES[op.name], op.qubits[0], n_qubits)
    if op.name in ROTATION_GATES:
        return embed_single_qubit(rotation_matrix(op.name, op.angle), op.qubits[0], n_qubits)
    if op.name == "cx":
        control, target = op.qubits
        return embed_single_qubit(_P0, control, n_qubits) + embed_single_qubit(
            _P1, control, n_qubits
        ) @ embed_single_qubit(PAULI_X, target, n_qubits)
    if op.name == "cz":
        control, target = op.qubits
        return embed_single_qubit(_P0, control, n_qubits) + embed_single_qubit(
            _P1, control, n_qubits
        ) @ embed_single_qubit(PAULI_Z, target, n_qubits)
    if op.name == "swap":
        a, b = op.qubits
        total = np.eye(2**n_qubits, dtype=np.complex128)
        for pauli in (PAULI_X, PAULI_Y, PAULI_Z):
            total = total + embed_single_qubit(pauli, a, n_qubits) @ embed_single_qubit(pauli, b, n_qubits)
        return total / 2.0
    raise UnsupportedGateError(f"unsupported gate {op.name!r}")


def circuit_to_unitary(c: Circuit) -> np.ndarray:
    """Product of the expanded gate matrices in program order.

    Later gates multiply on the left, so the result acts on kets as the
    circuit reads left to right.
    """
    u = np.eye(c.dim, dtype=np.complex128)
    for op in c.ops:
        u = expanded_gate_matrix(op, c.n_qubits) @ u
    return u


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, PSD, unit-trace operator on an n-qubit register."""

    n_qubits: int
    mat: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat, dtype=np.complex128)
        dim = 2**self.n_qubits
        if mat.shape != (dim, dim):
            raise DimensionError(
                f"DensityMatrix for {self.n_qubits} qubit(s) must be {dim}x{dim}, got {mat.shape}"
            )
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > qmath.HERMITICITY_TOL:
            raise DimensionError(f"density matrix not Hermitian: max |A - A†| = {herm:.3e}")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > 1e-9:
            raise ValueError(f"density matrix trace must be 1, got {tr:.12g}")
        low = float(qmath.hermitian_eig(mat).values[0])
        if low < -qmath.PSD_CLAMP:
            raise ValueError(f"density matrix has negative eigenvalue {low:.3e}")
        mat = (mat + mat.conj().T) / 2.0
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    @classmethod
    def ground(cls, n_qubits: int) -> DensityMatrix:
        """|0...0><0...0|."""
        dim = 2**n_qubits
        mat = np.zeros((dim, dim), dtype=np.complex128)
        mat[0, 0] = 1.0
        return cls(n_qubits, mat)

    @classmethod
    def from_statevector(cls, vec: np.ndarray) -> DensityMatrix:
        vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
        n = int(round(np.log2(vec.size)))
        if 2**n != vec.size:
            raise DimensionError(f"statevector length {vec.size} is not a power of two")
        vec = vec / np.linalg.norm(vec)
        return cls(n, np.outer(vec, vec.conj()))

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def purity(self) -> float:
        return float(np.trace(self.mat @ self.mat).real)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Unnormalized Choi matrix of an n-qubit channel (input factor first)."""

    n_qubits: int
    mat: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat, dtype=np.complex128)
        dim = 4**self.n_qubits
        if mat.shape != (dim, dim):
            raise DimensionError(
                f"ChoiMatrix for {self.n_qubits} qubit(s) must be {dim}x{dim}, got {mat.shape}"
            )
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > qmath.HERMITICITY_TOL:
            raise DimensionError(f"Choi matrix not Hermitian: max |A - A†| = {herm:.3e}")
        low = float(qmath.hermitian_eig(mat).values[0])
        if low < -qmath.PSD_CLAMP:
            raise ValueError(
                f"Choi matrix not completely positive: eigenvalue {low:.3e}"
            )
        mat = (mat + mat.conj().T) / 2.0
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return 4**self.n_qubits

    def input_marginal(self) -> np.ndarray:
        """Partial trace over the output factor; identity for TP channels."""
        n = self.n_qubits
        # Output-space qubits occupy positions 0..n-1 of the doubled register.
        return qmath.partial_trace(self.mat, 2 * n, keep=tuple(range(n, 2 * n)))


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Expected probabilities over the 2^n computational-basis outcomes."""

    n_qubits: int
    probs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64).reshape(-1)
        if probs.size != 2**self.n_qubits:
            raise DimensionError(
                f"distribution for {self.n_qubits} qubit(s) needs {2**self.n_qubits} entries, "
                f"got {probs.size}"
            )
        if float(probs.min()) < 0.0:
            raise ValueError(f"negative probability {probs.min():.3e}")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities must sum to 1, got {total:.12g}")
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)


def circuit_to_choi(c: Circuit) -> ChoiMatrix:
    """Choi matrix of the unitary channel implemented by the circuit."""
    u = circuit_to_unitary(c)
    d = c.dim
    omega_vec = np.zeros(d * d, dtype=np.complex128)
    omega_vec[:: d + 1] = 1.0  # sum_i |i> (x) |i>
    lifted = qmath.kron(np.eye(d, dtype=np.complex128), u) @ omega_vec
    mat = np.outer(lifted, lifted.conj())
    choi = ChoiMatrix(c.n_qubits, mat)
    marginal = choi.input_marginal()
    dev = np.max(np.abs(marginal - np.eye(d)))
    if dev > 1e-6:
        raise NumericError(f"circuit Choi matrix lost trace preservation: {dev:.3e}")
    return choi


def state_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Transition probability [tr sqrt(sqrt(rho) sigma sqrt(rho))]^2, in [0, 1]."""
    if rho.n_qubits != sigma.n_qubits:
        raise DimensionError(
            f"state_fidelity: {rho.n_qubits} vs {sigma.n_qubits} qubit states"
        )
    root = qmath.matrix_sqrt_psd(rho.mat)
    inner = root @ sigma.mat @ root
    eig = qmath.hermitian_eig((inner + inner.conj().T) / 2.0)
    values = np.clip(eig.values, 0.0, None)
    # Zero rounding-noise eigenvalues: sqrt would blow 1e-16 noise up to 1e-8
    # per eigenvalue and spoil the trace.
    cutoff = float(values.max(initial=0.0)) * values.size * 1e-14
    values[values < cutoff] = 0.0
    fid = float(np.sum(np.sqrt(values)) ** 2)
    if fid < -1e-6 or fid > 1.0 + 1e-6:
        raise NumericError(f"fidelity {fid!r} out of [0, 1] beyond tolerance")
    return min(max(fid, 0.0), 1.0)


def process_fidelity(a: ChoiMatrix, b: ChoiMatrix) -> float:
    """State fidelity of the normalized Choi matrices (channel-state duality)."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(
            f"process_fidelity: {a.n_qubits} vs {b.n_qubits} qubit channels"
        )
    d = 2**a.n_qubits
    rho_a = DensityMatrix(2 * a.n_qubits, a.mat / d)
    rho_b = DensityMatrix(2 * b.n_qubits, b.mat / d)
    return state_fidelity(rho_a, rho_b)
