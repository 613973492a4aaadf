"""Quantum state and process tomography by linear inversion.

State tomography measures all 3^n per-qubit Pauli bases, averages every
compatible setting into each Pauli-string expectation (identity positions
marginalized), rebuilds the state by linear inversion and restores
physicality with a PSD projection.  Process tomography feeds the channel all
4^n product preparations from {|0>, |1>, |+>, |+i>}, tomographs each output,
and inverts the fixed preparation frame to assemble the Choi matrix.

``shots_per_setting == 0`` selects analytic mode: measurement statistics are
taken from the exact outcome distribution, so reconstruction is exact (up to
the PSD projection's rounding) for whatever channel the backend implements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from quassert import qmath
from quassert.qcore import (
    Circuit,
    ChoiMatrix,
    DensityMatrix,
    GateOp,
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
)
from quassert.simulator import DensityMatrixSimulator, derive_seed

MAX_STATE_QUBITS = 4
MAX_PROCESS_QUBITS = 3

_BASIS_LETTERS = ("X", "Y", "Z")
_PREP_LABELS = ("0", "1", "+", "+i")
_PAULI_BY_LETTER = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


class SizeLimitError(ValueError):
    """Tomography requested beyond the supported register size."""


@dataclass(frozen=True)
class MeasurementSetting:
    """Per-qubit Pauli basis and the rotation mapping it to the Z basis."""

    basis: tuple[str, ...]
    rotation: Circuit


@dataclass(frozen=True)
class PreparationSetting:
    """Per-qubit input label and the circuit preparing it from |0...0>."""

    label: tuple[str, ...]
    prep: Circuit


def _basis_rotation_ops(letter: str, qubit: int) -> tuple[GateOp, ...]:
    if letter == "X":
        return (GateOp("h", (qubit,)),)
    if letter == "Y":
        return (GateOp("sdg", (qubit,)), GateOp("h", (qubit,)))
    return ()


def _prep_ops(label: str, qubit: int) -> tuple[GateOp, ...]:
    if label == "1":
        return (GateOp("x", (qubit,)),)
    if label == "+":
        return (GateOp("h", (qubit,)),)
    if label == "+i":
        return (GateOp("h", (qubit,)), GateOp("s", (qubit,)))
    return ()


def measurement_settings(n_qubits: int) -> list[MeasurementSetting]:
    """All 3^n product Pauli bases; qubit 0's letter varies fastest."""
    settings = []
    for k in range(3**n_qubits):
        letters = tuple(_BASIS_LETTERS[(k // 3**q) % 3] for q in range(n_qubits))
        ops: list[GateOp] = []
        for q, letter in enumerate(letters):
            ops.extend(_basis_rotation_ops(letter, q))
        settings.append(MeasurementSetting(letters, Circuit(n_qubits, tuple(ops))))
    return settings


def preparation_settings(n_qubits: int) -> list[PreparationSetting]:
    """All 4^n product preparations; qubit 0's label varies fastest."""
    settings = []
    for m in range(4**n_qubits):
        labels = tuple(_PREP_LABELS[(m // 4**q) % 4] for q in range(n_qubits))
        ops: list[GateOp] = []
        for q, label in enumerate(labels):
            ops.extend(_prep_ops(label, q))
        settings.append(PreparationSetting(labels, Circuit(n_qubits, tuple(ops))))
    return settings


def _parity_signs(dim: int, mask: int) -> np.ndarray:
    """(-1)^popcount(i & mask) for every outcome index i."""
    return np.array([1.0 if bin(i & mask).count("1") % 2 == 0 else -1.0 for i in range(dim)])


def _pauli_string_matrix(letters: tuple[str, ...]) -> np.ndarray:
    mat = np.array([[1.0]], dtype=np.complex128)
    for q in reversed(range(len(letters))):
        mat = qmath.kron(mat, _PAULI_BY_LETTER[letters[q]])
    return mat


def state_tomography(
    prep: Circuit | None,
    subject: Circuit,
    backend: DensityMatrixSimulator,
    shots_per_setting: int,
    seed: int,
) -> DensityMatrix:
    """Reconstruct the subject's output state for the given preparation."""
    n = subject.n_qubits
    if n > MAX_STATE_QUBITS:
        raise SizeLimitError(
            f"state tomography supports at most {MAX_STATE_QUBITS} qubits, got {n}"
        )
    if shots_per_setting < 0:
        raise ValueError("shots_per_setting must be >= 0 (0 = analytic mode)")
    if prep is not None and prep.n_qubits != n:
        raise qmath.DimensionError(
            f"preparation on {prep.n_qubits} qubit(s) vs subject on {n}"
        )

    state = DensityMatrix.ground(n)
    if prep is not None and prep.ops:
        state = backend.evolve(state, prep)
    state = backend.evolve(state, subject)

    dim = 2**n
    settings = measurement_settings(n)
    probs_by_setting = []
    for k, setting in enumerate(settings):
        if shots_per_setting == 0:
            probs = backend.exact_distribution(state, setting.rotation).probs
        else:
            counts = backend.sample(
                state, setting.rotation, shots_per_setting, derive_seed(seed, "setting", k)
            )
            probs = counts.frequencies()
        probs_by_setting.append(probs)

    rho = np.eye(dim, dtype=np.complex128) / dim
    for code in range(1, 4**n):
        letters = tuple("IXYZ"[(code // 4**q) % 4] for q in range(n))
        support = [q for q, letter in enumerate(letters) if letter != "I"]
        mask = sum(1 << q for q in support)
        signs = _parity_signs(dim, mask)
        free = [q for q in range(n) if q not in support]
        total = 0.0
        compatible = 0
        for combo in range(3 ** len(free)):
            k = 0
            for q in support:
                k += _BASIS_LETTERS.index(letters[q]) * 3**q
            for idx, q in enumerate(free):
                k += ((combo // 3**idx) % 3) * 3**q
            total += float(signs @ probs_by_setting[k])
            compatible += 1
        expectation = total / compatible
        rho += expectation * _pauli_string_matrix(letters) / dim

    projected = qmath.psd_project(rho, 1.0)
    return DensityMatrix(n, projected)


def _single_qubit_prep_matrices() -> list[np.ndarray]:
    zero = np.array([[1, 0], [0, 0]], dtype=np.complex128)
    one = np.array([[0, 0], [0, 1]], dtype=np.complex128)
    plus = np.full((2, 2), 0.5, dtype=np.complex128)
    plus_i = np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=np.complex128)
    return [zero, one, plus, plus_i]


def _dual_frame() -> np.ndarray:
    """Coefficients expressing matrix units in the preparation frame.

    ``DUAL[s, 2*a + b]`` is the weight of preparation ``s`` in the expansion
    of the matrix unit |a><b|.  The frame is informationally complete by
    construction; the inversion is asserted at import time.
    """
    frame = np.array([p.reshape(-1) for p in _single_qubit_prep_matrices()])
    dual = np.linalg.inv(frame.T)
    residual = np.max(np.abs(frame.T @ dual - np.eye(4)))
    assert residual < 1e-12, f"preparation frame inversion failed: residual {residual:.3e}"
    return dual


_DUAL = _dual_frame()


def process_tomography(
    subject: Circuit,
    backend: DensityMatrixSimulator,
    shots_per_setting: int,
    seed: int,
) -> ChoiMatrix:
    """Reconstruct the subject's channel as an unnormalized Choi matrix."""
    n = subject.n_qubits
    if n > MAX_PROCESS_QUBITS:
        raise SizeLimitError(
            f"process tomography supports at most {MAX_PROCESS_QUBITS} qubits, got {n}"
        )
    d = 2**n

    outputs = []
    for m, prep in enumerate(preparation_settings(n)):
        estimate = state_tomography(
            prep.prep, subject, backend, shots_per_setting, derive_seed(seed, "prep", m)
        )
        outputs.append(estimate.mat)

    choi = np.zeros((d * d, d * d), dtype=np.complex128)
    for row in range(d):
        for col in range(d):
            block = np.zeros((d, d), dtype=np.complex128)
            for m, output in enumerate(outputs):
                coeff = 1.0 + 0.0j
                for q in range(n):
                    a = (row >> q) & 1
                    b = (col >> q) & 1
                    s = (m // 4**q) % 4
                    coeff *= _DUAL[s, 2 * a + b]
                if coeff != 0.0:
                    block += coeff * output
            choi[row * d : (row + 1) * d, col * d : (col + 1) * d] = block

    choi = (choi + choi.conj().T) / 2.0
    projected = qmath.psd_project(choi, float(d))
    return ChoiMatrix(n, projected)
