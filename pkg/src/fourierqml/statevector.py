"""Dense statevector simulator with batch-aware gate kernels.

Conventions
-----------
* Qubits are numbered ``1..n_qubits`` and qubit 1 is the most significant
  bit of the basis index: the bit of qubit ``q`` in basis state ``i`` is
  ``(i >> (n_qubits - q)) & 1``.
* Rotations follow ``R_G(theta) = exp(-1j * theta * G / 2)`` for generator
  ``G``, so ``RY(theta)|0> = cos(theta/2)|0> + sin(theta/2)|1>`` and
  ``<Z> = cos(theta)``.
* Amplitude arrays have shape ``(..., 2**n_qubits)``; any leading axes are
  batch axes.  Angle arguments may be scalars or arrays broadcastable
  against the batch shape, which is what makes parameter-shift gradients
  over whole datasets a single pass through the gate sequence.

Kernels reshape the last axis to ``(2**(q-1), 2, 2**(n-q))`` and operate
in place on that view when the input is contiguous.  They return the array
holding the result; callers should always rebind to the return value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError

MAX_QUBITS = 24

__all__ = [
    "MAX_QUBITS",
    "RZ",
    "RY",
    "Rot",
    "CNOT",
    "DenseUnitary",
    "StateVector",
    "init_state",
    "apply_gate",
    "apply_rz",
    "apply_ry",
    "apply_rot",
    "apply_cnot",
    "apply_dense",
    "expectation_z",
    "sample_expectation_z",
    "haar_unitary",
    "state_norm",
]


def _check_angle(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class RZ:
    """Z rotation: diag(exp(-i a/2), exp(+i a/2)) on ``target``."""

    target: int
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", _check_angle(self.angle, "angle"))


@dataclass(frozen=True)
class RY:
    """Y rotation: [[cos(a/2), -sin(a/2)], [sin(a/2), cos(a/2)]] on ``target``."""

    target: int
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", _check_angle(self.angle, "angle"))


@dataclass(frozen=True)
class Rot:
    """General single-qubit rotation ``RZ(angle1) @ RY(angle2) @ RZ(angle3)``.

    The rightmost factor acts first: applying ``Rot`` equals applying
    ``RZ(angle3)``, then ``RY(angle2)``, then ``RZ(angle1)``.
    """

    target: int
    angle1: float
    angle2: float
    angle3: float

    def __post_init__(self):
        for name in ("angle1", "angle2", "angle3"):
            object.__setattr__(self, name, _check_angle(getattr(self, name), name))


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("CNOT control and target must differ")


@dataclass(frozen=True)
class DenseUnitary:
    """Explicit unitary on an ordered tuple of target qubits.

    ``targets[0]`` is the most significant bit of the block index used to
    interpret ``matrix``.  This is the slow validated path used as an
    oracle for the specialised kernels.
    """

    matrix: np.ndarray
    targets: tuple[int, ...]

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        targets = tuple(int(t) for t in self.targets)
        k = len(targets)
        if k == 0 or len(set(targets)) != k:
            raise ValueError("targets must be a non-empty tuple of distinct qubits")
        if mat.shape != (1 << k, 1 << k):
            raise ValueError(f"matrix shape {mat.shape} does not match {k} target qubit(s)")
        deviation = np.abs(mat.conj().T @ mat - np.eye(1 << k)).max()
        if deviation > 1e-10:
            raise ValueError(f"matrix is not unitary (deviation {deviation:.3e})")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "targets", targets)


Gate = RZ | RY | Rot | CNOT | DenseUnitary


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)


def init_state(n_qubits: int, max_qubits: int = MAX_QUBITS) -> StateVector:
    """All-zeros computational basis state ``|0...0>``.

    Raises ``CapacityError`` when ``n_qubits`` falls outside
    ``1..max_qubits``; the default cap of 24 keeps a single amplitude
    array within a desk-scale memory budget.
    """
    if not 1 <= n_qubits <= max_qubits:
        raise CapacityError(f"n_qubits={n_qubits} outside supported range 1..{max_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits=n_qubits, amplitudes=amps)


def _axis_view(amps: np.ndarray, n_qubits: int, target: int) -> np.ndarray:
    # (..., 2**n) -> (..., 2**(t-1), 2, 2**(n-t)); a view for contiguous input
    lead = amps.shape[:-1]
    return amps.reshape(*lead, 1 << (target - 1), 2, 1 << (n_qubits - target))


def _bcast(angle, like: np.ndarray) -> np.ndarray:
    # lift an angle (scalar or batch-shaped array) onto the last two axes
    arr = np.asarray(angle, dtype=np.float64)
    return arr[..., None, None]


def apply_rz(amps: np.ndarray, n_qubits: int, target: int, angle) -> np.ndarray:
    amps = np.ascontiguousarray(amps)
    view = _axis_view(amps, n_qubits, target)
    phase = np.exp(-0.5j * _bcast(angle, view))
    view[..., 0, :] *= phase
    view[..., 1, :] *= np.conj(phase)
    return amps


def apply_ry(amps: np.ndarray, n_qubits: int, target: int, angle) -> np.ndarray:
    amps = np.ascontiguousarray(amps)
    view = _axis_view(amps, n_qubits, target)
    half = 0.5 * _bcast(angle, view)
    c, s = np.cos(half), np.sin(half)
    a0 = view[..., 0, :]
    a1 = view[..., 1, :]
    new0 = c * a0 - s * a1
    new1 = s * a0 + c * a1
    view[..., 0, :] = new0
    view[..., 1, :] = new1
    return amps


def apply_rot(amps: np.ndarray, n_qubits: int, target: int, angle1, angle2, angle3) -> np.ndarray:
    amps = apply_rz(amps, n_qubits, target, angle3)
    amps = apply_ry(amps, n_qubits, target, angle2)
    return apply_rz(amps, n_qubits, target, angle1)


def apply_cnot(amps: np.ndarray, n_qubits: int, control: int, target: int) -> np.ndarray:
    amps = np.ascontiguousarray(amps)
    lead = amps.shape[:-1]
    lo, hi = (control, target) if control < target else (target, control)
    view = amps.reshape(
        *lead,
        1 << (lo - 1), 2, 1 << (hi - lo - 1), 2, 1 << (n_qubits - hi),
    )
    if control < target:
        sub = view[..., 1, :, :, :]  # control bit set; target axis is -2
        tmp = sub[..., 0, :].copy()
        sub[..., 0, :] = sub[..., 1, :]
        sub[..., 1, :] = tmp
    else:
        sub = view[..., 1, :]  # control bit set; target axis is -3
        tmp = sub[..., 0, :, :].copy()
        sub[..., 0, :, :] = sub[..., 1, :, :]
        sub[..., 1, :, :] = tmp
    return amps


def apply_dense(amps: np.ndarray, n_qubits: int, matrix: np.ndarray, targets: tuple[int, ...]) -> np.ndarray:
    lead = amps.shape[:-1]
    nb = len(lead)
    k = len(targets)
    tensor = amps.reshape(*lead, *([2] * n_qubits))
    src = [nb + t - 1 for t in targets]
    dest = list(range(nb + n_qubits - k, nb + n_qubits))
    tensor = np.moveaxis(tensor, src, dest)
    moved_shape = tensor.shape
    flat = tensor.reshape(*moved_shape[:-k], 1 << k)
    flat = flat @ np.asarray(matrix, dtype=np.complex128).T
    tensor = np.moveaxis(flat.reshape(moved_shape), dest, src)
    return np.ascontiguousarray(tensor).reshape(*lead, 1 << n_qubits)


def _check_qubit(q: int, n_qubits: int, name: str = "qubit") -> None:
    if not 1 <= q <= n_qubits:
        raise IndexError(f"{name} {q} out of range 1..{n_qubits}")


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply ``gate`` to ``state`` in place and return it."""
    n = state.n_qubits
    if isinstance(gate, RZ):
        _check_qubit(gate.target, n, "target")
        state.amplitudes = apply_rz(state.amplitudes, n, gate.target, gate.angle)
    elif isinstance(gate, RY):
        _check_qubit(gate.target, n, "target")
        state.amplitudes = apply_ry(state.amplitudes, n, gate.target, gate.angle)
    elif isinstance(gate, Rot):
        _check_qubit(gate.target, n, "target")
        state.amplitudes = apply_rot(state.amplitudes, n, gate.target, gate.angle1, gate.angle2, gate.angle3)
    elif isinstance(gate, CNOT):
        _check_qubit(gate.control, n, "control")
        _check_qubit(gate.target, n, "target")
        state.amplitudes = apply_cnot(state.amplitudes, n, gate.control, gate.target)
    elif isinstance(gate, DenseUnitary):
        for t in gate.targets:
            _check_qubit(t, n, "target")
        state.amplitudes = apply_dense(state.amplitudes, n, gate.matrix, gate.targets)
    else:
        raise TypeError(f"unsupported gate type {type(gate).__name__}")
    return state


def expectation_z(amps: np.ndarray, n_qubits: int, qubit: int):
    """``<Z>`` on ``qubit``; batched over any leading axes of ``amps``."""
    _check_qubit(qubit, n_qubits)
    lead = amps.shape[:-1]
    prob = (amps.real**2 + amps.imag**2).reshape(
        *lead, 1 << (qubit - 1), 2, 1 << (n_qubits - qubit)
    )
    diff = prob[..., 0, :].sum(axis=(-2, -1)) - prob[..., 1, :].sum(axis=(-2, -1))
    return diff if lead else float(diff)


def sample_expectation_z(amps: np.ndarray, n_qubits: int, qubit: int, shots: int, rng: np.random.Generator):
    """Finite-shot estimate of ``<Z>`` from ``shots`` binomial draws."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    z = expectation_z(amps, n_qubits, qubit)
    p_up = np.clip((1.0 + np.asarray(z)) / 2.0, 0.0, 1.0)
    counts = rng.binomial(shots, p_up)
    est = 2.0 * counts / shots - 1.0
    return est if np.ndim(z) else float(est)


def state_norm(amps: np.ndarray):
    return np.sqrt((amps.real**2 + amps.imag**2).sum(axis=-1))


def haar_unitary(dim: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-distributed unitaries via QR of a complex Ginibre matrix.

    The raw QR decomposition is not Haar; multiplying each column of Q by
    the phase of the corresponding diagonal entry of R fixes the measure.
    Returns shape ``(dim, dim)``, or ``(size, dim, dim)`` when ``size``
    is given (stacked QR).
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    shape = (dim, dim) if size is None else (size, dim, dim)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    q, r = np.linalg.qr(z / np.sqrt(2.0))
    diag = np.einsum("...ii->...i", r)
    q = q * (diag / np.abs(diag))[..., None, :]
    return q
