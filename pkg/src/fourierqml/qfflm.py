"""Quantum Fourier-featured linear model.

The model function is the Z expectation of a variational circuit that
interleaves trainable blocks with data-encoding rotations,

    f(x) = <0| U(theta, x)^dag  Z_measured  U(theta, x) |0>,

which is always a multivariate Fourier series whose frequencies are
fixed by the integer encoding weights (see :mod:`fourierqml.spectra`).

Three circuit topologies are provided:

* ``Parallel`` -- one register block of ``n_qubits`` per variable; a
  trainable block W1, one encoding rotation ``RZ(beta_k x_m)`` per qubit,
  a trainable block W2.
* ``Serial`` -- a single register; an initial trainable block followed by
  ``reuploads`` blocks, each encoding the full feature vector through
  ``Rot`` gates (three features per qubit per encoding layer, all scaled
  by that block's weight) interleaved with trainable blocks.
* ``Ring`` -- a single register with one ``RZ`` encoding per qubit per
  reupload block and ring-connected CNOTs in the trainable blocks.  The
  internal gate order of the original strongly-entangling construction is
  not published, so this is a faithful-in-spirit stand-in with the CNOT
  range fixed to 1.

Trainable blocks are hardware-efficient: ``n_layers`` repetitions of
per-qubit rotations (RY then RZ with ``rotation_params=2``, or a full
``Rot`` with 3) followed by a CNOT line (ring for ``Ring``).

All evaluation goes through one batched statevector pass with amplitude
arrays of shape ``(theta_variants, data_points, 2**n)``; the
parameter-shift Jacobian over a whole dataset is therefore a single
sweep through the gate sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import prod

import numpy as np

from .errors import CapacityError
from .spectra import EncodingSpec, FrequencySpectrum, spectrum
from .statevector import (
    MAX_QUBITS,
    apply_cnot,
    apply_rot,
    apply_ry,
    apply_rz,
    expectation_z,
    sample_expectation_z,
)

__all__ = [
    "Parallel",
    "Serial",
    "Ring",
    "AnsatzSpec",
    "FourierCoefficients",
    "param_count",
    "init_parameters",
    "evaluate",
    "evaluate_batch",
    "evaluate_sampled",
    "gradient_parameter_shift",
    "values_and_jacobian",
    "fourier_coefficients",
    "coefficient_vector",
    "ansatz_to_json",
    "ansatz_from_json",
]

ANSATZ_FORMAT_VERSION = "ansatz-v1"

_MAX_GRID = 10_000_000


@dataclass(frozen=True)
class Parallel:
    """One block of qubits per variable, encoded once between W1 and W2."""


@dataclass(frozen=True)
class Serial:
    """Reuploading topology: every feature re-encoded in each block.

    Each of the ``reuploads`` blocks applies ``encoders_per_block``
    encoding layers (each packing 3 features per qubit into a Rot gate),
    every one followed by its own trainable block.  Requires
    ``n_variables == 3 * n_qubits * encoders_per_block``.
    """

    reuploads: int
    encoders_per_block: int = 2


@dataclass(frozen=True)
class Ring:
    """Reuploading with one feature per qubit and ring-connected CNOTs."""

    reuploads: int


Topology = Parallel | Serial | Ring


@dataclass(frozen=True)
class AnsatzSpec:
    """Complete static description of a model circuit.

    ``n_qubits`` counts qubits per variable for ``Parallel`` and total
    qubits for ``Serial``/``Ring``.  ``encoding`` holds the integer
    weights: per variable (length ``n_qubits``) for ``Parallel``, per
    reupload block (length ``reuploads``, shared by all variables) for
    ``Serial``/``Ring``.  ``measured_qubit`` defaults to the last qubit.
    """

    n_variables: int
    n_qubits: int
    n_layers: int
    topology: Topology
    encoding: EncodingSpec | tuple[EncodingSpec, ...]
    rotation_params: int = 2
    measured_qubit: int | None = None

    def __post_init__(self):
        if self.n_variables < 1 or self.n_qubits < 1:
            raise ValueError("n_variables and n_qubits must be >= 1")
        if self.n_layers < 0:
            # n_layers = 0 keeps only the encoding gates -- useful for
            # resource accounting of the data-dependent part on its own.
            raise ValueError(f"n_layers must be >= 0, got {self.n_layers}")
        if self.rotation_params not in (2, 3):
            raise ValueError(f"rotation_params must be 2 or 3, got {self.rotation_params}")
        topo = self.topology
        enc = self.encoding
        if isinstance(topo, Parallel):
            if isinstance(enc, EncodingSpec):
                enc = (enc,) * self.n_variables
                object.__setattr__(self, "encoding", enc)
            if len(enc) != self.n_variables:
                raise ValueError(
                    f"parallel topology needs one encoding per variable: "
                    f"expected {self.n_variables}, got {len(enc)}"
                )
            for e in enc:
                if e.n_rotations != self.n_qubits:
                    raise ValueError(
                        f"parallel encoding needs one weight per qubit: "
                        f"expected {self.n_qubits}, got {e.n_rotations}"
                    )
        elif isinstance(topo, (Serial, Ring)):
            if not isinstance(enc, EncodingSpec):
                raise ValueError(
                    f"{type(topo).__name__.lower()} topology shares one per-block "
                    "weight list across all variables; pass a single EncodingSpec"
                )
            if topo.reuploads < 1:
                raise ValueError("reuploads must be >= 1")
            if enc.n_rotations != topo.reuploads:
                raise ValueError(
                    f"need one weight per reupload block: expected "
                    f"{topo.reuploads}, got {enc.n_rotations}"
                )
            if isinstance(topo, Serial):
                if topo.encoders_per_block < 1:
                    raise ValueError("encoders_per_block must be >= 1")
                expected = 3 * self.n_qubits * topo.encoders_per_block
                if self.n_variables != expected:
                    raise ValueError(
                        f"serial topology packs 3 features per qubit per encoding "
                        f"layer: n_variables must be {expected}, got {self.n_variables}"
                    )
            elif self.n_variables != self.n_qubits:
                raise ValueError(
                    f"ring topology encodes one feature per qubit: n_variables "
                    f"must equal n_qubits ({self.n_qubits}), got {self.n_variables}"
                )
        else:
            raise TypeError(f"unsupported topology {type(topo).__name__}")
        total = self.total_qubits
        if total > MAX_QUBITS:
            raise CapacityError(f"{total} total qubits exceed the cap of {MAX_QUBITS}")
        measured = self.measured_qubit if self.measured_qubit is not None else total
        if not 1 <= measured <= total:
            raise IndexError(f"measured_qubit {measured} out of range 1..{total}")
        object.__setattr__(self, "measured_qubit", measured)

    @property
    def total_qubits(self) -> int:
        if isinstance(self.topology, Parallel):
            return self.n_variables * self.n_qubits
        return self.n_qubits

    def variable_encoding(self, m: int) -> EncodingSpec:
        """Effective weight list seen by variable ``m`` (1-based)."""
        if isinstance(self.topology, Parallel):
            return self.encoding[m - 1]
        return self.encoding  # per-block weights, shared by every variable

    def per_variable_spectra(self) -> tuple[FrequencySpectrum, ...]:
        return tuple(spectrum(self.variable_encoding(m)) for m in range(1, self.n_variables + 1))


# ---------------------------------------------------------------------------
# circuit program
# ---------------------------------------------------------------------------
# Circuits compile to a flat op tuple interpreted by the batched runner:
#   ("ry"|"rz", qubit, theta_index)
#   ("rot", qubit, (i1, i2, i3))            three theta indices, Z-Y-Z
#   ("enc_rz", qubit, var_index, weight)    RZ(weight * x[var])
#   ("enc_rot", qubit, (v1, v2, v3), weight)
#   ("cnot", control, target)
# Trainable parameter indices are allocated in emission order, which fixes
# the public flat layout of theta: blocks in circuit order, layers within
# a block, qubits within a layer, rotation angles within a qubit.


def _emit_trainable_block(ops: list, spec: AnsatzSpec, qubits: range, entangler: list, start: int) -> int:
    idx = start
    for _ in range(spec.n_layers):
        for q in qubits:
            if spec.rotation_params == 2:
                ops.append(("ry", q, idx))
                ops.append(("rz", q, idx + 1))
                idx += 2
            else:
                ops.append(("rot", q, (idx, idx + 1, idx + 2)))
                idx += 3
        for control, target in entangler:
            ops.append(("cnot", control, target))
    return idx


@lru_cache(maxsize=None)
def _program(spec: AnsatzSpec) -> tuple[tuple, int]:
    ops: list = []
    total = spec.total_qubits
    qubits = range(1, total + 1)
    topo = spec.topology
    if isinstance(topo, Ring):
        entangler = [(q, q % total + 1) for q in qubits] if total > 1 else []
    else:
        entangler = [(q, q + 1) for q in range(1, total)]

    if isinstance(topo, Parallel):
        idx = _emit_trainable_block(ops, spec, qubits, entangler, 0)
        for m in range(1, spec.n_variables + 1):
            offset = (m - 1) * spec.n_qubits
            for k, weight in enumerate(spec.encoding[m - 1].weights, start=1):
                ops.append(("enc_rz", offset + k, m - 1, weight))
        idx = _emit_trainable_block(ops, spec, qubits, entangler, idx)
    elif isinstance(topo, Serial):
        idx = _emit_trainable_block(ops, spec, qubits, entangler, 0)
        per_layer = 3 * spec.n_qubits
        for block in range(topo.reuploads):
            weight = spec.encoding.weights[block]
            for enc_layer in range(topo.encoders_per_block):
                base = enc_layer * per_layer
                for q in qubits:
                    v = base + (q - 1) * 3
                    ops.append(("enc_rot", q, (v, v + 1, v + 2), weight))
                idx = _emit_trainable_block(ops, spec, qubits, entangler, idx)
    else:  # Ring
        idx = _emit_trainable_block(ops, spec, qubits, entangler, 0)
        for block in range(topo.reuploads):
            weight = spec.encoding.weights[block]
            for q in qubits:
                ops.append(("enc_rz", q, q - 1, weight))
            idx = _emit_trainable_block(ops, spec, qubits, entangler, idx)
    return tuple(ops), idx


def param_count(spec: AnsatzSpec) -> int:
    """Number of trainable parameters N_tp, fixed by the ansatz alone."""
    return _program(spec)[1]


def init_parameters(spec: AnsatzSpec, rng: np.random.Generator) -> np.ndarray:
    """Independent uniform draws on [-pi, pi) for every trainable angle."""
    return rng.uniform(-np.pi, np.pi, size=param_count(spec))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _run_batch(spec: AnsatzSpec, thetas: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Amplitudes of shape (variants, data, 2**n) after the full circuit.

    ``thetas``: (variants, N_tp); ``xs``: (data, M).  Trainable angles
    broadcast along the data axis and encoding angles along the variant
    axis, so one pass covers every (theta variant, datum) pair.
    """
    ops, n_params = _program(spec)
    if thetas.shape[1] != n_params:
        raise ValueError(f"theta length {thetas.shape[1]} != N_tp {n_params}")
    if xs.shape[1] != spec.n_variables:
        raise ValueError(f"x length {xs.shape[1]} != n_variables {spec.n_variables}")
    if not (np.isfinite(thetas).all() and np.isfinite(xs).all()):
        raise ValueError("theta and x entries must be finite")
    n = spec.total_qubits
    amps = np.zeros((thetas.shape[0], xs.shape[0], 1 << n), dtype=np.complex128)
    amps[:, :, 0] = 1.0

    def tcol(i):
        return thetas[:, i][:, None]

    def xcol(j):
        return xs[:, j][None, :]

    for op in ops:
        kind = op[0]
        if kind == "ry":
            amps = apply_ry(amps, n, op[1], tcol(op[2]))
        elif kind == "rz":
            amps = apply_rz(amps, n, op[1], tcol(op[2]))
        elif kind == "rot":
            i1, i2, i3 = op[2]
            amps = apply_rot(amps, n, op[1], tcol(i1), tcol(i2), tcol(i3))
        elif kind == "enc_rz":
            amps = apply_rz(amps, n, op[1], op[3] * xcol(op[2]))
        elif kind == "enc_rot":
            v1, v2, v3 = op[2]
            w = op[3]
            amps = apply_rot(amps, n, op[1], w * xcol(v1), w * xcol(v2), w * xcol(v3))
        else:  # cnot
            amps = apply_cnot(amps, n, op[1], op[2])
    return amps


def _as_theta(spec: AnsatzSpec, theta) -> np.ndarray:
    arr = np.asarray(theta, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != param_count(spec):
        raise ValueError(f"theta must have length {param_count(spec)}, got shape {arr.shape}")
    return arr


def _as_inputs(spec: AnsatzSpec, x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr[None]
    if arr.ndim == 1:
        if arr.shape[0] != spec.n_variables:
            raise ValueError(f"x must have length {spec.n_variables}, got {arr.shape[0]}")
        return arr[None, :]
    if arr.ndim == 2 and arr.shape[1] == spec.n_variables:
        return arr
    raise ValueError(f"inputs must have shape (n, {spec.n_variables}), got {arr.shape}")


def evaluate(spec: AnsatzSpec, theta, x) -> float:
    """Exact model value ``<Z_measured>`` at one input point."""
    theta = _as_theta(spec, theta)
    xs = _as_inputs(spec, x)
    if xs.shape[0] != 1:
        raise ValueError("evaluate takes a single input point; use evaluate_batch")
    amps = _run_batch(spec, theta[None, :], xs)
    return float(expectation_z(amps, spec.total_qubits, spec.measured_qubit)[0, 0])


def evaluate_batch(spec: AnsatzSpec, theta, xs) -> np.ndarray:
    """Exact model values over inputs of shape (n, M)."""
    theta = _as_theta(spec, theta)
    xs = _as_inputs(spec, xs)
    amps = _run_batch(spec, theta[None, :], xs)
    return expectation_z(amps, spec.total_qubits, spec.measured_qubit)[0]


def evaluate_sampled(spec: AnsatzSpec, theta, x, shots: int, rng: np.random.Generator) -> float:
    """Finite-shot estimate of ``evaluate``; unbiased, binomial shot noise."""
    theta = _as_theta(spec, theta)
    xs = _as_inputs(spec, x)
    amps = _run_batch(spec, theta[None, :], xs)
    est = sample_expectation_z(amps, spec.total_qubits, spec.measured_qubit, shots, rng)
    return float(np.asarray(est).reshape(-1)[0])


def values_and_jacobian(
    spec: AnsatzSpec,
    theta,
    xs,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Model values and the full parameter-shift Jacobian over a dataset.

    Returns ``(values, jac)`` with shapes ``(n,)`` and ``(n, N_tp)``.
    The ``2 N_tp + 1`` parameter variants (base, +pi/2 and -pi/2 shifts
    of each angle) are evaluated as one batch.  With ``shots`` set, every
    circuit value (base and shifted) is replaced by a finite-shot
    estimate drawn from ``rng``.
    """
    theta = _as_theta(spec, theta)
    xs = _as_inputs(spec, xs)
    n_tp = theta.shape[0]
    variants = np.tile(theta, (2 * n_tp + 1, 1))
    rows = np.arange(n_tp)
    variants[1 + rows, rows] += np.pi / 2
    variants[1 + n_tp + rows, rows] -= np.pi / 2
    amps = _run_batch(spec, variants, xs)
    z = expectation_z(amps, spec.total_qubits, spec.measured_qubit)
    if shots is not None:
        if rng is None:
            raise ValueError("sampled evaluation needs an rng")
        z = sample_expectation_z(amps, spec.total_qubits, spec.measured_qubit, shots, rng)
    values = z[0]
    jac = ((z[1 : 1 + n_tp] - z[1 + n_tp :]) / 2.0).T
    return values, jac


def gradient_parameter_shift(spec: AnsatzSpec, theta, x) -> np.ndarray:
    """Exact gradient of ``evaluate`` w.r.t. every trainable angle.

    Uses the shift rule ``[f(theta_k + pi/2) - f(theta_k - pi/2)] / 2``,
    which is exact because every trainable rotation has a Pauli generator
    with eigenvalues +-1/2.
    """
    xs = _as_inputs(spec, x)
    if xs.shape[0] != 1:
        raise ValueError("gradient_parameter_shift takes a single input point")
    _, jac = values_and_jacobian(spec, theta, xs)
    return jac[0]


# ---------------------------------------------------------------------------
# Fourier coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FourierCoefficients:
    """Complex Fourier data of a model, ``f(x) = sum_n c_n exp(-i n.x)``.

    ``values[i1, ..., iM]`` is the coefficient at frequency
    ``(supports[0][i1], ..., supports[M-1][iM])``.  ``residual`` is the
    largest coefficient magnitude found outside the model's frequency
    lattice on the analysis grid (zero up to DFT rounding for a faithful
    band-limited model).
    """

    n_variables: int
    supports: tuple[np.ndarray, ...] = field(repr=False)
    values: np.ndarray = field(repr=False)
    residual: float

    def reality_deviation(self) -> float:
        """max |c(-n) - conj(c(n))|; zero for a real-valued model."""
        flipped = self.values[tuple(slice(None, None, -1) for _ in range(self.values.ndim))]
        return float(np.abs(self.values - flipped.conj()).max())

    def synthesize(self, x) -> np.ndarray | float:
        """Evaluate the series at inputs ``x`` of shape (M,) or (n, M)."""
        xs = np.asarray(x, dtype=np.float64)
        scalar = xs.ndim == 1
        if scalar:
            xs = xs[None, :]
        if xs.shape[1] != self.n_variables:
            raise ValueError(f"inputs must have {self.n_variables} columns")
        phase = np.exp(-1j * xs[:, 0][:, None] * self.supports[0][None, :])
        acc = np.einsum("dk,k...->d...", phase, self.values)
        for m in range(1, self.n_variables):
            phase = np.exp(-1j * xs[:, m][:, None] * self.supports[m][None, :])
            acc = np.einsum("dk,dk...->d...", phase, acc)
        out = acc.real
        return float(out[0]) if scalar else out


def fourier_coefficients(
    spec: AnsatzSpec,
    theta,
    grid_sizes: int | list[int] | None = None,
    max_grid: int = _MAX_GRID,
) -> FourierCoefficients:
    """Exact Fourier coefficients by DFT over a uniform grid on [-pi, pi)^M.

    The default grid of ``2 d_F + 1`` points per variable is exact for a
    band-limited model of per-variable degree ``d_F``.  Larger grids
    expose any out-of-band mass through the ``residual`` field, which is
    how the band-limit property is verified.
    """
    theta = _as_theta(spec, theta)
    per_var = spec.per_variable_spectra()
    degrees = [s.d_f for s in per_var]
    m_vars = spec.n_variables
    if grid_sizes is None:
        sizes = [2 * d + 1 for d in degrees]
    elif isinstance(grid_sizes, int):
        sizes = [grid_sizes] * m_vars
    else:
        sizes = [int(g) for g in grid_sizes]
        if len(sizes) != m_vars:
            raise ValueError(f"need {m_vars} grid sizes, got {len(sizes)}")
    for g, d in zip(sizes, degrees):
        if g < 2 * d + 1:
            raise ValueError(f"grid size {g} below Nyquist requirement {2 * d + 1}")
    total = prod(sizes)
    if total > max_grid:
        raise CapacityError(f"evaluation grid of {total} points exceeds cap {max_grid}")

    axes = [-np.pi + 2.0 * np.pi * np.arange(g) / g for g in sizes]
    mesh = np.meshgrid(*axes, indexing="ij")
    xs = np.stack([g.ravel() for g in mesh], axis=-1)
    vals = evaluate_batch(spec, theta, xs).reshape(sizes)

    c_full = np.fft.ifftn(vals)
    # with x_g = -pi + 2 pi g / G:  c_n = (-1)^n * ifft(f)[n mod G]
    freq_axes = []
    for axis, g in enumerate(sizes):
        freqs = np.rint(np.fft.fftfreq(g) * g).astype(np.int64)
        freq_axes.append(freqs)
        sign = np.where(freqs % 2 == 0, 1.0, -1.0)
        shape = [1] * m_vars
        shape[axis] = g
        c_full = c_full * sign.reshape(shape)

    supports = tuple(s.support.copy() for s in per_var)
    gather = [np.mod(sup, g) for sup, g in zip(supports, sizes)]
    values = c_full[np.ix_(*gather)]
    on_lattice = np.zeros(sizes, dtype=bool)
    on_lattice[np.ix_(*gather)] = True
    off = ~on_lattice
    residual = float(np.abs(c_full[off]).max()) if off.any() else 0.0
    return FourierCoefficients(
        n_variables=m_vars, supports=supports, values=values, residual=residual
    )


def _complex_to_real_matrix(degree: int) -> np.ndarray:
    """Map coefficients on frequencies -d..d to the real feature basis.

    Feature ordering per variable: index 0 the constant, ``2j - 1`` the
    ``sqrt(2) cos(j x)`` feature and ``2j`` the ``sqrt(2) sin(j x)``
    feature, so that ``f = sum_k out[k] * phi_k``.
    """
    k = 2 * degree + 1
    t = np.zeros((k, k), dtype=np.complex128)
    t[0, degree] = 1.0
    rt = 1.0 / np.sqrt(2.0)
    for j in range(1, degree + 1):
        t[2 * j - 1, degree + j] = rt
        t[2 * j - 1, degree - j] = rt
        t[2 * j, degree + j] = -1j * rt
        t[2 * j, degree - j] = 1j * rt
    return t


def coefficient_vector(fc: FourierCoefficients) -> np.ndarray:
    """Real coefficient vector aligned with the classical feature map.

    Requires a dense lattice (every integer frequency in ``[-d_F, d_F]``
    per variable); sparse-spectrum models keep their complex form.  The
    result ``c`` satisfies ``f(x) = c . phi(x)`` with the Kronecker
    feature ordering of :func:`fourierqml.cfflm.feature_map`.
    """
    acc = fc.values
    for axis in range(fc.n_variables):
        support = fc.supports[axis]
        degree = int(support[-1])
        if len(support) != 2 * degree + 1 or support[0] != -degree:
            raise ValueError(
                "coefficient_vector needs a dense frequency lattice; "
                "this model's spectrum has gaps -- use the complex form"
            )
        t = _complex_to_real_matrix(degree)
        acc = np.moveaxis(np.tensordot(t, acc, axes=(1, axis)), 0, axis)
    imag = float(np.abs(acc.imag).max()) if acc.size else 0.0
    if imag > 1e-9:
        raise ValueError(f"coefficients are not real within tolerance (residue {imag:.3e})")
    return np.ascontiguousarray(acc.real).ravel()


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def ansatz_to_json(spec: AnsatzSpec) -> str:
    """Stable JSON form of an AnsatzSpec (format tag ``ansatz-v1``)."""
    topo = spec.topology
    if isinstance(topo, Parallel):
        topo_doc = {"kind": "parallel"}
    elif isinstance(topo, Serial):
        topo_doc = {
            "kind": "serial",
            "reuploads": topo.reuploads,
            "encoders_per_block": topo.encoders_per_block,
        }
    else:
        topo_doc = {"kind": "ring", "reuploads": topo.reuploads}
    if isinstance(spec.encoding, EncodingSpec):
        enc_doc = list(spec.encoding.weights)
    else:
        enc_doc = [list(e.weights) for e in spec.encoding]
    doc = {
        "version": ANSATZ_FORMAT_VERSION,
        "n_variables": spec.n_variables,
        "n_qubits": spec.n_qubits,
        "n_layers": spec.n_layers,
        "topology": topo_doc,
        "encoding": enc_doc,
        "rotation_params": spec.rotation_params,
        "measured_qubit": spec.measured_qubit,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


_TOPOLOGY_KEYS = {
    "parallel": {"kind"},
    "serial": {"kind", "reuploads", "encoders_per_block"},
    "ring": {"kind", "reuploads"},
}


def ansatz_from_json(text: str) -> AnsatzSpec:
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError("ansatz document must be a JSON object")
    version = doc.get("version")
    if version != ANSATZ_FORMAT_VERSION:
        raise ValueError(f"unsupported ansatz format version {version!r}")
    required = {
        "version", "n_variables", "n_qubits", "n_layers",
        "topology", "encoding", "rotation_params", "measured_qubit",
    }
    unknown = set(doc) - required
    if unknown:
        raise ValueError(f"unknown ansatz fields: {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise ValueError(f"missing ansatz fields: {sorted(missing)}")
    topo_doc = doc["topology"]
    kind = topo_doc.get("kind")
    if kind not in _TOPOLOGY_KEYS:
        raise ValueError(f"unknown topology kind {kind!r}")
    extra = set(topo_doc) - _TOPOLOGY_KEYS[kind]
    if extra:
        raise ValueError(f"unknown topology fields: {sorted(extra)}")
    if kind == "parallel":
        topo: Topology = Parallel()
    elif kind == "serial":
        topo = Serial(
            reuploads=int(topo_doc["reuploads"]),
            encoders_per_block=int(topo_doc.get("encoders_per_block", 2)),
        )
    else:
        topo = Ring(reuploads=int(topo_doc["reuploads"]))
    enc_doc = doc["encoding"]
    if enc_doc and isinstance(enc_doc[0], list):
        encoding: EncodingSpec | tuple[EncodingSpec, ...] = tuple(
            EncodingSpec(weights=tuple(w)) for w in enc_doc
        )
    else:
        encoding = EncodingSpec(weights=tuple(enc_doc))
    return AnsatzSpec(
        n_variables=int(doc["n_variables"]),
        n_qubits=int(doc["n_qubits"]),
        n_layers=int(doc["n_layers"]),
        topology=topo,
        encoding=encoding,
        rotation_params=int(doc["rotation_params"]),
        measured_qubit=int(doc["measured_qubit"]),
    )
