"""Datasets, targets, loss, Adam, and end-to-end training loops.

Both model families train through the same loop: full-batch (or fixed
random-batch) mean-squared-error gradient descent with bias-corrected
Adam.  Quantum models get their gradients from the parameter-shift rule
evaluated as one batched statevector pass per step; classical models use
precomputed feature matrices.

Every stochastic choice (parameter initialization, batch selection, shot
sampling, target generation) flows from explicit seeds, so a (seed,
config) pair fully determines every trace.
"""

from __future__ import annotations

import csv
import io
import json
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .cfflm import (
    ClassicalModel,
    FeatureMap,
    feature_matrix,
    leading_feature_projection,
)
from .errors import DatasetParseError, TrainingError
from .qfflm import (
    AnsatzSpec,
    Parallel,
    coefficient_vector,
    evaluate_batch,
    fourier_coefficients,
    init_parameters,
    param_count,
    values_and_jacobian,
)
from .rng import make_rng
from .spectra import exponential_weights

__all__ = [
    "Dataset",
    "StepTarget",
    "FourierTarget",
    "TrainConfig",
    "AdamState",
    "ResultRecord",
    "make_step_dataset",
    "make_random_fourier_target",
    "make_grid_dataset",
    "mse_loss",
    "adam_step",
    "train",
    "coulomb_features",
    "load_csv_dataset",
    "denormalize_outputs",
    "run_expressivity_comparison",
    "run_step_function_study",
    "ComparisonResult",
    "StepStudyResult",
]


# ---------------------------------------------------------------------------
# datasets and targets
# ---------------------------------------------------------------------------

@dataclass
class Dataset:
    """Inputs of shape (n, M), outputs of shape (n,), plus provenance."""

    inputs: np.ndarray = field(repr=False)
    outputs: np.ndarray = field(repr=False)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.outputs = np.asarray(self.outputs, dtype=np.float64)
        if self.inputs.ndim == 1:
            self.inputs = self.inputs[:, None]
        if self.inputs.ndim != 2 or self.outputs.ndim != 1:
            raise ValueError("inputs must be (n, M) and outputs (n,)")
        if self.inputs.shape[0] != self.outputs.shape[0]:
            raise ValueError(
                f"length mismatch: {self.inputs.shape[0]} inputs, "
                f"{self.outputs.shape[0]} outputs"
            )

    def __len__(self) -> int:
        return self.inputs.shape[0]


@dataclass(frozen=True)
class StepTarget:
    """Square wave: +1/2 for x >= 0, -1/2 for x < 0, period 2 pi.

    The boundary x = 0 belongs to the upper branch.
    """

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.where(x >= 0.0, 0.5, -0.5)


@dataclass(frozen=True, eq=False)
class FourierTarget:
    """Univariate target defined by real Fourier-feature coefficients.

    ``coefficients`` follows the canonical feature ordering (index 0 the
    constant, odd indices cosines, even indices sines).  ``split_index``
    marks the low/high coefficient split used by the energy-ratio
    diagnostics; it is informational for hand-built targets.
    """

    coefficients: np.ndarray = field(repr=False)
    split_index: int | None = None
    requested_ratio: float | None = None
    seed: int | None = None

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.float64)
        if c.ndim != 1 or c.shape[0] % 2 == 0:
            raise ValueError("coefficients must be a vector of odd length 2 d_F + 1")
        object.__setattr__(self, "coefficients", c)

    @property
    def dimension(self) -> int:
        return self.coefficients.shape[0]

    @property
    def feature_map(self) -> FeatureMap:
        return FeatureMap(n_variables=1, degrees=((self.dimension - 1) // 2,))

    def realized_ratio(self) -> float:
        if not self.split_index:
            raise ValueError("target has no split index")
        low = float(np.sum(self.coefficients[: self.split_index] ** 2))
        high = float(np.sum(self.coefficients[self.split_index :] ** 2))
        return float(np.sqrt(low / high))

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return feature_matrix(x.reshape(-1, 1), self.feature_map) @ self.coefficients


def make_step_dataset(n_points: int) -> Dataset:
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    grid = -np.pi + 2.0 * np.pi * np.arange(n_points) / n_points
    target = StepTarget()
    return Dataset(
        inputs=grid[:, None],
        outputs=target.evaluate(grid),
        metadata={"generator": "step", "n_points": n_points},
    )


def make_random_fourier_target(
    kappa: int, split: int, r: float, seed: int, norm_grid: int = 4096
) -> FourierTarget:
    """Random bounded Fourier target with an exact low/high energy ratio.

    Draws ``kappa`` standard-Gaussian coefficients, rescales the low
    block (indices below ``split``) so that
    ``sqrt(low energy) / sqrt(high energy) = r`` exactly, then rescales
    globally so the maximum of |f| over a dense grid is 0.95 (keeping
    the target strictly inside the representable band |f| <= 1).
    """
    if kappa < 3 or kappa % 2 == 0:
        raise ValueError(f"kappa must be odd and >= 3, got {kappa}")
    if not 0 < split < kappa:
        raise ValueError(f"split must be in 1..{kappa - 1}, got {split}")
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    rng = make_rng(seed)
    c = rng.standard_normal(kappa)
    energy_low = float(np.sum(c[:split] ** 2))
    energy_high = float(np.sum(c[split:] ** 2))
    c[:split] *= r * np.sqrt(energy_high / energy_low)
    fm = FeatureMap(n_variables=1, degrees=((kappa - 1) // 2,))
    grid = -np.pi + 2.0 * np.pi * np.arange(norm_grid) / norm_grid
    values = feature_matrix(grid[:, None], fm) @ c
    c *= 0.95 / float(np.abs(values).max())
    return FourierTarget(coefficients=c, split_index=split, requested_ratio=r, seed=seed)


def make_grid_dataset(target, n_points: int) -> Dataset:
    """Evaluate a univariate target on an equispaced grid over [-pi, pi)."""
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    grid = -np.pi + 2.0 * np.pi * np.arange(n_points) / n_points
    outputs = np.asarray(target.evaluate(grid), dtype=np.float64)
    meta = {"generator": type(target).__name__, "n_points": n_points}
    if isinstance(target, FourierTarget):
        meta["seed"] = target.seed
        meta["requested_ratio"] = target.requested_ratio
    return Dataset(inputs=grid[:, None], outputs=outputs, metadata=meta)


# ---------------------------------------------------------------------------
# loss and optimizer
# ---------------------------------------------------------------------------

def mse_loss(predictions, targets) -> float:
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise ValueError(f"shape mismatch: {predictions.shape} vs {targets.shape}")
    if predictions.size == 0:
        raise ValueError("mse_loss of empty arrays is undefined")
    return float(np.mean((predictions - targets) ** 2))


@dataclass
class AdamState:
    """Parameters plus first/second moment accumulators."""

    params: np.ndarray
    m: np.ndarray
    v: np.ndarray
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def initialize(cls, params, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        params = np.asarray(params, dtype=np.float64).copy()
        return cls(params=params, m=np.zeros_like(params), v=np.zeros_like(params),
                   beta1=beta1, beta2=beta2, eps=eps)


def adam_step(state: AdamState, grads, lr: float) -> AdamState:
    """One bias-corrected Adam update; mutates and returns ``state``."""
    grads = np.asarray(grads, dtype=np.float64)
    if grads.shape != state.params.shape:
        raise ValueError(f"gradient shape {grads.shape} != params {state.params.shape}")
    if not np.isfinite(grads).all():
        raise TrainingError(
            f"non-finite gradient at step {state.step_count + 1}: "
            f"{int(np.sum(~np.isfinite(grads)))} bad of {grads.size} components"
        )
    state.step_count += 1
    t = state.step_count
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads**2
    m_hat = state.m / (1.0 - state.beta1**t)
    v_hat = state.v / (1.0 - state.beta2**t)
    state.params = state.params - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return state


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.03
    steps: int = 500
    batch_size: int | None = None  # None: full batch
    shots: int | None = None  # None: exact expectation values
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    divergence_threshold: float = 1e6
    recover_coefficients: bool = False
    allow_sub_nyquist: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "steps": self.steps,
            "batch_size": self.batch_size,
            "shots": self.shots,
            "seed": self.seed,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "divergence_threshold": self.divergence_threshold,
            "recover_coefficients": self.recover_coefficients,
            "allow_sub_nyquist": self.allow_sub_nyquist,
        }


@dataclass
class ResultRecord:
    """Everything a finished (or aborted) training run produced.

    ``loss_trace`` has ``steps + 1`` entries: the loss at the parameters
    entering each step, plus the final post-update loss.  The last entry
    is the run's saturated loss.
    """

    config: dict
    seed: int
    loss_trace: np.ndarray = field(repr=False)
    test_loss_trace: np.ndarray | None = field(repr=False)
    final_params: np.ndarray = field(repr=False)
    resource_counters: dict
    wall_ms: float
    recovered_coefficients: np.ndarray | None = field(default=None, repr=False)

    @property
    def final_loss(self) -> float:
        return float(self.loss_trace[-1])

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "seed": self.seed,
            "loss_trace": [float(v) for v in self.loss_trace],
            "test_loss_trace": None
            if self.test_loss_trace is None
            else [float(v) for v in self.test_loss_trace],
            "final_params": [float(v) for v in self.final_params],
            "resource_counters": self.resource_counters,
            "wall_ms": self.wall_ms,
            "recovered_coefficients": None
            if self.recovered_coefficients is None
            else [float(v) for v in self.recovered_coefficients],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def trace_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["step", "train_loss", "test_loss"])
        for step, loss in enumerate(self.loss_trace):
            test = ""
            if self.test_loss_trace is not None:
                test = format(self.test_loss_trace[step], ".17g")
            writer.writerow([step, format(loss, ".17g"), test])
        return out.getvalue()


def _nyquist_check(inputs: np.ndarray, degrees, allow: bool) -> None:
    for m, degree in enumerate(degrees):
        needed = 2 * degree + 1
        distinct = np.unique(inputs[:, m]).size
        if distinct < needed:
            message = (
                f"variable {m + 1}: {distinct} distinct sample points cannot "
                f"identify a degree-{degree} series (need {needed}); "
                "coefficient recovery would alias"
            )
            if allow:
                warnings.warn(message, stacklevel=3)
            else:
                raise ValueError(message + "; pass allow_sub_nyquist to override")


def train(
    model,
    data: Dataset,
    cfg: TrainConfig,
    feature_map: FeatureMap | None = None,
    test_data: Dataset | None = None,
) -> ResultRecord:
    """Adam-train a quantum ``AnsatzSpec`` or a ``ClassicalModel``.

    Quantum runs initialize every angle uniformly on [-pi, pi) from the
    config seed; classical runs start from the model's coefficients as
    given.  Raises ``TrainingError`` carrying the partial record when the
    loss exceeds the divergence threshold or stops being finite.
    """
    if isinstance(model, AnsatzSpec):
        return _train_quantum(model, data, cfg, test_data)
    if isinstance(model, ClassicalModel):
        if feature_map is None:
            raise ValueError("classical training needs a feature map")
        return _train_classical(model, data, cfg, feature_map, test_data)
    raise TypeError(f"cannot train object of type {type(model).__name__}")


def _batch_indices(rng: np.random.Generator, n: int, batch_size: int | None) -> np.ndarray:
    if batch_size is None or batch_size >= n:
        return np.arange(n)
    return rng.choice(n, size=batch_size, replace=False)


def _partial_record(cfg, trace, test_trace, params, counters, started, note):
    record = ResultRecord(
        config=dict(cfg.to_dict(), aborted=note),
        seed=cfg.seed,
        loss_trace=np.asarray(trace),
        test_loss_trace=None if test_trace is None else np.asarray(test_trace),
        final_params=params.copy(),
        resource_counters=counters,
        wall_ms=(time.perf_counter() - started) * 1e3,
    )
    return record


def _train_quantum(spec: AnsatzSpec, data: Dataset, cfg: TrainConfig, test_data) -> ResultRecord:
    started = time.perf_counter()
    if data.inputs.shape[1] != spec.n_variables:
        raise ValueError(
            f"dataset has {data.inputs.shape[1]} variables, model expects {spec.n_variables}"
        )
    degrees = [s.d_f for s in spec.per_variable_spectra()]
    if cfg.recover_coefficients:
        _nyquist_check(data.inputs, degrees, cfg.allow_sub_nyquist)
    rng = make_rng(cfg.seed)
    theta = init_parameters(spec, rng)
    n_tp = param_count(spec)
    n_gt = analysis.count_gates(spec)
    counters = {
        "gate_count_per_circuit": n_gt,
        "trainable_parameters": n_tp,
        "circuit_evaluations": 0,
        "gate_operations": 0,
        "shots_drawn": 0,
        "test_evaluations": 0,
    }
    state = AdamState.initialize(theta, cfg.beta1, cfg.beta2, cfg.eps)
    trace: list[float] = []
    test_trace: list[float] | None = [] if test_data is not None else None

    def test_loss():
        counters["test_evaluations"] += len(test_data)
        return mse_loss(evaluate_batch(spec, state.params, test_data.inputs), test_data.outputs)

    for _ in range(cfg.steps):
        idx = _batch_indices(rng, len(data), cfg.batch_size)
        values, jac = values_and_jacobian(
            spec, state.params, data.inputs[idx], shots=cfg.shots, rng=rng
        )
        evaluations = (2 * n_tp + 1) * idx.size
        counters["circuit_evaluations"] += evaluations
        counters["gate_operations"] += n_gt * evaluations
        if cfg.shots is not None:
            counters["shots_drawn"] += cfg.shots * evaluations
        residual = values - data.outputs[idx]
        loss = float(np.mean(residual**2))
        trace.append(loss)
        if test_trace is not None:
            test_trace.append(test_loss())
        if not np.isfinite(loss) or loss > cfg.divergence_threshold:
            raise TrainingError(
                f"loss {loss} exceeded divergence threshold after {len(trace)} steps",
                record=_partial_record(cfg, trace, test_trace, state.params, counters,
                                       started, "divergence"),
            )
        grad = (2.0 / idx.size) * (jac.T @ residual)
        adam_step(state, grad, cfg.learning_rate)

    final_values = evaluate_batch(spec, state.params, data.inputs)
    counters["circuit_evaluations"] += len(data)
    counters["gate_operations"] += n_gt * len(data)
    trace.append(mse_loss(final_values, data.outputs))
    if test_trace is not None:
        test_trace.append(test_loss())

    recovered = None
    if cfg.recover_coefficients:
        recovered = coefficient_vector(fourier_coefficients(spec, state.params))
    return ResultRecord(
        config=cfg.to_dict(),
        seed=cfg.seed,
        loss_trace=np.asarray(trace),
        test_loss_trace=None if test_trace is None else np.asarray(test_trace),
        final_params=state.params,
        resource_counters=counters,
        wall_ms=(time.perf_counter() - started) * 1e3,
        recovered_coefficients=recovered,
    )


def _train_classical(
    model: ClassicalModel, data: Dataset, cfg: TrainConfig, fm: FeatureMap, test_data
) -> ResultRecord:
    started = time.perf_counter()
    if data.inputs.shape[1] != fm.n_variables:
        raise ValueError(
            f"dataset has {data.inputs.shape[1]} variables, feature map expects {fm.n_variables}"
        )
    if cfg.recover_coefficients:
        _nyquist_check(data.inputs, fm.degrees, cfg.allow_sub_nyquist)
    rng = make_rng(cfg.seed)
    phi = feature_matrix(data.inputs, fm)
    if model.projection is not None:
        phi = phi @ model.projection.T
    phi_test = None
    if test_data is not None:
        phi_test = feature_matrix(test_data.inputs, fm)
        if model.projection is not None:
            phi_test = phi_test @ model.projection.T
    dim = phi.shape[1]
    counters = {
        "parameter_dimension": dim,
        "feature_dimension": fm.dimension,
        "forward_passes": 0,
        "dot_operations": 0,
    }
    state = AdamState.initialize(model.coefficients, cfg.beta1, cfg.beta2, cfg.eps)
    trace: list[float] = []
    test_trace: list[float] | None = [] if test_data is not None else None
    for _ in range(cfg.steps):
        idx = _batch_indices(rng, len(data), cfg.batch_size)
        values = phi[idx] @ state.params
        counters["forward_passes"] += idx.size
        counters["dot_operations"] += 2 * idx.size * dim  # forward + gradient
        residual = values - data.outputs[idx]
        loss = float(np.mean(residual**2))
        trace.append(loss)
        if test_trace is not None:
            test_trace.append(mse_loss(phi_test @ state.params, test_data.outputs))
        if not np.isfinite(loss) or loss > cfg.divergence_threshold:
            raise TrainingError(
                f"loss {loss} exceeded divergence threshold after {len(trace)} steps",
                record=_partial_record(cfg, trace, test_trace, state.params, counters,
                                       started, "divergence"),
            )
        grad = (2.0 / idx.size) * (phi[idx].T @ residual)
        adam_step(state, grad, cfg.learning_rate)
    trace.append(mse_loss(phi @ state.params, data.outputs))
    counters["forward_passes"] += len(data)
    counters["dot_operations"] += len(data) * dim
    if test_trace is not None:
        test_trace.append(mse_loss(phi_test @ state.params, test_data.outputs))
    recovered = None
    if cfg.recover_coefficients:
        if model.projection is not None:
            recovered = model.projection.T @ state.params
        else:
            recovered = state.params.copy()
    return ResultRecord(
        config=cfg.to_dict(),
        seed=cfg.seed,
        loss_trace=np.asarray(trace),
        test_loss_trace=None if test_trace is None else np.asarray(test_trace),
        final_params=state.params,
        resource_counters=counters,
        wall_ms=(time.perf_counter() - started) * 1e3,
        recovered_coefficients=recovered,
    )


# ---------------------------------------------------------------------------
# feature engineering and file-backed datasets
# ---------------------------------------------------------------------------

def coulomb_features(positions, charges) -> np.ndarray:
    """Pairwise Coulomb terms ``Z_i Z_j / |r_i - r_j|``, i < j.

    Order is lexicographic over pairs: (1,2), (1,3), ..., (1,n), (2,3),
    and so on; 9 atoms give the 36 features of a molecular model.
    """
    positions = np.asarray(positions, dtype=np.float64)
    charges = np.asarray(charges, dtype=np.float64)
    if positions.ndim != 2 or positions.shape[1] != 3:
        raise ValueError(f"positions must be (n, 3), got {positions.shape}")
    n = positions.shape[0]
    if charges.shape != (n,):
        raise ValueError(f"need {n} charges, got shape {charges.shape}")
    if n < 2:
        raise ValueError("need at least two atoms")
    out = []
    for j1 in range(n):
        for j2 in range(j1 + 1, n):
            distance = float(np.linalg.norm(positions[j1] - positions[j2]))
            if distance < 1e-12:
                raise ValueError(f"atoms {j1 + 1} and {j2 + 1} are coincident")
            out.append(charges[j1] * charges[j2] / distance)
    return np.asarray(out)


def load_csv_dataset(
    path,
    input_cols: list[str],
    output_col: str,
    input_range: tuple[float, float] = (-np.pi, np.pi),
    output_range: tuple[float, float] = (0.03, 1.0),
) -> Dataset:
    """Numeric CSV with header -> normalized Dataset.

    Every column is mapped affinely onto its configured range (inputs to
    ``input_range``, the output to ``output_range``); the affine
    parameters land in ``metadata["normalization"]`` so predictions can
    be mapped back.  Constant columns map to the range midpoint with a
    warning.  Malformed rows raise ``DatasetParseError`` naming the row.
    """
    columns = list(input_cols) + [output_col]
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetParseError("row 1: empty file, expected a header") from None
        positions = {}
        for name in columns:
            if name not in header:
                raise ValueError(f"column {name!r} not in header {header}")
            positions[name] = header.index(name)
        rows = []
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetParseError(
                    f"row {row_number}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                rows.append([float(row[positions[name]]) for name in columns])
            except ValueError as exc:
                raise DatasetParseError(f"row {row_number}: {exc}") from None
    if not rows:
        raise DatasetParseError("row 2: no data rows")
    raw = np.asarray(rows)
    normalization = {}
    normalized = np.empty_like(raw)
    for k, name in enumerate(columns):
        lo, hi = float(raw[:, k].min()), float(raw[:, k].max())
        range_lo, range_hi = output_range if name == output_col else input_range
        if hi == lo:
            warnings.warn(f"column {name!r} is constant; mapped to range midpoint", stacklevel=2)
            scale = 0.0
            offset = (range_lo + range_hi) / 2.0
        else:
            scale = (range_hi - range_lo) / (hi - lo)
            offset = range_lo - scale * lo
        normalized[:, k] = scale * raw[:, k] + offset
        normalization[name] = {
            "scale": scale, "offset": offset, "min": lo, "max": hi,
            "range": [range_lo, range_hi],
        }
    return Dataset(
        inputs=normalized[:, : len(input_cols)],
        outputs=normalized[:, -1],
        metadata={
            "generator": "csv",
            "path": str(path),
            "input_cols": list(input_cols),
            "output_col": output_col,
            "normalization": normalization,
        },
    )


def denormalize_outputs(dataset: Dataset, values) -> np.ndarray:
    """Invert the output-column normalization of a CSV-backed dataset."""
    record = dataset.metadata["normalization"][dataset.metadata["output_col"]]
    scale, offset = record["scale"], record["offset"]
    if scale == 0.0:
        raise ValueError("constant output column cannot be inverted")
    return (np.asarray(values, dtype=np.float64) - offset) / scale


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(tuple(parts)).generate_state(1)[0])


@dataclass
class ComparisonResult:
    """Per-ratio, per-run paired records of both model families."""

    r_values: list[float]
    runs: int
    quantum: list[list[ResultRecord]] = field(repr=False)  # [r_index][run]
    classical: list[list[ResultRecord]] = field(repr=False)

    def final_losses(self, family: str) -> np.ndarray:
        records = self.quantum if family == "quantum" else self.classical
        return np.asarray([[rec.final_loss for rec in row] for row in records])


def run_expressivity_comparison(
    r_values,
    runs: int = 5,
    kappa: int = 81,
    split: int = 64,
    n_points: int = 200,
    steps: int = 500,
    learning_rate: float = 0.03,
    classical_dimension: int = 64,
    n_qubits: int = 4,
    n_layers: int = 1,
    base_seed: int = 0,
    threads: int | None = None,
) -> ComparisonResult:
    """Expressivity comparison on random bounded Fourier targets.

    For each energy ratio ``r`` and each run, a fresh target is drawn
    (seeded from ``base_seed``, the ratio index and the run index), both
    a truncated fully-parametrized classical model and an exponentially
    encoded quantum model train on the same grid dataset, and the paired
    records are collected.  Classically easy targets (large ``r``) are
    learnable by the truncated model; low-``r`` targets concentrate
    energy in high frequencies the classical model cannot represent
    while the full-spectrum quantum model can.
    """
    r_values = [float(r) for r in r_values]
    fm = FeatureMap(n_variables=1, degrees=((kappa - 1) // 2,))
    spec = AnsatzSpec(
        n_variables=1, n_qubits=n_qubits, n_layers=n_layers,
        topology=Parallel(), encoding=exponential_weights(n_qubits),
    )

    def one_run(r_index: int, run: int) -> tuple[ResultRecord, ResultRecord]:
        target = make_random_fourier_target(
            kappa, split, r_values[r_index], seed=_derived_seed(base_seed, r_index, run)
        )
        data = make_grid_dataset(target, n_points)
        q_cfg = TrainConfig(
            learning_rate=learning_rate, steps=steps,
            seed=_derived_seed(base_seed, r_index, run, 1),
        )
        c_cfg = TrainConfig(
            learning_rate=learning_rate, steps=steps,
            seed=_derived_seed(base_seed, r_index, run, 2),
        )
        quantum = train(spec, data, q_cfg)
        classical_model = ClassicalModel(
            coefficients=np.zeros(classical_dimension),
            projection=leading_feature_projection(fm, classical_dimension),
        )
        classical = train(classical_model, data, c_cfg, feature_map=fm)
        return quantum, classical

    tasks = [(ri, run) for ri in range(len(r_values)) for run in range(runs)]
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: one_run(*t), tasks))
    else:
        results = [one_run(*t) for t in tasks]
    quantum = [[None] * runs for _ in r_values]
    classical = [[None] * runs for _ in r_values]
    for (ri, run), (q_rec, c_rec) in zip(tasks, results):
        quantum[ri][run] = q_rec
        classical[ri][run] = c_rec
    return ComparisonResult(r_values=r_values, runs=runs, quantum=quantum, classical=classical)


@dataclass
class StepStudyResult:
    qubit_counts: list[int]
    seeds: list[int]
    records: list[list[ResultRecord]] = field(repr=False)  # [qubit_index][seed_index]

    def mean_final_losses(self) -> np.ndarray:
        return np.asarray(
            [[rec.final_loss for rec in row] for row in self.records]
        ).mean(axis=1)


def run_step_function_study(
    qubit_counts=(1, 2, 3),
    seeds=(0, 1, 2),
    n_points: int = 200,
    steps: int = 500,
    learning_rate: float = 0.05,
    base_seed: int = 0,
) -> StepStudyResult:
    """Expressivity growth with qubit count on the square-wave target.

    Uses ``L = N + 1`` trainable layers per block so deeper models
    accompany larger spectra; the mean final MSE over seeds should fall
    as the spectrum grows.
    """
    data = make_grid_dataset(StepTarget(), n_points)
    records: list[list[ResultRecord]] = []
    for n_qubits in qubit_counts:
        spec = AnsatzSpec(
            n_variables=1, n_qubits=n_qubits, n_layers=n_qubits + 1,
            topology=Parallel(), encoding=exponential_weights(n_qubits),
        )
        row = []
        for seed_index, seed in enumerate(seeds):
            cfg = TrainConfig(
                learning_rate=learning_rate, steps=steps,
                seed=_derived_seed(base_seed, n_qubits, seed),
            )
            row.append(train(spec, data, cfg))
        records.append(row)
    return StepStudyResult(
        qubit_counts=list(qubit_counts), seeds=list(seeds), records=records
    )
