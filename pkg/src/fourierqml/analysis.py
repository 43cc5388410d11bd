"""Resource accounting, barren-plateau Monte Carlo, and norm-ball geometry.

Three loosely coupled tool sets:

* operation-count formulas for classical Fourier-feature regression and
  shot-based quantum gradient training, plus the scaling criterion that
  says when the quantum gate count beats the classical feature count;
* a Monte-Carlo lab that draws the trainable blocks of a circuit as
  exact Haar unitaries (or as randomly initialized layered blocks) and
  measures the concentration of the model value and of parameter-shift
  gradients as the Hilbert dimension grows;
* membership tests for the set of coefficient vectors whose trigonometric
  polynomial stays inside [-1, 1], including the exact bicone description
  available for a single frequency.

All operation-count formulas set every O-constant to 1; the docstrings
state the symbolic form so callers can rescale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .cfflm import FeatureMap, feature_matrix
from .errors import CapacityError
from .qfflm import AnsatzSpec, _program
from .statevector import haar_unitary

__all__ = [
    "count_gates",
    "resrc_classical",
    "resrc_classical_fully_parametrized",
    "resrc_quantum",
    "advantage_criterion",
    "Advantage",
    "ResourceReport",
    "resource_report",
    "VarianceBound",
    "variance_bounds",
    "PlateauReport",
    "plateau_stats",
    "plateau_sweep",
    "DecayFit",
    "fit_decay",
    "empirical_epsilon",
    "plateau_csv",
    "bicone_contains",
    "MembershipResult",
    "numerical_membership",
]


# ---------------------------------------------------------------------------
# gate and operation counting
# ---------------------------------------------------------------------------

_GATE_WEIGHTS = {"ry": 1, "rz": 1, "rot": 3, "enc_rz": 1, "enc_rot": 3, "cnot": 1}


def count_gates(spec: AnsatzSpec) -> int:
    """Number of single-qubit rotations plus CNOTs in the compiled circuit.

    Three-angle rotations count as three single-qubit gates, two-angle
    per-qubit rotations as two, and every encoding rotation by its same
    decomposition.  A spec with ``n_layers=0`` counts encoding gates only.
    """
    ops, _ = _program(spec)
    return sum(_GATE_WEIGHTS[op[0]] for op in ops)


def resrc_classical(K: int, M: int, N_tp: int, R_I: int = 0, R_II: int = 0) -> int:
    """Operation count ``2 K^M + R_I + 1 + N_tp (R_II + 1)`` for one
    gradient evaluation of the classical model.

    ``2 K^M`` covers building the feature vector (one multiply and one
    add per feature), ``R_I``/``R_II`` are optional projection overheads,
    and each trainable coefficient costs ``R_II + 1`` operations.
    """
    for name, value in (("K", K), ("M", M), ("N_tp", N_tp), ("R_I", R_I), ("R_II", R_II)):
        if value < 0:
            raise ValueError(f"{name} must be >= 0, got {value}")
    return 2 * K**M + R_I + 1 + N_tp * (R_II + 1)


def resrc_classical_fully_parametrized(K: int, M: int = 1) -> int:
    """``3 K^M + 1``: every feature carries its own trainable coefficient."""
    return resrc_classical(K, M, N_tp=K**M)


def resrc_quantum(N_gt: int, N_tp: int, eps_f: float, eps_grad: float) -> int:
    """Operation count ``N_gt/eps_f^2 + 1 + N_tp (2 N_gt/eps_grad^2 + 3)``
    for one shot-based gradient evaluation, rounded up.

    Estimating the model value to precision ``eps_f`` costs
    ``N_gt/eps_f^2`` gate executions, and each parameter-shift component
    needs two circuit estimates at precision ``eps_grad`` plus a constant
    amount of postprocessing.
    """
    if N_gt < 0 or N_tp < 0:
        raise ValueError("gate and parameter counts must be >= 0")
    for name, eps in (("eps_f", eps_f), ("eps_grad", eps_grad)):
        if not 0.0 < eps <= 1.0:
            raise ValueError(f"{name} must be in (0, 1], got {eps}")
    total = N_gt / eps_f**2 + 1.0 + N_tp * (2.0 * N_gt / eps_grad**2 + 3.0)
    return math.ceil(round(total, 9))


class Advantage(NamedTuple):
    advantage: bool
    log_margin: float


def advantage_criterion(N_gt: int, eps: float, K: int, M: int) -> Advantage:
    """Scaling test ``N_gt < eps * K^(M/2)`` evaluated in log space.

    ``log_margin = ln eps + (M/2) ln K - ln N_gt``; positive means the
    gate count is below the threshold, so sampling the model on quantum
    hardware beats touching every classical feature.  Log space keeps
    ``K^(M/2)`` finite for lattices far beyond float range.
    """
    if N_gt < 1:
        raise ValueError(f"N_gt must be >= 1, got {N_gt}")
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    if K < 1 or M < 1:
        raise ValueError("K and M must be >= 1")
    margin = math.log(eps) + 0.5 * M * math.log(K) - math.log(N_gt)
    return Advantage(advantage=margin > 0.0, log_margin=margin)


@dataclass(frozen=True)
class ResourceReport:
    """Concrete operation counts for one quantum/classical pairing.

    ``advantage`` compares the two concrete counts (``resrc_q <
    resrc_c``); ``crossing_eps`` is the sampling precision at which the
    quantum count equals the classical one (quantum wins for any coarser
    ``eps``), infinite when the classical count never catches up.
    """

    N_gt: int
    N_tp: int
    eps: float
    resrc_q: int
    K: int
    M: int
    resrc_c: int
    advantage: bool
    crossing_eps: float

    def to_dict(self) -> dict:
        return {
            "N_gt": self.N_gt, "N_tp": self.N_tp, "eps": self.eps,
            "resrc_q": self.resrc_q, "K": self.K, "M": self.M,
            "resrc_c": self.resrc_c, "advantage": self.advantage,
            "crossing_eps": self.crossing_eps,
        }


def resource_report(
    N_gt: int,
    N_tp: int,
    K: int,
    M: int,
    eps: float,
    classical_n_tp: int | None = None,
) -> ResourceReport:
    """Build a ``ResourceReport`` with one shared precision ``eps``.

    The classical side defaults to the fully parametrized model
    (``classical_n_tp = K^M``).
    """
    if classical_n_tp is None:
        classical_n_tp = K**M
    resrc_c = resrc_classical(K, M, classical_n_tp)
    resrc_q = resrc_quantum(N_gt, N_tp, eps, eps)
    # resrc_q(eps) = N_gt (1 + 2 N_tp) / eps^2 + 1 + 3 N_tp; solve for equality.
    numerator = N_gt * (1 + 2 * N_tp)
    denominator = resrc_c - 1 - 3 * N_tp
    crossing = math.sqrt(numerator / denominator) if denominator > 0 else math.inf
    return ResourceReport(
        N_gt=N_gt, N_tp=N_tp, eps=eps, resrc_q=resrc_q, K=K, M=M,
        resrc_c=resrc_c, advantage=resrc_q < resrc_c, crossing_eps=crossing,
    )


# ---------------------------------------------------------------------------
# barren-plateau Monte Carlo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarianceBound:
    """Loss-gradient variance bound plus exact Haar companions.

    ``bound`` caps the variance of the mean-squared-error gradient for a
    bounded target.  ``grad_second_moment`` is the exact Haar-average
    ``<(df/dtheta)^2>`` for the case; ``gamma`` is the module-overlap
    constant (crossed second moment) -- ``1/(d+1)`` when the
    differentiated rotation opens the circuit, ``-d/(d^2-1)`` when it
    closes it, undefined for a bulk parameter.
    """

    d: int
    case: str
    bound: float
    grad_second_moment: float
    gamma: float | None

    def to_dict(self) -> dict:
        return {
            "d": self.d, "case": self.case, "bound": self.bound,
            "grad_second_moment": self.grad_second_moment, "gamma": self.gamma,
        }


def variance_bounds(d: int, case: str) -> VarianceBound:
    """Variance bound for the loss gradient when all trainable blocks are
    Haar random, by position of the differentiated parameter.

    Case I (bulk): ``8 d^2 / ((d+1)(d^2-1))``; case II (first rotation):
    ``8 d / (d^2-1)``; case III (final rotation before measurement):
    ``16 / (d+1)``.  All three decay to zero as the dimension grows --
    the barren plateau.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if case == "I":
        bound = 8.0 * d**2 / ((d + 1) * (d**2 - 1))
        second = d**2 / (2.0 * (d + 1) * (d**2 - 1))
        gamma = None
    elif case == "II":
        bound = 8.0 * d / (d**2 - 1)
        second = d / (2.0 * (d**2 - 1))
        gamma = 1.0 / (d + 1)
    elif case == "III":
        bound = 16.0 / (d + 1)
        second = 1.0 / (d + 1)
        gamma = -d / (d**2 - 1.0)
    else:
        raise ValueError(f"case must be 'I', 'II' or 'III', got {case!r}")
    return VarianceBound(d=d, case=case, bound=bound, grad_second_moment=second, gamma=gamma)


@dataclass
class PlateauReport:
    """Monte-Carlo concentration statistics at one Hilbert dimension.

    ``mean_sq_f`` estimates ``<f^2>`` with prediction ``1/(d+1)``;
    ``mean_sq_grad`` estimates the parameter-shift second moment for the
    chosen case; ``var_loss_grad`` is the empirical variance of the
    mean-squared-error gradient against target 0, to compare with
    ``bound``.  ``alpha`` is filled in by ``plateau_sweep`` after fitting
    the decay of ``<f^2>`` across dimensions.
    """

    n_variables: int
    n_qubits: int
    d: int
    trials: int
    mode: str
    grad_case: str
    mean_f: float
    se_mean_f: float
    var_f: float
    mean_sq_f: float
    se_mean_sq_f: float
    predicted_mean_sq_f: float
    zscore_mean_f: float
    zscore_mean_sq_f: float
    mean_grad: float
    se_mean_grad: float
    var_grad: float
    mean_sq_grad: float
    se_mean_sq_grad: float
    predicted_mean_sq_grad: float
    mean_loss_grad: float
    var_loss_grad: float
    bound_loss_grad: float
    alpha: float | None = None

    def to_dict(self) -> dict:
        doc = dict(self.__dict__)
        return doc


_MAX_HAAR_QUBITS = 10


def _encoding_phases(n_variables: int, n_qubits: int, x: np.ndarray) -> np.ndarray:
    """Diagonal of the full encoding layer at the point ``x``.

    One RZ per qubit, weight ``3^(q-1)`` within each variable's register;
    qubit 1 is the most significant bit of the index.
    """
    total = n_variables * n_qubits
    indices = np.arange(1 << total)
    phases = np.zeros(1 << total)
    for m in range(n_variables):
        for q in range(n_qubits):
            g = m * n_qubits + q + 1  # global 1-based qubit position
            bit = (indices >> (total - g)) & 1
            phases += 3**q * x[m] * 0.5 * (2 * bit - 1)
    return np.exp(1j * phases)


def _layered_block(n: int, n_layers: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Batch of dense unitaries of randomly initialized trainable blocks.

    Each block is ``n_layers`` repetitions of per-qubit RY, RZ rotations
    followed by a CNOT line, with angles uniform on [-pi, pi).
    """
    from .statevector import apply_cnot, apply_ry, apply_rz

    d = 1 << n
    basis = np.broadcast_to(np.eye(d, dtype=np.complex128), (size, d, d)).copy()
    for _ in range(n_layers):
        for q in range(1, n + 1):
            a = rng.uniform(-np.pi, np.pi, size=size)
            b = rng.uniform(-np.pi, np.pi, size=size)
            basis = apply_ry(basis, n, q, a[:, None])
            basis = apply_rz(basis, n, q, b[:, None])
        for q in range(1, n):
            basis = apply_cnot(basis, n, q, q + 1)
    # rows hold evolved basis states, so the unitary is the transpose
    return basis.swapaxes(-1, -2)


def _pair_rotate_lsb(chi: np.ndarray, theta: float) -> np.ndarray:
    """RY(theta) on the least significant qubit of a batch of states."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    out = np.empty_like(chi)
    out[..., 0::2] = c * chi[..., 0::2] - s * chi[..., 1::2]
    out[..., 1::2] = s * chi[..., 0::2] + c * chi[..., 1::2]
    return out


def _pair_rotate_msb(v: np.ndarray, theta: float) -> np.ndarray:
    """RY(theta) on the most significant qubit of a batch of states."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    half = v.shape[-1] // 2
    out = np.empty_like(v)
    out[..., :half] = c * v[..., :half] - s * v[..., half:]
    out[..., half:] = s * v[..., :half] + c * v[..., half:]
    return out


def plateau_stats(
    n_variables: int,
    n_qubits: int,
    trials: int,
    rng: np.random.Generator,
    mode: str = "haar",
    grad_case: str = "II",
    n_layers: int = 2,
    x: np.ndarray | None = None,
) -> PlateauReport:
    """Sample model values and parameter-shift gradients over random blocks.

    The circuit model is ``W2 . S(x) . W1`` acting on the all-zeros state
    with a Z measurement on the last qubit; ``S`` is the exponential
    encoding layer at the fixed point ``x``.  ``mode='haar'`` draws every
    trainable block as an exact Haar unitary on the full register, so the
    known concentration formulas apply exactly; ``mode='circuit'`` draws
    randomly initialized layered blocks instead (qualitative only).

    The differentiated parameter sits at the very first rotation
    (``grad_case='II'``), at the final rotation on the measured qubit
    (``'III'``), or between two trainable blocks in the bulk (``'I'``,
    which inserts a third random block).  Gradients use the exact
    two-point parameter-shift rule; the loss gradient assumes target 0
    at the sampled point.
    """
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    if mode not in ("haar", "circuit"):
        raise ValueError(f"mode must be 'haar' or 'circuit', got {mode!r}")
    if grad_case not in ("I", "II", "III"):
        raise ValueError(f"grad_case must be 'I', 'II' or 'III', got {grad_case!r}")
    total = n_variables * n_qubits
    if total > _MAX_HAAR_QUBITS:
        raise CapacityError(
            f"{total} qubits exceed the dense Monte-Carlo cap of {_MAX_HAAR_QUBITS}"
        )
    if x is None:
        x = 0.5 + 0.25 * np.arange(n_variables)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (n_variables,):
        raise ValueError(f"x must have shape ({n_variables},), got {x.shape}")

    d = 1 << total
    signs = np.where((np.arange(d) & 1) == 0, 1.0, -1.0)
    phases = _encoding_phases(n_variables, n_qubits, x)

    def draw_block(size: int) -> np.ndarray:
        if mode == "haar":
            return haar_unitary(d, rng, size=size)
        return _layered_block(total, n_layers, rng, size)

    f_samples, grad_samples = [], []
    batch = max(1, min(1024, (1 << 21) // (d * d)))
    remaining = trials
    while remaining > 0:
        b = min(batch, remaining)
        remaining -= b
        w1 = draw_block(b)
        w2 = draw_block(b)
        if grad_case == "I":
            wb = draw_block(b)

        def z_expectation(states: np.ndarray) -> np.ndarray:
            return (signs * np.abs(states) ** 2).sum(axis=-1)

        if grad_case == "II":
            # theta is the opening rotation: evolve shifted basis states
            # through the whole circuit.
            full = w2 @ (phases[:, None] * w1)
            base = full[..., :, 0]
            plus = (full[..., :, 0] + full[..., :, d // 2]) / math.sqrt(2.0)
            minus = (full[..., :, 0] - full[..., :, d // 2]) / math.sqrt(2.0)
        elif grad_case == "III":
            chi = np.einsum("bij,bj->bi", w2, phases * w1[..., :, 0])
            base = chi
            plus = _pair_rotate_lsb(chi, math.pi / 2.0)
            minus = _pair_rotate_lsb(chi, -math.pi / 2.0)
        else:  # bulk parameter between two trainable blocks
            v = wb[..., :, 0]
            tail = w2 * phases[None, None, :]  # w2 @ diag(phases)
            base = np.einsum("bij,bjk,bk->bi", tail, w1, v)
            plus = np.einsum("bij,bjk,bk->bi", tail, w1, _pair_rotate_msb(v, math.pi / 2.0))
            minus = np.einsum("bij,bjk,bk->bi", tail, w1, _pair_rotate_msb(v, -math.pi / 2.0))
        f = z_expectation(base)
        grad = 0.5 * (z_expectation(plus) - z_expectation(minus))
        f_samples.append(f)
        grad_samples.append(grad)

    f = np.concatenate(f_samples)
    grad = np.concatenate(grad_samples)
    loss_grad = 2.0 * f * grad
    bound = variance_bounds(d, grad_case)

    def se(samples: np.ndarray) -> float:
        return float(samples.std(ddof=1) / math.sqrt(samples.size))

    mean_f = float(f.mean())
    mean_sq_f = float((f**2).mean())
    se_f, se_sq_f = se(f), se(f**2)
    predicted = 1.0 / (d + 1)
    return PlateauReport(
        n_variables=n_variables, n_qubits=n_qubits, d=d, trials=trials,
        mode=mode, grad_case=grad_case,
        mean_f=mean_f, se_mean_f=se_f, var_f=float(f.var(ddof=1)),
        mean_sq_f=mean_sq_f, se_mean_sq_f=se_sq_f,
        predicted_mean_sq_f=predicted,
        zscore_mean_f=mean_f / se_f,
        zscore_mean_sq_f=(mean_sq_f - predicted) / se_sq_f,
        mean_grad=float(grad.mean()), se_mean_grad=se(grad),
        var_grad=float(grad.var(ddof=1)),
        mean_sq_grad=float((grad**2).mean()), se_mean_sq_grad=se(grad**2),
        predicted_mean_sq_grad=bound.grad_second_moment,
        mean_loss_grad=float(loss_grad.mean()),
        var_loss_grad=float(loss_grad.var(ddof=1)),
        bound_loss_grad=bound.bound,
    )


class DecayFit(NamedTuple):
    slope: float
    intercept: float
    alpha: float


def fit_decay(total_qubits, mean_sq_values) -> DecayFit:
    """Least-squares fit of ``log <f^2>`` against total qubit count.

    ``alpha = exp(-slope)`` is the per-qubit concentration base; Haar
    blocks give ``<f^2> = 1/(d+1)`` with ``d = 2^(MN)``, hence ``alpha``
    close to 2.
    """
    total_qubits = np.asarray(total_qubits, dtype=np.float64)
    mean_sq_values = np.asarray(mean_sq_values, dtype=np.float64)
    if total_qubits.size < 2:
        raise ValueError("need at least two sizes to fit a decay")
    if np.any(mean_sq_values <= 0):
        raise ValueError("mean-square values must be positive")
    slope, intercept = np.polyfit(total_qubits, np.log(mean_sq_values), 1)
    return DecayFit(slope=float(slope), intercept=float(intercept), alpha=float(np.exp(-slope)))


def plateau_sweep(
    qubit_counts,
    trials: int,
    rng: np.random.Generator,
    mode: str = "haar",
    grad_case: str = "II",
    n_variables: int = 1,
    n_layers: int = 2,
) -> tuple[list[PlateauReport], DecayFit]:
    """Run ``plateau_stats`` across register sizes and fit the decay base.

    The fitted ``alpha`` is written back onto every report.
    """
    reports = [
        plateau_stats(n_variables, n, trials, rng, mode=mode,
                      grad_case=grad_case, n_layers=n_layers)
        for n in qubit_counts
    ]
    fit = fit_decay([r.n_variables * r.n_qubits for r in reports],
                    [r.mean_sq_f for r in reports])
    for report in reports:
        report.alpha = fit.alpha
    return reports, fit


def empirical_epsilon(report: PlateauReport) -> float:
    """Conservative sampling precision ``min(sqrt(<f^2>), sqrt(<grad^2>))``.

    Resolving values or gradients that concentrate at scale ``eps``
    requires shot noise below ``eps``; feeding this into the resource
    formulas prices the plateau into the quantum cost.
    """
    return min(math.sqrt(report.mean_sq_f), math.sqrt(report.mean_sq_grad))


def plateau_csv(reports: list[PlateauReport]) -> str:
    """Plot-ready CSV: d, trials, mean_f, se_mean_f, var_f, predicted, zscore."""
    lines = ["d,trials,mean_f,se_mean_f,var_f,predicted,zscore"]
    for r in reports:
        lines.append(
            f"{r.d},{r.trials},{r.mean_f:.17g},{r.se_mean_f:.17g},"
            f"{r.var_f:.17g},{r.predicted_mean_sq_f:.17g},{r.zscore_mean_sq_f:.17g}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# bounded-model geometry
# ---------------------------------------------------------------------------

def bicone_contains(c) -> bool:
    """Exact membership for degree-1 univariate coefficient vectors.

    ``(c1, c2, c3)`` scales the constant, cosine and sine features; the
    resulting function stays within [-1, 1] iff
    ``|c1| + sqrt(2 (c2^2 + c3^2)) <= 1`` -- a bicone with apexes at
    ``c1 = +/-1`` and equator radius ``1/sqrt(2)``.  A 1e-12 slack keeps
    exact boundary points inside.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {c.shape}")
    if not np.isfinite(c).all():
        raise ValueError("coefficients must be finite")
    return bool(abs(c[0]) + math.sqrt(2.0 * (c[1] ** 2 + c[2] ** 2)) <= 1.0 + 1e-12)


class MembershipResult(NamedTuple):
    member: bool
    max_abs: float
    tolerance: float


_MAX_MEMBERSHIP_WORK = 100_000_000


def numerical_membership(c, fm: FeatureMap, grid_points: int) -> MembershipResult:
    """Grid check that ``|c . phi(x)| <= 1`` everywhere.

    Maximizes over an equispaced grid of ``grid_points`` per variable
    (at least ``8 d_F`` to resolve the fastest oscillation) and accepts
    when the grid maximum is at most ``1 + tolerance``.  The tolerance is
    1e-6 plus the worst-case discretization gap ``sum_m |f''_m| h_m^2/8``
    with the curvature bounded per variable by
    ``sqrt(2) d_F_m^2 ||c||_1`` -- conservative, so true members near the
    boundary are never rejected for grid reasons.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (fm.dimension,):
        raise ValueError(f"expected shape ({fm.dimension},), got {c.shape}")
    max_degree = max(fm.degrees)
    if grid_points < 8 * max(1, max_degree):
        raise ValueError(
            f"grid_points must be >= {8 * max(1, max_degree)} to resolve degree "
            f"{max_degree}, got {grid_points}"
        )
    work = grid_points**fm.n_variables * fm.dimension
    if work > _MAX_MEMBERSHIP_WORK:
        raise CapacityError(f"membership grid needs {work:.3g} evaluations")
    axes = [np.linspace(0.0, 2.0 * np.pi, grid_points, endpoint=False)] * fm.n_variables
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, fm.n_variables)
    values = feature_matrix(mesh, fm) @ c
    max_abs = float(np.abs(values).max())
    h = 2.0 * np.pi / grid_points
    norm1 = float(np.abs(c).sum())
    slack = sum(math.sqrt(2.0) * degree**2 * norm1 * h**2 / 8.0 for degree in fm.degrees)
    tolerance = 1e-6 + slack
    return MembershipResult(member=max_abs <= 1.0 + tolerance, max_abs=max_abs, tolerance=tolerance)
