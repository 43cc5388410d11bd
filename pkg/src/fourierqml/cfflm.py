"""Classical Fourier-featured linear model.

The model is ``f_C(x) = c . phi(x)`` over the real Fourier feature column

    phi(x_m) = sqrt(2) * (2^{-1/2}, cos x_m, sin x_m, ..., cos d_F x_m, sin d_F x_m)

per variable (so ``|phi(x)|^2 = K = 2 d_F + 1`` identically), with the
multivariate column the Kronecker product over variables, variable 1
major.  Feature index ``0`` is the constant, ``2j - 1`` the ``cos(j x)``
feature and ``2j`` the ``sin(j x)`` feature per variable; this ordering
is load-bearing, since quantum-model coefficient vectors are aligned
with it.

Underparametrized models are expressed through a projection matrix ``P``
applied to the features, ``f = c~ . (P phi)``: an axis-aligned selection
of leading features, a scaled Gaussian (Johnson-Lindenstrauss) map, or
the top principal components of the feature second-moment matrix.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from math import ceil, log, prod

import numpy as np

from .errors import CapacityError

__all__ = [
    "FeatureMap",
    "ClassicalModel",
    "RandomProjection",
    "PcaProjection",
    "feature_map",
    "feature_matrix",
    "evaluate_classical",
    "evaluate_classical_batch",
    "gradient_classical",
    "leading_feature_projection",
    "random_projection",
    "pca_projection",
    "model_to_json",
    "model_from_json",
]

MODEL_FORMAT_VERSION = "cfflm-v1"
FEATURE_ORDERING = "constant,cos,sin interleaved per variable; variables row-major"

_MAX_DIMENSION = 10_000_000


@dataclass(frozen=True)
class FeatureMap:
    """Fourier feature map of per-variable degrees ``d_F``."""

    n_variables: int
    degrees: tuple[int, ...]

    def __post_init__(self):
        if self.n_variables < 1:
            raise ValueError("n_variables must be >= 1")
        degrees = self.degrees
        if isinstance(degrees, int):
            degrees = (degrees,) * self.n_variables
        degrees = tuple(int(d) for d in degrees)
        if len(degrees) != self.n_variables:
            raise ValueError(f"need {self.n_variables} degrees, got {len(degrees)}")
        if any(d < 0 for d in degrees):
            raise ValueError(f"degrees must be >= 0, got {degrees}")
        object.__setattr__(self, "degrees", degrees)
        if self.dimension > _MAX_DIMENSION:
            raise CapacityError(
                f"feature dimension {self.dimension} exceeds cap {_MAX_DIMENSION}"
            )

    @property
    def per_variable_dims(self) -> tuple[int, ...]:
        return tuple(2 * d + 1 for d in self.degrees)

    @property
    def dimension(self) -> int:
        """Total feature count K^M (product of per-variable 2 d_F + 1)."""
        return prod(self.per_variable_dims)


def _univariate_features(x: np.ndarray, degree: int) -> np.ndarray:
    """(n,) inputs -> (n, 2*degree+1) feature block."""
    n = x.shape[0]
    out = np.empty((n, 2 * degree + 1))
    out[:, 0] = 1.0
    root2 = np.sqrt(2.0)
    for j in range(1, degree + 1):
        out[:, 2 * j - 1] = root2 * np.cos(j * x)
        out[:, 2 * j] = root2 * np.sin(j * x)
    return out


def feature_matrix(xs, fm: FeatureMap) -> np.ndarray:
    """Feature rows for inputs of shape (n, M); returns (n, K^M)."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[:, None] if fm.n_variables == 1 else xs[None, :]
    if xs.ndim != 2 or xs.shape[1] != fm.n_variables:
        raise ValueError(f"inputs must have shape (n, {fm.n_variables}), got {xs.shape}")
    out = _univariate_features(xs[:, 0], fm.degrees[0])
    for m in range(1, fm.n_variables):
        block = _univariate_features(xs[:, m], fm.degrees[m])
        out = (out[:, :, None] * block[:, None, :]).reshape(xs.shape[0], -1)
    return out


def feature_map(x, fm: FeatureMap) -> np.ndarray:
    """Feature column phi(x) for a single input point."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape != (fm.n_variables,):
        raise ValueError(f"x must have length {fm.n_variables}, got shape {x.shape}")
    return feature_matrix(x[None, :], fm)[0]


@dataclass
class ClassicalModel:
    """Linear model ``c . phi(x)``, optionally through a projection.

    ``projection`` (shape ``(d~, K^M)``) is applied to the features, so
    ``coefficients`` has length ``d~`` for projected models and ``K^M``
    for the fully-parametrized one.
    """

    coefficients: np.ndarray = field(repr=False)
    projection: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.float64)
        if self.coefficients.ndim != 1:
            raise ValueError("coefficients must be a vector")
        if not np.isfinite(self.coefficients).all():
            raise ValueError("coefficients must be finite")
        if self.projection is not None:
            self.projection = np.asarray(self.projection, dtype=np.float64)
            if (
                self.projection.ndim != 2
                or self.projection.shape[0] != self.coefficients.shape[0]
            ):
                raise ValueError(
                    f"projection shape {self.projection.shape} does not match "
                    f"{self.coefficients.shape[0]} coefficients"
                )

    @property
    def n_parameters(self) -> int:
        return self.coefficients.shape[0]


def _check_feature_dim(model: ClassicalModel, fm: FeatureMap) -> None:
    expected = fm.dimension
    have = model.projection.shape[1] if model.projection is not None else model.n_parameters
    if have != expected:
        raise ValueError(f"model expects {have}-dimensional features, map gives {expected}")


def evaluate_classical_batch(model: ClassicalModel, xs, fm: FeatureMap) -> np.ndarray:
    _check_feature_dim(model, fm)
    phi = feature_matrix(xs, fm)
    if model.projection is not None:
        phi = phi @ model.projection.T
    return phi @ model.coefficients


def evaluate_classical(model: ClassicalModel, x, fm: FeatureMap) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return float(evaluate_classical_batch(model, x[None, :], fm)[0])


def gradient_classical(model: ClassicalModel, x, y: float, fm: FeatureMap) -> np.ndarray:
    """Gradient of the half squared error ``(f_C(x) - y)^2 / 2``.

    For the fully-parametrized model (``c = theta``) this is the residual
    times the feature column; projected models see projected features.
    """
    _check_feature_dim(model, fm)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    phi = feature_matrix(x[None, :], fm)[0]
    if model.projection is not None:
        phi = model.projection @ phi
    residual = float(phi @ model.coefficients) - float(y)
    return residual * phi


def leading_feature_projection(fm: FeatureMap, dimension: int) -> np.ndarray:
    """Selection of the first ``dimension`` features in canonical order.

    This is how a lower-dimensional model spanning only the leading
    Fourier coefficients (e.g. a 64-dimensional model inside an
    81-dimensional feature space) is expressed.
    """
    if not 1 <= dimension <= fm.dimension:
        raise ValueError(f"dimension must be in 1..{fm.dimension}, got {dimension}")
    return np.eye(dimension, fm.dimension)


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomProjection:
    """Scaled Gaussian map ``phi -> d~^{-1/2} A phi`` and its output."""

    matrix: np.ndarray = field(repr=False)
    projected: np.ndarray = field(repr=False)
    recommended_dimension: int


def random_projection(
    features: np.ndarray,
    d_tilde: int,
    eps_tilde: float,
    rng: np.random.Generator,
) -> RandomProjection:
    """Johnson-Lindenstrauss projection of feature rows ``(n, K)``.

    Pairwise squared distances are preserved within a ``1 +- eps_tilde``
    factor with high probability once ``d_tilde`` reaches about
    ``8 ln(n) / eps_tilde^2``; smaller values trigger a warning.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("features must be a (n, K) array")
    if d_tilde < 1:
        raise ValueError(f"d_tilde must be >= 1, got {d_tilde}")
    if not 0 < eps_tilde < 1:
        raise ValueError(f"eps_tilde must be in (0, 1), got {eps_tilde}")
    n = features.shape[0]
    recommended = ceil(8.0 * log(max(n, 2)) / eps_tilde**2)
    if d_tilde < recommended:
        warnings.warn(
            f"projection dimension {d_tilde} below the distortion-guarantee "
            f"threshold {recommended} for {n} points at eps={eps_tilde}",
            stacklevel=2,
        )
    matrix = rng.standard_normal((d_tilde, features.shape[1])) / np.sqrt(d_tilde)
    return RandomProjection(
        matrix=matrix,
        projected=features @ matrix.T,
        recommended_dimension=recommended,
    )


@dataclass(frozen=True)
class PcaProjection:
    """Top principal directions of the feature second-moment matrix.

    ``basis`` has orthonormal columns (K x d~); ``projected`` holds
    ``basis.T @ phi`` rows; ``reconstruction_error`` is the mean squared
    distance ``E = tr(Sigma) - tr(Sigma B B^T)`` between features and
    their rank-d~ reconstructions, which equals the eigenvalue tail sum.
    """

    basis: np.ndarray = field(repr=False)
    projected: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    reconstruction_error: float


def pca_projection(features: np.ndarray, d_tilde: int) -> PcaProjection:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("features must be a (n, K) array")
    k = features.shape[1]
    if not 1 <= d_tilde <= k:
        raise ValueError(f"d_tilde must be in 1..{k}, got {d_tilde}")
    sigma = features.T @ features / features.shape[0]
    eigenvalues, vectors = np.linalg.eigh(sigma)  # ascending
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]
    # deterministic sign: first component of noticeable size made positive
    for col in range(vectors.shape[1]):
        v = vectors[:, col]
        nonzero = np.flatnonzero(np.abs(v) > 1e-12)
        if nonzero.size and v[nonzero[0]] < 0:
            vectors[:, col] = -v
    basis = vectors[:, :d_tilde]
    reconstruction_error = float(np.trace(sigma) - np.trace(basis.T @ sigma @ basis))
    return PcaProjection(
        basis=basis,
        projected=features @ basis,
        eigenvalues=eigenvalues,
        reconstruction_error=reconstruction_error,
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def model_to_json(model: ClassicalModel, fm: FeatureMap) -> str:
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "ordering": FEATURE_ORDERING,
        "n_variables": fm.n_variables,
        "degrees": list(fm.degrees),
        "coefficients": model.coefficients.tolist(),
        "projection": None if model.projection is None else model.projection.tolist(),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def model_from_json(text: str) -> tuple[ClassicalModel, FeatureMap]:
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError("model document must be a JSON object")
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('version')!r}")
    if doc.get("ordering") != FEATURE_ORDERING:
        raise ValueError(f"unsupported feature ordering {doc.get('ordering')!r}")
    required = {"version", "ordering", "n_variables", "degrees", "coefficients", "projection"}
    unknown = set(doc) - required
    if unknown:
        raise ValueError(f"unknown model fields: {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise ValueError(f"missing model fields: {sorted(missing)}")
    fm = FeatureMap(n_variables=int(doc["n_variables"]), degrees=tuple(doc["degrees"]))
    projection = doc["projection"]
    model = ClassicalModel(
        coefficients=np.asarray(doc["coefficients"], dtype=np.float64),
        projection=None if projection is None else np.asarray(projection, dtype=np.float64),
    )
    _check_feature_dim(model, fm)
    return model, fm
