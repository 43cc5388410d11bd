"""Frequency spectra of data-encoding strategies.

A single variable ``x`` encoded through rotations ``RZ(beta_n x)`` with
integer weights ``beta_1..beta_N`` produces model functions supported on
the frequency set

    Omega = { sum_n s_n beta_n : s in {-1, 0, +1}^N }

counted with multiplicity.  The set obeys the recurrence
``Omega_k = (Omega_{k-1} - beta_k) u Omega_{k-1} u (Omega_{k-1} + beta_k)``,
which is how it is computed here; the brute-force enumeration over all
3^N sign vectors serves as the test oracle.

Exponential weights ``beta_n = 3^(n-1)`` are the distinguished case: they
are the fastest-growing integer weights for which the spectrum stays
*dense* (covers every integer in ``[-sum(beta), sum(beta)]``) while being
*maximally nondegenerate* (all 3^N frequency sums distinct), giving
degree ``d_F = (3^N - 1) / 2``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import log10, prod

import numpy as np

from .errors import CapacityError

__all__ = [
    "EncodingSpec",
    "FrequencySpectrum",
    "ProductSpectrum",
    "exponential_weights",
    "naive_weights",
    "spectrum",
    "is_maximally_nondegenerate",
    "is_dense",
    "product_spectrum",
    "chebyshev_reencode",
]

# exact integer bookkeeping is kept within 63 bits
_SUM_CAP = 1 << 62
_LATTICE_CAP = 1_000_000


@dataclass(frozen=True)
class EncodingSpec:
    """Integer encoding weights for one variable, in circuit order."""

    weights: tuple[int, ...]

    def __post_init__(self):
        weights = tuple(int(w) for w in self.weights)
        if not weights:
            raise ValueError("weights must be non-empty")
        if any(w < 1 for w in weights):
            raise ValueError(f"weights must be positive integers, got {weights}")
        if sum(weights) >= _SUM_CAP:
            raise CapacityError("sum of weights exceeds the 63-bit bookkeeping budget")
        object.__setattr__(self, "weights", weights)

    @property
    def n_rotations(self) -> int:
        return len(self.weights)

    @property
    def weight_sum(self) -> int:
        return sum(self.weights)


def exponential_weights(n: int) -> EncodingSpec:
    """Weights ``3^(k-1)`` for ``k = 1..n``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return EncodingSpec(weights=tuple(3**k for k in range(n)))


def naive_weights(n: int) -> EncodingSpec:
    """All-ones weights; n rotations give only ``2n + 1`` frequencies."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return EncodingSpec(weights=(1,) * n)


@dataclass(frozen=True)
class FrequencySpectrum:
    """Sorted support with multiplicities of a single-variable spectrum."""

    support: np.ndarray
    multiplicity: np.ndarray

    @property
    def d_f(self) -> int:
        """Largest frequency; the degree of the enclosing dense lattice."""
        return int(self.support[-1])

    @property
    def feature_dimension(self) -> int:
        """``K = 2 d_F + 1``, the real feature count of the dense lattice."""
        return 2 * self.d_f + 1

    @property
    def distinct_count(self) -> int:
        return len(self.support)


def spectrum(enc: EncodingSpec) -> FrequencySpectrum:
    """Frequency support and multiplicities via the three-shift recurrence."""
    counts: Counter[int] = Counter({0: 1})
    for beta in enc.weights:
        step: Counter[int] = Counter()
        for value, count in counts.items():
            step[value - beta] += count
            step[value] += count
            step[value + beta] += count
        counts = step
    support = np.array(sorted(counts), dtype=np.int64)
    multiplicity = np.array([counts[int(v)] for v in support], dtype=np.int64)
    return FrequencySpectrum(support=support, multiplicity=multiplicity)


def is_maximally_nondegenerate(enc: EncodingSpec, max_exact_rotations: int = 13) -> bool:
    """True iff all 3^N sign combinations produce distinct frequencies.

    The sorted-prefix inequality ``2 * sum_{j<k} beta_j < beta_k`` (each
    new weight out-ranges the whole span reachable with the previous
    ones) guarantees distinctness and is checked first.  It is only
    sufficient, not necessary -- (2, 3) violates it yet has all nine sums
    distinct -- so when it fails the spectrum is enumerated exactly with
    an early exit at the first collision.  Weight tuples longer than
    ``max_exact_rotations`` that also fail the inequality would need more
    than 3^13 dictionary entries to decide and raise ``CapacityError``.
    """
    ordered = sorted(enc.weights)
    partial = ordered[0]
    sufficient = True
    for beta in ordered[1:]:
        if 2 * partial >= beta:
            sufficient = False
            break
        partial += beta
    if sufficient:
        return True
    if len(enc.weights) > max_exact_rotations:
        raise CapacityError(
            f"cannot decide nondegeneracy exactly for {len(enc.weights)} rotations"
        )
    counts: Counter[int] = Counter({0: 1})
    for beta in enc.weights:
        step: Counter[int] = Counter()
        for value, count in counts.items():
            step[value - beta] += count
            step[value] += count
            step[value + beta] += count
        # a collision never un-happens in later steps, so exit early
        if max(step.values()) > 1:
            return False
        counts = step
    return True


def is_dense(enc: EncodingSpec) -> bool:
    """True iff the support covers every integer in [-sum(beta), sum(beta)]."""
    spec = spectrum(enc)
    total = enc.weight_sum
    return spec.distinct_count == 2 * total + 1


@dataclass(frozen=True)
class ProductSpectrum:
    """Product lattice of per-variable spectra.

    ``size`` is the exact number of distinct lattice points (a Python int,
    which may be astronomically large); ``log10_size`` is always finite.
    ``lattice`` holds the materialized points of shape ``(size, M)`` only
    when ``size`` is at most one million, else ``None``.
    """

    per_variable: tuple[FrequencySpectrum, ...]
    size: int
    log10_size: float
    lattice: np.ndarray | None

    @property
    def n_variables(self) -> int:
        return len(self.per_variable)


def product_spectrum(specs: EncodingSpec | list[EncodingSpec] | tuple[EncodingSpec, ...],
                     n_variables: int) -> ProductSpectrum:
    """Spectrum of an M-variable model as the product of per-variable sets.

    ``specs`` may be a single EncodingSpec shared by every variable or a
    sequence of length ``n_variables``.
    """
    if n_variables < 1:
        raise ValueError(f"n_variables must be >= 1, got {n_variables}")
    if isinstance(specs, EncodingSpec):
        specs = [specs] * n_variables
    if len(specs) != n_variables:
        raise ValueError(f"expected {n_variables} encoding specs, got {len(specs)}")
    per_variable = tuple(spectrum(enc) for enc in specs)
    counts = [s.distinct_count for s in per_variable]
    size = prod(counts)
    log10_size = float(sum(log10(c) for c in counts))
    lattice = None
    if size <= _LATTICE_CAP:
        grids = np.meshgrid(*[s.support for s in per_variable], indexing="ij")
        lattice = np.stack([g.ravel() for g in grids], axis=-1)
    return ProductSpectrum(
        per_variable=per_variable, size=size, log10_size=log10_size, lattice=lattice
    )


def chebyshev_reencode(x) -> np.ndarray | float:
    """Map ``x in [-1, 1]`` to ``arccos(x)``.

    Models of the re-encoded variable are polynomial (Chebyshev) in the
    original one; out-of-domain inputs raise ``ValueError``.
    """
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < -1.0) or np.any(arr > 1.0):
        raise ValueError("chebyshev_reencode requires inputs in [-1, 1]")
    out = np.arccos(arr)
    return float(out) if np.ndim(x) == 0 else out
