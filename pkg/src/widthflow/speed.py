"""Curvature speed functions and sampling checks of their structural conditions.

A speed is a symmetric function F of the principal curvatures, positive and
strictly increasing on the positive cone, homogeneous of integer degree k and
normalized so that F(1, ..., 1) = 1.  Speeds drive the contraction flows in
:mod:`widthflow.flow`; the checks here validate a declared speed by sampling
rather than symbolically, so findings are reported, not raised.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DimensionMismatch,
    NonPositiveCurvature,
    ShapeHypothesisUnmet,
    UnknownSpeed,
)

__all__ = [
    "SpeedSpec",
    "ConditionReport",
    "evaluate",
    "gradient",
    "check_conditions",
    "check_lower_bound",
    "make_speed",
    "available_speeds",
]

_SHAPES = ("convex", "concave", "linear")


@dataclass(frozen=True)
class SpeedSpec:
    """A curvature speed together with its declared structure.

    ``evaluator`` maps an array of shape (..., n) of positive curvatures to an
    array of shape (...).  ``grad`` is an optional analytic gradient with the
    same batch convention returning shape (..., n); when absent, consumers fall
    back to finite differences.
    """

    name: str
    n: int
    degree_k: int
    shape: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"speed needs n >= 2 curvature arguments, got n={self.n}")
        if self.degree_k < 1:
            raise ValueError(f"homogeneity degree must be >= 1, got {self.degree_k}")
        if self.shape not in _SHAPES:
            raise ValueError(f"shape must be one of {_SHAPES}, got {self.shape!r}")


@dataclass(frozen=True)
class ConditionReport:
    """Sampled violations of the structural conditions of a speed.

    ``lower_bound_max_violation`` is relative to the mean-curvature bound: for
    convex/linear shapes it is max((mean^k - F) / mean^k)+, for concave shapes
    the reversed inequality max((F - mean^k) / mean^k)+.
    """

    symmetry_max_violation: float
    monotonicity_min_derivative: float
    measured_degree: float
    normalization_error: float
    shape_verdict: str
    lower_bound_max_violation: float
    samples_used: int
    min_value: float

    def violations(self, spec: SpeedSpec, tol: float = 1e-8) -> list[str]:
        """Names of declared conditions this report contradicts."""
        out = []
        if not np.isfinite(self.min_value) or self.min_value <= 0.0:
            out.append("positivity")
        if self.symmetry_max_violation > tol:
            out.append("symmetry")
        if not self.monotonicity_min_derivative > 0.0:
            out.append("monotonicity")
        if abs(self.measured_degree - spec.degree_k) > 1e-6:
            out.append("homogeneity-degree")
        if self.normalization_error > tol:
            out.append("normalization")
        if self.shape_verdict != spec.shape:
            out.append("shape")
        if self.lower_bound_max_violation > tol:
            out.append("mean-lower-bound")
        return out


def _as_point(lam) -> np.ndarray:
    arr = np.asarray(lam, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d curvature point, got shape {arr.shape}")
    return arr


def evaluate(spec: SpeedSpec, lam) -> float:
    """Evaluate the speed at one point of the positive cone."""
    arr = _as_point(lam)
    if arr.shape[0] != spec.n:
        raise DimensionMismatch(f"speed {spec.name!r} expects {spec.n} curvatures, got {arr.shape[0]}")
    if not np.all(arr > 0.0):
        raise NonPositiveCurvature(f"curvature point {arr.tolist()} leaves the positive cone")
    return float(spec.evaluator(arr))


def gradient(spec: SpeedSpec, lam, step: float | None = None) -> np.ndarray:
    """Central-difference gradient of the speed at ``lam``.

    The default step is 1e-5 relative to each component, which keeps the
    stencil inside the positive cone automatically.  An explicit absolute
    ``step`` is validated against the cone instead.
    """
    arr = _as_point(lam)
    if arr.shape[0] != spec.n:
        raise DimensionMismatch(f"speed {spec.name!r} expects {spec.n} curvatures, got {arr.shape[0]}")
    if not np.all(arr > 0.0):
        raise NonPositiveCurvature(f"curvature point {arr.tolist()} leaves the positive cone")
    if step is None:
        steps = 1e-5 * arr
    else:
        if step <= 0.0:
            raise ValueError("finite-difference step must be positive")
        steps = np.full(spec.n, float(step))
        if np.any(arr - steps <= 0.0):
            raise NonPositiveCurvature("finite-difference stencil leaves the positive cone")
    plus = np.tile(arr, (spec.n, 1))
    minus = plus.copy()
    idx = np.arange(spec.n)
    plus[idx, idx] += steps
    minus[idx, idx] -= steps
    return (np.asarray(spec.evaluator(plus)) - np.asarray(spec.evaluator(minus))) / (2.0 * steps)


def _batch_gradient(spec: SpeedSpec, lam: np.ndarray, rel_step: float = 1e-5) -> np.ndarray:
    """Vectorized central-difference gradient over a batch of cone points."""
    m, n = lam.shape
    grad = np.empty((m, n))
    for j in range(n):
        stepj = rel_step * lam[:, j]
        plus = lam.copy()
        minus = lam.copy()
        plus[:, j] += stepj
        minus[:, j] -= stepj
        grad[:, j] = (spec.evaluator(plus) - spec.evaluator(minus)) / (2.0 * stepj)
    return grad


def speed_gradient(spec: SpeedSpec, lam: np.ndarray) -> np.ndarray:
    """Batch gradient, analytic when the speed carries one."""
    if spec.grad is not None:
        return np.asarray(spec.grad(lam))
    return _batch_gradient(spec, np.asarray(lam, dtype=float))


def check_conditions(
    spec: SpeedSpec,
    sample_count: int = 10_000,
    rng_seed: int = 0,
    tol: float = 1e-9,
) -> ConditionReport:
    """Sample the positive cone and measure violations of each condition.

    Curvatures are drawn log-uniformly, lambda_i = exp(u_i) with u_i uniform on
    [-3, 3], so both nearly-flat and strongly-curved regimes are exercised.
    Nothing is raised; use :meth:`ConditionReport.violations` to decide.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    n = spec.n
    lam = np.exp(rng.uniform(-3.0, 3.0, size=(sample_count, n)))
    f = np.asarray(spec.evaluator(lam), dtype=float)
    min_value = float(np.min(f)) if np.all(np.isfinite(f)) else float("nan")

    # Symmetry: one random permutation per sample, worst absolute discrepancy.
    perm_rows = np.argsort(rng.random(size=(sample_count, n)), axis=1)
    lam_perm = np.take_along_axis(lam, perm_rows, axis=1)
    f_perm = np.asarray(spec.evaluator(lam_perm), dtype=float)
    symmetry = float(np.max(np.abs(f_perm - f)))

    grad = _batch_gradient(spec, lam)
    monotonicity = float(np.min(grad))

    # Homogeneity: F(c*lam) = c^k F(lam), probed across six decades of c.
    logc = rng.uniform(0.3, 3.0, size=sample_count) * rng.choice((-1.0, 1.0), size=sample_count)
    c = np.exp(logc)
    f_scaled = np.asarray(spec.evaluator(lam * c[:, None]), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        degrees = np.log(f_scaled / f) / logc
    measured_degree = float(np.mean(degrees))

    normalization = abs(float(spec.evaluator(np.ones(n))) - 1.0)

    # Shape via the midpoint inequality on random segments.
    lam_b = np.exp(rng.uniform(-3.0, 3.0, size=(sample_count, n)))
    f_b = np.asarray(spec.evaluator(lam_b), dtype=float)
    f_mid = np.asarray(spec.evaluator(0.5 * (lam + lam_b)), dtype=float)
    gap = f_mid - 0.5 * (f + f_b)
    scale = 0.5 * (np.abs(f) + np.abs(f_b)) + 1e-300
    rel = gap / scale
    above = float(np.max(rel))      # > 0 where midpoint exceeds the chord
    below = float(np.max(-rel))     # > 0 where midpoint undershoots the chord
    shape_tol = max(tol, 1e-12)
    if above <= shape_tol and below <= shape_tol:
        verdict = "linear"
    elif above <= shape_tol:
        verdict = "convex"
    elif below <= shape_tol:
        verdict = "concave"
    else:
        verdict = "indefinite"

    mean_k = np.mean(lam, axis=1) ** spec.degree_k
    if verdict == "concave":
        lb = float(np.max(np.maximum(f - mean_k, 0.0) / mean_k))
    else:
        lb = float(np.max(np.maximum(mean_k - f, 0.0) / mean_k))

    return ConditionReport(
        symmetry_max_violation=symmetry,
        monotonicity_min_derivative=monotonicity,
        measured_degree=measured_degree,
        normalization_error=normalization,
        shape_verdict=verdict,
        lower_bound_max_violation=lb,
        samples_used=sample_count,
        min_value=min_value,
    )


def check_lower_bound(
    spec: SpeedSpec,
    sample_count: int = 10_000,
    rng_seed: int = 0,
    allow_concave: bool = False,
) -> float:
    """Worst sampled violation of F >= ((sum lambda_i)/n)^k, relative.

    The bound is a consequence of convexity plus normalization, so concave
    speeds are rejected unless ``allow_concave`` is set (they then report the
    violation of the same inequality, which is expected to be positive).
    """
    if spec.shape == "concave" and not allow_concave:
        raise ShapeHypothesisUnmet(
            f"speed {spec.name!r} is declared concave; the mean lower bound needs a convex or linear speed"
        )
    rng = np.random.default_rng(rng_seed)
    lam = np.exp(rng.uniform(-3.0, 3.0, size=(sample_count, spec.n)))
    f = np.asarray(spec.evaluator(lam), dtype=float)
    mean_k = np.mean(lam, axis=1) ** spec.degree_k
    return float(np.max(np.maximum(mean_k - f, 0.0) / mean_k))


# ---------------------------------------------------------------------------
# Built-in speeds.
#
# Evaluators sort the curvature axis when n > 2 so accumulation order is
# canonical and permutation symmetry holds exactly in floating point; for
# n == 2 every reduction below is a single commutative binary operation.


def _canon(lam: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.shape[-1] > 2:
        return np.sort(lam, axis=-1)
    return lam


def _arithmetic(n: int, k: int) -> SpeedSpec:
    # n == 2 avoids the axis-reduction machinery: commutative column ops are
    # just as symmetric and an order of magnitude faster in the flow kernel.
    if n == 2:
        def ev(lam):
            lam = np.asarray(lam, dtype=float)
            m = (lam[..., 0] + lam[..., 1]) * 0.5
            return m**k if k != 1 else m
    else:
        def ev(lam):
            return np.mean(_canon(lam), axis=-1) ** k if k != 1 else np.mean(_canon(lam), axis=-1)

    def gr(lam):
        lam = np.asarray(lam, dtype=float)
        mean = np.mean(lam, axis=-1)
        g = np.full(lam.shape, 1.0 / n)
        if k != 1:
            g = g * (k * mean ** (k - 1))[..., None]
        return g

    shape = "linear" if k == 1 else "convex"
    return SpeedSpec(name="arithmetic-mean", n=n, degree_k=k, shape=shape, evaluator=ev, grad=gr)


def _power_mean(n: int, p: float) -> SpeedSpec:
    if p < 1.0:
        raise ValueError(f"power mean exponent must be >= 1, got {p}")

    if n == 2:
        def ev(lam):
            lam = np.asarray(lam, dtype=float)
            return ((lam[..., 0] ** p + lam[..., 1] ** p) * 0.5) ** (1.0 / p)
    else:
        def ev(lam):
            return np.mean(_canon(lam) ** p, axis=-1) ** (1.0 / p)

    def gr(lam):
        lam = np.asarray(lam, dtype=float)
        f = np.mean(lam ** p, axis=-1) ** (1.0 / p)
        return (f ** (1.0 - p))[..., None] * lam ** (p - 1.0) / n

    shape = "linear" if p == 1.0 else "convex"
    return SpeedSpec(name="power-mean", n=n, degree_k=1, shape=shape, evaluator=ev, grad=gr)


def _geometric(n: int) -> SpeedSpec:
    if n == 2:
        def ev(lam):
            lam = np.asarray(lam, dtype=float)
            return np.sqrt(lam[..., 0] * lam[..., 1])
    else:
        def ev(lam):
            return np.exp(np.mean(np.log(_canon(lam)), axis=-1))

    def gr(lam):
        lam = np.asarray(lam, dtype=float)
        f = np.exp(np.mean(np.log(lam), axis=-1))
        return f[..., None] / (n * lam)

    return SpeedSpec(name="geometric-mean", n=n, degree_k=1, shape="concave", evaluator=ev, grad=gr)


def _harmonic(n: int) -> SpeedSpec:
    if n == 2:
        def ev(lam):
            lam = np.asarray(lam, dtype=float)
            a, b = lam[..., 0], lam[..., 1]
            return 2.0 * a * b / (a + b)
    else:
        def ev(lam):
            return 1.0 / np.mean(1.0 / _canon(lam), axis=-1)

    def gr(lam):
        lam = np.asarray(lam, dtype=float)
        f = 1.0 / np.mean(1.0 / lam, axis=-1)
        return (f ** 2)[..., None] / (n * lam ** 2)

    return SpeedSpec(name="harmonic-mean", n=n, degree_k=1, shape="concave", evaluator=ev, grad=gr)


def _broken_asym(n: int) -> SpeedSpec:
    # Negative control: first-component projection, deliberately not symmetric.
    def ev(lam):
        return np.asarray(lam, dtype=float)[..., 0]

    return SpeedSpec(name="broken-asym", n=n, degree_k=1, shape="linear", evaluator=ev)


_BUILTINS: dict[str, Callable[..., SpeedSpec]] = {
    "arithmetic-mean": lambda n, k=1, p=None: _arithmetic(n, k),
    "power-mean": lambda n, k=1, p=2.0: _power_mean(n, p if p is not None else 2.0),
    "geometric-mean": lambda n, k=1, p=None: _geometric(n),
    "harmonic-mean": lambda n, k=1, p=None: _harmonic(n),
    "broken-asym": lambda n, k=1, p=None: _broken_asym(n),
}


def available_speeds() -> tuple[str, ...]:
    return tuple(sorted(_BUILTINS))


def make_speed(name: str, n: int = 2, k: int = 1, p: float | None = None) -> SpeedSpec:
    """Instantiate a built-in speed by name.

    ``k`` > 1 raises the arithmetic mean to the k-th power; the other builtins
    are degree-1 only.  ``p`` selects the power-mean exponent.
    """
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise UnknownSpeed(f"unknown speed {name!r}; available: {', '.join(available_speeds())}") from None
    if k != 1 and name != "arithmetic-mean":
        raise ValueError(f"speed {name!r} only supports degree k=1; use arithmetic-mean for k>1")
    return factory(n, k=k, p=p)
