"""Structural condition checks for the built-in curvature speeds."""
import math

import numpy as np
import pytest

from widthflow.errors import DimensionMismatch, NonPositiveCurvature, ShapeHypothesisUnmet, UnknownSpeed
from widthflow import speed as sp


def _all_builtin_specs(n=2):
    return [
        sp.make_speed("arithmetic-mean", n=n),
        sp.make_speed("arithmetic-mean", n=n, k=2),
        sp.make_speed("power-mean", n=n, p=2.0),
        sp.make_speed("geometric-mean", n=n),
        sp.make_speed("harmonic-mean", n=n),
    ]


def test_evaluate_closed_forms() -> None:
    assert sp.evaluate(sp.make_speed("arithmetic-mean"), (1.0, 3.0)) == 2.0
    assert sp.evaluate(sp.make_speed("geometric-mean"), (1.0, 4.0)) == pytest.approx(2.0, rel=1e-15)
    # quadratic mean of (3, 4): sqrt((9 + 16) / 2)
    assert sp.evaluate(sp.make_speed("power-mean", p=2.0), (3.0, 4.0)) == pytest.approx(
        math.sqrt(12.5), rel=1e-15
    )
    assert sp.evaluate(sp.make_speed("harmonic-mean"), (1.0, 3.0)) == pytest.approx(1.5, rel=1e-15)
    assert sp.evaluate(sp.make_speed("arithmetic-mean", k=2), (1.0, 3.0)) == 4.0


def test_evaluate_rejects_bad_points() -> None:
    spec = sp.make_speed("arithmetic-mean")
    with pytest.raises(NonPositiveCurvature):
        sp.evaluate(spec, (0.0, 1.0))
    with pytest.raises(DimensionMismatch):
        sp.evaluate(spec, (1.0, 2.0, 3.0))


def test_unknown_speed_name() -> None:
    with pytest.raises(UnknownSpeed):
        sp.make_speed("no-such-speed")


def test_gradient_matches_analytic_values() -> None:
    g = sp.gradient(sp.make_speed("arithmetic-mean"), (2.0, 5.0))
    assert np.allclose(g, [0.5, 0.5], rtol=1e-9)
    g = sp.gradient(sp.make_speed("geometric-mean"), (1.0, 1.0))
    assert np.allclose(g, [0.5, 0.5], rtol=1e-9)
    # d/dlam of ((l1+l2)/2)^2 at (1,1) is (1, 1)
    g = sp.gradient(sp.make_speed("arithmetic-mean", k=2), (1.0, 1.0))
    assert np.allclose(g, [1.0, 1.0], rtol=1e-9)


def test_gradient_explicit_step_validation() -> None:
    spec = sp.make_speed("geometric-mean")
    with pytest.raises(NonPositiveCurvature):
        sp.gradient(spec, (1e-6, 1.0), step=1.0)


def test_analytic_gradients_agree_with_finite_differences() -> None:
    rng = np.random.default_rng(7)
    for spec in _all_builtin_specs(n=3):
        lam = np.exp(rng.uniform(-2.0, 2.0, size=(64, 3)))
        assert np.allclose(spec.grad(lam), sp._batch_gradient(spec, lam), rtol=1e-7, atol=1e-10)


@pytest.mark.parametrize("name,kwargs,verdict", [
    ("arithmetic-mean", {}, "linear"),
    ("arithmetic-mean", {"k": 2}, "convex"),
    ("power-mean", {"p": 2.0}, "convex"),
    ("geometric-mean", {}, "concave"),
    ("harmonic-mean", {}, "concave"),
])
def test_shape_verdicts(name, kwargs, verdict) -> None:
    spec = sp.make_speed(name, n=2, **kwargs)
    report = sp.check_conditions(spec, sample_count=4000, rng_seed=3)
    assert report.shape_verdict == verdict
    assert report.violations(spec) == []


def test_condition_invariants_large_sample() -> None:
    # 1e4 cone samples per speed: exact symmetry, positive monotonicity,
    # exact normalization, vanishing mean-bound violation.
    for n in (2, 3):
        for spec in _all_builtin_specs(n=n):
            report = sp.check_conditions(spec, sample_count=10_000, rng_seed=11)
            assert report.samples_used == 10_000
            assert report.symmetry_max_violation == 0.0
            assert report.monotonicity_min_derivative > 0.0
            assert report.normalization_error == 0.0
            assert abs(report.measured_degree - spec.degree_k) < 1e-9
            assert report.lower_bound_max_violation <= 1e-12
            assert report.min_value > 0.0


def test_homogeneity_across_six_decades() -> None:
    rng = np.random.default_rng(5)
    for spec in _all_builtin_specs(n=2):
        lam = np.exp(rng.uniform(-3.0, 3.0, size=(2000, 2)))
        f = spec.evaluator(lam)
        for c in (1e-3, 3.7e-2, 0.5, 2.0, 41.0, 1e3):
            rel = np.abs(spec.evaluator(c * lam) / (c ** spec.degree_k * f) - 1.0)
            assert np.max(rel) <= 1e-12


def test_exact_normalization_on_diagonal() -> None:
    for spec in _all_builtin_specs(n=2) + _all_builtin_specs(n=4):
        assert sp.evaluate(spec, np.ones(spec.n)) == 1.0


def test_lower_bound_convex_speeds() -> None:
    assert sp.check_lower_bound(sp.make_speed("power-mean", p=3.0), sample_count=10_000) == 0.0
    assert sp.check_lower_bound(sp.make_speed("arithmetic-mean", k=2), sample_count=10_000) == 0.0
    assert sp.check_lower_bound(sp.make_speed("arithmetic-mean"), sample_count=10_000) == 0.0


def test_lower_bound_rejects_concave_without_override() -> None:
    spec = sp.make_speed("geometric-mean")
    with pytest.raises(ShapeHypothesisUnmet):
        sp.check_lower_bound(spec)
    # With the override the reversed inequality shows up as a real violation.
    assert sp.check_lower_bound(spec, sample_count=2000, allow_concave=True) > 0.01


def test_broken_speed_is_flagged() -> None:
    spec = sp.make_speed("broken-asym")
    report = sp.check_conditions(spec, sample_count=2000, rng_seed=1)
    assert report.symmetry_max_violation > 0.1
    assert "symmetry" in report.violations(spec)


def test_custom_speed_registration_path() -> None:
    # Custom speeds enter through SpeedSpec directly rather than the registry.
    def ev(lam):
        lam = np.asarray(lam, dtype=float)
        a = np.sort(lam, axis=-1)
        return 0.25 * a[..., 0] + 0.75 * a[..., -1]

    spec = sp.SpeedSpec(name="skew-mean", n=2, degree_k=1, shape="convex", evaluator=ev)
    report = sp.check_conditions(spec, sample_count=4000, rng_seed=2)
    assert report.symmetry_max_violation == 0.0
    assert report.shape_verdict == "convex"
    assert report.lower_bound_max_violation == 0.0
