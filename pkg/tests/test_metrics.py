import numpy as np
import pytest

from oneshot_qcomp.errors import InvalidInputError, ValidationError
from oneshot_qcomp.metrics import (
    DistanceReport,
    distance_report,
    fidelity,
    fvdg_sandwich,
    half_trace_distance,
    helstrom,
    purified_distance,
    trace_distance,
    trace_norm,
)
from oneshot_qcomp.qcore import PureState, as_generator

from helpers import random_density, random_pure


def test_trace_norm_is_singular_value_sum():
    g = as_generator(3)
    mat = g.normal(size=(4, 4)) + 1j * g.normal(size=(4, 4))
    np.testing.assert_allclose(
        trace_norm(mat), np.linalg.svd(mat, compute_uv=False).sum(), atol=1e-12
    )
    with pytest.raises(InvalidInputError):
        trace_norm(np.ones((2, 3)))


def test_trace_distance_is_unhalved():
    # orthogonal pure states sit at the top of the [0, 2] range
    np.testing.assert_allclose(
        trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), 2.0, atol=1e-12
    )
    np.testing.assert_allclose(
        half_trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), 1.0, atol=1e-12
    )


def test_fidelity_matches_overlap_on_pure_pairs():
    g = as_generator(5)
    for _ in range(50):
        u, v = random_pure(4, g), random_pure(4, g)
        f = fidelity(np.outer(u, u.conj()), np.outer(v, v.conj()))
        np.testing.assert_allclose(f, abs(np.vdot(u, v)), atol=1e-9)


def test_fidelity_accepts_wrapped_states_and_is_symmetric():
    g = as_generator(7)
    rho, sigma = random_density(3, g), random_density(3, g)
    np.testing.assert_allclose(fidelity(rho, sigma), fidelity(sigma, rho), atol=1e-10)
    u = PureState(random_pure(3, g))
    assert 0.0 <= fidelity(u, rho) <= 1.0


def test_pure_pair_trace_distance_closed_form():
    g = as_generator(11)
    for _ in range(20):
        u, v = random_pure(3, g), random_pure(3, g)
        f = abs(np.vdot(u, v))
        td = trace_distance(np.outer(u, u.conj()), np.outer(v, v.conj()))
        np.testing.assert_allclose(td, 2.0 * np.sqrt(1.0 - f * f), atol=1e-9)


def test_helstrom_equals_trace_norm_and_measurement_is_optimal():
    g = as_generator(13)
    for dim in (2, 4, 8):
        rho, sigma = random_density(dim, g), random_density(dim, g)
        value, m = helstrom(rho, sigma)
        np.testing.assert_allclose(value, trace_norm(rho - sigma), atol=1e-10)
        # the projector attains the Helstrom value
        attained = 2.0 * abs(np.trace(m @ (rho - sigma)).real)
        np.testing.assert_allclose(attained, value, atol=1e-9)
        np.testing.assert_allclose(m @ m, m, atol=1e-10)


def test_fvdg_sandwich_on_random_pairs():
    g = as_generator(17)
    for _ in range(60):
        dim = int(g.integers(2, 6))
        rho, sigma = random_density(dim, g), random_density(dim, g)
        lower, mid, upper, holds = fvdg_sandwich(rho, sigma)
        assert holds
        assert lower <= mid + 1e-9 <= upper + 2e-9


def test_purified_distance_extremes():
    np.testing.assert_allclose(
        purified_distance(np.diag([1.0, 0.0]), np.diag([1.0, 0.0])), 0.0, atol=1e-7
    )
    np.testing.assert_allclose(
        purified_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), 1.0, atol=1e-12
    )


def test_distance_report_round_trip_and_invariant():
    g = as_generator(19)
    rho, sigma = random_density(3, g), random_density(3, g)
    rep = distance_report(rho, sigma)
    obj = rep.to_json()
    assert set(obj) == {"trace_distance", "fidelity", "purified_distance"}
    with pytest.raises(ValidationError):
        DistanceReport(trace_distance=1.0, fidelity=0.9, purified_distance=0.9)
