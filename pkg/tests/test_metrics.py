import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lpbounds.errors import InvalidKernel, OutOfRange, UnknownKernel
from lpbounds.metrics import (
    BUILTIN_NAMES,
    MetricKernel,
    builtin_kernel,
    check_kernel_shape,
    f_inv,
    h_cf,
    h_wootters,
    plane_triple,
    scan_plane_violation,
    triangle_check,
    validate_kernel,
)
from lpbounds.randgen import RngStream

# mpmath at 40 digits
BURES_HALF = 0.7653668647301795434569199680607977335227
H_075_09 = 0.8476470224947664414314317722844167978924

C_GRID = [round(0.1 * i, 1) for i in range(1, 10)]


def squared_loss(x):
    return (1.0 - np.asarray(x, dtype=float)) ** 2


ADVERSARIAL = MetricKernel("squared_loss", squared_loss)


def test_wootters_values():
    w = builtin_kernel("wootters")
    assert w(1.0) == 0.0
    assert w(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert w(0.5) == pytest.approx(math.pi / 4, abs=1e-15)


def test_bures_half():
    assert builtin_kernel("bures")(0.5) == pytest.approx(BURES_HALF, abs=1e-15)


def test_root_infidelity_values():
    k = builtin_kernel("root-infidelity")
    assert k.name == "root_infidelity"
    assert k(0.36) == pytest.approx(0.8, abs=1e-15)


def test_unknown_kernel():
    with pytest.raises(UnknownKernel):
        builtin_kernel("hellinger")


def test_argument_out_of_range():
    with pytest.raises(OutOfRange):
        builtin_kernel("wootters")(1.1)
    # roundoff just outside [0, 1] is clamped
    assert builtin_kernel("wootters")(1.0 + 1e-13) == 0.0


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_shape(name):
    check_kernel_shape(name)
    x = np.linspace(0, 1, 1000)
    assert np.all(np.diff(builtin_kernel(name).f(x)) < 0)


def test_shape_check_rejects_increasing():
    with pytest.raises(InvalidKernel):
        check_kernel_shape(MetricKernel("bad", lambda x: np.asarray(x, dtype=float)))


def test_shape_check_rejects_nonzero_end():
    with pytest.raises(InvalidKernel):
        check_kernel_shape(MetricKernel("bad", lambda x: 2.0 - np.asarray(x, dtype=float)))


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_f_inv_zero_is_one(name):
    assert f_inv(name, 0.0) == 1.0


def test_f_inv_examples():
    assert f_inv("wootters", math.pi / 4) == pytest.approx(0.5, abs=1e-15)
    assert f_inv("root_infidelity", 0.6) == pytest.approx(0.64, abs=1e-15)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_f_inv_round_trip(name):
    k = builtin_kernel(name)
    x = np.linspace(0, 1, 1000)
    np.testing.assert_allclose(f_inv(k, k.f(x)), x, atol=1e-9)
    y = np.linspace(0, k.f_max, 1000)
    np.testing.assert_allclose(k.f(f_inv(k, y)), y, atol=1e-10)


def test_f_inv_bisection_path():
    # same formula as the root-infidelity kernel, but without a closed-form inverse
    k = MetricKernel("ri_numeric", builtin_kernel("root_infidelity").f)
    y = np.linspace(0, 1, 101)
    np.testing.assert_allclose(f_inv(k, y), 1 - y * y, atol=1e-11)
    np.testing.assert_allclose(k.f(f_inv(k, y)), y, atol=1e-10)


def test_f_inv_out_of_range():
    with pytest.raises(OutOfRange):
        f_inv("wootters", 2.0)
    with pytest.raises(OutOfRange):
        f_inv("bures", -0.1)


def test_h_wootters_example():
    assert h_cf("wootters", 0.75, 0.9) == pytest.approx(H_075_09, abs=1e-14)
    # cross-check via the angle form
    assert math.cos(math.acos(0.75) - math.acos(math.sqrt(0.9))) ** 2 == pytest.approx(H_075_09, abs=1e-14)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
@pytest.mark.parametrize("c", C_GRID)
def test_h_pinning(name, c):
    assert h_cf(name, c, 1.0) == pytest.approx(c * c, abs=1e-10)
    assert h_cf(name, c, c * c) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_h_range(name):
    for c in C_GRID:
        x = np.linspace(c * c, 1, 200)
        h = h_cf(name, c, x)
        assert np.all(h >= c * c - 1e-12) and np.all(h <= 1 + 1e-12)


def test_h_domain_errors():
    with pytest.raises(OutOfRange):
        h_cf("wootters", 1.0, 0.5)
    with pytest.raises(OutOfRange):
        h_cf("bures", 0.5, 0.1)


def test_wootters_closed_form_matches_generic_path():
    generic = MetricKernel("wootters_generic", builtin_kernel("wootters").f, builtin_kernel("wootters").f_inv)
    for c in C_GRID:
        x = np.linspace(c * c, 1, 1000)
        np.testing.assert_allclose(h_cf("wootters", c, x), h_cf(generic, c, x), atol=1e-9)


@given(st.floats(min_value=0.05, max_value=0.95), st.floats(min_value=0.0, max_value=1.0))
def test_wootters_dominance(c, t):
    x = c * c + t * (1 - c * c)
    hw = h_cf("wootters", c, x)
    assert hw <= h_cf("bures", c, x) + 1e-9
    assert hw <= h_cf("root_infidelity", c, x) + 1e-9


def test_h_wootters_at_c_one():
    np.testing.assert_allclose(h_wootters(1.0, np.array([0.2, 0.7])), [0.2, 0.7], atol=1e-15)


@pytest.mark.parametrize("name", ["wootters", "root_infidelity", "bures"])
def test_builtin_triangle(name):
    rep = triangle_check(name, 10_000, 3, RngStream(3, 0))
    assert rep.violations == 0, rep
    assert rep.n_triples == 10_000


def test_plane_triple_geometry():
    a, b, m = plane_triple(math.pi / 3, math.pi / 6)
    assert abs(np.vdot(a, b)) == pytest.approx(0.5)
    assert abs(np.vdot(a, m)) == pytest.approx(math.cos(math.pi / 6))


def test_adversarial_kernel_plane_counterexample():
    # (1-x)^2 at gamma = pi/2, theta = pi/4: 0.25 + 0.25 < 1
    slack, theta = scan_plane_violation(ADVERSARIAL, math.pi / 2)
    assert slack == pytest.approx(-0.5, abs=1e-12)
    assert theta == pytest.approx(math.pi / 4, abs=1e-12)


def test_adversarial_kernel_random_triples():
    rep = triangle_check(ADVERSARIAL, 10_000, 3, RngStream(3, 0))
    assert rep.violations >= 1
    assert rep.worst_slack < 0


def test_validate_kernel_gate():
    validate_kernel("wootters", n_triples=2000)
    with pytest.raises(InvalidKernel):
        validate_kernel(ADVERSARIAL, n_triples=2000)


def test_triangle_check_args():
    with pytest.raises(ValueError):
        triangle_check("wootters", 10, 1, RngStream(0))
