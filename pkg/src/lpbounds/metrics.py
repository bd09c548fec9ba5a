"""Metric-inducing kernels f, their inverses and the transfer curve h_c^f.

A kernel is a continuous, strictly decreasing ``f: [0, 1] -> R+`` with
``f(1) = 0`` such that ``f(|<psi|phi>|^2)`` is a distance between pure states.
The three built-in kernels are Wootters (``arccos sqrt x``), Bures
(``sqrt(2(1 - sqrt x))``) and root-infidelity (``sqrt(1 - x)``).
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidKernel, OutOfRange, UnknownKernel

__all__ = [
    "MetricKernel",
    "builtin_kernel",
    "get_kernel",
    "BUILTIN_NAMES",
    "f_inv",
    "h_cf",
    "h_wootters",
    "check_kernel_shape",
    "triangle_check",
    "TriangleReport",
    "validate_kernel",
    "plane_triple",
    "scan_plane_violation",
]

# Arguments within this distance outside [0, 1] are treated as roundoff.
EDGE_TOL = 1e-12
BISECT_WIDTH = 1e-12
TRIANGLE_TOL = 1e-10


def _unit(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < -EDGE_TOL) or np.any(x > 1.0 + EDGE_TOL):
        raise OutOfRange(f"argument outside [0, 1]: {x.min():.17g}..{x.max():.17g}")
    return np.clip(x, 0.0, 1.0)


def _as_output(x, like):
    return float(x) if np.ndim(like) == 0 else x


def _wootters(x):
    return np.arccos(np.sqrt(_unit(x)))


def _wootters_inv(y):
    return np.cos(y) ** 2


def _bures(x):
    return np.sqrt(np.clip(2.0 * (1.0 - np.sqrt(_unit(x))), 0.0, None))


def _bures_inv(y):
    return (1.0 - 0.5 * y * y) ** 2


def _root_infidelity(x):
    return np.sqrt(1.0 - _unit(x))


def _root_infidelity_inv(y):
    return 1.0 - y * y


@dataclass(frozen=True)
class MetricKernel:
    """A named kernel ``f`` with an optional closed-form inverse.

    ``f`` must accept numpy arrays. ``closed_form_h`` is set only for the
    Wootters kernel, whose transfer curve has an algebraic expression.
    """

    name: str
    f: Callable
    f_inv: Optional[Callable] = None
    closed_form_h: bool = False

    def __call__(self, x):
        return _as_output(self.f(x), x)

    @property
    def f_max(self):
        return float(self.f(0.0))

    def inverse(self, y):
        return f_inv(self, y)


_BUILTINS = {
    "wootters": MetricKernel("wootters", _wootters, _wootters_inv, True),
    "bures": MetricKernel("bures", _bures, _bures_inv),
    "root_infidelity": MetricKernel("root_infidelity", _root_infidelity, _root_infidelity_inv),
}
BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_kernel(name):
    """Return one of the built-in kernels by name.

    Hyphens are accepted in place of underscores (``root-infidelity``).
    """
    key = str(name).strip().lower().replace("-", "_")
    try:
        return _BUILTINS[key]
    except KeyError:
        raise UnknownKernel(f"unknown kernel {name!r}; expected one of {BUILTIN_NAMES}") from None


def get_kernel(k):
    return k if isinstance(k, MetricKernel) else builtin_kernel(k)


def f_inv(k, y):
    """Inverse of ``k.f`` on ``[0, f(0)]``.

    Uses the closed form when the kernel has one and bisection on [0, 1]
    otherwise (``f`` is strictly decreasing, so the root is bracketed).
    """
    k = get_kernel(k)
    y_arr = np.asarray(y, dtype=float)
    top = k.f_max
    if np.any(y_arr < -EDGE_TOL) or np.any(y_arr > top + EDGE_TOL):
        raise OutOfRange(f"f_inv argument outside [0, {top:.17g}]")
    y_arr = np.clip(y_arr, 0.0, top)
    if k.f_inv is not None:
        out = np.clip(k.f_inv(y_arr), 0.0, 1.0)
    else:
        lo = np.zeros_like(y_arr)
        hi = np.ones_like(y_arr)
        while np.max(hi - lo) > BISECT_WIDTH:
            mid = 0.5 * (lo + hi)
            above = k.f(mid) > y_arr
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        out = 0.5 * (lo + hi)
        out = np.where(y_arr == 0.0, 1.0, out)
        out = np.where(y_arr == top, 0.0, out)
    return _as_output(out, y)


def h_wootters(c, x):
    """Closed-form Wootters transfer curve ``(c sqrt x + sqrt(1-c^2) sqrt(1-x))^2``.

    No domain checks; ``x`` is clipped to [0, 1]. Also valid at ``c = 1``.
    """
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    s = np.sqrt(max(0.0, 1.0 - c * c))
    return np.clip((c * np.sqrt(x) + s * np.sqrt(1.0 - x)) ** 2, 0.0, 1.0)


def h_cf(k, c, x):
    """Transfer curve ``h_c^f(x) = f^{-1}(f(c^2) - f(x))`` on ``[c^2, 1]``."""
    k = get_kernel(k)
    if not 0.0 < c < 1.0:
        raise OutOfRange(f"c must lie in (0, 1), got {c!r}")
    x_arr = np.asarray(x, dtype=float)
    c2 = c * c
    if np.any(x_arr < c2 - EDGE_TOL) or np.any(x_arr > 1.0 + EDGE_TOL):
        raise OutOfRange(f"x must lie in [c^2, 1] = [{c2:.17g}, 1]")
    x_arr = np.clip(x_arr, c2, 1.0)
    if k.closed_form_h:
        out = h_wootters(c, x_arr)
    else:
        y = np.clip(k.f(c2) - k.f(x_arr), 0.0, k.f_max)
        out = f_inv(k, y)
    return _as_output(out, x)


def check_kernel_shape(k, n_grid=10_000):
    """Raise :class:`InvalidKernel` unless f is >= 0, strictly decreasing, f(1) = 0."""
    k = get_kernel(k)
    x = np.linspace(0.0, 1.0, n_grid)
    fx = np.asarray(k.f(x), dtype=float)
    if not np.all(np.isfinite(fx)):
        raise InvalidKernel(f"{k.name}: non-finite values on [0, 1]")
    if abs(fx[-1]) > 1e-12:
        raise InvalidKernel(f"{k.name}: f(1) = {fx[-1]:.3e}, expected 0")
    if np.any(fx < -1e-12):
        raise InvalidKernel(f"{k.name}: negative values")
    if np.any(np.diff(fx) >= 0.0):
        raise InvalidKernel(f"{k.name}: not strictly decreasing on the grid")


@dataclass(frozen=True)
class TriangleReport:
    n_triples: int
    violations: int
    worst_slack: float

    @property
    def ok(self):
        return self.violations == 0


def _distance(k, u, v):
    ov = np.abs(np.sum(np.conj(u) * v, axis=-1)) ** 2
    return k.f(np.clip(ov, 0.0, 1.0))


def triangle_check(k, n_triples, dim, rng):
    """Sample random pure-state triples and test ``d(a,b) <= d(a,m) + d(m,b)``.

    A nonzero violation count means the kernel does not induce a metric.
    ``worst_slack`` is the smallest ``d(a,m) + d(m,b) - d(a,b)`` seen.
    """
    from .randgen import random_pure_states

    if n_triples < 1 or dim < 2:
        raise ValueError("need n_triples >= 1 and dim >= 2")
    k = get_kernel(k)
    states = random_pure_states(dim, 3 * n_triples, rng).reshape(n_triples, 3, dim)
    a, m, b = states[:, 0], states[:, 1], states[:, 2]
    slack = _distance(k, a, m) + _distance(k, m, b) - _distance(k, a, b)
    return TriangleReport(
        n_triples, int(np.count_nonzero(slack < -TRIANGLE_TOL)), float(slack.min())
    )


def validate_kernel(k, rng=None, n_triples=10_000, dim=3):
    """Gate for user-supplied kernels: shape checks plus a triangle sweep."""
    from .randgen import RngStream

    k = get_kernel(k)
    check_kernel_shape(k)
    rep = triangle_check(k, n_triples, dim, rng or RngStream(0, 0))
    if rep.violations:
        raise InvalidKernel(
            f"{k.name}: {rep.violations} triangle-inequality violations "
            f"(worst slack {rep.worst_slack:.3e}); not a metric"
        )
    return rep


def plane_triple(gamma, theta):
    """Three real unit vectors in a 2-plane: ``psi1``, ``psi2`` at angle gamma, ``phi`` at theta."""
    e1 = np.array([1.0, 0.0], dtype=complex)
    e2 = np.array([0.0, 1.0], dtype=complex)
    phi = np.cos(theta) * e1 + np.sin(theta) * e2
    psi2 = np.cos(gamma) * e1 + np.sin(gamma) * e2
    return e1, psi2, phi


def scan_plane_violation(k, gamma, n_theta=1001):
    """Scan ``theta in [0, gamma]`` for a triangle violation on the planar triple.

    Returns ``(worst_slack, theta)``; a negative slack below the tolerance is a
    certificate that ``k`` is not a metric.
    """
    k = get_kernel(k)
    thetas = np.linspace(0.0, gamma, n_theta)
    ends = k.f(np.cos(gamma) ** 2)
    slack = k.f(np.cos(thetas) ** 2) + k.f(np.cos(gamma - thetas) ** 2) - ends
    i = int(np.argmin(slack))
    return float(slack[i]), float(thetas[i])
