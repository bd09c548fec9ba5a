"""POVMs, density operators, overlaps and the Landau-Pollak-type bounds.

For POVMs ``A = {A_i}`` and ``B = {B_j}`` on C^N and a state ``rho``:

* ``P_A = max_i Tr(A_i rho)`` is the maximal outcome probability,
* ``U_f(A; rho) = f(P_A)`` is the uncertainty under a metric kernel ``f``,
* ``c_AB = max_ij ||sqrt(A_i) sqrt(B_j)||`` is the joint overlap and
  ``c_A = max_i ||sqrt(A_i)||`` the intrinsic overlap,

and for every state ``U_f(A) + U_f(B) >= max(f(c_A^2) + f(c_B^2), f(c_AB^2))``.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import matcore
from .errors import DimensionMismatch, ValidationError
from .matcore import dagger
from .metrics import get_kernel, h_wootters

__all__ = [
    "Povm",
    "DensityOperator",
    "PovmValidation",
    "OverlapReport",
    "DomainSpec",
    "TrialRecord",
    "PairScan",
    "validate_povm",
    "probabilities",
    "probabilities_batch",
    "max_prob",
    "max_prob_batch",
    "uncertainty",
    "joint_overlap",
    "intrinsic_overlap",
    "overlap_sandwich",
    "lpi_check",
    "improved_bound",
    "domain_spec",
    "domain_contains",
    "domain_boundary",
    "scan_pair",
    "snap_unit",
]

PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-9
TRACE_TOL = 1e-10
TIE_TOL = 1e-12
BOUND_TOL = 1e-9
# Probabilities and overlaps this close to 1 are set to exactly 1. All three
# built-in kernels behave like sqrt(1 - x) near x = 1, so a few ulps of
# roundoff there would otherwise show up as ~1e-8 in kernel units.
ONE_SNAP = 1e-13


def snap_unit(x):
    """Clip to [0, 1] and snap values within ``ONE_SNAP`` of 1 to exactly 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    x = np.where(x >= 1.0 - ONE_SNAP, 1.0, x)
    return float(x) if x.ndim == 0 else x


def _first_within(values, tol=TIE_TOL):
    """Index of the first entry within ``tol`` of the maximum (row-major)."""
    flat = np.ravel(values)
    return int(np.flatnonzero(flat >= flat.max() - tol)[0])


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class PovmValidation:
    min_eigenvalues: np.ndarray
    completeness_deviation: float
    psd_ok: bool
    completeness_ok: bool

    @property
    def passed(self):
        return self.psd_ok and self.completeness_ok

    @property
    def psd_slack(self):
        return float(self.min_eigenvalues.min()) if self.min_eigenvalues.size else 0.0

    def summary(self):
        parts = []
        if not self.psd_ok:
            bad = np.flatnonzero(self.min_eigenvalues < -PSD_TOL)
            parts.append(
                "elements not PSD: "
                + ", ".join(f"#{i} min eigenvalue {self.min_eigenvalues[i]:.3e}" for i in bad)
            )
        if not self.completeness_ok:
            parts.append(f"completeness deviation {self.completeness_deviation:.3e}")
        return "; ".join(parts) if parts else "ok"

    def as_dict(self):
        return {
            "passed": self.passed,
            "psd_ok": self.psd_ok,
            "completeness_ok": self.completeness_ok,
            "min_eigenvalues": [float(v) for v in self.min_eigenvalues],
            "completeness_deviation": self.completeness_deviation,
        }


class Povm:
    """Ordered set of Hermitian PSD operators on C^N resolving the identity.

    ``check=False`` skips validation, which is how projector sets that do not
    sum to the identity (truncated PVMs, embedded projectors) are represented.
    """

    def __init__(self, elements, *, check=True):
        a = np.array(elements, dtype=np.complex128)
        if a.ndim != 3 or a.shape[0] < 1:
            raise DimensionMismatch(f"expected a stack (m, N, N) of operators, got {a.shape}")
        a = matcore.as_hermitian(a)
        a.setflags(write=False)
        self.elements = a
        if check:
            rep = validate_povm(self)
            if not rep.passed:
                raise ValidationError(f"invalid POVM: {rep.summary()}", rep)

    def __repr__(self):
        return f"Povm(dim={self.dim}, n_outcomes={self.n_outcomes})"

    def __len__(self):
        return self.elements.shape[0]

    def __getitem__(self, i):
        return self.elements[i]

    def __iter__(self):
        return iter(self.elements)

    @property
    def dim(self):
        return self.elements.shape[1]

    @property
    def n_outcomes(self):
        return self.elements.shape[0]

    @cached_property
    def eigvals(self):
        return matcore.eigvalsh_batch(self.elements, check=False)

    @cached_property
    def sqrt_elements(self):
        return matcore.psd_sqrt_batch(self.elements, check=False)

    def conjugate(self, u):
        """The POVM ``{U A_i U^dagger}``."""
        u = np.asarray(u, dtype=np.complex128)
        return Povm(u @ self.elements @ dagger(u), check=False)


class DensityOperator:
    """Hermitian PSD unit-trace operator."""

    def __init__(self, matrix, *, check=True):
        m = matcore.as_hermitian(np.array(matrix, dtype=np.complex128))
        if m.ndim != 2:
            raise DimensionMismatch(f"density operator must be a matrix, got {m.shape}")
        m.setflags(write=False)
        self.matrix = m
        if check:
            tr = float(np.trace(m).real)
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValidationError(f"trace {tr:.17g} differs from 1 by more than {TRACE_TOL:g}")
            wmin = float(matcore.eigvalsh_batch(m, check=False)[0])
            if wmin < -PSD_TOL:
                raise ValidationError(f"minimum eigenvalue {wmin:.3e} below -{PSD_TOL:g}")

    @classmethod
    def from_vector(cls, psi):
        psi = np.asarray(psi, dtype=np.complex128).ravel()
        return cls(np.outer(psi, np.conj(psi)))

    @classmethod
    def maximally_mixed(cls, n):
        return cls(np.eye(n, dtype=np.complex128) / n)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __repr__(self):
        return f"DensityOperator(dim={self.dim})"

    def conjugate(self, u):
        u = np.asarray(u, dtype=np.complex128)
        return DensityOperator(u @ self.matrix @ dagger(u), check=False)


def _elements(p):
    return p.elements if isinstance(p, Povm) else matcore.as_cmatrix(p)


def _rho_matrix(rho):
    return rho.matrix if isinstance(rho, DensityOperator) else matcore.as_cmatrix(rho)


def validate_povm(p):
    """PSD and completeness report for a POVM or a raw stack of operators."""
    a = _elements(p)
    if isinstance(p, Povm):
        w = p.eigvals
    else:
        a = matcore.as_hermitian(a)
        w = matcore.eigvalsh_batch(a, check=False)
    mins = w[:, 0].copy()
    dev = float(np.max(np.abs(a.sum(axis=0) - np.eye(a.shape[1]))))
    return PovmValidation(
        min_eigenvalues=mins,
        completeness_deviation=dev,
        psd_ok=bool(np.all(mins >= -PSD_TOL)),
        completeness_ok=dev <= COMPLETENESS_TOL,
    )


# --------------------------------------------------------------------------
# probabilities and uncertainties


def probabilities_batch(p, rhos):
    """Outcome probabilities ``Tr(A_i rho)`` for a stack of states, shape ``(S, m)``."""
    a = _elements(p)
    r = np.asarray(rhos, dtype=np.complex128)
    if r.shape[-1] != a.shape[-1]:
        raise DimensionMismatch(f"POVM dim {a.shape[-1]} vs state dim {r.shape[-1]}")
    probs = np.einsum("kij,sji->sk", a, r).real
    return snap_unit(probs)


def probabilities(p, rho):
    """Vector of ``Tr(A_i rho)``, clamped to [0, 1]."""
    r = _rho_matrix(rho)
    return probabilities_batch(p, r[None])[0]


def max_prob_batch(p, rhos):
    probs = probabilities_batch(p, rhos)
    return probs.max(axis=1)


def max_prob(p, rho):
    """``(P, i)`` with ``P = max_i Tr(A_i rho)``; near-ties go to the smallest index."""
    probs = probabilities(p, rho)
    return float(probs.max()), _first_within(probs)


def uncertainty(k, p, rho):
    """``U_f(A; rho) = f(P_A)``."""
    return float(get_kernel(k).f(max_prob(p, rho)[0]))


# --------------------------------------------------------------------------
# overlaps


def _pairwise_norms(a, b):
    sa = a.sqrt_elements if isinstance(a, Povm) else matcore.psd_sqrt_batch(_elements(a))
    sb = b.sqrt_elements if isinstance(b, Povm) else matcore.psd_sqrt_batch(_elements(b))
    if sa.shape[-1] != sb.shape[-1]:
        raise DimensionMismatch(f"POVM dims differ: {sa.shape[-1]} vs {sb.shape[-1]}")
    prods = sa[:, None] @ sb[None, :]
    return matcore.op_norm_batch(prods)


def joint_overlap(a, b):
    """``(c_AB, (i, j))`` with ``c_AB = max_ij ||sqrt(A_i) sqrt(B_j)||``.

    Ties within 1e-12 resolve to the lexicographically smallest pair.
    """
    norms = _pairwise_norms(a, b)
    flat = _first_within(norms)
    ij = divmod(flat, norms.shape[1])
    return snap_unit(norms.max()), (int(ij[0]), int(ij[1]))


def intrinsic_overlap(a):
    """``c_A = max_i ||sqrt(A_i)|| = sqrt(max_i lambda_max(A_i))``."""
    w = a.eigvals if isinstance(a, Povm) else matcore.eigvalsh_batch(_elements(a))
    return snap_unit(np.sqrt(max(float(w[:, -1].max()), 0.0)))


def overlap_sandwich(c_a, c_b, c_ab, n_a, n_b, tol=BOUND_TOL):
    """Check ``max(c_A/sqrt(N_B), c_B/sqrt(N_A)) <= c_AB <= c_A c_B``.

    Returns ``(lower, upper, ok)``.
    """
    lower = max(c_a / np.sqrt(n_b), c_b / np.sqrt(n_a))
    upper = c_a * c_b
    return float(lower), float(upper), bool(lower - tol <= c_ab <= upper + tol)


@dataclass(frozen=True)
class OverlapReport:
    kernel_name: str
    n_a: int
    n_b: int
    c_a: float
    c_b: float
    c_ab: float
    argmax_pair: tuple
    bound_joint: float
    bound_intrinsic_sum: float
    bound_improved: float

    @property
    def sandwich(self):
        return overlap_sandwich(self.c_a, self.c_b, self.c_ab, self.n_a, self.n_b)

    def as_dict(self):
        lo, hi, ok = self.sandwich
        return {
            "kernel": self.kernel_name,
            "c_a": self.c_a,
            "c_b": self.c_b,
            "c_ab": self.c_ab,
            "argmax_pair": list(self.argmax_pair),
            "bound_joint": self.bound_joint,
            "bound_intrinsic_sum": self.bound_intrinsic_sum,
            "bound_improved": self.bound_improved,
            "overlap_lower": lo,
            "overlap_upper": hi,
            "overlap_bounds_ok": ok,
        }


def improved_bound(k, a, b):
    """Joint, intrinsic-sum and combined bounds for a POVM pair under ``k``."""
    k = get_kernel(k)
    c_ab, ij = joint_overlap(a, b)
    c_a = intrinsic_overlap(a)
    c_b = intrinsic_overlap(b)
    joint = float(k.f(c_ab * c_ab))
    intrinsic = float(k.f(c_a * c_a) + k.f(c_b * c_b))
    return OverlapReport(
        kernel_name=k.name,
        n_a=len(a),
        n_b=len(b),
        c_a=c_a,
        c_b=c_b,
        c_ab=c_ab,
        argmax_pair=ij,
        bound_joint=joint,
        bound_intrinsic_sum=intrinsic,
        bound_improved=max(joint, intrinsic),
    )


@dataclass(frozen=True)
class TrialRecord:
    """One state evaluated against one POVM pair under one kernel."""

    kernel_name: str
    p_a: float
    p_b: float
    u_a: float
    u_b: float
    u_sum: float
    bound: float
    slack: float
    c_ab: float = float("nan")
    bound_improved: float = float("nan")


def lpi_check(k, a, b, rho):
    """Evaluate ``U_f(A) + U_f(B) >= f(c_AB^2)`` at ``rho``.

    ``slack = u_sum - f(c_AB^2)``; it is non-negative for metric kernels.
    """
    k = get_kernel(k)
    r = _rho_matrix(rho)
    if a.dim != b.dim or r.shape[-1] != a.dim:
        raise DimensionMismatch("POVMs and state must share the Hilbert-space dimension")
    rep = improved_bound(k, a, b)
    p_a = max_prob(a, r)[0]
    p_b = max_prob(b, r)[0]
    u_a = float(k.f(p_a))
    u_b = float(k.f(p_b))
    return TrialRecord(
        kernel_name=k.name,
        p_a=p_a,
        p_b=p_b,
        u_a=u_a,
        u_b=u_b,
        u_sum=u_a + u_b,
        bound=rep.bound_joint,
        slack=u_a + u_b - rep.bound_joint,
        c_ab=rep.c_ab,
        bound_improved=rep.bound_improved,
    )


@dataclass
class PairScan:
    """Vectorised evaluation of many states against one POVM pair."""

    c_a: float
    c_b: float
    c_ab: float
    argmax_pair: tuple
    p_a: np.ndarray
    p_b: np.ndarray
    kernels: dict = field(default_factory=dict)


def scan_pair(kernels, a, b, rhos):
    """Maximal probabilities, uncertainties and bounds for a stack of states.

    ``kernels`` is an iterable of kernels or names. The per-kernel dict holds
    arrays ``u_a``, ``u_b``, ``u_sum``, ``slack`` and scalars ``bound_joint``,
    ``bound_intrinsic_sum``, ``bound_improved``.
    """
    c_ab, ij = joint_overlap(a, b)
    c_a = intrinsic_overlap(a)
    c_b = intrinsic_overlap(b)
    p_a = max_prob_batch(a, rhos)
    p_b = max_prob_batch(b, rhos)
    out = PairScan(c_a, c_b, c_ab, ij, p_a, p_b)
    for kk in kernels:
        k = get_kernel(kk)
        u_a = k.f(p_a)
        u_b = k.f(p_b)
        joint = float(k.f(c_ab * c_ab))
        intrinsic = float(k.f(c_a * c_a) + k.f(c_b * c_b))
        out.kernels[k.name] = {
            "u_a": u_a,
            "u_b": u_b,
            "u_sum": u_a + u_b,
            "slack": u_a + u_b - joint,
            "bound_joint": joint,
            "bound_intrinsic_sum": intrinsic,
            "bound_improved": max(joint, intrinsic),
            "intrinsic_a": float(k.f(c_a * c_a)),
            "intrinsic_b": float(k.f(c_b * c_b)),
        }
    return out


# --------------------------------------------------------------------------
# allowed domain for (P_A, P_B)


@dataclass(frozen=True)
class DomainSpec:
    """Rectangle ``[1/N_A, c_A^2] x [1/N_B, c_B^2]`` with a possibly cut corner.

    The cut is ``P_B <= h(P_A)`` for ``P_A >= c_AB^2`` where ``h`` is the
    Wootters transfer curve at ``c_AB``.
    """

    n_a: int
    n_b: int
    c_a: float
    c_b: float
    c_ab: float
    full_rectangle: bool

    @classmethod
    def from_overlaps(cls, c_a, c_b, c_ab, n_a, n_b):
        full = bool(c_b * c_b <= float(h_wootters(c_ab, c_a * c_a)))
        return cls(int(n_a), int(n_b), float(c_a), float(c_b), float(c_ab), full)

    def rectangle(self):
        return {
            "p_a_min": 1.0 / self.n_a,
            "p_a_max": self.c_a**2,
            "p_b_min": 1.0 / self.n_b,
            "p_b_max": self.c_b**2,
        }

    def as_dict(self):
        d = {
            "n_a": self.n_a,
            "n_b": self.n_b,
            "c_a": self.c_a,
            "c_b": self.c_b,
            "c_ab": self.c_ab,
            "full_rectangle": self.full_rectangle,
        }
        d.update(self.rectangle())
        return d


def full_rectangle_closed_form(c_a, c_b, c_ab):
    """Algebraic form of the no-cut condition.

    Inverting ``c_B^2 <= h(c_A^2)`` through the angle representation gives
    ``c_AB >= c_A c_B - sqrt((1 - c_A^2)(1 - c_B^2))``. Used to cross-check
    :meth:`DomainSpec.from_overlaps`.
    """
    return c_ab >= c_a * c_b - np.sqrt(max(0.0, (1 - c_a**2) * (1 - c_b**2)))


def domain_spec(a, b):
    c_ab, _ = joint_overlap(a, b)
    return DomainSpec.from_overlaps(intrinsic_overlap(a), intrinsic_overlap(b), c_ab, len(a), len(b))


def _oriented_contains(x, y, lo_x, hi_x, lo_y, hi_y, c, tol):
    c2 = c * c
    in_rect = (x >= lo_x - tol) & (x <= hi_x + tol) & (y >= lo_y - tol) & (y <= hi_y + tol)
    cut_ok = (x <= c2 + tol) | (y <= h_wootters(c, np.maximum(x, c2)) + tol)
    return in_rect & cut_ok


def domain_contains(d, p_a, p_b, tol=BOUND_TOL):
    """Membership of ``(p_a, p_b)`` in the allowed domain (vectorised).

    The corner-cut test is evaluated in both orientations (A then B, B then
    A); a point is inside only if both agree.
    """
    x = np.asarray(p_a, dtype=float)
    y = np.asarray(p_b, dtype=float)
    lo_a, hi_a = 1.0 / d.n_a, d.c_a**2
    lo_b, hi_b = 1.0 / d.n_b, d.c_b**2
    fwd = _oriented_contains(x, y, lo_a, hi_a, lo_b, hi_b, d.c_ab, tol)
    rev = _oriented_contains(y, x, lo_b, hi_b, lo_a, hi_a, d.c_ab, tol)
    res = fwd & rev
    return bool(res) if res.ndim == 0 else res


def domain_boundary(d, n_points=1000):
    """Sampled Wootters curve ``(x, h_{c_AB}(x))`` for ``x in [c_AB^2, 1]``."""
    x = np.linspace(d.c_ab**2, 1.0, n_points)
    return x, h_wootters(d.c_ab, x)
