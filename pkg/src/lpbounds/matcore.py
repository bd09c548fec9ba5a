"""Dense complex-matrix kernel: Hermitian eigensolver and derived operations.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Every routine has a
batched form operating on stacks of shape ``(..., n, n)``; the single-matrix
functions are thin wrappers. The eigensolver is a cyclic complex Jacobi
iteration with a fixed sweep order, so identical inputs give identical bits.

Two implementations of the sweep exist: a scalar one compiled with numba and a
numpy one vectorised over the batch axis. They apply the same rotations in the
same order; see :mod:`lpbounds._accel` for selecting between them.
"""
import numpy as np

from ._accel import USE_NUMBA, njit
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    DimensionOverflow,
    NotHermitian,
    NotPositiveSemidefinite,
)

__all__ = [
    "as_cmatrix",
    "as_hermitian",
    "eigh",
    "eigh_batch",
    "eigvalsh_batch",
    "psd_sqrt",
    "psd_sqrt_batch",
    "op_norm",
    "op_norm_batch",
    "kron",
    "partial_trace",
    "dagger",
    "trace",
]

JACOBI_TOL = 1e-14
MAX_SWEEPS = 60
HERMITIAN_TOL = 1e-12
CLIP_TOL = 1e-10
KRON_CAP = 4096


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def trace(m):
    return np.trace(m, axis1=-2, axis2=-1)


def as_cmatrix(m):
    """Coerce to a finite complex array with at least two dimensions."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim < 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_hermitian(h, tol=HERMITIAN_TOL):
    """Validate a (stack of) Hermitian matrices and return it as complex128.

    The deviation ``max|H - H^dagger|`` must not exceed ``tol * max|H|`` and the
    diagonal imaginary parts must be below ``tol`` in magnitude.
    """
    a = as_cmatrix(h)
    if a.shape[-1] != a.shape[-2]:
        raise DimensionMismatch(f"Hermitian matrix must be square, got {a.shape[-2:]}")
    if a.size == 0:
        return a
    scale = np.max(np.abs(a))
    dev = np.max(np.abs(a - dagger(a)))
    if dev > tol * max(scale, 1.0):
        raise NotHermitian(f"Hermitian deviation {dev:.3e} exceeds {tol:g} * {scale:.3e}")
    diag_im = np.max(np.abs(np.diagonal(a, axis1=-2, axis2=-1).imag))
    if diag_im > tol:
        raise NotHermitian(f"diagonal imaginary part {diag_im:.3e} exceeds {tol:g}")
    return a


# --------------------------------------------------------------------------
# Jacobi sweeps: compiled scalar version


@njit
def _jacobi_one(a, v, tol, max_sweeps):
    n = a.shape[0]
    for sweep in range(max_sweeps + 1):
        off = 0.0
        total = 0.0
        for i in range(n):
            for j in range(n):
                x = a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag
                total += x
                if i != j:
                    off += x
        if off <= tol * tol * total:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = a[p, q]
                ag = abs(g)
                if ag == 0.0:
                    continue
                ec = np.conj(g / ag)
                theta = (a[q, q].real - a[p, p].real) / (2.0 * ag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                gpp = c + 0j
                gpq = s + 0j
                gqp = -s * ec
                gqq = c * ec
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * gpp + akq * gqp
                    a[k, q] = akp * gpq + akq * gqq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = np.conj(gpp) * apk + np.conj(gqp) * aqk
                    a[q, k] = np.conj(gpq) * apk + np.conj(gqq) * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * gpp + vkq * gqp
                    v[k, q] = vkp * gpq + vkq * gqq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    return -1


@njit
def _eigh_stack_numba(h, tol, max_sweeps):
    b, n = h.shape[0], h.shape[1]
    w = np.empty((b, n), dtype=np.float64)
    vecs = np.empty((b, n, n), dtype=np.complex128)
    status = np.zeros(b, dtype=np.int64)
    a = np.empty((n, n), dtype=np.complex128)
    v = np.empty((n, n), dtype=np.complex128)
    for m in range(b):
        for i in range(n):
            for j in range(n):
                a[i, j] = h[m, i, j]
                v[i, j] = 1.0 if i == j else 0.0
        status[m] = _jacobi_one(a, v, tol, max_sweeps)
        d = np.empty(n, dtype=np.float64)
        for i in range(n):
            d[i] = a[i, i].real
        order = np.argsort(d, kind="mergesort")
        for i in range(n):
            w[m, i] = d[order[i]]
            for k in range(n):
                vecs[m, k, i] = v[k, order[i]]
    return w, vecs, status


# --------------------------------------------------------------------------
# Jacobi sweeps: numpy version vectorised over the batch


def _eigh_stack_numpy(h, tol, max_sweeps):
    a = np.array(h, dtype=np.complex128, copy=True)
    b, n = a.shape[0], a.shape[1]
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), (b, n, n)).copy()
    status = np.full(b, -1, dtype=np.int64)
    active = np.ones(b, dtype=bool)
    offmask = ~np.eye(n, dtype=bool)
    for sweep in range(max_sweeps + 1):
        sq = a.real * a.real + a.imag * a.imag
        total = sq.sum(axis=(1, 2))
        off = np.where(offmask, sq, 0.0).sum(axis=(1, 2))
        done = active & (off <= tol * tol * total)
        status[done] = sweep
        active &= ~done
        if not active.any() or sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = a[:, p, q]
                ag = np.abs(g)
                rot = active & (ag != 0.0)
                if not rot.any():
                    continue
                safe = np.where(rot, ag, 1.0)
                ec = np.where(rot, np.conj(g / safe), 1.0 + 0j)
                theta = np.where(rot, (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe), 0.0)
                big = np.abs(theta) > 1e150
                with np.errstate(over="ignore", invalid="ignore"):
                    t = 1.0 / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(theta < 0.0, -t, t)
                t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
                t = np.where(rot, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                gpp = c + 0j
                gpq = s + 0j
                gqp = -s * ec
                gqq = c * ec
                akp = a[:, :, p].copy()
                akq = a[:, :, q].copy()
                a[:, :, p] = akp * gpp[:, None] + akq * gqp[:, None]
                a[:, :, q] = akp * gpq[:, None] + akq * gqq[:, None]
                apk = a[:, p, :].copy()
                aqk = a[:, q, :].copy()
                a[:, p, :] = np.conj(gpp)[:, None] * apk + np.conj(gqp)[:, None] * aqk
                a[:, q, :] = np.conj(gpq)[:, None] * apk + np.conj(gqq)[:, None] * aqk
                vkp = v[:, :, p].copy()
                vkq = v[:, :, q].copy()
                v[:, :, p] = vkp * gpp[:, None] + vkq * gqp[:, None]
                v[:, :, q] = vkp * gpq[:, None] + vkq * gqq[:, None]
                a[rot, p, q] = 0.0
                a[rot, q, p] = 0.0
                a[rot, p, p] = a[rot, p, p].real
                a[rot, q, q] = a[rot, q, q].real
    d = np.diagonal(a, axis1=1, axis2=2).real
    order = np.argsort(d, axis=1, kind="stable")
    w = np.take_along_axis(d, order, axis=1)
    vecs = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, vecs, status


def _eigh_stack(h, backend=None):
    if backend is None:
        backend = "numba" if USE_NUMBA else "numpy"
    if backend == "numba":
        return _eigh_stack_numba(h, JACOBI_TOL, MAX_SWEEPS)
    if backend == "numpy":
        return _eigh_stack_numpy(h, JACOBI_TOL, MAX_SWEEPS)
    raise ValueError(f"unknown backend {backend!r}")


# --------------------------------------------------------------------------
# public operations


def eigh_batch(h, *, check=True, backend=None):
    """Eigendecompose a stack of Hermitian matrices.

    Returns ``(w, v)`` with ``w`` of shape ``(..., n)`` sorted ascending and
    ``v`` of shape ``(..., n, n)`` holding orthonormal eigenvectors as columns.
    Raises :class:`ConvergenceFailure` when any matrix does not converge within
    the sweep budget.
    """
    a = as_hermitian(h) if check else np.asarray(h, dtype=np.complex128)
    lead, n = a.shape[:-2], a.shape[-1]
    flat = np.ascontiguousarray(a.reshape((-1, n, n)))
    if flat.shape[0] == 0:
        return np.empty(lead + (n,)), np.empty(lead + (n, n), dtype=np.complex128)
    w, v, status = _eigh_stack(flat, backend)
    if np.any(status < 0):
        bad = int(np.flatnonzero(status < 0)[0])
        raise ConvergenceFailure(
            f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps (batch index {bad})"
        )
    return w.reshape(lead + (n,)), v.reshape(lead + (n, n))


def eigh(h, *, backend=None):
    """Eigenvalues (ascending) and unitary eigenvector matrix of ``h``."""
    a = as_hermitian(h)
    if a.ndim != 2:
        raise DimensionMismatch("eigh expects a single matrix; use eigh_batch for stacks")
    w, v = eigh_batch(a, check=False, backend=backend)
    return w, v


def eigvalsh_batch(h, *, check=True, backend=None):
    return eigh_batch(h, check=check, backend=backend)[0]


def psd_sqrt_batch(h, clip_tol=CLIP_TOL, *, check=True, backend=None):
    """Principal square roots of a stack of PSD matrices.

    Eigenvalues in ``[-clip_tol, 0)`` are clipped to zero; anything lower raises
    :class:`NotPositiveSemidefinite`.
    """
    w, v = eigh_batch(h, check=check, backend=backend)
    if w.size and w.min() < -clip_tol:
        raise NotPositiveSemidefinite(
            f"minimum eigenvalue {w.min():.3e} below -{clip_tol:g}"
        )
    r = (v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]) @ dagger(v)
    return 0.5 * (r + dagger(r))


def psd_sqrt(h, clip_tol=CLIP_TOL, *, backend=None):
    a = as_hermitian(h)
    if a.ndim != 2:
        raise DimensionMismatch("psd_sqrt expects a single matrix")
    return psd_sqrt_batch(a, clip_tol, check=False, backend=backend)


def op_norm_batch(m, *, backend=None):
    """Largest singular value of each matrix in a stack.

    Computed as the square root of the top eigenvalue of ``m^dagger m``.
    """
    a = as_cmatrix(m)
    gram = dagger(a) @ a
    gram = 0.5 * (gram + dagger(gram))
    w = eigvalsh_batch(gram, check=False, backend=backend)
    return np.sqrt(np.clip(w[..., -1], 0.0, None))


def op_norm(m, *, backend=None):
    a = as_cmatrix(m)
    if a.ndim != 2:
        raise DimensionMismatch("op_norm expects a single matrix")
    return float(op_norm_batch(a, backend=backend))


def kron(a, b, cap=KRON_CAP):
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    rows = a.shape[-2] * b.shape[-2]
    cols = a.shape[-1] * b.shape[-1]
    if rows > cap or cols > cap:
        raise DimensionOverflow(f"kron result {rows}x{cols} exceeds cap {cap}")
    return np.kron(a, b)


def partial_trace(m, dim_keep, dim_trace, traced="second"):
    """Trace out one factor of a bipartite operator on C^dk (x) C^dt.

    ``traced`` names the factor removed: ``"second"`` keeps the first factor of
    size ``dim_keep``; ``"first"`` keeps the second.
    """
    a = as_cmatrix(m)
    d = dim_keep * dim_trace
    if a.shape != (d, d):
        raise DimensionMismatch(
            f"matrix of shape {a.shape} does not factor as {dim_keep} x {dim_trace}"
        )
    if traced == "second":
        return np.einsum("ijkj->ik", a.reshape(dim_keep, dim_trace, dim_keep, dim_trace))
    if traced == "first":
        return np.einsum("jijk->ik", a.reshape(dim_trace, dim_keep, dim_trace, dim_keep))
    raise ValueError(f"traced must be 'first' or 'second', got {traced!r}")
