"""Independent cross-checks for the measure module.

Two proof constructions are made executable here: the dilation of POVM
elements into projectors on C^N (+) C^N (+) C^N, and the purification of a
mixed state on C^N (x) C^N. Both must reproduce the probabilities (hence the
uncertainties) of the direct computation. The sampling oracles maximise over
explicit states and never call the eigensolver on the quantity they check.
"""
from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import EigenvalueOutOfUnitInterval
from .matcore import dagger
from .measure import DensityOperator, Povm, snap_unit
from .metrics import get_kernel
from .randgen import random_pure_states

__all__ = [
    "PurifiedState",
    "EmbeddedProjectorPair",
    "purify",
    "embed_povm",
    "embed_state",
    "dilate_element",
    "embedded_uncertainties",
    "purified_uncertainties",
    "direct_uncertainties",
    "oracle_max_state_prob",
    "sampled_max_state_prob",
    "oracle_overlap",
    "classical_lpi",
]

UNIT_TOL = 1e-10
ORACLE_SAMPLES = 100_000
ORACLE_CHUNK = 10_000


@dataclass(frozen=True)
class PurifiedState:
    dim_system: int
    dim_aux: int
    vector: np.ndarray

    def density(self):
        return np.outer(self.vector, np.conj(self.vector))

    def reduced(self):
        """Partial trace over the auxiliary factor."""
        return matcore.partial_trace(self.density(), self.dim_system, self.dim_aux, "second")


def purify(rho):
    """``|Phi'> = sum_l sqrt(rho_l) |l> (x) |l_aux>`` with the computational aux basis.

    Eigenvalues are taken in descending order, so the dominant eigenvector
    pairs with the first aux basis vector.
    """
    m = rho.matrix if isinstance(rho, DensityOperator) else matcore.as_hermitian(rho)
    n = m.shape[0]
    w, v = matcore.eigh(m)
    w, v = w[::-1], v[:, ::-1]
    amp = np.sqrt(np.clip(w, 0.0, None))
    vec = np.zeros(n * n, dtype=np.complex128)
    for l in range(n):
        aux = np.zeros(n)
        aux[l] = 1.0
        vec += amp[l] * np.kron(v[:, l], aux)
    return PurifiedState(n, n, vec)


def dilate_element(a):
    """Spectrally clamped ``(A, I - A, sqrt(A (I - A)))`` for a POVM element.

    Eigenvalues must lie in ``[-1e-10, 1 + 1e-10]``; they are clamped to
    [0, 1] before the blocks are formed so the dilation is exactly consistent.
    """
    w, v = matcore.eigh(a)
    if w[0] < -UNIT_TOL or w[-1] > 1.0 + UNIT_TOL:
        raise EigenvalueOutOfUnitInterval(
            f"element eigenvalues span [{w[0]:.3e}, {w[-1]:.17g}], outside [0, 1]"
        )
    w = np.clip(w, 0.0, 1.0)

    def recompose(vals):
        r = (v * vals) @ dagger(v)
        return 0.5 * (r + dagger(r))

    return recompose(w), recompose(1.0 - w), recompose(np.sqrt(w * (1.0 - w)))


@dataclass(frozen=True)
class EmbeddedProjectorPair:
    dim_extended: int
    p_blocks: np.ndarray
    q_blocks: np.ndarray

    def idempotency_deviation(self):
        dev = 0.0
        for blocks in (self.p_blocks, self.q_blocks):
            dev = max(dev, float(np.max(np.abs(blocks @ blocks - blocks))))
        return dev

    def as_povms(self):
        # The projectors do not resolve the identity on the extended space.
        return Povm(self.p_blocks, check=False), Povm(self.q_blocks, check=False)


def embed_povm(a, b):
    """Dilate POVM elements into projectors on C^{3N}.

    ``P_i = [[A, S, 0], [S, I-A, 0], [0, 0, 0]]`` and
    ``Q_j = [[B, 0, T], [0, 0, 0], [T, 0, I-B]]`` with ``S = sqrt(A(I-A))``,
    ``T = sqrt(B(I-B))``; the A-dilation uses the first auxiliary copy and the
    B-dilation the second.
    """
    n = a.dim
    z = np.zeros((n, n), dtype=np.complex128)
    ps = []
    for el in a.elements:
        e, c, s = dilate_element(el)
        ps.append(np.block([[e, s, z], [s, c, z], [z, z, z]]))
    qs = []
    for el in b.elements:
        e, c, s = dilate_element(el)
        qs.append(np.block([[e, z, s], [z, z, z], [s, z, c]]))
    return EmbeddedProjectorPair(3 * n, np.array(ps), np.array(qs))


def embed_state(psi):
    """``|Psi> (+) 0 (+) 0``."""
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    return np.concatenate([psi, np.zeros(2 * psi.size, dtype=np.complex128)])


def _expectations(ops, vec):
    return np.einsum("i,kij,j->k", np.conj(vec), ops, vec).real


def direct_uncertainties(k, a, b, rho):
    """``(U_f(A), U_f(B))`` from ``Tr(A_i rho)`` directly."""
    k = get_kernel(k)
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    pa = snap_unit(np.einsum("kij,ji->k", a.elements, m).real).max()
    pb = snap_unit(np.einsum("kij,ji->k", b.elements, m).real).max()
    return float(k.f(pa)), float(k.f(pb))


def embedded_uncertainties(k, pair, psi):
    """Uncertainties from ``<Phi|P_i|Phi>`` on the dilated space."""
    k = get_kernel(k)
    phi = embed_state(psi)
    pa = snap_unit(_expectations(pair.p_blocks, phi)).max()
    pb = snap_unit(_expectations(pair.q_blocks, phi)).max()
    return float(k.f(pa)), float(k.f(pb))


def purified_uncertainties(k, a, b, rho):
    """Uncertainties from ``<Phi'|A_i (x) I|Phi'>`` on the purification."""
    k = get_kernel(k)
    pure = purify(rho)
    eye = np.eye(pure.dim_aux)
    la = np.array([matcore.kron(el, eye) for el in a.elements])
    lb = np.array([matcore.kron(el, eye) for el in b.elements])
    pa = snap_unit(_expectations(la, pure.vector)).max()
    pb = snap_unit(_expectations(lb, pure.vector)).max()
    return float(k.f(pa)), float(k.f(pb))


def oracle_max_state_prob(element):
    """``max_rho Tr(A rho) = lambda_max(A)``."""
    return float(matcore.eigh(element)[0][-1])


def sampled_max_state_prob(element, n_samples, rng):
    """Largest ``<Psi|A|Psi>`` over random pure states; approaches lambda_max from below."""
    a = matcore.as_hermitian(element)
    best = -np.inf
    left = n_samples
    while left > 0:
        size = min(left, ORACLE_CHUNK)
        psi = random_pure_states(a.shape[0], size, rng)
        vals = np.einsum("si,ij,sj->s", np.conj(psi), a, psi).real
        best = max(best, float(vals.max()))
        left -= size
    return best


def oracle_overlap(a, b, n_samples=ORACLE_SAMPLES, rng=None, refine_steps=20):
    """Lower bound on ``c_AB`` from explicit states.

    For every pair ``(i, j)`` the norm ``||sqrt(A_i) sqrt(B_j) Psi||`` is
    maximised over ``n_samples`` random unit vectors. The best vector per pair
    is then improved by ``refine_steps`` power iterations on ``M^dagger M``;
    every candidate is a genuine unit vector, so the result never exceeds the
    true overlap. Square roots come from :func:`matcore.psd_sqrt_batch`, the
    operator norm itself never touches the eigensolver.
    """
    from .randgen import RngStream

    rng = rng or RngStream(0, 0)
    sa = matcore.psd_sqrt_batch(a.elements)
    sb = matcore.psd_sqrt_batch(b.elements)
    mats = (sa[:, None] @ sb[None, :]).reshape(-1, a.dim, a.dim)
    best_val = np.full(mats.shape[0], -np.inf)
    best_vec = np.zeros((mats.shape[0], a.dim), dtype=np.complex128)
    left = n_samples
    while left > 0:
        size = min(left, ORACLE_CHUNK)
        psi = random_pure_states(a.dim, size, rng)
        norms = np.linalg.norm(np.einsum("pij,sj->psi", mats, psi), axis=2)
        idx = norms.argmax(axis=1)
        vals = norms[np.arange(mats.shape[0]), idx]
        better = vals > best_val
        best_val = np.where(better, vals, best_val)
        best_vec[better] = psi[idx[better]]
        left -= size
    gram = dagger(mats) @ mats
    vec = best_vec
    for _ in range(refine_steps):
        nxt = np.einsum("pij,pj->pi", gram, vec)
        nn = np.linalg.norm(nxt, axis=1, keepdims=True)
        ok = nn[:, 0] > 0
        vec = np.where(ok[:, None], nxt / np.where(nn > 0, nn, 1.0), vec)
        vals = np.linalg.norm(np.einsum("pij,pj->pi", mats, vec), axis=1)
        best_val = np.maximum(best_val, vals)
    return float(best_val.max())


def classical_lpi(u_a, u_b, psi):
    """Textbook form from eigenbases and a pure state.

    ``u_a``/``u_b`` hold eigenvectors as columns. Returns
    ``(arccos max_i |<a_i|psi>| + arccos max_j |<b_j|psi>|, arccos c)`` with
    ``c = max_ij |<a_i|b_j>|``.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    amp_a = np.abs(np.conj(u_a).T @ psi).max()
    amp_b = np.abs(np.conj(u_b).T @ psi).max()
    c = np.abs(np.conj(u_a).T @ u_b).max()
    lhs = np.arccos(min(amp_a, 1.0)) + np.arccos(min(amp_b, 1.0))
    return float(lhs), float(np.arccos(min(c, 1.0)))
