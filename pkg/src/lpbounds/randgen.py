"""Random states, Haar unitaries and random POVMs.

All samplers take an explicit :class:`RngStream`; there is no module-level
random state. ``haar_unitaries(n, k, rng)`` equals ``k`` consecutive
``haar_unitary(n, rng)`` draws; the other batched samplers consume the stream
in their own (fixed) order.
"""
import numpy as np

from .matcore import dagger

__all__ = [
    "RngStream",
    "haar_unitary",
    "haar_unitaries",
    "random_pure_state",
    "random_pure_states",
    "random_mixed_state",
    "random_mixed_states",
    "random_povm_elements",
    "random_povm",
    "random_pvm_elements",
    "random_pvm",
]

_U64 = (1 << 64) - 1


class RngStream:
    """Counter-based random stream keyed by ``(seed, stream_id)``.

    Backed by the Philox-4x64 generator with the two 64-bit words of its key
    set to the seed and the stream id; the counter starts at zero. Distinct
    stream ids give independent sequences, which is how parallel trials stay
    reproducible regardless of scheduling.
    """

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed, stream_id=0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not (0 <= seed <= _U64 and 0 <= stream_id <= _U64):
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = seed
        self.stream_id = stream_id
        key = np.array([seed, stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def substream(self, stream_id):
        """A fresh stream with the same seed and a different id."""
        return RngStream(self.seed, stream_id)

    def normal(self, shape):
        return self._gen.standard_normal(shape)

    def complex_normal(self, shape):
        """i.i.d. standard complex Gaussians, ``E|z|^2 = 1``."""
        shape = (int(shape),) if np.isscalar(shape) else tuple(shape)
        x = self._gen.standard_normal(shape + (2,))
        return (x[..., 0] + 1j * x[..., 1]) / np.sqrt(2.0)

    def uniform(self, shape, low=0.0, high=1.0):
        return self._gen.uniform(low, high, shape)


def haar_unitaries(n, count, rng):
    """``count`` Haar-distributed ``n x n`` unitaries, shape ``(count, n, n)``.

    QR of a Ginibre matrix, with the columns of Q rephased by the phases of
    R's diagonal so the result is exactly Haar rather than QR-convention
    biased.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    z = rng.complex_normal((count, n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    ph = d / np.abs(d)
    return q * ph[:, None, :]


def haar_unitary(n, rng):
    return haar_unitaries(n, 1, rng)[0]


def random_pure_states(n, count, rng):
    """Uniform random unit vectors in C^n, shape ``(count, n)``.

    Follows the two-step recipe literally: normalise a complex Gaussian vector,
    then multiply by independent uniform phases. For complex Gaussians the
    phase step does not change the distribution; it is kept so the draw
    sequence matches that recipe.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    phi = rng.complex_normal((count, n))
    phi = phi / np.linalg.norm(phi, axis=1, keepdims=True)
    theta = rng.uniform((count, n), 0.0, 2.0 * np.pi)
    return np.exp(1j * theta) * phi


def random_pure_state(n, rng):
    return random_pure_states(n, 1, rng)[0]


def random_mixed_states(n, count, rng, method="spectral", weights=None):
    """Random density matrices, shape ``(count, n, n)``.

    ``spectral``: Haar eigenbasis with eigenvalues drawn uniformly on [0, 1]
    and renormalised. ``wishart``: ``M M^dagger / Tr(M M^dagger)`` for complex
    Gaussian ``M``. ``weights`` overrides the spectral eigenvalues (test hook).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if method == "spectral":
        u = haar_unitaries(n, count, rng)
        if weights is None:
            alpha = rng.uniform((count, n))
        else:
            alpha = np.broadcast_to(np.asarray(weights, dtype=float), (count, n))
        alpha = alpha / alpha.sum(axis=1, keepdims=True)
        rho = (u * alpha[:, None, :]) @ dagger(u)
    elif method == "wishart":
        m = rng.complex_normal((count, n, n))
        rho = m @ dagger(m)
        rho = rho / np.trace(rho, axis1=1, axis2=2).real[:, None, None]
    else:
        raise ValueError(f"unknown mixed-state method {method!r}")
    return 0.5 * (rho + dagger(rho))


def random_mixed_state(n, rng, method="spectral", weights=None):
    from .measure import DensityOperator

    return DensityOperator(random_mixed_states(n, 1, rng, method, weights)[0])


def random_povm_elements(n, n_outcomes, rng, deltas=None):
    """Elements of a random POVM by the recursive construction.

    With Haar ``U_i``, diagonal ``D_i`` uniform on [0, 1], ``R_1 = I`` and
    ``R_{i+1} = R_i U_i sqrt(I - D_i)``::

        A_i     = R_i U_i D_i U_i^dagger R_i^dagger        (i < m)
        A_m     = R_{m-1} U_{m-1} (I - D_{m-1}) U_{m-1}^dagger R_{m-1}^dagger

    The sum telescopes to the identity and the elements do not share an
    eigenbasis. ``deltas`` (shape ``(m-1, n)``) overrides the diagonals.
    Returns an array of shape ``(n_outcomes, n, n)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n_outcomes < 2:
        raise ValueError("n_outcomes must be >= 2")
    k = n_outcomes - 1
    us = haar_unitaries(n, k, rng)
    if deltas is None:
        ds = rng.uniform((k, n))
    else:
        ds = np.asarray(deltas, dtype=float).reshape(k, n)
    out = np.empty((n_outcomes, n, n), dtype=np.complex128)
    r = np.eye(n, dtype=np.complex128)
    for i in range(k):
        w = r @ us[i]
        out[i] = (w * ds[i]) @ dagger(w)
        r = w * np.sqrt(1.0 - ds[i])
    out[k] = r @ dagger(r)
    return 0.5 * (out + dagger(out))


def random_povm(n, n_outcomes, rng, deltas=None):
    from .measure import Povm

    return Povm(random_povm_elements(n, n_outcomes, rng, deltas))


def random_pvm_elements(n, rng, unitary=None):
    """Rank-one projectors onto the columns of a Haar unitary, ``(n, n, n)``."""
    u = haar_unitary(n, rng) if unitary is None else np.asarray(unitary, dtype=np.complex128)
    cols = u.T
    return cols[:, :, None] * np.conj(cols[:, None, :])


def random_pvm(n, rng, unitary=None):
    from .measure import Povm

    return Povm(random_pvm_elements(n, rng, unitary))
