"""Seeded sampling of random channels and states.

All samplers take an explicit ``numpy.random.Generator``. ``make_rng``
builds one on the PCG64 bit generator; ``spawn_rng`` derives independent
per-task streams from a root seed so results do not depend on the order in
which tasks run.
"""

import numpy as np

from .channels import ChoiMatrix, DensityMatrix
from .exceptions import SingularMarginal
from .numkernel import partial_trace

MAX_RESAMPLES = 100
MARGINAL_TOL = 1e-12


def make_rng(seed):
    """PCG64 generator for a seed, ``SeedSequence`` or existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rng(seed, *key):
    """Independent stream identified by ``(seed, *key)``."""
    return make_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def ginibre(rows, cols, rng):
    """Matrix of i.i.d. complex Gaussians with unit-variance real and
    imaginary parts (so ``E|g|^2 = 2``)."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    rng = make_rng(rng)
    z = rng.standard_normal((rows, cols, 2))
    return z[..., 0] + 1j * z[..., 1]


def _inv_sqrt(Y):
    values, vectors = np.linalg.eigh(Y)
    return (vectors / np.sqrt(values)) @ vectors.conj().T, values[0]


def random_choi(n, kraus_rank, rng):
    """Random Choi matrix with the requested Kraus rank.

    ``W = G G^dagger`` for a Ginibre ``G`` of shape ``(n^2, kraus_rank)``;
    the input marginal ``Y = tr_out W`` is whitened on the first factor so
    that ``tr_out J = I/n``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 1 <= kraus_rank <= n * n:
        raise ValueError(f"kraus_rank must lie in 1..{n * n}")
    rng = make_rng(rng)
    for _ in range(MAX_RESAMPLES):
        G = ginibre(n * n, kraus_rank, rng)
        W = G @ G.conj().T
        Y = partial_trace(W, n, n, keep="A")
        Y_inv_sqrt, smallest = _inv_sqrt((Y + Y.conj().T) / 2)
        if smallest < MARGINAL_TOL:
            continue
        # Whiten G itself so that J = A A^dagger is PSD by construction.
        A = np.kron(Y_inv_sqrt, np.eye(n)) @ G
        J = A @ A.conj().T / n
        return ChoiMatrix((J + J.conj().T) / 2, n)
    raise SingularMarginal(f"no well-conditioned marginal in {MAX_RESAMPLES} draws")


def random_density(d, rank, rng):
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in 1..{d}")
    G = ginibre(d, rank, rng)
    W = G @ G.conj().T
    W = (W + W.conj().T) / 2
    return DensityMatrix(W / np.trace(W).real)


def random_unitary(d, rng):
    """Haar unitary via QR of a Ginibre matrix with phase correction."""
    Q, R = np.linalg.qr(ginibre(d, d, rng))
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases
