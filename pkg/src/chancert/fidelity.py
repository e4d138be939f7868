"""Similarity functionals between density matrices.

``fidelity`` is the root fidelity ``tr sqrt(sqrt(rho) sigma sqrt(rho))``.
Sub- and super-fidelity bound its *square*::

    sub_fidelity <= fidelity**2 <= super_fidelity

while the truncated bounds sandwich the root fidelity itself.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import BadRank, DimMismatch, DomainError
from .numkernel import check_square, hermitian_eig, psd_sqrt

CLAMP_TOL = 1e-12
_EPS = np.finfo(float).eps
#: Discarded trace weight below this is rounding noise, not spectrum.
WEIGHT_FLOOR = 1e-13


@dataclass(frozen=True)
class TruncatedBounds:
    m: int
    lower: float
    upper: float


@dataclass
class BoundsReport:
    """Every similarity quantity for one pair of states.

    Fields the producing pipeline cannot supply (for instance the exact
    fidelity in a shot-based SSFB run) are left as ``None``.
    """

    f_root: float | None = None
    f_sq: float | None = None
    sub: float | None = None
    sup: float | None = None
    c_g: float | None = None
    a_g2: float | None = None
    spectrum: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _pair(rho, sigma):
    rho = check_square(np.asarray(rho, dtype=complex))
    sigma = check_square(np.asarray(sigma, dtype=complex))
    if rho.shape != sigma.shape:
        raise DimMismatch(f"shapes {rho.shape} and {sigma.shape} differ")
    return rho, sigma


def clamped_sqrt(x, tol=CLAMP_TOL, scale=0.0):
    """``sqrt(x)`` with ``x`` in ``[-tol, 0)`` clamped to zero.

    ``scale`` is the magnitude of the terms whose difference produced ``x``;
    values within rounding of it are treated as exact zeros.
    """
    if abs(x) <= 64 * _EPS * scale:
        return 0.0
    if x < 0:
        if x < -tol:
            raise DomainError(f"square root of {x:.3e}")
        return 0.0
    return float(np.sqrt(x))


def clamped_arccos(x, tol=CLAMP_TOL):
    if x < -1 - tol or x > 1 + tol:
        raise DomainError(f"arccos of {x!r}")
    return float(np.arccos(min(1.0, max(-1.0, x))))


def _root_fidelity(rho, sigma):
    return float(np.linalg.svd(psd_sqrt(rho) @ psd_sqrt(sigma), compute_uv=False).sum())


def fidelity(rho, sigma):
    """Root fidelity ``||sqrt(rho) sqrt(sigma)||_1``.

    Subnormalized PSD operands are accepted as-is; nothing is renormalized.
    """
    rho, sigma = _pair(rho, sigma)
    return _root_fidelity(rho, sigma)


def overlap(rho, sigma):
    """``tr(rho sigma)`` as a real number."""
    rho, sigma = _pair(rho, sigma)
    return float(np.einsum("ij,ji->", rho, sigma).real)


def sub_fidelity(rho, sigma):
    rho, sigma = _pair(rho, sigma)
    prod = rho @ sigma
    t1 = np.trace(prod).real
    t2 = np.einsum("ij,ji->", prod, prod).real
    # rounding in t2 follows the operand norms, not the (possibly tiny) overlap
    scale = np.linalg.norm(rho) ** 2 * np.linalg.norm(sigma) ** 2
    return sub_fidelity_from_moments(t1, t2, scale)


def sub_fidelity_from_moments(tr_rs, tr_rs_sq, scale=None):
    """Sub-fidelity from ``tr(rho sigma)`` and ``tr((rho sigma)^2)``.

    ``scale`` bounds the magnitude of the moments' rounding error and
    defaults to ``tr(rho sigma)^2``.
    """
    radicand = 2 * (tr_rs**2 - tr_rs_sq)
    if scale is None:
        scale = tr_rs**2
    return float(tr_rs + clamped_sqrt(radicand, scale=max(scale, tr_rs**2)))


def super_fidelity(rho, sigma):
    rho, sigma = _pair(rho, sigma)
    t = np.einsum("ij,ji->", rho, sigma).real
    p_rho = np.einsum("ij,ji->", rho, rho).real
    p_sigma = np.einsum("ij,ji->", sigma, sigma).real
    return super_fidelity_from_moments(t, p_rho, p_sigma)


def super_fidelity_from_moments(tr_rs, purity_rho, purity_sigma):
    deficit = clamped_sqrt(1 - purity_rho, scale=1.0) * clamped_sqrt(1 - purity_sigma, scale=1.0)
    return float(tr_rs + deficit)


def _truncated_from_basis(rho, sigma, vectors, m):
    Vm = vectors[:, :m]
    # Compressions to the m-dim subspace have the same fidelity and traces as
    # the projected operators and avoid spurious sqrt(eps) contributions.
    rho_m = Vm.conj().T @ rho @ Vm
    sigma_m = Vm.conj().T @ sigma @ Vm
    rho_m = (rho_m + rho_m.conj().T) / 2
    sigma_m = (sigma_m + sigma_m.conj().T) / 2
    lower = _root_fidelity(rho_m, sigma_m)
    rest_rho = 1 - np.trace(rho_m).real
    rest_sigma = 1 - np.trace(sigma_m).real
    if abs(rest_rho) < WEIGHT_FLOOR or abs(rest_sigma) < WEIGHT_FLOOR:
        return TruncatedBounds(m=m, lower=lower, upper=lower)
    return TruncatedBounds(m=m, lower=lower, upper=lower + clamped_sqrt(rest_rho * rest_sigma))


def truncated_bounds(rho, sigma, m, basis=None):
    """Truncated-fidelity lower bound and its matching upper bound.

    Both operators are projected onto the span of the first ``m`` columns of
    ``basis``; by default that is the top-``m`` eigenvectors of ``rho``.
    """
    rho, sigma = _pair(rho, sigma)
    d = rho.shape[0]
    if not 1 <= m <= d:
        raise BadRank(f"m={m} outside 1..{d}")
    vectors = hermitian_eig(rho).vectors if basis is None else np.asarray(basis)
    return _truncated_from_basis(rho, sigma, vectors, m)


def fidelity_spectrum(rho, sigma, basis=None):
    rho, sigma = _pair(rho, sigma)
    vectors = hermitian_eig(rho).vectors if basis is None else np.asarray(basis)
    return [_truncated_from_basis(rho, sigma, vectors, m) for m in range(1, rho.shape[0] + 1)]


def cg_from_super(g):
    return clamped_sqrt(1 - g)


def cg_distance(J0, J1):
    return cg_from_super(super_fidelity(J0, J1))


def a_g2(J0, J1):
    """``arccos`` of ``cg_distance``, exactly as the distance is defined.

    Note this gives pi/2 for identical channels, not 0.
    """
    return clamped_arccos(cg_distance(J0, J1))


def bounds_report(rho, sigma):
    f = fidelity(rho, sigma)
    g = super_fidelity(rho, sigma)
    c = cg_from_super(g)
    return BoundsReport(
        f_root=f,
        f_sq=f * f,
        sub=sub_fidelity(rho, sigma),
        sup=g,
        c_g=c,
        a_g2=clamped_arccos(c),
        spectrum=fidelity_spectrum(rho, sigma),
    )
