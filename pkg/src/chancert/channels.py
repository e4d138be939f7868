"""Quantum channels in Kraus and Choi form.

Conventions
-----------
The Choi matrix of a channel ``Phi`` on ``C^n`` is the channel applied to the
second half of the *normalized* maximally entangled state::

    J(Phi) = (1/n) sum_ij |i><j| (x) Phi(|i><j|)

so ``tr J = 1`` and the partial trace over the output (second) factor is
``I/n``. The first tensor factor is always the reference/input system.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import DimMismatch, NotChoi, NotCPTP, ShapeMismatch
from .numkernel import (
    PSD_TOL,
    RANK_TOL,
    as_cmatrix,
    check_square,
    hermitian_eig,
    partial_trace,
)

TP_TOL = 1e-8
STATE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian PSD unit-trace matrix. Validated on construction."""

    mat: np.ndarray

    def __post_init__(self):
        mat = check_square(self.mat)
        object.__setattr__(self, "mat", mat)
        values = hermitian_eig(mat).values
        if values[-1] < -PSD_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        if abs(np.trace(mat).real - 1) > STATE_TOL:
            raise ValueError("density matrix must have unit trace")

    @property
    def dim(self):
        return self.mat.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Channel given by Kraus operators ``rho -> sum_i K_i rho K_i^dagger``.

    Only shapes are checked here; trace preservation is checked by
    :func:`validate_cptp` and enforced by :func:`choi_of`.
    """

    kraus: tuple = field()

    def __post_init__(self):
        ops = tuple(as_cmatrix(K) for K in self.kraus)
        if not ops:
            raise ShapeMismatch("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(K.shape != shape for K in ops):
            raise ShapeMismatch("Kraus operators must share one shape")
        object.__setattr__(self, "kraus", ops)

    @property
    def dim_in(self):
        return self.kraus[0].shape[1]

    @property
    def dim_out(self):
        return self.kraus[0].shape[0]

    def __len__(self):
        return len(self.kraus)

    def __call__(self, rho):
        return apply(self, rho)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Normalized Choi matrix of a channel on ``C^dim`` (shape dim^2 x dim^2)."""

    mat: np.ndarray
    dim: int

    def __post_init__(self):
        mat = check_square(self.mat)
        if mat.shape[0] != self.dim**2:
            raise ShapeMismatch(
                f"Choi matrix for dim {self.dim} must be {self.dim**2}x{self.dim**2}"
            )
        object.__setattr__(self, "mat", mat)

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)


@dataclass(frozen=True)
class ValidationReport:
    residual: float
    tol: float
    passed: bool


def max_entangled(n):
    """Projector onto ``(1/sqrt n) sum_i |i>|i>`` as a ``DensityMatrix``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    psi = np.eye(n, dtype=complex).reshape(n * n) / np.sqrt(n)
    return DensityMatrix(np.outer(psi, psi.conj()))


def validate_cptp(ch, tol=TP_TOL):
    """Trace-preservation residual ``max|sum K^dagger K - I|``. Never raises."""
    ops = ch.kraus if isinstance(ch, KrausChannel) else [as_cmatrix(K) for K in ch]
    total = sum(K.conj().T @ K for K in ops)
    residual = float(np.max(np.abs(total - np.eye(total.shape[0]))))
    return ValidationReport(residual=residual, tol=tol, passed=residual <= tol)


def choi_of(ch):
    if ch.dim_in != ch.dim_out:
        raise DimMismatch("only channels with equal input and output dimension")
    report = validate_cptp(ch)
    if not report.passed:
        raise NotCPTP(f"trace-preservation residual {report.residual:.3e}")
    n = ch.dim_in
    # vec_K[i*n + o] = K[o, i], i.e. (I (x) K) applied to sum_i |i>|i>
    vecs = np.stack([K.T.reshape(n * n) for K in ch.kraus], axis=1)
    return ChoiMatrix((vecs @ vecs.conj().T) / n, n)


def check_choi(J, dim=None, tol=TP_TOL):
    """Raise ``NotChoi`` unless ``J`` is a valid normalized Choi matrix."""
    if not isinstance(J, ChoiMatrix):
        M = check_square(J)
        if dim is None:
            dim = int(round(np.sqrt(M.shape[0])))
        try:
            J = ChoiMatrix(M, dim)
        except ShapeMismatch as exc:
            raise NotChoi(str(exc)) from exc
    n = J.dim
    values = hermitian_eig(J.mat).values
    if values[-1] < -PSD_TOL:
        raise NotChoi("Choi matrix is not positive semidefinite")
    if abs(np.trace(J.mat).real - 1) > STATE_TOL:
        raise NotChoi("Choi matrix must have unit trace")
    marginal = partial_trace(J.mat, n, n, keep="A")
    if np.max(np.abs(marginal - np.eye(n) / n)) > tol:
        raise NotChoi("input marginal differs from I/n; map is not trace preserving")
    return J


def kraus_of(J, tol=RANK_TOL):
    """Kraus operators from the eigenpairs of ``n * J``.

    Each eigenvector with eigenvalue above ``tol`` is reshaped row-major with
    the input index leading, which gives the transpose of the Kraus operator.
    """
    J = check_choi(J)
    n = J.dim
    values, vectors = hermitian_eig(n * J.mat)
    ops = [
        np.sqrt(lam) * vectors[:, k].reshape(n, n).T
        for k, lam in enumerate(values)
        if lam > tol
    ]
    return KrausChannel(tuple(ops))


def apply(ch, rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise DimMismatch(f"state of shape {rho.shape} for a {ch.dim_in}-dim channel")
    out = sum(K @ rho @ K.conj().T for K in ch.kraus)
    return DensityMatrix(out)


def unitary_channel(U):
    return KrausChannel((as_cmatrix(U),))


# --- JSON file formats -----------------------------------------------------


def _encode(M):
    return [[float(z.real), float(z.imag)] for z in np.asarray(M).reshape(-1)]


def _decode(pairs, shape):
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] != shape[0] * shape[1]:
        raise ShapeMismatch(f"expected {shape[0] * shape[1]} [re, im] pairs")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(shape)


def channel_to_dict(ch):
    return {"dim": ch.dim_in, "kraus": [_encode(K) for K in ch.kraus]}


def choi_to_dict(J):
    return {"dim": J.dim, "choi": _encode(J.mat)}


def device_from_dict(data):
    """Decode either file format into a ``KrausChannel`` or ``ChoiMatrix``."""
    if not isinstance(data, dict) or "dim" not in data:
        raise ValueError("device JSON must be an object with a 'dim' field")
    n = int(data["dim"])
    if "kraus" in data:
        return KrausChannel(tuple(_decode(K, (n, n)) for K in data["kraus"]))
    if "choi" in data:
        return check_choi(ChoiMatrix(_decode(data["choi"], (n * n, n * n)), n))
    raise ValueError("device JSON needs either a 'kraus' or a 'choi' field")


def load_device(path):
    return device_from_dict(json.loads(Path(path).read_text()))


def save_device(device, path):
    data = choi_to_dict(device) if isinstance(device, ChoiMatrix) else channel_to_dict(device)
    Path(path).write_text(json.dumps(data))


def as_channel(device):
    """Accept either representation and return Kraus form."""
    if isinstance(device, ChoiMatrix):
        return kraus_of(device)
    return device
