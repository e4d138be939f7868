"""Classical emulation of variational state diagonalization.

A layered hardware-efficient ansatz ``U(theta)`` is trained so that
``U rho U^dagger`` is diagonal, by minimizing::

    C(theta) = tr(rho^2) - sum_i (U rho U^dagger)_ii^2

which is non-negative and vanishes exactly on diagonalizing unitaries. The
optimizer is derivative-free coordinate descent with a golden-section line
search per angle.

Expectation values are computed exactly from the matrices; there is no shot
noise in this module.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import BadShape, DimMismatch, NoConvergence, NonRealObservable, NotUnitary
from .numkernel import check_square, hermitian_eig, is_unitary
from .randchan import spawn_rng

_I2 = np.eye(2, dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.diag([1.0 + 0j, -1.0])
_INV_PHI = (np.sqrt(5) - 1) / 2


@dataclass
class Ansatz:
    """Layered ansatz on ``num_qubits`` qubits.

    Each layer applies RY then RZ to every qubit and then a ring of CZ
    gates between neighbours. The circuit ends with the product of all the
    CZ rings (a fixed +-1 diagonal), so zero angles give the identity; a
    diagonal output phase does not change the diagonalization cost. ``params`` is laid out layer by layer, qubit by
    qubit, as ``(theta_y, theta_z)`` pairs.
    """

    num_qubits: int
    layers: int
    params: np.ndarray = None

    def __post_init__(self):
        if self.num_qubits < 1 or self.layers < 1:
            raise BadShape("num_qubits and layers must be positive")
        n_params = 2 * self.num_qubits * self.layers
        if self.params is None:
            self.params = np.zeros(n_params)
        self.params = np.asarray(self.params, dtype=float).reshape(-1)
        if self.params.size != n_params:
            raise BadShape(f"expected {n_params} parameters, got {self.params.size}")

    @property
    def dim(self):
        return 2**self.num_qubits

    @property
    def n_params(self):
        return self.params.size


@dataclass
class OptimizerConfig:
    max_iters: int = 2000
    tol: float = 1e-8
    restarts: int = 5
    # Initial angles are drawn uniformly from [-step_init, step_init].
    step_init: float = np.pi
    seed: int = 0

    def __post_init__(self):
        if min(self.max_iters, self.restarts) < 1 or self.tol <= 0 or self.step_init <= 0:
            raise ValueError("optimizer settings must be positive")


@dataclass
class DiagonalizationResult:
    eigenvalue_estimates: np.ndarray
    basis: np.ndarray
    final_cost: float
    iterations_used: int
    converged: bool = True
    params: np.ndarray = field(default=None, repr=False)


def _embed(op, qubit, num_qubits):
    out = np.ones((1, 1), dtype=complex)
    for q in range(num_qubits):
        out = np.kron(out, op if q == qubit else _I2)
    return out


def _cz_ring(num_qubits):
    if num_qubits == 1:
        return None
    if num_qubits == 2:
        pairs = [(0, 1)]
    else:
        pairs = [(q, (q + 1) % num_qubits) for q in range(num_qubits)]
    bits = (np.arange(2**num_qubits)[:, None] >> (num_qubits - 1 - np.arange(num_qubits))) & 1
    phase = np.ones(2**num_qubits)
    for a, b in pairs:
        phase[(bits[:, a] & bits[:, b]) == 1] *= -1
    return np.diag(phase.astype(complex))


def _circuit(num_qubits, layers):
    """Gate list in application order: ``(pauli, param_index)`` for rotations,
    ``(matrix, None)`` for the fixed entangler."""
    paulis = {(q, p): _embed(P, q, num_qubits) for q in range(num_qubits) for p, P in enumerate((_Y, _Z))}
    ring = _cz_ring(num_qubits)
    gates = []
    for layer in range(layers):
        for q in range(num_qubits):
            base = 2 * (layer * num_qubits + q)
            gates.append((paulis[q, 0], base))
            gates.append((paulis[q, 1], base + 1))
        if ring is not None:
            gates.append((ring, None))
    if ring is not None and layers % 2:
        gates.append((ring, None))
    return gates


def _rotation(pauli, theta):
    return np.cos(theta / 2) * np.eye(pauli.shape[0]) - 1j * np.sin(theta / 2) * pauli


def _gate_matrices(gates, params):
    return [G if k is None else _rotation(G, params[k]) for G, k in gates]


def ansatz_unitary(a):
    U = np.eye(a.dim, dtype=complex)
    for G in _gate_matrices(_circuit(a.num_qubits, a.layers), a.params):
        U = G @ U
    return U


def _as_density(rho, dim=None):
    rho = check_square(np.asarray(rho, dtype=complex))
    if dim is not None and rho.shape[0] != dim:
        raise DimMismatch(f"state of dim {rho.shape[0]} for an ansatz of dim {dim}")
    return rho


def _purity(rho):
    return float(np.einsum("ij,ji->", rho, rho).real)


def basis_cost(rho, basis):
    """Diagonalization cost of ``rho`` when expressed in ``basis`` (columns)."""
    rho = _as_density(rho)
    d = np.einsum("ji,jk,ki->i", basis.conj(), rho, basis).real
    return _purity(rho) - float(d @ d)


def cost(a, rho):
    rho = _as_density(rho, a.dim)
    return basis_cost(rho, ansatz_unitary(a).conj().T)


def _num_qubits_for(dim):
    q = int(round(np.log2(dim)))
    if 2**q != dim:
        raise BadShape(f"dimension {dim} is not a power of two")
    return q


def _golden_min(f, lo, hi, xtol=1e-9):
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def _line_search(d0, d1, d2, current, grid=24):
    """Minimize ``-sum d(theta)^2`` with
    ``d(theta) = cos^2(theta/2) d0 + sin^2(theta/2) d1 + cos sin d2``.

    A coarse grid over [-pi, pi] picks the basin, golden section refines it.
    """
    a00, a11, a22 = float(d0 @ d0), float(d1 @ d1), float(d2 @ d2)
    a01, a02, a12 = float(d0 @ d1), float(d0 @ d2), float(d1 @ d2)
    cs_coef = a22 + 2 * a01

    def f(theta):
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        cc, ss, cs = c * c, s * s, c * s
        return -(cc * cc * a00 + ss * ss * a11 + cs * cs * cs_coef
                 + 2 * cs * (cc * a02 + ss * a12))

    thetas = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    values = [f(t) for t in thetas]
    k = int(np.argmin(values))
    h = 2 * np.pi / grid
    theta, value = _golden_min(f, thetas[k] - h, thetas[k] + h)
    theta = (theta + np.pi) % (2 * np.pi) - np.pi
    f_cur = f(current)
    return (theta, value) if value < f_cur else (current, f_cur)


def _sweep(gates, params, rho):
    """One coordinate-descent pass over every angle, in circuit order."""
    mats = _gate_matrices(gates, params)
    dim = rho.shape[0]
    suffix = [None] * (len(mats) + 1)
    suffix[-1] = np.eye(dim, dtype=complex)
    for k in range(len(mats) - 1, -1, -1):
        suffix[k] = suffix[k + 1] @ mats[k]
    # suffix[k] = G_K ... G_k ; the part applied after gate k is suffix[k + 1]
    state = rho
    for k, (G, idx) in enumerate(gates):
        if idx is not None:
            A = suffix[k + 1]
            PS = G @ state
            SP = state @ G
            Ac = A.conj()
            diag = lambda X: ((A @ X) * Ac).sum(axis=1).real
            d0 = diag(state)
            d1 = diag(PS @ G)
            d2 = diag(1j * (SP - PS))
            params[idx], _ = _line_search(d0, d1, d2, params[idx])
            mats[k] = _rotation(G, params[idx])
        state = mats[k] @ state @ mats[k].conj().T
    return params


def _result_from(rho, U, final_cost, iterations, converged, params):
    diag = np.einsum("ij,jk,ik->i", U, rho, U.conj()).real
    order = np.argsort(diag)[::-1]
    estimates = np.clip(diag[order], 0.0, None)
    estimates = estimates / estimates.sum()
    basis = U.conj().T[:, order]
    return DiagonalizationResult(estimates, basis, final_cost, iterations, converged, params)


def _optimize(rho, gates, params, cfg):
    purity = _purity(rho)
    num_qubits = _num_qubits_for(rho.shape[0])
    layers = len(params) // (2 * num_qubits)
    current = cost(Ansatz(num_qubits, layers, params), rho)
    it = 0
    while current > cfg.tol and it < cfg.max_iters:
        params = _sweep(gates, params, rho)
        it += 1
        new = cost(Ansatz(num_qubits, layers, params), rho)
        if new >= current - 1e-16 * purity and new > cfg.tol:
            current = min(current, new)
            break
        current = new
    return params, current, it


def diagonalize(rho, cfg=None, layers=None, raise_on_failure=True):
    """Variationally diagonalize a ``2^q``-dimensional density matrix.

    Restarts use independent random streams derived from ``cfg.seed`` and
    stop at the first run whose cost reaches ``cfg.tol``; otherwise the run
    with the lowest cost is reported (or attached to ``NoConvergence``).
    """
    cfg = cfg or OptimizerConfig()
    rho = _as_density(rho)
    num_qubits = _num_qubits_for(rho.shape[0])
    layers = layers or 2 * num_qubits
    gates = _circuit(num_qubits, layers)
    n_params = 2 * num_qubits * layers

    zero = Ansatz(num_qubits, layers)
    zero_cost = cost(zero, rho)
    if zero_cost <= cfg.tol:
        return _result_from(rho, np.eye(rho.shape[0], dtype=complex), zero_cost, 0, True, zero.params)

    best = None
    for restart in range(cfg.restarts):
        rng = spawn_rng(cfg.seed, restart)
        start = rng.uniform(-cfg.step_init, cfg.step_init, n_params)
        params, final, iters = _optimize(rho, gates, start.copy(), cfg)
        if best is None or final < best[1]:
            best = (params, final, iters)
        if final <= cfg.tol:
            break
    params, final, iters = best
    U = ansatz_unitary(Ansatz(num_qubits, layers, params))
    result = _result_from(rho, U, final, iters, final <= cfg.tol, params)
    if not result.converged and raise_on_failure:
        raise NoConvergence(f"best cost {final:.3e} above tol {cfg.tol:g}", result)
    return result


def project_in_basis(sigma, basis, tol=1e-9):
    """Diagonal of ``basis^dagger sigma basis``."""
    sigma = _as_density(sigma)
    basis = check_square(basis)
    if basis.shape != sigma.shape:
        raise DimMismatch(f"basis {basis.shape} for a state of shape {sigma.shape}")
    if not is_unitary(basis):
        raise NotUnitary("basis columns are not orthonormal")
    d = np.einsum("ji,jk,ki->i", basis.conj(), sigma, basis)
    if np.max(np.abs(d.imag)) > tol:
        raise NonRealObservable("diagonal elements have non-negligible imaginary parts")
    return d.real


def exact_oracle(rho):
    values, vectors = hermitian_eig(_as_density(rho))
    estimates = np.clip(values, 0.0, None)
    return DiagonalizationResult(estimates / estimates.sum(), vectors, 0.0, 0, True)


class VariationalDiagonalizer(TransformerMixin, BaseEstimator):
    """Estimator wrapper: ``fit`` learns the eigenbasis of a state,
    ``transform`` returns the diagonal of another state in that basis.

    Setting ``exact=True`` swaps the variational search for a direct
    eigendecomposition, which is useful as a reference.
    """

    def __init__(self, layers=None, max_iters=2000, tol=1e-8, restarts=5,
                 step_init=np.pi, seed=0, exact=False, raise_on_failure=False):
        self.layers = layers
        self.max_iters = max_iters
        self.tol = tol
        self.restarts = restarts
        self.step_init = step_init
        self.seed = seed
        self.exact = exact
        self.raise_on_failure = raise_on_failure

    def _config(self):
        return OptimizerConfig(self.max_iters, self.tol, self.restarts, self.step_init, self.seed)

    def fit(self, X, y=None):
        X = _as_density(X)
        if self.exact:
            self.result_ = exact_oracle(X)
        else:
            self.result_ = diagonalize(X, self._config(), self.layers, self.raise_on_failure)
        self.eigenvalues_ = self.result_.eigenvalue_estimates
        self.basis_ = self.result_.basis
        self.converged_ = self.result_.converged
        return self

    def transform(self, X):
        check_is_fitted(self, "basis_")
        return project_in_basis(X, self.basis_)
