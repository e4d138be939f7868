"""Certification of a candidate channel against a standard one.

Two pipelines are provided:

* ``ssfb_certify`` estimates overlaps of the two Choi matrices with
  swap-test style measurements and assembles sub-/super-fidelity, which
  bound the *squared* fidelity.
* ``vqfe_certify`` diagonalizes the standard Choi matrix variationally and
  bounds the *root* fidelity with truncated fidelities.

Measurement statistics are modelled, not simulated at gate level: every
overlap circuit is one binomial observable with success probability
``(1 + value) / 2``.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .channels import as_channel, choi_of
from .exceptions import DimMismatch, NoConvergence, NonRealObservable
from .fidelity import (
    BoundsReport,
    clamped_arccos,
    sub_fidelity_from_moments,
    super_fidelity_from_moments,
    truncated_bounds,
)
from .numkernel import check_square
from .randchan import make_rng, spawn_rng
from .vqsd import OptimizerConfig, diagonalize, exact_oracle, project_in_basis

VERDICTS = ("pass", "fail", "inconclusive")


@dataclass
class ShotConfig:
    shots: int = 10_000
    seed: int = 0
    mode: str = "exact"

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be at least 1")
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")


@dataclass
class CertificationReport:
    method: str
    bounds: BoundsReport
    m_used: int | None
    shot_estimates: dict
    verdict_threshold: float
    verdict: str
    # Not serialized: kept for reuse and debugging.
    diagonalization: object = field(default=None, repr=False)
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def interval(self):
        if self.method == "ssfb":
            return self.bounds.sub, self.bounds.sup
        tb = self.bounds.spectrum[-1]
        return tb.lower, tb.upper

    def to_dict(self):
        return {
            "method": self.method,
            "bounds": self.bounds.to_dict(),
            "m_used": self.m_used,
            "shot_estimates": dict(self.shot_estimates),
            "verdict_threshold": self.verdict_threshold,
            "verdict": self.verdict,
        }


def verdict_for(lower, upper, threshold):
    if lower >= threshold:
        return "pass"
    if upper < threshold:
        return "fail"
    return "inconclusive"


def _operands(A, B):
    A = check_square(np.asarray(A, dtype=complex))
    B = check_square(np.asarray(B, dtype=complex))
    if A.shape != B.shape:
        raise DimMismatch(f"shapes {A.shape} and {B.shape} differ")
    return A, B


def _sample(value, cfg, rng):
    rng = make_rng(cfg.seed) if rng is None else rng
    p0 = min(1.0, max(0.0, (1 + value) / 2))
    k = rng.binomial(cfg.shots, p0)
    return 2 * k / cfg.shots - 1


def estimate_overlap_shots(A, B, cfg, rng=None):
    """Estimate ``tr(AB)`` from the ancilla statistics ``tr(AB) = 2 p0 - 1``.

    ``rng`` overrides the generator seeded from ``cfg.seed``.
    """
    A, B = _operands(A, B)
    value = float(np.einsum("ij,ji->", A, B).real)
    if cfg.mode == "exact":
        return value
    return _sample(value, cfg, rng)


def estimate_overlap_sq_shots(A, B, cfg, rng=None):
    """Estimate ``tr((AB)^2)`` via a four-register cyclic-shift test."""
    A, B = _operands(A, B)
    AB = A @ B
    value = np.einsum("ij,ji->", AB, AB)
    if abs(value.imag) > 1e-9:
        raise NonRealObservable(f"tr((AB)^2) has imaginary part {value.imag:.3e}")
    if cfg.mode == "exact":
        return float(value.real)
    return _sample(float(value.real), cfg, rng)


def ssfb_certify(phi0, psi, cfg=None, threshold=0.99):
    cfg = cfg or ShotConfig()
    J0 = choi_of(as_channel(phi0)).mat
    J1 = choi_of(as_channel(psi)).mat
    if J0.shape != J1.shape:
        raise DimMismatch("standard and candidate act on different dimensions")
    # one independent stream per measured quantity
    streams = [spawn_rng(cfg.seed, k) for k in range(4)]
    est = {
        "tr_J0J1": estimate_overlap_shots(J0, J1, cfg, streams[0]),
        "purity_J0": estimate_overlap_shots(J0, J0, cfg, streams[1]),
        "purity_J1": estimate_overlap_shots(J1, J1, cfg, streams[2]),
        "tr_J0J1_sq": estimate_overlap_sq_shots(J0, J1, cfg, streams[3]),
    }
    if cfg.mode == "exact":
        sub = sub_fidelity_from_moments(est["tr_J0J1"], est["tr_J0J1_sq"],
                                        est["purity_J0"] * est["purity_J1"])
        sup = super_fidelity_from_moments(est["tr_J0J1"], est["purity_J0"], est["purity_J1"])
    else:
        # shot noise can push estimates out of range; clamp before assembling
        t, p0, p1, t2 = (min(1.0, max(0.0, est[k])) for k in
                         ("tr_J0J1", "purity_J0", "purity_J1", "tr_J0J1_sq"))
        sub = t + np.sqrt(max(0.0, 2 * (t * t - t2)))
        sup = t + np.sqrt((1 - p0) * (1 - p1))
    sup_clamped = min(1.0, max(0.0, sup))
    c_g = float(np.sqrt(1 - sup_clamped))
    bounds = BoundsReport(sub=float(sub), sup=float(sup), c_g=c_g, a_g2=clamped_arccos(c_g))
    return CertificationReport(
        method="ssfb",
        bounds=bounds,
        m_used=None,
        shot_estimates=est,
        verdict_threshold=threshold,
        verdict=verdict_for(bounds.sub, bounds.sup, threshold),
    )


def diagonalize_standard(phi0, opt=None, layers=None, use_exact_diag=False):
    """Eigen-data of the standard device's Choi matrix, for reuse."""
    J0 = choi_of(as_channel(phi0)).mat
    if use_exact_diag:
        return exact_oracle(J0)
    return diagonalize(J0, opt or OptimizerConfig(), layers, raise_on_failure=False)


def vqfe_certify(phi0, psi, m, opt=None, layers=None, use_exact_diag=False,
                 threshold=0.99, diag_result=None):
    """Truncated-fidelity certification.

    Pass a previous report's ``diagonalization`` as ``diag_result`` to certify
    further candidates without diagonalizing the standard again.
    """
    J0 = choi_of(as_channel(phi0)).mat
    J1 = choi_of(as_channel(psi)).mat
    if J0.shape != J1.shape:
        raise DimMismatch("standard and candidate act on different dimensions")
    dim = J0.shape[0]
    if not 1 <= m <= dim:
        raise ValueError(f"m={m} outside 1..{dim}")
    if diag_result is None:
        diag_result = diagonalize_standard(phi0, opt, layers, use_exact_diag)

    sigma_diag = project_in_basis(J1, diag_result.basis)
    tb = truncated_bounds(J0, J1, m, basis=diag_result.basis)
    bounds = BoundsReport(spectrum=[tb])
    diagnostics = {
        "converged": bool(diag_result.converged),
        "final_cost": float(diag_result.final_cost),
        "iterations_used": int(diag_result.iterations_used),
        "eigenvalues": diag_result.eigenvalue_estimates[:m].tolist(),
        "sigma_diag": sigma_diag[:m].tolist(),
    }
    verdict = verdict_for(tb.lower, tb.upper, threshold)
    if not diag_result.converged:
        verdict = "inconclusive"
    return CertificationReport(
        method="vqfe",
        bounds=bounds,
        m_used=m,
        shot_estimates={},
        verdict_threshold=threshold,
        verdict=verdict,
        diagonalization=diag_result,
        diagnostics=diagnostics,
    )


_BUDGETS = {
    "super_fidelity": (4, 1),
    "sub_fidelity": (8, 1),
    "vqfe": (4, 1),
}


def qubit_budget(n, method):
    """Register size needed to certify ``n``-qubit devices with ``method``."""
    if n < 1:
        raise ValueError("n must be positive")
    try:
        a, b = _BUDGETS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}") from None
    return a * n + b


class FidelityCertifier(BaseEstimator):
    """Fit on a standard device, then certify candidates against it.

    For ``method="vqfe"`` the standard's Choi matrix is diagonalized once in
    ``fit`` and the result reused by every later ``certify`` call.
    """

    def __init__(self, method="vqfe", m=None, threshold=0.99, shots=10_000,
                 mode="exact", seed=0, layers=None, max_iters=2000, tol=1e-8,
                 restarts=5, exact_diag=False):
        self.method = method
        self.m = m
        self.threshold = threshold
        self.shots = shots
        self.mode = mode
        self.seed = seed
        self.layers = layers
        self.max_iters = max_iters
        self.tol = tol
        self.restarts = restarts
        self.exact_diag = exact_diag

    def fit(self, X, y=None):
        if self.method not in ("ssfb", "vqfe"):
            raise ValueError(f"method must be 'ssfb' or 'vqfe', got {self.method!r}")
        self.standard_ = as_channel(X)
        self.n_features_in_ = self.standard_.dim_in**2
        self.diagonalization_ = None
        if self.method == "vqfe":
            opt = OptimizerConfig(self.max_iters, self.tol, self.restarts, seed=self.seed)
            self.diagonalization_ = diagonalize_standard(
                self.standard_, opt, self.layers, self.exact_diag)
        return self

    def certify(self, candidate):
        check_is_fitted(self, "standard_")
        if self.method == "ssfb":
            cfg = ShotConfig(self.shots, self.seed, self.mode)
            return ssfb_certify(self.standard_, candidate, cfg, self.threshold)
        m = self.m or self.n_features_in_
        return vqfe_certify(self.standard_, candidate, m, threshold=self.threshold,
                            diag_result=self.diagonalization_)

    def predict(self, X):
        """Verdict per candidate device."""
        return np.array([self.certify(c).verdict for c in X])
