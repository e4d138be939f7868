import numpy as np
import pytest

from chancert import certify
from chancert.certify import (
    FidelityCertifier,
    ShotConfig,
    estimate_overlap_shots,
    estimate_overlap_sq_shots,
    qubit_budget,
    ssfb_certify,
    verdict_for,
    vqfe_certify,
)
from chancert.channels import KrausChannel, choi_of, kraus_of, max_entangled
from chancert.exceptions import DimMismatch
from chancert.fidelity import fidelity, sub_fidelity, super_fidelity
from chancert.randchan import make_rng, random_choi, random_unitary, spawn_rng
from chancert.vqsd import OptimizerConfig

from conftest import ket

ZERO, ONE = ket(1, 0), ket(0, 1)


def random_channel(n, rank, seed):
    return kraus_of(random_choi(n, rank, make_rng(seed)))


def test_overlap_pure_self_is_deterministic():
    for shots in (1, 10, 1000):
        assert estimate_overlap_shots(ZERO, ZERO, ShotConfig(shots, 1, "sampled")) == 1.0


def test_overlap_exact_bell_vs_mixed():
    assert estimate_overlap_shots(max_entangled(2).mat, np.eye(4) / 4, ShotConfig()) == pytest.approx(0.25)


def test_overlap_orthogonal_concentration():
    shots = 4000
    errs = [abs(estimate_overlap_shots(ZERO, ONE, ShotConfig(shots, s, "sampled")))
            for s in range(500)]
    assert np.mean(np.array(errs) <= 5 / np.sqrt(shots)) >= 0.99


def test_overlap_sq_examples():
    assert estimate_overlap_sq_shots(ZERO, ZERO, ShotConfig()) == pytest.approx(1)
    assert estimate_overlap_sq_shots(np.eye(2) / 2, ZERO, ShotConfig()) == pytest.approx(0.25)
    shots = 4000
    errs = [abs(estimate_overlap_sq_shots(np.eye(2) / 2, ZERO, ShotConfig(shots, s, "sampled")) - 0.25)
            for s in range(500)]
    assert np.mean(np.array(errs) <= 5 / np.sqrt(shots)) >= 0.99


def test_overlap_dim_mismatch():
    with pytest.raises(DimMismatch):
        estimate_overlap_shots(ZERO, np.eye(3) / 3, ShotConfig())


@pytest.mark.parametrize("estimator", [estimate_overlap_shots, estimate_overlap_sq_shots])
def test_sampled_estimates_unbiased(estimator):
    J0 = random_choi(2, 3, make_rng(1)).mat
    J1 = random_choi(2, 3, make_rng(2)).mat
    exact = estimator(J0, J1, ShotConfig())
    est = np.array([estimator(J0, J1, ShotConfig(200, s, "sampled")) for s in range(1000)])
    sem = est.std(ddof=1) / np.sqrt(est.size)
    assert abs(est.mean() - exact) <= 4 * sem


def test_ssfb_identical_unitary_channels():
    U = random_unitary(2, make_rng(3))
    ch = KrausChannel((U,))
    rep = ssfb_certify(ch, ch, ShotConfig(), threshold=0.99)
    assert rep.bounds.sub == pytest.approx(1, abs=1e-9)
    assert rep.bounds.sup == pytest.approx(1, abs=1e-9)
    assert rep.verdict == "pass"


def test_ssfb_orthogonal_channels(identity_channel, x_channel):
    rep = ssfb_certify(identity_channel, x_channel, ShotConfig(), threshold=1e-6)
    assert rep.bounds.sup == pytest.approx(0, abs=1e-12)
    assert rep.verdict == "fail"


@pytest.mark.parametrize("seed", range(5))
def test_ssfb_exact_matches_fidelity_module(seed):
    phi0, psi = random_channel(2, 3, seed), random_channel(2, 2, seed + 100)
    J0, J1 = choi_of(phi0).mat, choi_of(psi).mat
    rep = ssfb_certify(phi0, psi, ShotConfig())
    assert abs(rep.bounds.sub - sub_fidelity(J0, J1)) <= 1e-10
    assert abs(rep.bounds.sup - super_fidelity(J0, J1)) <= 1e-10
    assert set(rep.shot_estimates) == {"tr_J0J1", "purity_J0", "purity_J1", "tr_J0J1_sq"}


def test_ssfb_sampled_is_reproducible():
    phi0, psi = random_channel(2, 3, 1), random_channel(2, 3, 2)
    a = ssfb_certify(phi0, psi, ShotConfig(500, 7, "sampled")).to_dict()
    b = ssfb_certify(phi0, psi, ShotConfig(500, 7, "sampled")).to_dict()
    assert a == b
    c = ssfb_certify(phi0, psi, ShotConfig(500, 8, "sampled")).to_dict()
    assert a != c


def test_ssfb_sampled_low_shots_stays_in_range():
    phi0, psi = random_channel(2, 4, 1), random_channel(2, 4, 2)
    for s in range(50):
        rep = ssfb_certify(phi0, psi, ShotConfig(3, s, "sampled"))
        assert 0 <= rep.bounds.c_g <= 1


def test_vqfe_identical_channels_full_basis():
    ch = random_channel(2, 3, 4)
    rep = vqfe_certify(ch, ch, 4, use_exact_diag=True, threshold=0.99)
    tb = rep.bounds.spectrum[0]
    assert tb.lower == pytest.approx(1, abs=1e-8) and tb.upper == pytest.approx(1, abs=1e-8)
    assert rep.verdict == "pass" and rep.m_used == 4


@pytest.mark.parametrize("seed", range(5))
def test_vqfe_rank_six_standard_exact_at_six(seed):
    phi0, psi = random_channel(4, 6, seed), random_channel(4, 6, seed + 50)
    f = fidelity(choi_of(phi0).mat, choi_of(psi).mat)
    rep = vqfe_certify(phi0, psi, 6, use_exact_diag=True)
    assert abs(rep.bounds.spectrum[0].lower - f) <= 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_vqfe_full_m_reproduces_fidelity(seed):
    phi0, psi = random_channel(2, 4, seed), random_channel(2, 4, seed + 9)
    f = fidelity(choi_of(phi0).mat, choi_of(psi).mat)
    lo, hi = vqfe_certify(phi0, psi, 4, use_exact_diag=True).interval
    assert abs(lo - f) <= 1e-8 and abs(hi - f) <= 1e-8


def test_vqfe_interval_tightens_with_m():
    phi0, psi = random_channel(4, 10, 1), random_channel(4, 10, 2)
    lo1, hi1 = vqfe_certify(phi0, psi, 1, use_exact_diag=True).interval
    lo16, hi16 = vqfe_certify(phi0, psi, 16, use_exact_diag=True).interval
    assert lo1 - 1e-9 <= lo16 and hi16 <= hi1 + 1e-9


def test_vqfe_variational_path():
    phi0 = random_channel(2, 2, 21)
    psi = random_channel(2, 2, 22)
    rep = vqfe_certify(phi0, psi, 4, OptimizerConfig(seed=0), layers=4, threshold=0.5)
    assert rep.diagnostics["converged"]
    f = fidelity(choi_of(phi0).mat, choi_of(psi).mat)
    lo, hi = rep.interval
    assert abs(lo - f) <= 1e-3 and abs(hi - f) <= 1e-3


def test_vqfe_non_convergence_is_inconclusive():
    ch = random_channel(2, 4, 3)
    rep = vqfe_certify(ch, ch, 4, OptimizerConfig(max_iters=1, restarts=1, tol=1e-15), layers=1,
                       threshold=0.0)
    assert not rep.diagnostics["converged"]
    assert rep.verdict == "inconclusive"


def test_vqfe_reuses_cached_diagonalization(monkeypatch):
    phi0 = random_channel(2, 2, 30)
    calls = []
    original = certify.diagonalize

    def counting(*args, **kwargs):
        calls.append(1)
        return original(*args, **kwargs)

    monkeypatch.setattr(certify, "diagonalize", counting)
    first = vqfe_certify(phi0, random_channel(2, 3, 31), 2, OptimizerConfig(seed=5), layers=4)
    second = vqfe_certify(phi0, random_channel(2, 3, 32), 2, diag_result=first.diagonalization)
    assert len(calls) == 1
    assert second.diagonalization is first.diagonalization

    est = FidelityCertifier(method="vqfe", m=2, layers=4, seed=5).fit(phi0)
    est.predict([random_channel(2, 3, 33), random_channel(2, 3, 34)])
    assert len(calls) == 2


def test_qubit_budget():
    assert [qubit_budget(2, m) for m in ("super_fidelity", "sub_fidelity", "vqfe")] == [9, 17, 9]
    for n in range(1, 6):
        assert qubit_budget(n, "super_fidelity") == 4 * n + 1
        assert qubit_budget(n, "sub_fidelity") == 8 * n + 1
        assert qubit_budget(n, "vqfe") == 4 * n + 1
    with pytest.raises(ValueError):
        qubit_budget(2, "trace_distance")


@pytest.mark.parametrize("threshold", np.linspace(0, 1, 11))
def test_verdict_trichotomy(threshold):
    for lo, hi in [(0.2, 0.4), (0.5, 0.5), (0.0, 1.0), (0.95, 0.99)]:
        v = verdict_for(lo, hi, threshold)
        assert v in ("pass", "fail", "inconclusive")
        assert (v == "pass") == (lo >= threshold)
        assert (v == "fail") == (hi < threshold and lo < threshold)


def test_report_json_fields():
    ch = random_channel(2, 2, 1)
    d = ssfb_certify(ch, ch).to_dict()
    assert set(d) == {"method", "bounds", "m_used", "shot_estimates", "verdict_threshold", "verdict"}


def test_certifier_estimator_ssfb(identity_channel, x_channel):
    est = FidelityCertifier(method="ssfb", threshold=0.9)
    assert est.get_params()["method"] == "ssfb"
    verdicts = est.fit(identity_channel).predict([identity_channel, x_channel])
    assert list(verdicts) == ["pass", "fail"]


def test_certifier_accepts_choi_input():
    J = random_choi(2, 2, make_rng(8))
    est = FidelityCertifier(method="vqfe", exact_diag=True, threshold=0.99).fit(J)
    assert est.certify(J).verdict == "pass"
