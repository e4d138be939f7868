import json

import numpy as np
import pytest

from chancert.channels import (
    ChoiMatrix,
    KrausChannel,
    apply,
    check_choi,
    choi_of,
    device_from_dict,
    channel_to_dict,
    choi_to_dict,
    kraus_of,
    load_device,
    max_entangled,
    save_device,
    validate_cptp,
)
from chancert.exceptions import DimMismatch, NotChoi, NotCPTP
from chancert.numkernel import matrix_rank, partial_trace
from chancert.randchan import random_choi, random_density, random_unitary

from conftest import I2, X, Y, Z


def choi_by_definition(ch):
    """(1/n) sum_ij |i><j| (x) Phi(|i><j|), evaluated term by term."""
    n = ch.dim_in
    J = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = 1
            J += np.kron(E, sum(K @ E @ K.conj().T for K in ch.kraus))
    return J / n


def test_max_entangled_qubit():
    P = max_entangled(2).mat
    expected = np.zeros((4, 4))
    expected[np.ix_([0, 3], [0, 3])] = 0.5
    np.testing.assert_allclose(P, expected)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_max_entangled_is_pure_and_maximally_mixed_marginals(n):
    P = max_entangled(n).mat
    assert np.trace(P @ P).real == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(partial_trace(P, n, n, "A"), np.eye(n) / n, atol=1e-14)
    np.testing.assert_allclose(partial_trace(P, n, n, "B"), np.eye(n) / n, atol=1e-14)


def test_choi_of_identity(identity_channel):
    np.testing.assert_allclose(choi_of(identity_channel).mat, max_entangled(2).mat, atol=1e-15)


def test_choi_of_depolarizing(depolarizing):
    oracle = choi_by_definition(depolarizing)
    np.testing.assert_allclose(oracle, np.eye(4) / 4, atol=1e-15)
    np.testing.assert_allclose(choi_of(depolarizing).mat, oracle, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_choi_of_matches_definition(seed):
    ch = kraus_of(random_choi(3, 4, np.random.default_rng(seed)))
    np.testing.assert_allclose(choi_of(ch).mat, choi_by_definition(ch), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_unitary_channel_has_pure_choi(seed):
    U = random_unitary(3, np.random.default_rng(seed))
    J = choi_of(KrausChannel((U,))).mat
    assert np.trace(J @ J).real == pytest.approx(1, abs=1e-10)
    check_choi(J)


def test_choi_of_rejects_non_tp():
    with pytest.raises(NotCPTP):
        choi_of(KrausChannel((2 * I2,)))


def test_kraus_of_identity():
    ch = kraus_of(max_entangled(2).mat)
    assert len(ch) == 1
    K = ch.kraus[0]
    phase = K[0, 0] / abs(K[0, 0])
    np.testing.assert_allclose(K / phase, I2, atol=1e-12)


def test_kraus_of_maximally_mixed():
    ch = kraus_of(ChoiMatrix(np.eye(4) / 4, 2))
    assert len(ch) == 4
    for K in ch.kraus:
        assert np.sum(np.abs(K) ** 2) == pytest.approx(0.5, abs=1e-12)
    assert validate_cptp(ch).passed


@pytest.mark.parametrize("rank", [1, 3, 9])
def test_round_trip_random(rank):
    rng = np.random.default_rng(rank)
    for _ in range(20):
        J = random_choi(3, rank, rng)
        ch = kraus_of(J)
        assert validate_cptp(ch).passed
        assert np.max(np.abs(choi_of(ch).mat - J.mat)) <= 1e-8
        assert matrix_rank(choi_of(ch).mat) <= len(ch)


def test_kraus_of_rejects_non_choi():
    with pytest.raises(NotChoi):
        kraus_of(ChoiMatrix(np.diag([1.0, 0, 0, 0]), 2))


def test_apply_examples(identity_channel, depolarizing, rng):
    rho = random_density(2, 2, rng).mat
    np.testing.assert_allclose(apply(identity_channel, rho).mat, rho, atol=1e-15)
    np.testing.assert_allclose(apply(depolarizing, rho).mat, I2 / 2, atol=1e-15)
    U = random_unitary(2, rng)
    np.testing.assert_allclose(apply(KrausChannel((U,)), rho).mat, U @ rho @ U.conj().T, atol=1e-14)
    with pytest.raises(DimMismatch):
        apply(identity_channel, np.eye(3) / 3)


def test_validate_cptp_examples():
    rep = validate_cptp(KrausChannel((I2,)))
    assert rep.passed and rep.residual == 0
    rep = validate_cptp([2 * I2])
    assert not rep.passed and rep.residual == pytest.approx(3)
    assert validate_cptp([I2 / 2, X / 2, Y / 2, Z / 2]).passed


def test_channel_json_round_trip(tmp_path, depolarizing):
    path = tmp_path / "dep.json"
    save_device(depolarizing, path)
    data = json.loads(path.read_text())
    assert set(data) == {"dim", "kraus"}
    assert data["dim"] == 2 and len(data["kraus"]) == 4 and len(data["kraus"][0]) == 4
    loaded = load_device(path)
    for a, b in zip(loaded.kraus, depolarizing.kraus):
        np.testing.assert_array_equal(a, b)


def test_choi_json_round_trip(tmp_path):
    J = random_choi(2, 3, np.random.default_rng(0))
    data = choi_to_dict(J)
    assert set(data) == {"dim", "choi"} and len(data["choi"]) == 16
    path = tmp_path / "choi.json"
    save_device(J, path)
    np.testing.assert_array_equal(load_device(path).mat, J.mat)


def test_channel_json_layout_is_row_major():
    K = np.array([[1, 2j], [3, 4]])
    data = channel_to_dict(KrausChannel((K,)))
    assert data["kraus"][0] == [[1, 0], [0, 2], [3, 0], [4, 0]]


def test_device_json_errors():
    with pytest.raises(ValueError):
        device_from_dict({"kraus": []})
    with pytest.raises(ValueError):
        device_from_dict({"dim": 2})
