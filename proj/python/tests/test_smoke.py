import json
import os
import subprocess

import numpy as np
import pytest

import qude


def random_state(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = z @ z.conj().T
    return rho / np.trace(rho)


def test_effective_times_dev1():
    src = qude.structure_preserving([0.15, 2.18, 5.66], [1686.0, 1686.0, 688.0])
    t1, t2 = qude.effective_times(qude.DeviceModel.dev1(), src)
    assert round(t1) == 171
    assert round(t2) == 27


def test_tomography_round_trip():
    rng = np.random.default_rng(7)
    for _ in range(20):
        rho = random_state(rng)
        px, py, pz = qude.measurement_probs(rho)
        back = qude.lie_reconstruct(px, py, pz)
        assert qude.trace_distance(rho, back) < 1e-12


def test_gell_mann_pauli():
    sx, sy, sz = qude.gell_mann_basis(2)
    np.testing.assert_allclose(sx, [[0, 1], [1, 0]])
    np.testing.assert_allclose(sy, [[0, -1j], [1j, 0]])
    np.testing.assert_allclose(sz, [[1, 0], [0, -1]])


def test_rabi_oscillation():
    dev = qude.DeviceModel.dev1(qude.BaseKind.LVN)
    p = 1.0
    t, states = qude.simulate(dev, p, 1.0, sample_dt_ns=1.0, dt_internal_ns=1.0)
    excited = states[:, 1, 1].real
    np.testing.assert_allclose(excited, np.sin(2 * np.pi * p * t) ** 2, atol=1e-8)


def test_spectral_filter_projects():
    bad = np.array([[1.2, 0.1], [0.1, -0.2]], dtype=complex)
    good = qude.spectral_filter(bad)
    assert abs(np.trace(good) - 1) < 1e-12
    assert np.linalg.eigvalsh(good).min() >= -1e-12


def test_fit_recovers_detuning():
    dev = qude.DeviceModel.dev1()
    planted = qude.structure_preserving([0.0, 0.0, 20.0], [1e6, 1e6, 1e6])
    model, loss, history = qude.fit_twin(dev, [1.0, 2.0], planted, duration_us=2.0, train_horizon_us=1.9,
                                         epochs=20, lbfgs_iterations=100)
    assert loss < history[0]
    alpha3 = model.params[2] / (2 * np.pi) * 1e3
    assert alpha3 == pytest.approx(20.0, rel=1e-3)


def test_errors_are_translated():
    with pytest.raises(qude.QudeError):
        qude.make_source("quadratic")


def test_cli_generate_writes_dataset(tmp_path):
    cli = os.environ.get("QUDE_CLI")
    if not cli:
        pytest.skip("CLI path not provided")
    cfg = tmp_path / "run.ini"
    cfg.write_text("[experiments]\nn_experiments = 2\nduration_us = 0.2\nshots = 100\nseed = 3\n"
                   "[training]\ntrain_horizon_us = 0.1\n")
    out = tmp_path / "data"
    subprocess.run([cli, "generate", "--config", str(cfg), "--out", str(out)], check=True)
    manifest = json.loads((out / "manifest.json").read_text())
    assert [e["records"] for e in manifest["experiments"]] == [50, 50]
