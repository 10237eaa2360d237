import json
import os
import shutil
import subprocess

import numpy as np
import pytest

import ioid


def first_order():
    return ioid.IOModel(1, 1, [np.array([[-0.7]])], [np.array([[0.3]]), np.array([[1.0]])])


def test_model_roundtrip(tmp_path):
    model = first_order()
    assert model.order == 1 and model.regressor_dim() == 3
    np.testing.assert_allclose(model.theta(), [[-0.7, 0.3, 1.0]])
    path = tmp_path / "m.json"
    ioid.save_model(model, path)
    again = ioid.load_model(path)
    assert ioid.is_equivalent(model, again)


def test_simulate_matches_recursion():
    model = first_order()
    u = ioid.generate_input("white:seed=3", 50, 1)
    y = ioid.simulate(model, u, np.array([[0.5]]))
    assert y.shape == (50, 1)
    for k in range(1, 50):
        assert y[k, 0] == pytest.approx(0.7 * y[k - 1, 0] + 0.3 * u[k, 0] + u[k - 1, 0])


def test_lift_is_equivalent_and_reduces():
    model = first_order()
    lifted = ioid.lift_by_factor(model, np.array([[0.4]]))
    assert lifted.order == 2
    assert ioid.is_equivalent(model, lifted).equivalent
    report = ioid.reducibility_check(lifted)
    assert report.reduced and report.final_model.order == 1
    assert ioid.is_equivalent(report.final_model, model)


def test_rls_matches_batch():
    model = first_order()
    u = ioid.generate_input("prbs:seed=1", 300, 1)
    y = ioid.simulate(model, u, np.zeros((1, 1)))
    phi, out = ioid.regressors(u, y, 2)
    theta0 = np.zeros((1, 5))
    P0 = ioid.default_P0(2, 1, 1)
    state = ioid.rls(phi, out, theta0, P0)
    batch = ioid.batch_solve(phi, out, theta0, P0)
    assert np.linalg.norm(state.theta - batch) < 1e-8 * (1 + np.linalg.norm(batch))
    assert ioid.theta_equivalence_residual(state.theta, model, 2) < 1e-4


def test_projected_limit_and_tracking():
    model = first_order()
    d = ioid.regressor_dim(2, 1, 1)
    pl = ioid.projected_limit(model, 2, np.zeros((1, d)), ioid.default_P0(2, 1, 1))
    np.testing.assert_allclose(pl.H @ pl.H, pl.H, atol=1e-10)
    u = ioid.generate_input("white:seed=7", 2003, 1)
    tr = ioid.run_tracked_identification(model, 2, u, 2000, np.zeros((1, d)), ioid.default_P0(2, 1, 1), 100)
    assert tr["reference"] == "theta_star"
    np.testing.assert_allclose(tr["theta_ref"], pl.theta_star, atol=1e-12)
    assert tr["err_norm"][-1] < tr["err_norm"][0]


def test_excitation_obstruction():
    model = first_order()
    u = ioid.generate_input("white:seed=5", 1004, 1)
    y = ioid.simulate(model, u, np.zeros((1, 1)))
    full, _ = ioid.regressors(u, y, 3)
    rep = ioid.excitation_report(full)
    assert not rep["weak_pe"]
    assert ioid.lift_identity_check(u, y, model, 3) < 1e-9


def test_validation_error():
    with pytest.raises(ioid.ValidationError):
        ioid.IOModel(1, 1, [np.eye(2)], [np.eye(1), np.eye(1)])
    with pytest.raises(ValueError):
        ioid.generate_input("bogus:seed=1", 10, 1)


def test_run_experiment(tmp_path):
    cfg = {
        "true_model": {"n": 1, "p": 1, "m": 1, "F": [[[-0.7]]], "G": [[[0.3]], [[1.0]]]},
        "fit_orders": [1, 2],
        "horizon": 500,
        "input": "white:seed=2",
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    manifest = json.loads(ioid.run_experiment(path, tmp_path / "out"))
    assert len(manifest["runs"]) == 2
    assert (tmp_path / "out" / "trace_n2.csv").exists()


def cli():
    exe = os.environ.get("IOID_CLI") or shutil.which("sysid-rls")
    if not exe:
        pytest.skip("sysid-rls not available")
    return exe


def test_cli_exit_codes(tmp_path):
    exe = cli()
    model = tmp_path / "m.json"
    ioid.save_model(first_order(), model)
    ok = subprocess.run([exe, "reduce", str(model)], capture_output=True, text=True)
    assert ok.returncode == 0, ok.stderr
    bad = subprocess.run([exe, "converge", "--model", str(model), "--fit-order", "1", "--horizon", "0"],
                         capture_output=True, text=True)
    assert bad.returncode == 2
    usage = subprocess.run([exe, "no-such-command"], capture_output=True, text=True)
    assert usage.returncode == 2
