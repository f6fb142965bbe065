import json
import math
import os

import numpy as np
import pytest

import admm_eki

CONFIG_DIR = os.environ.get(
    "ADMM_EKI_CONFIG_DIR",
    os.path.join(os.path.dirname(__file__), "..", "..", "configs"),
)


def test_rastrigin_values():
    assert admm_eki.rastrigin_forward([0.0, 0.0]) == pytest.approx(-20.0)
    assert admm_eki.rastrigin_forward([2.0, 0.0]) == pytest.approx(-16.0)
    assert admm_eki.rastrigin_forward([2.0, 2.0]) == pytest.approx(-12.0)
    assert admm_eki.rastrigin_misfit([2.0, 0.0]) == pytest.approx(16.0)
    assert admm_eki.disk_penalty([0.3, 0.0]) == pytest.approx(0.36)
    assert admm_eki.disk_penalty([3.0, 3.0]) == 0.0


def test_admm_updates():
    s = admm_eki.slack_update(np.array([-1.0, 2.0]), np.array([0.0, 0.0]))
    np.testing.assert_array_equal(s, [1.0, 0.0])
    y = admm_eki.dual_update(np.array([0.0, 0.0]), np.array([-1.0, 2.0]), s)
    np.testing.assert_array_equal(y, [0.0, 2.0])
    with pytest.raises(ValueError):
        admm_eki.slack_update(np.array([1.0, 2.0]), np.array([0.0]))
    assert admm_eki.annealing_beta(1.0, 0.5, 2) == math.exp(-1.0)


def test_bicycle_step():
    nxt = admm_eki.bicycle_step(np.array([0.0, 0.0, 0.0, 1.0]), np.array([0.0, 0.0]))
    np.testing.assert_allclose(nxt, [0.025, 0.0, 0.0, 1.0])


def test_demo_and_environment():
    r = admm_eki.run_rastrigin_demo(0)
    assert len(r["rho"]) == 10
    assert np.linalg.norm(r["final_mean"] - np.array([-2.0, 0.0])) < 0.1
    h1, text = admm_eki.race_environment(4)
    h2, _ = admm_eki.race_environment(4)
    assert h1 == h2
    assert len(json.loads(text)["obstacles"]) == 25


def test_config_and_run(tmp_path):
    resolved = json.loads(admm_eki.validate_config('{"benchmark": "rastrigin"}'))
    assert resolved["eki"]["ensemble_size"] == 50
    with pytest.raises(admm_eki.ConfigError, match="foo"):
        admm_eki.validate_config('{"benchmark": "rastrigin", "foo": 1}')
    assert admm_eki.derive_seed(1234567, "sampling") == 6457827717110365317

    out = admm_eki.run(os.path.join(CONFIG_DIR, "rastrigin.json"), seed=2,
                       output_dir=str(tmp_path / "r"), plot=False)
    assert out["exit_code"] == 0
    assert out["header"][0] == "controller"
    assert (tmp_path / "r" / "summary.csv").exists()
    assert not (tmp_path / "r" / "snapshots.svg").exists()

    cmp = admm_eki.compare(os.path.join(CONFIG_DIR, "rastrigin.json"),
                           os.path.join(CONFIG_DIR, "rastrigin.json"),
                           output_dir=str(tmp_path / "c"))
    assert cmp["rows"][0] == cmp["rows"][1]
