import math

import pytest

import bpre

REFERENCE = """
[model]
family = "shifted_poisson"
parameters = [0.5, 1.5]
probabilities = [0.5, 0.5]

[sim]
seed = 7

[experiment]
n_grid = [16, 64, 256, 1024]
paths = 1000
bootstrap = 10
"""


def test_reference_moments():
    m = bpre.model_moments(bpre.reference_environment())
    assert m["mu"] == pytest.approx(0.5 * (math.log(1.5) + math.log(2.5)), abs=1e-12)
    assert m["sigma"] == pytest.approx(0.5 * math.log(5.0 / 3.0), abs=1e-12)


def test_conditions():
    assert bpre.validate_conditions(bpre.reference_environment())["all"]
    report = bpre.validate_conditions(bpre.doubling_environment())
    assert not report["assumption_2_2"]


def test_invalid_spec_raises_value_error():
    with pytest.raises(ValueError, match="model.probabilities"):
        bpre.finite_environment("shifted_poisson", [0.5, 1.5], [0.5, 0.4])


def test_doubling_path():
    records = bpre.simulate_path(bpre.doubling_environment(), 10)
    assert len(records) == 1
    last = records[-1]
    assert last["z_exact"] == 1024
    assert last["log_w"] == 0.0
    assert last["s"] == pytest.approx(10 * math.log(2.0), abs=1e-12)


def test_path_crosses_threshold():
    records = bpre.simulate_path(bpre.reference_environment(), 200, seed=3, record_schedule=[10, 200])
    assert [r["regime"] for r in records] == ["exact", "asymptotic"]
    assert records[-1]["z_exact"] is None
    for r in records:
        assert abs(r["log_z"] - r["s"] - r["log_w"]) <= 1e-9


def test_distances():
    assert bpre.zolotarev_2([-1.0, 1.0], [0.0, 0.0])["value"] == 0.5
    assert bpre.wasserstein([0.0, 2.0], [1.0, 3.0])["value"] == pytest.approx(1.0)
    a = [0.3, -1.2, 2.5, 0.0]
    b = [1.1, 0.4, -0.7, 3.3]
    assert bpre.zolotarev_1(a, b)["value"] == pytest.approx(bpre.assignment_oracle(a, b, 1.0), abs=1e-12)
    assert bpre.ks_statistic([0.0]) == pytest.approx(0.5)
    atoms = bpre.discretize_normal(101)
    assert atoms[50] == 0.0


def test_seed_derivation_is_stable():
    assert bpre.derive_path_seed(5, 1) == bpre.derive_path_seed(5, 1)
    assert bpre.derive_path_seed(5, 0) != bpre.derive_path_seed(5, 1)


def test_config_round_trip():
    text = bpre.canonical_config(REFERENCE)
    assert bpre.canonical_config(text) == text
    assert "exact_threshold = 1099511627776" in text


def test_config_errors():
    with pytest.raises(bpre.BpreError) as info:
        bpre.canonical_config("[model\n")
    assert info.value.exit_code == 2


def test_run_experiments():
    lln = bpre.run_experiment(REFERENCE, "lln")
    assert all(row["coverage"] > 0.95 for row in lln["rows"])
    clt = bpre.run_experiment(REFERENCE, "clt-rate")
    names = [m["name"] for m in clt["metrics"]]
    assert names == ["W1", "W2", "zeta1", "zeta2"]
    for h in clt["horizons"]:
        assert abs(h["zeta1_minus_w1"]) <= 1e-9
    with pytest.raises(ValueError):
        bpre.run_experiment(REFERENCE, "nope")
