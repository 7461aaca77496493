import json
import math
import pathlib

import pytest

import edmcount as ec

DATA = pathlib.Path(__file__).resolve().parents[2] / "data" / "zaire_1974.csv"


@pytest.fixture(scope="module")
def zaire():
    return ec.FrequencyTable.read_csv(DATA)


def test_describe(zaire):
    d = zaire.describe()
    assert d["n_obs"] == 4000
    assert d["mean"] == 0.0865
    assert abs(d["variance"] - 0.122548) < 1e-6


def test_poisson_reduction():
    probs = ec.pmf(ec.ModelSpec(ec.Family.ABM, 0, 1.0), 2.0, 5)
    for n, p in enumerate(probs):
        assert p == pytest.approx(math.exp(-2.0) * 2.0**n / math.factorial(n), rel=1e-12)


def test_adaptive_pmf_is_normalized():
    probs = ec.pmf(ec.ModelSpec(ec.Family.LM, 4, 1.0), 0.3)
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)


def test_fit_and_gof(zaire):
    fit = ec.fit_mle(ec.Family.ABM, 10, zaire)
    assert fit.label == "ABM(r=10)"
    assert fit.params[0] == pytest.approx(2.415385, rel=1e-5)
    gof = ec.goodness_of_fit(fit, zaire)
    assert gof.df == 2
    assert gof.chi2 == pytest.approx(0.444362, rel=1e-4)
    assert [c[0] for c in gof.cells] == ["0", "1", "2", "3", ">=4"]


def test_baseline_fit(zaire):
    fit = ec.fit_baseline(ec.Baseline.POISSON, zaire)
    assert fit.params[0] == pytest.approx(0.0865, rel=1e-6)


def test_measure_construction_agrees():
    lm = ec.log_measure(ec.ModelSpec(ec.Family.LM, 2, 1.0), 10)
    conv = ec.conv_exponential(2, 1.0, 10)
    for n in range(11):
        assert math.exp(lm[n]) == pytest.approx(conv[n], rel=1e-9)


def test_errors_carry_code():
    with pytest.raises(ec.EdmError, match="MeanOutOfDomain"):
        ec.variance(ec.ModelSpec(ec.Family.LM, 2, 1.0), 2.0)
    with pytest.raises(ec.EdmError, match="ParseError"):
        ec.FrequencyTable.parse_csv("value,frequency\n0,x\n")


def test_cli_entry(zaire):
    code, out, err = ec.run_cli(["stats", "--data", str(DATA), "--format", "json"])
    assert code == 0, err
    assert json.loads(out)["stats"]["n_obs"] == 4000
