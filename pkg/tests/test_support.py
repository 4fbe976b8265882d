import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cartan_kit import config, numerics
from cartan_kit.report import VerificationReport, above, below, flag


@given(st.floats(-2, 2), st.floats(0.1, 3))
def test_central_diff_against_calculus(x, a):
    f = lambda t: np.array([np.sin(a * (x + t))])
    exact = a * math.cos(a * x)
    assert abs(numerics.central_diff(f, 1e-5)[0] - exact) < 1e-8
    assert abs(numerics.central_diff(f, 1e-3, richardson=True)[0] - exact) < 1e-9


def test_jacobian_of_linear_map():
    A = np.array([[1.0, 2.0], [-3.0, 0.5], [0.0, 4.0]])
    J = numerics.jacobian(lambda x: A @ x, np.array([0.3, -1.0]), 1e-3)
    assert np.allclose(J, A, atol=1e-12)


def test_profiles_and_overrides(monkeypatch):
    assert config.get_profile("default") == config.DEFAULT
    monkeypatch.setenv(config.PROFILE_ENV_VAR, "strict")
    assert config.get_profile().equivariance == 1e-8
    t = config.DEFAULT.with_overrides({"curvature": 1e-3})
    assert t.curvature == 1e-3 and config.DEFAULT.curvature == 1e-5
    with pytest.raises(KeyError):
        config.DEFAULT.with_overrides({"bogus": 1.0})
    with pytest.raises(KeyError):
        config.get_profile("bogus")


def test_record_semantics():
    assert below("x", "r", [1e-10, 2e-10], 1e-9).passed
    assert not below("x", "r", [1e-9], 1e-9).passed  # strict inequality
    assert below("x", "r", [], 1e-9).passed
    lo = above("y", "r", [0.5, 0.2], 0.1)
    assert lo.passed and lo.max_residual == 0.2
    assert not flag("z", "r", False).passed


def test_report_json_is_stable_and_finite():
    rep = VerificationReport("s")
    rep.add(below("nan", "r", [float("nan")], 1.0), flag("ok", "r", True))
    rep.runtime = 1.23
    text = rep.to_json()
    assert text == rep.to_json()
    data = json.loads(text)
    assert "runtime_s" not in data and data["overall_pass"] is False
    assert data["records"][0]["max_residual"] == "nan"
    assert json.loads(rep.to_json(include_runtime=True))["runtime_s"] == 1.23
    assert rep.find("ok").passed
