import math

import pytest

import spdelab


def test_kernel_mass_and_value():
    assert spdelab.kernel_neumann(5.0, 0.2, 0.9) == pytest.approx(1.0, abs=1e-9)
    nodes = 400
    mass = sum(
        spdelab.kernel_neumann(0.01, 0.3, (j + 0.5) / nodes) / nodes
        for j in range(nodes)
    )
    assert mass == pytest.approx(1.0, abs=1e-4)


def test_she_variance_short_time():
    v = spdelab.she_variance(1e-4, 0.5)
    assert v == pytest.approx(math.sqrt(1e-4 / math.pi), rel=1e-6)


def test_brownian_oracle():
    assert spdelab.brownian_oracle(1.0, 1.0) == pytest.approx(
        0.3707774297995239, abs=1e-12
    )


def test_simulate_deterministic():
    sup1, field1 = spdelab.simulate(nx=32, dt=1e-3, T=0.01, seed=7)
    sup2, field2 = spdelab.simulate(nx=32, dt=1e-3, T=0.01, seed=7)
    assert sup1 == sup2
    assert field1 == field2
    assert len(field1) == 33
    sup3, _ = spdelab.simulate(nx=32, dt=1e-3, T=0.01, seed=8)
    assert sup1 != sup3


def test_small_ball_estimate():
    out = spdelab.small_ball(eps=1.0, nx=32, dt=1e-3, T=0.01, replicas=200, seed=1)
    assert 0.0 <= out["ci_lo"] <= out["p_hat"] <= out["ci_hi"] <= 1.0
    assert out["replicas"] == 200


def test_fit_exponent_exact_power_law():
    rows = [(e, -(e ** -6.0), 0.0) for e in (0.5, 0.4, 0.3)]
    fit = spdelab.fit_exponent(rows)
    assert fit["exponent"] == pytest.approx(6.0, abs=1e-9)
    assert fit["r_squared"] == pytest.approx(1.0, abs=1e-12)


def test_validate_config_reports_errors():
    bad = '{"sigma": {"family": "constant", "C1": 2.0, "C2": 1.0}, "event": {"eps": 0.5}}'
    errors = spdelab.validate_config_text(bad)
    assert any("inverted" in e for e in errors)
