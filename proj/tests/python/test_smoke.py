import math

import pytest

import rdafront

TINY = """
[problem]
name = paper-example
mu = 0.1
T = 0.2
[grid]
nx = 8
ny = 8
nz = 33
outer_nx = 8
outer_ny = 8
outer_nz = 9
front_nx = 8
front_ny = 8
[numerics]
fan = 8
[output]
times = 0.1
"""


def test_registry():
    names = rdafront.registry_names()
    assert "paper-example" in names
    p = rdafront.problem("paper-example")
    assert p["mu"] == 0.01
    assert (p["x0"], p["L"], p["a"], p["T"]) == (-1.0, 2.0, 1.0, 0.85)


def test_expressions():
    assert rdafront.evaluate("2^3^2", {}) == 64.0
    assert rdafront.evaluate("sin(pi*x) + u", {"x": 0.5, "u": 1.0}) == pytest.approx(2.0)
    d = rdafront.differentiate("x^2*y", "x")
    assert rdafront.evaluate(d, {"x": 3.0, "y": 2.0}) == pytest.approx(12.0)
    text = rdafront.normalize("1 + 2*x")
    assert rdafront.evaluate(text, {"x": 1.5}) == 4.0


def test_errors_carry_stage_and_exit_code():
    with pytest.raises(rdafront.RdafrontError) as info:
        rdafront.evaluate("sin(", {})
    assert info.value.exit_code == 10
    assert info.value.stage.startswith("expr")
    with pytest.raises(rdafront.RdafrontError) as info:
        rdafront.RunConfig.from_text("[grid]\nnx = 16\n")
    assert info.value.exit_code == 2
    assert "[problem]" in str(info.value)


def test_layer_identities():
    p = rdafront.LayerParams(1.0, -6.0, 4.0, 1.0)
    assert rdafront.layer_exists("minus", p) and rdafront.layer_exists("plus", p)
    assert p.phi_minus + rdafront.q0_profile(0.0, "minus", p) == pytest.approx(p.phi_star, abs=1e-12)
    assert p.phi_plus + rdafront.q0_profile(0.0, "plus", p) == pytest.approx(p.phi_star, abs=1e-12)
    assert rdafront.phase_trajectory(-6.0, "minus", p) == 0.0
    assert abs(rdafront.eval_H0(1.0, -6.0, 4.0, 1.0)) <= 1e-12


def test_u_init():
    assert rdafront.u_init_value("paper-example", 0.0, 0.0, 0.5) == pytest.approx(4.0)
    assert rdafront.u_init_value("paper-example", -2.0, 0.0, 0.0005) == pytest.approx(5 * math.tanh(-1.5) - 1)


def test_config_and_reference():
    cfg = rdafront.RunConfig.from_text(TINY)
    assert cfg.mu == 0.1
    cfg.mu = 0.2
    assert cfg.problem["mu"] == 0.2
    with pytest.raises(rdafront.RdafrontError):
        cfg.mu = -1.0
    snaps = rdafront.solve_reference(cfg, [0.05, 0.1])
    assert len(snaps) == 2
    assert snaps[0].shape == (33, 8, 8)
    assert (snaps[1][0] == -6.0).all() and (snaps[1][-1] == 4.0).all()


def test_compare_tiny():
    cfg = rdafront.RunConfig.from_text(TINY)
    rep = rdafront.compare(cfg)
    assert rep["problem"] == "paper-example"
    (t,) = rep["times"]
    assert t["t"] == 0.1
    assert math.isfinite(t["err_u0"]) and t["err_u1"] is None
    assert rep["checks"]["dirichlet_faces_exact"]
