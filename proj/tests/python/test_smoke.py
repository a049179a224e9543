"""Smoke tests of the python bindings against known closed forms."""

import math

import numpy as np
import pytest

import pllab


def test_parse_and_eval():
    q = pllab.parse_scalar_field("x1^2 + x2^2", 2)
    assert q.f(np.array([3.0, 4.0])) == pytest.approx(25.0)
    g = q.grad(np.array([1.0, 2.0]))
    assert np.allclose(g, [2.0, 4.0])
    with pytest.raises(Exception):
        pllab.parse_scalar_field("x1 + )", 1)


def test_builtin_registry_and_pl_ratios():
    assert set(pllab.builtin_names()) >= {"fig2", "cylinder", "ts2"}
    cyl = pllab.builtin("cylinder")
    assert pllab.pl_ratio(cyl, np.array([1.0, 0.0, 2.0])) == pytest.approx(2.0)
    ts2 = pllab.builtin("ts2")
    assert pllab.pl_ratio(ts2, np.array([0, 0, 1, 1, 1, 0.0])) == pytest.approx(1.0)


def test_endpoint_radial_quadratic():
    q = pllab.parse_scalar_field("x1^2 + x2^2", 2)
    r = pllab.endpoint(q, np.array([3.0, 4.0]))
    assert r["status"] == "converged"
    assert np.linalg.norm(r["limit"]) < 1e-6
    assert r["path_length"] == pytest.approx(5.0, abs=1e-5)


def test_rescaled_flow_value_law():
    q = pllab.parse_scalar_field("x1^2 + x2^2", 2)
    up = pllab.rescaled_flow(q, np.array([1.0, 0.0]), 3.0)
    assert np.allclose(up, [2.0, 0.0], atol=1e-8)


def test_estimate_mu_deterministic():
    fig2 = pllab.builtin("fig2")
    a = pllab.estimate_mu(fig2, n=2000, seed=7)
    b = pllab.estimate_mu(fig2, n=2000, seed=7)
    assert a["estimate"] == b["estimate"]
    assert 1.0 - 1e-9 <= a["estimate"] <= 1.0 + 1e-3
    assert a["pass"]


def test_rectifier_roundtrip():
    aniso = pllab.builtin("quadratic_aniso")
    rect = pllab.build_rectifier(aniso, np.array([0.0, 0.0]))
    assert rect.unique_minimizer_ok
    p = np.array([0.7, -0.4])
    v = rect.rectify(p)
    assert aniso.f(p) == pytest.approx(float(np.dot(v, v)), rel=1e-7)
    back = rect.unrectify(v)
    assert np.allclose(back, p, atol=1e-6)


def test_lift_and_chart_on_fig2():
    fig2 = pllab.builtin("fig2")
    lift = pllab.horizontal_lift(fig2, np.array([0.3, 0.8]), steps=32)
    assert not lift["partial"]
    assert lift["f_drift_max"] <= 1e-5 * (1.0 + fig2.f(np.array([0.3, 0.8])))
    chart = pllab.global_rectified_chart(fig2)
    p = chart.inverse(np.array([0.5]), np.array([0.4]))
    assert fig2.f(p) == pytest.approx(0.16, abs=1e-6)
    u, z = chart.forward(p)
    assert u[0] == pytest.approx(0.5, abs=1e-4)
    assert z[0] == pytest.approx(0.4, abs=1e-6)


def test_construct_from_expressions():
    d = pllab.diffeo_from_expressions(
        2, 1, ["x1"], ["x2 - 0.25*sin(4*x1)"], ["u1", "0.25*sin(4*u1) + z1"]
    )
    land = pllab.pl_from_diffeo(d)
    y = np.array([0.0, 1.0])
    assert land.f(y) == pytest.approx(1.0, rel=1e-8)
    assert pllab.directional_identity_residual(land, d, y) <= 1e-6


def test_morse_bott_spectrum():
    fig2 = pllab.builtin("fig2")
    rep = pllab.morse_bott_spectrum(fig2, np.array([0.0, 0.0]), kernel_dim=1, mu=1.0)
    assert rep["pass"]
    assert rep["estimate"] == pytest.approx(2.0, abs=1e-9)


def test_emit_plot(tmp_path):
    fig2 = pllab.builtin("fig2")
    out = tmp_path / "fig2.svg"
    pllab.emit_plot(fig2, str(out), xmin=-math.pi, xmax=math.pi, ymin=-2, ymax=2, grid=32)
    text = out.read_text()
    assert text.startswith("<?xml")
    assert "</svg>" in text
