import math

import pytest

import flatspec as fs


def test_bessel_and_quadrature():
    assert fs.j01() == pytest.approx(2.404825557695773, rel=1e-14)
    assert fs.bessel_j(0, fs.j01()) == pytest.approx(0.0, abs=1e-14)
    assert fs.bessel_zero(1, 1) == pytest.approx(3.8317059702075125, rel=1e-13)
    nodes, weights = fs.gauss_legendre(8)
    assert len(nodes) == 8
    assert sum(weights) == pytest.approx(2.0, rel=1e-14)
    assert sum(w * x**6 for x, w in zip(nodes, weights)) == pytest.approx(2 / 7, rel=1e-13)


def test_geometry():
    tri = fs.unit_base_triangle(0.8 * math.pi)
    f = fs.flatness(tri)
    assert f["D"] == pytest.approx(1.0)
    assert 0 < f["a2"] <= f["w"] <= f["D"]
    assert fs.symmetric_about_mediatrix(tri)
    length, a, b = fs.diameter(fs.rectangle(2.0, 1.0))
    assert length == pytest.approx(math.sqrt(5.0))
    with pytest.raises(ValueError):
        fs.flatness([(0, 0), (1, 0), (2, 0)])


def test_sturm():
    assert fs.kroger_bound(1, 2) == pytest.approx(4 * fs.j01() ** 2, rel=1e-14)
    r = fs.sl_tent(2, 2, 1024)
    assert r["values"][1] == pytest.approx(fs.kroger_bound(1, 2), rel=1e-5)
    flat = fs.sl_eigs([0.0, 1.0], [1.0, 1.0], 2, 1, 512)
    assert flat["values"][1] == pytest.approx(math.pi**2, rel=1e-6)
    assert flat["vectors"].shape == (2, 1025)


def test_fem2d():
    square = fs.rectangle(1.0, 1.0)
    r = fs.neumann_eigs(square, 2, 0.05)
    assert r["values"][0] == pytest.approx(0.0, abs=1e-8)
    assert r["values"][1] == pytest.approx(math.pi**2, rel=0.02)
    thin = fs.neumann_eigs_thin(fs.unit_base_triangle(0.95 * math.pi), 1, 0.005)
    assert thin["values"][1] < fs.kroger_bound(1, 2)
    with pytest.raises(fs.ResourceError):
        fs.neumann_eigs(square, 1, 1e-5)


def test_explicit_constant():
    c = fs.explicit_constant()
    assert c["constant"] == pytest.approx(0.43203, abs=1e-5)
    assert fs.tau() == pytest.approx(-0.5692311807745943, rel=1e-10)
    assert fs.Q(0.0) == pytest.approx(c["M"], rel=1e-12)
    v = fs.verify_symmetric_bound(fs.unit_base_triangle(0.8 * math.pi), 0.02)
    assert v["margin"] > 0
    assert fs.J_functional([0.0, 0.5], [0.0, 1.0], 0.5) > 0


def test_run():
    code, out, err = fs.run("constant")
    assert code == 0
    assert out["schema"] == fs.SCHEMA_VERSION
    assert out["constant"] == pytest.approx(0.432, abs=1e-3)
    code, out, err = fs.run("kroger", k_max=2, d_max=3, n_elems=256, format="csv")
    assert code == 0
    assert out.startswith("k,d,")
    code, _, _ = fs.run("mu", shape="blob")
    assert code == 2
    with pytest.raises(ValueError):
        fs.run("mu", bogus=1)
