import pytest

from rnet.errors import BadParam
from rnet.models import (BINARY_TREE, GEO_HALF, GEO_INT, HARMONIC, LADDER, LATTICE_JOIN, MODEL_NAMES, MONOPOLE,
                         STAR, ModelSpec, build_model, closed_forms, random_network)
from rnet.network import laplacian_apply

from conftest import model


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_every_model_is_symmetric(name):
    net = build_model(ModelSpec(name))
    for x in net.ball(3):
        for y, c in net.neighbors(x):
            assert c > 0
            assert net.conductance(y, x) == pytest.approx(c)


def test_geo_int_conductances():
    net = model(GEO_INT, c=3.0)
    assert net.conductance(0, 1) == 3.0
    assert net.conductance(-2, -3) == 27.0


def test_star_and_tree_shapes():
    star = model(STAR, m=4)
    assert len(star.neighbors("o")) == 4
    assert star.conductance((2, 1), (2, 2)) == 4.0
    assert star.parse_vertex("2:5") == (2, 5)
    assert star.format_vertex((2, 5)) == "2:5"
    tree = model(BINARY_TREE)
    assert sorted(y for y, _ in tree.neighbors("01")) == ["0", "010", "011"]


def test_ladder_and_lattice_ids():
    lad = model(LADDER)
    assert lad.origin == ("x", 0)
    assert lad.conductance(("x", 2), ("y", 2)) == pytest.approx(0.25)
    assert lad.parse_vertex("y3") == ("y", 3)
    lat = model(LATTICE_JOIN, d=3, m=3)
    o = lat.origin
    assert len(lat.neighbors(o)) == 6 + 2
    assert lat.parse_vertex("1:0,0,2") == (1, 0, 0, 2)
    with pytest.raises(BadParam):
        model(LATTICE_JOIN, d=2)


def test_bad_params():
    with pytest.raises(BadParam):
        ModelSpec(GEO_INT, {"m": 3}).resolved()
    with pytest.raises(BadParam):
        build_model(ModelSpec(GEO_INT, {"c": 0.5}))
    with pytest.raises(BadParam):
        build_model(ModelSpec(STAR, {"m": 1}))
    with pytest.raises(BadParam):
        build_model(ModelSpec("NOPE"))


def test_geo_int_closed_forms_are_what_they_claim():
    spec = ModelSpec(GEO_INT)
    net = build_model(spec)
    forms = {cf.kind: cf for cf in closed_forms(spec)}
    w, h = forms[MONOPOLE], forms[HARMONIC]
    assert w(0) == pytest.approx(0.5)
    assert laplacian_apply(net, w, 0) == pytest.approx(1.0)
    for n in range(-8, 9):
        assert laplacian_apply(net, h, n) == pytest.approx(0.0, abs=1e-12)
        if n:
            assert laplacian_apply(net, w, n) == pytest.approx(0.0, abs=1e-12)
    assert h(1) == 0.5 and h(-1) == -0.5


def test_geo_half_monopole_closed_form():
    spec = ModelSpec(GEO_HALF)
    net = build_model(spec)
    (w,) = closed_forms(spec)
    assert laplacian_apply(net, w, 0) == pytest.approx(1.0)
    assert all(abs(laplacian_apply(net, w, n)) < 1e-12 for n in range(1, 10))


def test_random_network_is_reproducible():
    a, b = random_network(15, 7), random_network(15, 7)
    assert list(a.edges()) == list(b.edges())
    assert a.num_vertices() == 15
    assert all(0.1 <= c <= 10 for _, _, c in a.edges())


@pytest.mark.parametrize("name", [n for n in MODEL_NAMES
                                  if any(cf.kind in (MONOPOLE, HARMONIC) for cf in closed_forms(ModelSpec(n)))])
def test_closed_forms_exact_on_ball_30(name):
    spec = ModelSpec(name)
    forms = [cf for cf in closed_forms(spec) if cf.kind in (MONOPOLE, HARMONIC)]
    net = build_model(spec)
    o = net.origin
    for cf in forms:
        for y in net.ball(30):
            target = 1.0 if cf.kind == MONOPOLE and y == o else 0.0
            assert abs(laplacian_apply(net, cf.evaluator, y) - target) < 1e-12
