import math

import numpy as np
import pytest

from rnet.errors import (InvalidNetwork, NetworkParseError, UnknownVertex, WindowMismatch, WindowTooSmall)
from rnet.models import random_network
from rnet.network import (INFINITY, MatrixForm, Network, Potential, bfs_order, constant, dirac, dump_network,
                          energy, laplacian_apply, parse_network, transition_distribution)

from conftest import model, random_potential

TRIANGLE = """\
# unit triangle with a pendant vertex
@origin a
a b 1
b c 1
c a 1
c d 2.5
"""


def test_parse_and_roundtrip():
    net = parse_network(TRIANGLE)
    assert net.origin == "a"
    assert net.num_vertices() == 4
    assert net.conductance("c", "d") == 2.5
    assert net.degree("c") == pytest.approx(4.5)
    again = parse_network(dump_network(net))
    assert sorted(map(str, again.edges())) == sorted(map(str, net.edges()))


def test_integer_ids_and_default_origin():
    net = parse_network("0 1 1\n1 2 1\n")
    assert net.origin == 0
    assert net.has_vertex(2) and not net.has_vertex("2")


@pytest.mark.parametrize("text, line", [("a b\n", 1), ("a b 1\nb c -1\n", 2), ("a b x\n", 1),
                                        ("a a 1\n", 1)])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(NetworkParseError) as err:
        parse_network(text)
    assert err.value.line == line


def test_disconnected_rejected():
    with pytest.raises(InvalidNetwork):
        Network.finite([(0, 1, 1.0), (2, 3, 1.0)], 0)


def test_unknown_vertex():
    net = parse_network(TRIANGLE)
    with pytest.raises(UnknownVertex):
        net.neighbors("z")


def test_balls_and_spheres_on_generated():
    net = model("GEO_INT")
    assert net.ball(0) == [0]
    assert sorted(net.ball(2)) == [-2, -1, 0, 1, 2]
    assert sorted(net.sphere(3)) == [-3, 3]
    assert net.distance(-7) == 7
    tree = model("BINARY_TREE")
    assert [len(tree.ball(k)) for k in range(5)] == [1, 3, 7, 15, 31]


def test_bfs_order_is_prefix_stable():
    net = model("STAR", m=3)
    for k in range(1, 6):
        small, big = net.ball(k), net.ball(k + 1)
        assert big[: len(small)] == small
    assert bfs_order(net, net.origin, set(net.ball(2)))[0] == net.origin


def test_potential_is_anchored():
    u = Potential({0: 3.0, 1: 5.0}, 0)
    assert u(0) == 0.0 and u(1) == 2.0
    assert u.reanchored(1)(0) == -2.0
    with pytest.raises(WindowTooSmall):
        u(7)
    d = dirac(1, [0, 1, 2], 0)
    assert d(99) == 0.0 and d(1) == 1.0
    with pytest.raises(WindowTooSmall):
        d(INFINITY)


def test_potential_arithmetic():
    u = Potential({0: 0.0, 1: 1.0, 2: 4.0}, 0)
    v = Potential({0: 0.0, 1: 2.0}, 0)
    w = 2 * u - v
    assert list(w.window) == [0, 1]
    assert w(1) == 0.0
    with pytest.raises(WindowMismatch):
        u + Potential({1: 0.0, 2: 1.0}, 1)


def test_laplacian_and_transition():
    net = parse_network(TRIANGLE)
    u = Potential({"a": 0.0, "b": 1.0, "c": 2.0, "d": 3.0}, "a")
    assert laplacian_apply(net, u, "c") == pytest.approx(1 * (2 - 0) + 1 * (2 - 1) + 2.5 * (2 - 3))
    p = dict(transition_distribution(net, "c"))
    assert math.fsum(p.values()) == pytest.approx(1.0)
    assert p["d"] == pytest.approx(2.5 / 4.5)


def test_energy_of_dirac_is_degree():
    net = parse_network(TRIANGLE)
    d = dirac("c", net.vertices(), "a")
    assert energy(net, d, d) == pytest.approx(net.degree("c"))
    assert energy(net, d, constant(net.vertices(), "a")) == 0.0


def test_matrix_form_matches_energy():
    net = random_network(12, 3)
    form = MatrixForm(net)
    u, v = random_potential(net, 1), random_potential(net, 2)
    U = np.array([u(x) for x in form.order])
    V = np.array([v(x) for x in form.order])
    assert form.energy(U, V) == pytest.approx(energy(net, u, v), abs=1e-12)
    Lu = form.L @ U
    assert Lu == pytest.approx([laplacian_apply(net, u, x) for x in form.order], abs=1e-12)
    G = form.energy(np.column_stack([U, V]))
    assert G.shape == (2, 2) and G[0, 1] == pytest.approx(G[1, 0])
