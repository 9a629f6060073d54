import pytest

from rnet.errors import NotBoundaryVertex, NotConverged
from rnet.exhaustion import (BALL, FREE, INTERLEAVED, WIRED, Cauchy, boundary_of, boundary_sum, exhaustion_set,
                             normal_derivative, take_limit, truncate, truncate_pair)
from rnet.models import random_network
from rnet.network import INFINITY

from conftest import model


def test_exhaustion_sets_nest():
    net = model("STAR", m=3)
    for scheme in (BALL, INTERLEAVED):
        prev = exhaustion_set(net, 1, scheme)
        for k in range(2, 8):
            cur = exhaustion_set(net, k, scheme)
            assert cur[: len(prev)] == prev
            prev = cur
    assert len(exhaustion_set(net, 2, INTERLEAVED)) > len(exhaustion_set(net, 2, BALL))


def test_free_and_wired_truncations():
    net = model("GEO_INT")
    pair = truncate_pair(net, 3)
    free, wired = pair[FREE], pair[WIRED]
    assert free.vertices == wired.vertices
    assert free.infinity_vertex is None and wired.infinity_vertex is INFINITY
    assert wired.subnet.conductance(3, INFINITY) == 16.0
    assert wired.subnet.conductance(-3, INFINITY) == 16.0
    assert free.subnet.num_vertices() == 7
    form = wired.matrix()
    assert form.order[-1] is INFINITY


def test_finite_net_has_no_infinity_once_covered():
    net = random_network(10, 0)
    t = truncate(net, 30, WIRED)
    assert t.infinity_vertex is None
    assert t.covers_parent


def test_boundary_and_normal_derivative():
    net = model("GEO_INT")
    t = truncate(net, 2, FREE)
    bd = boundary_of(t)
    assert sorted(bd.boundary) == [-2, 2]
    assert sorted(bd.interior) == [-1, 0, 1]
    u = lambda n: float(n * n)
    assert normal_derivative(t, u, 2) == pytest.approx(4 * (4 - 1))
    with pytest.raises(NotBoundaryVertex):
        normal_derivative(t, u, 0)


def test_cauchy_needs_three_in_a_row():
    c = Cauchy(0.1)
    for v in (1.0, 1.05, 1.08, 2.0, 2.01, 2.02):
        c.push(v)
    assert not c.done
    c.push(2.03)
    assert c.done


def test_take_limit_reports_failure():
    with pytest.raises(NotConverged) as err:
        take_limit(((k, float(k)) for k in range(10)), 0.5)
    assert err.value.result.trace[-1] == 9.0
    rep = take_limit(((k, 1.0 - 2.0 ** -k) for k in range(1, 40)), 1e-6)
    assert rep.converged and rep.value == pytest.approx(1.0, abs=1e-5)


def test_boundary_sum_of_monopole_flux():
    # Σ_{∂G_k} ∂_n w = -Σ_int Δw = -1 for the unit monopole at 0
    spec_w = lambda n: 0.5 * 0.5 ** abs(n)
    net = model("GEO_INT")
    rep = boundary_sum(net, lambda n: 1.0, spec_w, k_max=10, tol=1e-12)
    assert rep.value == pytest.approx(-1.0, abs=1e-12)
