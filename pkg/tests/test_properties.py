import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from rnet.exhaustion import FREE, WIRED, truncate
from rnet.models import random_network
from rnet.network import MatrixForm, Potential, dirac, energy, laplacian_apply
from rnet.resistance import effective_resistance, reduce_two_terminal
from rnet.solver import solve_grounded
from rnet.stochastic import hitting_probability

from conftest import model, random_potential
from test_resistance import replay

nets = st.builds(random_network, st.integers(2, 16), st.integers(0, 10_000))
seeds = st.integers(0, 10_000)
FAST = settings(max_examples=40, deadline=None)


def kernel(net, x):
    return solve_grounded(net, {x: 1.0, net.origin: -1.0}, net.origin) if x != net.origin else \
        Potential({z: 0.0 for z in net.vertices()}, net.origin)


@FAST
@given(nets, seeds, seeds)
def test_energy_symmetric_and_constant_blind(net, s1, s2):
    u, v = random_potential(net, s1), random_potential(net, s2)
    assert math.isclose(energy(net, u, v), energy(net, v, u), rel_tol=1e-12, abs_tol=1e-12)
    assert energy(net, u, u) >= 0
    shifted = Potential({x: u(x) + 3.0 for x in net.vertices()}, net.origin)
    assert math.isclose(energy(net, shifted, v), energy(net, u, v), rel_tol=1e-9, abs_tol=1e-9)


@FAST
@given(nets, seeds)
def test_dirac_pairing(net, s):
    u = random_potential(net, s)
    for x in net.vertices():
        d = dirac(x, net.vertices(), net.origin)
        assert abs(energy(net, d, u) - laplacian_apply(net, u, x)) < 1e-9


@FAST
@given(nets, seeds, seeds)
def test_finite_gauss_green(net, s1, s2):
    u, v = random_potential(net, s1), random_potential(net, s2)
    rhs = math.fsum(u(x) * laplacian_apply(net, v, x) for x in net.vertices())
    assert abs(energy(net, u, v) - rhs) < 1e-9


@FAST
@given(nets, seeds)
def test_kernel_reproduces(net, s):
    u = random_potential(net, s)
    o = net.origin
    for x in net.vertices():
        assert abs(energy(net, kernel(net, x), u) - (u(x) - u(o))) < 1e-8


@FAST
@given(nets)
def test_dirac_expansion(net):
    # δ_x = c(x) v_x - Σ_{y~x} c_xy v_y as functions modulo constants
    o = net.origin
    for x in net.vertices():
        vx = kernel(net, x)
        rhs = {z: net.degree(x) * vx(z) for z in net.vertices()}
        for y, c in net.neighbors(x):
            vy = kernel(net, y)
            for z in rhs:
                rhs[z] -= c * vy(z)
        for z in net.vertices():
            lhs = (1.0 if z == x else 0.0) - (1.0 if o == x else 0.0)
            assert abs(rhs[z] - lhs) < 1e-8


@FAST
@given(st.builds(random_network, st.integers(3, 12), st.integers(0, 10_000)))
def test_resistance_metric(net):
    vs = net.vertices()
    R = {}
    for i, a in enumerate(vs):
        for b in vs[i + 1:]:
            R[a, b] = R[b, a] = effective_resistance(net, a, b).value
            assert R[a, b] > 0
    for a in vs:
        R[a, a] = 0.0
    for a in vs:
        for b in vs:
            for c in vs:
                assert R[a, c] <= R[a, b] + R[b, c] + 1e-9
    a, b = vs[0], vs[-1]
    d = kernel(net, a) - kernel(net, b)
    assert math.isclose(energy(net, d, d), R[a, b], rel_tol=1e-8)


@FAST
@given(nets, st.data())
def test_reduction_steps_preserve_resistance(net, data):
    vs = net.vertices()
    x = data.draw(st.sampled_from(vs))
    y = data.draw(st.sampled_from([v for v in vs if v != x]))
    res = reduce_two_terminal(net, x, y)
    assert math.isclose(res.value, res.solver_value, rel_tol=1e-9)
    for step_net in replay(net, res.steps):
        assert math.isclose(effective_resistance(step_net, x, y).value, res.solver_value, rel_tol=1e-9)


@FAST
@given(st.builds(random_network, st.integers(3, 15), st.integers(0, 10_000)))
def test_dipole_is_resistance_times_hitting(net):
    o = net.origin
    x = net.vertices()[-1]
    v = kernel(net, x)
    R = v(x)
    for y in net.vertices():
        assert abs(v(y) - R * hitting_probability(net, x, o, y)) < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["GEO_INT", "STAR", "BINARY_TREE", "LADDER", "SIMPLE_LINE"]), st.integers(2, 6),
       st.data())
def test_wiring_lowers_resistance(name, k, data):
    net = model(name)
    ball = net.ball(k)
    x = data.draw(st.sampled_from(ball))
    y = data.draw(st.sampled_from([v for v in ball if v != x]))
    rf = effective_resistance(truncate(net, k, FREE).subnet, x, y).value
    rw = effective_resistance(truncate(net, k, WIRED).subnet, x, y).value
    assert rw <= rf + 1e-12


@settings(max_examples=20, deadline=None)
@given(nets, seeds)
def test_matrix_energy_matches_pointwise(net, s):
    form = MatrixForm(net)
    u = random_potential(net, s)
    U = np.array([u(x) for x in form.order])
    assert abs(form.energy(U) - energy(net, u, u)) < 1e-9 * max(1.0, energy(net, u, u))
