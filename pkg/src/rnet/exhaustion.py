"""Finite truncations of a network, subgraph boundaries and boundary sums.

An exhaustion is indexed by a level ``k >= 1``. The default scheme takes graph
balls ``B_k`` around the origin; the ``interleaved`` scheme takes ``B_k`` plus
the first half (in BFS order) of the sphere ``S_{k+1}``, which gives a second,
nested and connected exhaustion for invariance checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyBall, NotBoundaryVertex, NotConverged, WindowTooSmall
from .network import INFINITY, MatrixForm, Network, Potential, vertex_key

FREE = "FREE"
WIRED = "WIRED"
BALL = "ball"
INTERLEAVED = "interleaved"
SCHEMES = (BALL, INTERLEAVED)

DEFAULT_TOL = 1e-6
EXACT_TOL = 1e-10
CONSECUTIVE = 3


def exhaustion_set(net: Network, k, scheme=BALL):
    """Vertex list of the level-``k`` subgraph, in BFS order from the origin."""
    if k < 0:
        raise ValueError("level must be >= 0")
    ball = net.ball(k)
    if not ball:
        raise EmptyBall(f"ball of radius {k} around {net.origin!r} is empty")
    if scheme == BALL:
        return ball
    if scheme == INTERLEAVED:
        shell = net.sphere(k + 1)
        return ball + shell[: len(shell) // 2]
    raise ValueError(f"unknown exhaustion scheme {scheme!r}")


@dataclass(frozen=True)
class BoundaryData:
    boundary: list
    interior: list


@dataclass
class Truncation:
    """Level-``k`` subnetwork, FREE (induced) or WIRED (severed edges sent to ∞).

    Vertex ids are shared with the parent network, so ``parent_map`` is the
    identity on ``vertices``.
    """

    level: int
    flavor: str
    parent: Network
    vertices: list
    subnet: Network
    infinity_vertex: object = None
    _matrix: object = field(default=None, repr=False)

    @property
    def parent_map(self):
        return {v: v for v in self.vertices}

    @property
    def covers_parent(self):
        return self.parent.is_finite and len(self.vertices) == self.parent.num_vertices()

    def matrix(self) -> MatrixForm:
        """Sparse form of ``subnet``; ``vertices`` come first and ∞ last."""
        if self._matrix is None:
            self._matrix = MatrixForm(self.subnet)
        return self._matrix


def truncate(net: Network, k, flavor=FREE, scheme=BALL) -> Truncation:
    """FREE or WIRED truncation of ``net`` at level ``k``."""
    if flavor not in (FREE, WIRED):
        raise ValueError(f"unknown flavor {flavor!r}")
    return truncate_pair(net, k, scheme, flavors=(flavor,))[flavor]


def truncate_pair(net: Network, k, scheme=BALL, flavors=(FREE, WIRED)):
    """Truncations of several flavors from one scan of the level-``k`` subgraph."""
    if k < 1:
        raise ValueError("truncation level must be >= 1")
    verts = exhaustion_set(net, k, scheme)
    inside = set(verts)
    edges = []
    to_inf = {}
    for x in verts:
        kx = vertex_key(x)
        for y, c in net.neighbors(x):
            if y not in inside:
                to_inf[x] = to_inf.get(x, 0.0) + c
            elif kx < vertex_key(y):
                edges.append((x, y, c))
    out = {}
    for flavor in flavors:
        flav_edges = edges
        inf_vertex = None
        if flavor == WIRED and to_inf:
            inf_vertex = INFINITY
            flav_edges = edges + [(x, INFINITY, c) for x, c in to_inf.items()]
        subnet = Network.finite(flav_edges, net.origin, vertices=verts,
                                name=f"{net.name}[{flavor.lower()} {k}]", format_vertex=net.format_vertex)
        out[flavor] = Truncation(k, flavor, net, verts, subnet, inf_vertex)
    return out


def boundary_of(trunc: Truncation) -> BoundaryData:
    """Split ``H`` into vertices with a parent neighbour outside ``H`` and the rest."""
    inside = set(trunc.vertices)
    bd, interior = [], []
    for x in trunc.vertices:
        if any(y not in inside for y, _ in trunc.parent.neighbors(x)):
            bd.append(x)
        else:
            interior.append(x)
    return BoundaryData(bd, interior)


def normal_derivative(trunc: Truncation, v, x):
    """``Σ_{y ∈ H, y~x} c_xy (v(x) - v(y))`` at a boundary vertex ``x``."""
    inside = set(trunc.vertices)
    nbrs = trunc.parent.neighbors(x)
    if x not in inside or all(y in inside for y, _ in nbrs):
        raise NotBoundaryVertex(f"{x!r} is not on the boundary of level {trunc.level}")
    return _inner_derivative(nbrs, inside, v, x)


def _inner_derivative(nbrs, inside, v, x):
    vx = v(x)
    return math.fsum(c * (vx - v(y)) for y, c in nbrs if y in inside)


# -- limits ------------------------------------------------------------

@dataclass
class LimitReport:
    """Result of a limit taken along an exhaustion."""

    value: float
    trace: list
    converged: bool
    tol: float
    levels: list
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = {"value": self.value, "trace": list(self.trace), "converged": self.converged,
               "tol": self.tol, "levels": list(self.levels)}
        out.update(self.extra)
        return out


class Cauchy:
    """Tracks ``|s_k - s_{k-1}| < tol`` over consecutive levels."""

    def __init__(self, tol, consecutive=CONSECUTIVE):
        self.tol = tol
        self.consecutive = consecutive
        self.run = 0
        self.last = None

    def push(self, value, delta=None):
        if delta is None and self.last is not None:
            delta = abs(value - self.last)
        self.last = value
        if delta is not None and delta < self.tol:
            self.run += 1
        else:
            self.run = 0
        return self.done

    @property
    def done(self):
        return self.run >= self.consecutive


def take_limit(sequence, tol=DEFAULT_TOL, *, stop_early=True, what="limit"):
    """Run ``(level, value)`` pairs until 3 consecutive deltas fall below ``tol``.

    Raises :class:`NotConverged` carrying the report when the sequence ends first.
    """
    check = Cauchy(tol)
    trace, levels = [], []
    for k, s in sequence:
        trace.append(s)
        levels.append(k)
        if check.push(s) and stop_early:
            break
    if not trace:
        raise NotConverged(f"{what}: empty sequence")
    report = LimitReport(trace[-1], trace, check.done, tol, levels)
    if not check.done:
        raise NotConverged(f"{what} did not converge to tol {tol} by level {levels[-1]}", report)
    return report


class Family:
    """A potential that depends on the exhaustion level: ``Family(lambda k: ...)``."""

    def __init__(self, at):
        self.at = at


def _at(u, k):
    return u.at(k) if isinstance(u, Family) else u


def boundary_terms(net: Network, u, v, k, scheme=BALL):
    """``(H, boundary data, Σ_{∂H} u ∂_n v)`` at level ``k``."""
    verts = exhaustion_set(net, k, scheme)
    inside = set(verts)
    parts = []
    bd = []
    interior = []
    for x in verts:
        nbrs = net.neighbors(x)
        if any(y not in inside for y, _ in nbrs):
            bd.append(x)
            parts.append(u(x) * _inner_derivative(nbrs, inside, v, x))
        else:
            interior.append(x)
    return verts, BoundaryData(bd, interior), math.fsum(parts)


def boundary_sum(net: Network, u, v, k_max=20, tol=DEFAULT_TOL, scheme=BALL, *, k_min=1,
                 stop_early=True) -> LimitReport:
    """Limit of ``s_k = Σ_{x ∈ ∂G_k} u(x) ∂_n v(x)``.

    ``u`` and ``v`` are potentials, vertex callables or :class:`Family` objects.
    For finite networks whose exhaustion stops growing the sum is eventually 0.
    """
    def seq():
        for k in range(k_min, k_max + 1):
            uk, vk = _at(u, k), _at(v, k)
            try:
                yield k, boundary_terms(net, uk, vk, k, scheme)[2]
            except WindowTooSmall as exc:
                raise WindowTooSmall(f"level {k}: {exc}") from None
    return take_limit(seq(), tol, stop_early=stop_early, what="boundary sum")


def extend_wired(f: Potential, verts, f_inf):
    """Values of ``f`` on ``verts``, using ``f_inf`` for vertices beyond its window."""
    return np.array([f.values.get(x, f_inf) for x in verts])
