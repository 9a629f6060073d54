"""Effective resistance: finite formulations, free/wired limits, network reduction.

Y→Δ uses the conductance form of the star-mesh transform: removing a centre
with spokes ``g_a, g_b, g_c`` adds ``g_ab = g_a g_b / (g_a + g_b + g_c)`` and
its two rotations. It follows from eliminating the centre's row in the
Laplacian (Schur complement), which is why it preserves every resistance
between the remaining vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotConverged, SameVertex, UnknownVertex
from .exhaustion import BALL, DEFAULT_TOL, FREE, WIRED, take_limit, truncate
from .network import Network, energy, vertex_key
from .solver import solve_grounded, solve_level

FINITE_KIND = "FINITE"
FREE_KIND = "FREE"
WIRED_KIND = "WIRED"

SERIES = "SERIES"
PARALLEL = "PARALLEL"
WYE_DELTA = "WYE_DELTA"
PRUNE = "PRUNE"


@dataclass
class ResistanceReport:
    x: object
    y: object
    kind: str
    value: float
    formulation_checks: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)
    levels: list = field(default_factory=list)
    converged: bool = True
    tol: float = None

    def spread(self):
        """Largest disagreement between the formulations and ``value``."""
        return max((abs(v - self.value) for v in self.formulation_checks.values()), default=0.0)

    def to_dict(self, fmt=str):
        return {"x": fmt(self.x), "y": fmt(self.y), "kind": self.kind, "value": self.value,
                "formulation_checks": dict(self.formulation_checks), "trace": list(self.trace),
                "levels": list(self.levels), "converged": self.converged, "tol": self.tol}


def effective_resistance(net: Network, x, y) -> ResistanceReport:
    """``R(x, y)`` on a finite network, with equivalent formulations as checks.

    ``potential_drop`` is ``v(x) - v(y)`` for the unit dipole; ``energy`` is
    ``E(v)``; ``inverse_min_energy`` is ``1 / E(v / v(x))``, the reciprocal of
    the least energy of a potential with unit drop.
    """
    if x == y:
        raise SameVertex(f"resistance between {x!r} and itself")
    for z in (x, y):
        if not net.has_vertex(z):
            raise UnknownVertex(f"{z!r} is not a vertex of {net.name}")
    v = solve_grounded(net, {x: 1.0, y: -1.0}, y)
    drop = v(x)
    e = energy(net, v, v)
    unit = v * (1.0 / drop)
    checks = {"potential_drop": drop, "energy": e, "inverse_min_energy": 1.0 / energy(net, unit, unit)}
    return ResistanceReport(x, y, FINITE_KIND, drop, checks)


def _limit_resistance(net, x, y, k_max, tol, flavor, scheme):
    if x == y:
        raise SameVertex(f"resistance between {x!r} and itself")
    kind = FREE_KIND if flavor == FREE else WIRED_KIND
    k0 = max(1, net.distance(x, k_max), net.distance(y, k_max))

    def seq():
        for k in range(k0, max(k_max, k0) + 1):
            sub = truncate(net, k, flavor, scheme).subnet
            yield k, effective_resistance(sub, x, y).value

    try:
        lim = take_limit(seq(), tol, what=f"{kind.lower()} resistance")
        converged = True
    except NotConverged as exc:
        lim = exc.result
        converged = False
    k = lim.levels[-1]
    sol = solve_level(net, [x, y], k, scheme, wired=flavor == WIRED)
    if flavor == FREE:
        d = sol.V[:, 0] - sol.V[:, 1]
        cross = sol.free.energy(d)
        name = "kernel_energy_v"
    else:
        d = sol.F[:, 0] - sol.F[:, 1]
        if len(sol.wired) > len(d):
            d = np.append(d, sol.f_inf[0] - sol.f_inf[1])
        cross = sol.wired.energy(d)
        name = "kernel_energy_f"
    report = ResistanceReport(x, y, kind, lim.value, {name: cross}, lim.trace, lim.levels, converged, tol)
    if not converged:
        raise NotConverged(f"{kind.lower()} resistance did not converge to tol {tol} by level {k}", report)
    return report


def free_resistance(net: Network, x, y, k_max=20, tol=DEFAULT_TOL, scheme=BALL) -> ResistanceReport:
    """``R^F(x, y)``: limit of resistances of FREE truncations.

    Cross-checked against ``E(v_x - v_y)`` from the kernel solver.
    """
    return _limit_resistance(net, x, y, k_max, tol, FREE, scheme)


def wired_resistance(net: Network, x, y, k_max=20, tol=DEFAULT_TOL, scheme=BALL) -> ResistanceReport:
    """``R^W(x, y)``: limit of resistances of WIRED truncations.

    Cross-checked against ``E(f_x - f_y)`` from the kernel solver.
    """
    return _limit_resistance(net, x, y, k_max, tol, WIRED, scheme)


# -- two-terminal reduction -------------------------------------------

@dataclass
class ReductionStep:
    op: str
    removed: list
    added: list

    def to_dict(self, fmt=str):
        return {"op": self.op, "removed": [fmt(v) if not isinstance(v, tuple) else [fmt(t) for t in v]
                                           for v in self.removed],
                "added": [[fmt(a), fmt(b), c] for a, b, c in self.added]}


@dataclass
class ReductionResult:
    value: float
    steps: list
    reduced: bool
    solver_value: float

    def to_dict(self, fmt=str):
        return {"value": self.value, "reduced": self.reduced, "solver_value": self.solver_value,
                "steps": [s.to_dict(fmt) for s in self.steps]}


class _Graph:
    """Private mutable adjacency for reduction."""

    def __init__(self, net):
        self.adj = {v: {} for v in net.vertices()}
        for a, b, c in net.edges():
            self.adj[a][b] = c
            self.adj[b][a] = c

    def add(self, a, b, c, steps):
        old = self.adj[a].get(b)
        if old is not None:
            steps.append(ReductionStep(PARALLEL, [(a, b)], [(a, b, old + c)]))
            c = old + c
        self.adj[a][b] = c
        self.adj[b][a] = c
        return c

    def remove_vertex(self, v):
        for u in self.adj.pop(v):
            del self.adj[u][v]

    def candidates(self, terminals, degree):
        return sorted((v for v, nb in self.adj.items() if v not in terminals and len(nb) == degree),
                      key=vertex_key)


def reduce_two_terminal(net: Network, x, y) -> ReductionResult:
    """Reduce to a single ``x``–``y`` edge by series, parallel and Y→Δ steps.

    Dangling non-terminal vertices carry no current and are pruned. When no
    rule applies the remaining network is handed to the linear solver.
    """
    if x == y:
        raise SameVertex(f"resistance between {x!r} and itself")
    solver_value = effective_resistance(net, x, y).value
    g = _Graph(net)
    terminals = {x, y}
    steps = []
    while True:
        if len(g.adj) == 2 and y in g.adj[x]:
            break
        dangling = g.candidates(terminals, 1) + g.candidates(terminals, 0)
        if dangling:
            v = min(dangling, key=vertex_key)
            steps.append(ReductionStep(PRUNE, [v], []))
            g.remove_vertex(v)
            continue
        series = g.candidates(terminals, 2)
        if series:
            v = series[0]
            (a, ca), (b, cb) = sorted(g.adj[v].items(), key=lambda t: vertex_key(t[0]))
            g.remove_vertex(v)
            c = ca * cb / (ca + cb)
            steps.append(ReductionStep(SERIES, [v], [(a, b, c)]))
            g.add(a, b, c, steps)
            continue
        wye = g.candidates(terminals, 3)
        if wye:
            v = wye[0]
            spokes = sorted(g.adj[v].items(), key=lambda t: vertex_key(t[0]))
            total = math.fsum(c for _, c in spokes)
            g.remove_vertex(v)
            added = []
            for i in range(3):
                for j in range(i + 1, 3):
                    (a, ga), (b, gb) = spokes[i], spokes[j]
                    added.append((a, b, ga * gb / total))
            steps.append(ReductionStep(WYE_DELTA, [v], added))
            for a, b, c in added:
                g.add(a, b, c, steps)
            continue
        break
    reduced = len(g.adj) == 2 and y in g.adj.get(x, {})
    value = 1.0 / g.adj[x][y] if reduced else solver_value
    return ReductionResult(value, steps, reduced, solver_value)
