"""Paths to infinity, their harmonic equivalence, and boundary functionals.

Two paths are equivalent when every test function takes asymptotically equal
values along them. The test set is finite: kernels ``h_x`` for probe vertices
plus monopoles, so a verdict of equivalence is only as strong as the probes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .errors import DepthExhausted, Inconclusive, NotAPath, NotConverged, WindowTooSmall
from .exhaustion import DEFAULT_TOL, Cauchy, LimitReport
from .network import Network
from .solver import kernel_families, monopole

TAIL = 3


class PathToInfinity:
    """A lazily enumerated vertex sequence ``x_0, x_1, ...``.

    ``step`` maps an index to a vertex; ``tag`` names the direction
    (``+inf``, ``branch 2``, ``000...``).
    """

    def __init__(self, step, tag, name=None):
        self._step = step
        self.tag = tag
        self.name = name or str(tag)

    def __getitem__(self, n):
        return self._step(n)

    def prefix(self, depth):
        return [self._step(n) for n in range(depth + 1)]

    def __repr__(self):
        return f"PathToInfinity({self.name!r})"


def validate_path(net: Network, path: PathToInfinity, depth):
    """Adjacency of the first ``depth`` steps, and escape beyond distance ``depth / 2``.

    Raises :class:`NotAPath` at the first non-adjacent step.
    """
    verts = path.prefix(depth)
    for n in range(depth):
        a, b = verts[n], verts[n + 1]
        if net.conductance(a, b) <= 0:
            raise NotAPath(f"{path.name}: x_{n}={a!r} and x_{n + 1}={b!r} are not adjacent", index=n + 1)
    return net.distance(verts[depth], limit=4 * depth + 10) > depth / 2


def path_equivalent(net: Network, p1, p2, test_set, depth, tol=1e-3):
    """Whether ``|h(x_n) - h(y_n)| < tol`` at the last 3 depths for every test function.

    ``test_set`` maps names to vertex callables. Returns ``False`` as soon as
    one function stays at or above ``tol`` on all three depths; when some
    function is mixed raises :class:`DepthExhausted`.
    """
    undecided = []
    for name, h in test_set.items():
        diffs = []
        for n in range(depth - TAIL + 1, depth + 1):
            try:
                diffs.append(abs(h(p1[n]) - h(p2[n])))
            except WindowTooSmall as exc:
                raise WindowTooSmall(f"test function {name!r} at depth {n}: {exc}") from None
        if all(d >= tol for d in diffs):
            return False
        if not all(d < tol for d in diffs):
            undecided.append((name, diffs))
    if undecided:
        raise DepthExhausted(f"{p1.name} vs {p2.name}: undecided at depth {depth} for {undecided[0][0]!r}",
                             undecided)
    return True


def probe_test_set(net: Network, probes, k, tol=DEFAULT_TOL, *, with_monopole=True):
    """``{name: callable}`` of kernels ``h_x`` at level ``k`` plus the origin monopole."""
    fams = kernel_families(net, probes, k, tol, require_convergence=False, k_min=max(1, k - 5))
    out = {f"h[{net.format_vertex(x)}]": fams[x].h for x in probes}
    if with_monopole:
        try:
            mono = monopole(net, k_max=k, tol=tol, stop_early=False)
        except Inconclusive as exc:
            mono = exc.result
        if mono.w is not None:
            out["w[o]"] = mono.value
    return out


def functional_eval(net: Network, path, coeffs, depth, tol=1e-4, *, kernels=None, level=None):
    """Limit of ``P_Har v(x_n) - P_Har v(o)`` along ``path`` for ``v = Σ a_x v_x``.

    ``P_Har v = Σ a_x h_x``. ``kernels`` may supply precomputed families;
    otherwise they are solved at ``level`` (default ``depth + 5``).
    """
    level = level or depth + 5
    if kernels is None:
        kernels = kernel_families(net, list(coeffs), level, DEFAULT_TOL, require_convergence=False,
                                  k_min=max(1, level - 5))
    o = net.origin

    def hv(y):
        return sum(a * (kernels[x].h(y) - kernels[x].h(o)) for x, a in coeffs.items())

    check = Cauchy(tol)
    trace = []
    for n in range(depth + 1):
        trace.append(hv(path[n]))
        check.push(trace[-1])
    report = LimitReport(trace[-1], trace, check.done, tol, list(range(depth + 1)))
    if not check.done:
        raise NotConverged(f"functional along {path.name} not converged by depth {depth}", report)
    return report


@dataclass
class BoundaryReport:
    classes: list
    pairs: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    probes: list = field(default_factory=list)

    @property
    def count(self):
        return len(self.classes)

    def to_dict(self):
        return {"count": self.count, "classes": [list(c) for c in self.classes],
                "pairs": {f"{a}|{b}": v for (a, b), v in self.pairs.items()},
                "warnings": list(self.warnings), "probes": list(self.probes)}


def boundary_classes(net: Network, paths, test_set, depth, tol=1e-3) -> BoundaryReport:
    """Equivalence classes of ``paths`` (transitive closure of pairwise tests).

    A pair found inequivalent while the closure joins it is reported as a
    contradiction (a warning), never silently merged.
    """
    names = [p.name for p in paths]
    parent = list(range(len(paths)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    pairs = {}
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            eq = path_equivalent(net, paths[i], paths[j], test_set, depth, tol)
            pairs[(names[i], names[j])] = eq
            if eq:
                parent[find(i)] = find(j)
    notes = []
    for (a, b), eq in pairs.items():
        if not eq and find(names.index(a)) == find(names.index(b)):
            msg = f"contradiction: {a} and {b} are inequivalent but joined through other paths"
            notes.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
    groups = {}
    for i, name in enumerate(names):
        groups.setdefault(find(i), []).append(name)
    classes = sorted(groups.values(), key=lambda g: names.index(g[0]))
    return BoundaryReport(classes, pairs, notes, sorted(test_set))


def count_boundary_points(net: Network, paths, test_set, depth, tol=1e-3) -> int:
    return boundary_classes(net, paths, test_set, depth, tol).count


def sup_norm(net: Network, u, depth, tol=DEFAULT_TOL):
    """``max_{B_k} |u(x) - u(o)|`` for ``k = 0..depth``.

    The trace is nondecreasing; ``bounded_conjecture`` is set when its last
    3 increments are below ``tol``.
    """
    o = net.origin
    uo = u(o)
    best = 0.0
    trace = []
    check = Cauchy(tol)
    for k in range(depth + 1):
        for x in net.sphere(k):
            best = max(best, abs(u(x) - uo))
        trace.append(best)
        check.push(best)
    return {"value": best, "trace": trace, "bounded_conjecture": check.done, "tol": tol}


# -- standard paths for the built-in models ------------------------------

def model_paths(net: Network):
    """Natural paths to infinity for a built-in model, one per end or branch."""
    model = net.meta.get("model")
    params = net.meta.get("params", {})
    if model in ("GEO_INT", "SIMPLE_LINE"):
        return [PathToInfinity(lambda n: n, "+inf"), PathToInfinity(lambda n: -n, "-inf")]
    if model == "GEO_HALF":
        return [PathToInfinity(lambda n: n, "+inf", "shift0"),
                PathToInfinity(lambda n: n + 1, "+inf", "shift1"),
                PathToInfinity(lambda n: n + 2, "+inf", "shift2")]
    if model == "STAR":
        return [PathToInfinity(lambda n, b=b: "o" if n == 0 else (b, n), f"branch {b}")
                for b in range(params["m"])]
    if model == "BINARY_TREE":
        return [PathToInfinity(lambda n: "o" if n == 0 else "0" * n, "0...", "left"),
                PathToInfinity(lambda n: "o" if n == 0 else "1" * n, "1...", "right")]
    if model == "LADDER":
        return [PathToInfinity(lambda n: ("x", n), "x rail"), PathToInfinity(lambda n: ("y", n), "y rail")]
    raise ValueError(f"no standard paths for model {model!r}")
