"""Built-in example networks and their closed-form reference functions.

Vertex ids per model:

* ``GEO_INT``, ``GEO_HALF``, ``SIMPLE_LINE``: integers, origin ``0``.
* ``STAR``: ``"o"`` and ``(branch, n)`` with ``n >= 1``; printed ``branch:n``.
* ``BINARY_TREE``: ``"o"`` and non-empty binary strings (``"0"``, ``"01"``, ...).
* ``LADDER``: ``("x", n)`` / ``("y", n)``; printed ``x3`` / ``y3``; origin ``x0``.
* ``LATTICE_JOIN``: ``(copy, i_1, ..., i_d)``; printed ``copy:i_1,...,i_d``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import BadParam
from .network import Network

GEO_INT = "GEO_INT"
GEO_HALF = "GEO_HALF"
STAR = "STAR"
BINARY_TREE = "BINARY_TREE"
LADDER = "LADDER"
LATTICE_JOIN = "LATTICE_JOIN"
SIMPLE_LINE = "SIMPLE_LINE"

MODEL_NAMES = (GEO_INT, GEO_HALF, STAR, BINARY_TREE, LADDER, LATTICE_JOIN, SIMPLE_LINE)

DEFAULTS = {
    GEO_INT: {"c": 2.0},
    GEO_HALF: {"c": 2.0},
    STAR: {"c": 2.0, "m": 3},
    BINARY_TREE: {},
    LADDER: {"alpha": 2.0, "beta": 0.5},
    LATTICE_JOIN: {"d": 3, "m": 3, "patch": 6},
    SIMPLE_LINE: {},
}

MONOPOLE = "MONOPOLE"
HARMONIC = "HARMONIC"
NONE = "NONE"


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: dict = field(default_factory=dict)

    def resolved(self):
        """Parameters with defaults filled in."""
        if self.name not in DEFAULTS:
            raise BadParam(f"unknown model {self.name!r}; expected one of {', '.join(MODEL_NAMES)}")
        out = dict(DEFAULTS[self.name])
        unknown = set(self.params) - set(out)
        if unknown:
            raise BadParam(f"{self.name} does not take parameter(s) {sorted(unknown)}")
        out.update(self.params)
        return out


@dataclass(frozen=True)
class ClosedForm:
    kind: str
    evaluator: object
    description: str = ""

    def __call__(self, x):
        return self.evaluator(x)


def _validate(spec: ModelSpec):
    p = spec.resolved()
    name = spec.name
    if name in (GEO_INT, GEO_HALF, STAR):
        if not p["c"] > 1:
            raise BadParam(f"{name}: c must be > 1, got {p['c']}")
        p["c"] = float(p["c"])
    if name in (STAR, LATTICE_JOIN):
        m = p["m"]
        if int(m) != m or m < 2:
            raise BadParam(f"{name}: m must be an integer >= 2, got {m}")
        p["m"] = int(m)
    if name == LADDER:
        a, b = float(p["alpha"]), float(p["beta"])
        if not (a > 1 > b > 0):
            raise BadParam(f"LADDER needs alpha > 1 > beta > 0, got alpha={a}, beta={b}")
        p["alpha"], p["beta"] = a, b
    if name == LATTICE_JOIN:
        d, patch = p["d"], p["patch"]
        if int(d) != d or d < 3:
            raise BadParam(f"LATTICE_JOIN: d must be an integer >= 3, got {d}")
        if int(patch) != patch or patch < 1:
            raise BadParam(f"LATTICE_JOIN: patch must be a positive integer, got {patch}")
        p["d"], p["patch"] = int(d), int(patch)
    return p


def _int_vertex(n, lo=None):
    if isinstance(n, bool) or not isinstance(n, int):
        raise ValueError(f"expected an integer vertex, got {n!r}")
    if lo is not None and n < lo:
        raise ValueError(f"vertex {n} below {lo}")
    return n


def _geo_int(c):
    def nbrs(n):
        n = _int_vertex(n)
        return [(n - 1, c ** max(abs(n), abs(n - 1))), (n + 1, c ** max(abs(n + 1), abs(n)))]
    return nbrs


def _geo_half(c):
    def nbrs(n):
        n = _int_vertex(n, 0)
        out = [(n + 1, c ** (n + 1))]
        if n > 0:
            out.append((n - 1, c ** n))
        return out
    return nbrs


def _line(n):
    n = _int_vertex(n)
    return [(n - 1, 1.0), (n + 1, 1.0)]


def _star(c, m):
    def nbrs(v):
        if v == "o":
            return [((b, 1), c) for b in range(m)]
        b, n = v
        if not (0 <= b < m) or _int_vertex(n, 1) < 1:
            raise ValueError(v)
        prev = "o" if n == 1 else (b, n - 1)
        return [(prev, c ** n), ((b, n + 1), c ** (n + 1))]
    return nbrs


def _parse_star(tok):
    tok = tok.strip()
    if tok == "o":
        return "o"
    b, n = tok.split(":")
    return (int(b), int(n))


def _fmt_star(v):
    return "o" if v == "o" else f"{v[0]}:{v[1]}"


def _tree(v):
    if v == "o":
        return [("0", 1.0), ("1", 1.0)]
    if not isinstance(v, str) or not v or set(v) - {"0", "1"}:
        raise ValueError(v)
    parent = v[:-1] or "o"
    return [(parent, 1.0), (v + "0", 1.0), (v + "1", 1.0)]


def _ladder(alpha, beta):
    def nbrs(v):
        side, n = v
        if side not in ("x", "y"):
            raise ValueError(v)
        n = _int_vertex(n, 0)
        other = "y" if side == "x" else "x"
        out = [((side, n + 1), alpha ** (n + 1)), ((other, n), beta ** n)]
        if n > 0:
            out.append(((side, n - 1), alpha ** n))
        return out
    return nbrs


def _parse_ladder(tok):
    tok = tok.strip()
    if tok[:1] not in ("x", "y"):
        raise ValueError(tok)
    return (tok[0], int(tok[1:]))


def _fmt_ladder(v):
    return f"{v[0]}{v[1]}"


def _lattice_join(d, m):
    zero = (0,) * d

    def nbrs(v):
        if not isinstance(v, tuple) or len(v) != d + 1:
            raise ValueError(v)
        k, coords = v[0], v[1:]
        if not (0 <= k < m) or any(isinstance(t, bool) or not isinstance(t, int) for t in v):
            raise ValueError(v)
        out = []
        for j in range(d):
            for s in (-1, 1):
                w = list(coords)
                w[j] += s
                out.append(((k, *w), 1.0))
        if coords == zero:
            for other in sorted({(k - 1) % m, (k + 1) % m}):
                out.append(((other, *zero), 1.0))
        return out
    return nbrs


def _parse_lattice(tok):
    k, rest = tok.split(":")
    return (int(k), *(int(t) for t in rest.split(",")))


def _fmt_lattice(v):
    return f"{v[0]}:" + ",".join(str(t) for t in v[1:])


def build_model(spec: ModelSpec) -> Network:
    """Generator-backed network for a built-in model."""
    p = _validate(spec)
    name = spec.name
    meta = {"model": name, "params": p}
    if name == GEO_INT:
        return Network.generated(_geo_int(p["c"]), 0, name="geo-int", parse_vertex=int, meta=meta)
    if name == GEO_HALF:
        return Network.generated(_geo_half(p["c"]), 0, name="geo-half", parse_vertex=int, meta=meta)
    if name == SIMPLE_LINE:
        return Network.generated(_line, 0, name="line", parse_vertex=int, meta=meta)
    if name == STAR:
        return Network.generated(_star(p["c"], p["m"]), "o", name="star", parse_vertex=_parse_star,
                                 format_vertex=_fmt_star, meta=meta)
    if name == BINARY_TREE:
        return Network.generated(_tree, "o", name="binary-tree", parse_vertex=str.strip, meta=meta)
    if name == LADDER:
        return Network.generated(_ladder(p["alpha"], p["beta"]), ("x", 0), name="ladder",
                                 parse_vertex=_parse_ladder, format_vertex=_fmt_ladder, meta=meta)
    if name == LATTICE_JOIN:
        return Network.generated(_lattice_join(p["d"], p["m"]), (0,) + (0,) * p["d"], name="lattice-join",
                                 parse_vertex=_parse_lattice, format_vertex=_fmt_lattice, meta=meta)
    raise BadParam(f"unknown model {name!r}")


def closed_forms(spec: ModelSpec):
    """Exact monopole / harmonic functions where the model has them.

    The harmonic function on ``GEO_INT`` is ``sgn(n) (1 - r^|n|)``; the variant
    ``sgn(n) (1 - w_o(n))`` is not harmonic at ``n = ±1`` unless ``a = 1``.
    """
    p = _validate(spec)
    if spec.name == GEO_INT:
        r = 1.0 / p["c"]
        a = r / (2.0 * (1.0 - r))
        return [
            ClosedForm(MONOPOLE, lambda n: a * r ** abs(n), f"w_o(n) = {a!r} * r^|n|"),
            ClosedForm(HARMONIC, lambda n: math.copysign(1.0, n) * (1.0 - r ** abs(n)) if n else 0.0,
                       "h(n) = sgn(n) (1 - r^|n|)"),
        ]
    if spec.name == GEO_HALF:
        r = 1.0 / p["c"]
        a = r / (1.0 - r)
        return [ClosedForm(MONOPOLE, lambda n: a * r ** n, f"w_o(n) = {a!r} * r^n")]
    return [ClosedForm(NONE, lambda v: 0.0, "no closed form")]


def random_network(n, seed, *, extra_edges=None, cmin=0.1, cmax=10.0):
    """Random connected network on vertices ``0..n-1`` (origin 0).

    A uniformly random spanning tree (random attachment) plus ``extra_edges``
    chords, conductances uniform in ``[cmin, cmax]``.
    """
    if n < 2:
        raise BadParam("random_network needs n >= 2")
    rng = random.Random(seed)
    if extra_edges is None:
        extra_edges = rng.randint(0, n)
    edges = {}
    for v in range(1, n):
        u = rng.randrange(v)
        edges[(u, v)] = rng.uniform(cmin, cmax)
    for _ in range(extra_edges):
        u, v = rng.sample(range(n), 2)
        key = (min(u, v), max(u, v))
        if key not in edges:
            edges[key] = rng.uniform(cmin, cmax)
    return Network.finite([(u, v, c) for (u, v), c in edges.items()], 0, name=f"random-{n}-{seed}",
                          parse_vertex=int)
