"""Weighted graphs, potentials, the graph Laplacian and the energy form.

A :class:`Network` is either FINITE (explicit adjacency) or GENERATED (a
neighbour function, explored lazily by breadth-first search from the origin).
Both are immutable after construction; the BFS layers and neighbour lists of
a generated network are memoised behind a lock.

Sign convention: ``(Δu)(x) = Σ_{y~x} c_xy (u(x) - u(y))``.
"""

from __future__ import annotations

import math
import threading
from collections import deque
from collections.abc import Callable, Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .errors import (
    InvalidNetwork,
    NetworkParseError,
    UnknownVertex,
    WindowMismatch,
    WindowTooSmall,
)

FINITE = "FINITE"
GENERATED = "GENERATED"


class _Infinity:
    """The extra vertex of a wired truncation."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def vertex_key(v):
    """Total order over mixed vertex ids (ints < strings < tuples < INFINITY)."""
    if v is INFINITY:
        return (3, ())
    if isinstance(v, bool):
        return (1, str(v))
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, str):
        return (1, v)
    if isinstance(v, tuple):
        return (2, tuple(vertex_key(t) for t in v))
    return (1, repr(v))


class Network:
    """A connected, locally finite resistance network with a distinguished origin.

    Use :meth:`finite` or :meth:`generated` rather than the constructor.
    """

    def __init__(self, origin, kind, *, adjacency=None, neighbor_fn=None,
                 name=None, parse_vertex=None, format_vertex=None, meta=None):
        self.origin = origin
        self.kind = kind
        self.name = name or kind.lower()
        self.meta = dict(meta or {})
        self._adj = adjacency
        self._neighbor_fn = neighbor_fn
        self._parse_vertex = parse_vertex
        self._format_vertex = format_vertex or str
        self._lock = threading.RLock()
        self._memo = {}
        self._layers = [[origin]]
        self._dist = {origin: 0}
        self._exhausted = False

    # -- construction -------------------------------------------------

    @classmethod
    def finite(cls, edges: Iterable, origin, *, name=None, vertices=(),
               parse_vertex=None, format_vertex=None, meta=None):
        """Build a finite network from ``(x, y, conductance)`` triples.

        Parallel edges are merged by summing conductances and zero conductances
        are dropped. Negative conductances, self-loops and disconnected
        vertices are rejected.
        """
        adj = {v: {} for v in vertices}
        for x, y, c in edges:
            c = float(c)
            if not math.isfinite(c) or c < 0:
                raise InvalidNetwork(f"conductance of edge ({x!r}, {y!r}) must be finite and >= 0, got {c}")
            if x == y:
                raise InvalidNetwork(f"self-loop at {x!r}")
            adj.setdefault(x, {})
            adj.setdefault(y, {})
            if c == 0:
                continue
            adj[x][y] = adj[x].get(y, 0.0) + c
            adj[y][x] = adj[y].get(x, 0.0) + c
        if origin not in adj:
            if adj:
                raise UnknownVertex(f"origin {origin!r} is not a vertex")
            adj[origin] = {}
        adjacency = {x: tuple(nbrs.items()) for x, nbrs in adj.items()}
        net = cls(origin, FINITE, adjacency=adjacency, name=name,
                  parse_vertex=parse_vertex, format_vertex=format_vertex, meta=meta)
        reached = net.ball(len(adjacency))
        if len(reached) != len(adjacency):
            missing = [v for v in adjacency if v not in net._dist]
            raise InvalidNetwork(f"network is disconnected; unreachable from origin: {missing[:5]!r}")
        return net

    @classmethod
    def generated(cls, neighbor_fn: Callable, origin, *, name=None,
                  parse_vertex=None, format_vertex=None, meta=None):
        """Wrap a neighbour function ``x -> [(y, c_xy), ...]``.

        The function must raise ``KeyError`` or ``ValueError`` for ids that are
        not vertices. Symmetry and positivity are checked on first access.
        """
        return cls(origin, GENERATED, neighbor_fn=neighbor_fn, name=name,
                   parse_vertex=parse_vertex, format_vertex=format_vertex, meta=meta)

    # -- local structure ----------------------------------------------

    @property
    def is_finite(self):
        return self.kind == FINITE

    def _raw_neighbors(self, x):
        try:
            raw = self._neighbor_fn(x)
        except (KeyError, ValueError, TypeError) as exc:
            raise UnknownVertex(f"{x!r} is not a vertex of {self.name}") from exc
        out = {}
        for y, c in raw:
            c = float(c)
            if not math.isfinite(c) or c < 0:
                raise InvalidNetwork(f"bad conductance {c} on edge ({x!r}, {y!r})")
            if y == x:
                raise InvalidNetwork(f"self-loop at {x!r}")
            if c > 0:
                out[y] = out.get(y, 0.0) + c
        return out

    def neighbors(self, x):
        """Tuple of ``(y, c_xy)`` pairs."""
        if self._adj is not None:
            try:
                return self._adj[x]
            except (KeyError, TypeError):
                raise UnknownVertex(f"{x!r} is not a vertex of {self.name}") from None
        with self._lock:
            hit = self._memo.get(x)
            if hit is not None:
                return hit
            nbrs = self._raw_neighbors(x)
            for y, c in nbrs.items():
                back = self._raw_neighbors(y)
                if back.get(x) != c:
                    raise InvalidNetwork(
                        f"asymmetric conductance: c({x!r},{y!r})={c} but c({y!r},{x!r})={back.get(x)}")
            result = tuple(nbrs.items())
            self._memo[x] = result
            return result

    def has_vertex(self, x):
        try:
            self.neighbors(x)
        except UnknownVertex:
            return False
        return True

    def conductance(self, x, y):
        for z, c in self.neighbors(x):
            if z == y:
                return c
        return 0.0

    def degree(self, x):
        """Weighted degree ``c(x)``."""
        return math.fsum(c for _, c in self.neighbors(x))

    # -- BFS geometry -------------------------------------------------

    def _grow(self, k):
        while len(self._layers) <= k and not self._exhausted:
            nxt = []
            d = len(self._layers)
            for x in self._layers[-1]:
                for y, _ in self.neighbors(x):
                    if y not in self._dist:
                        self._dist[y] = d
                        nxt.append(y)
            if not nxt:
                self._exhausted = True
                break
            self._layers.append(nxt)

    def ball(self, k):
        """Vertices within graph distance ``k`` of the origin, in BFS order."""
        if k < 0:
            return []
        with self._lock:
            self._grow(k)
            out = []
            for layer in self._layers[: k + 1]:
                out.extend(layer)
            return out

    def sphere(self, k):
        with self._lock:
            self._grow(k)
            return list(self._layers[k]) if k < len(self._layers) else []

    def distance(self, x, limit=10_000):
        """Graph distance from the origin (searches at most ``limit`` layers)."""
        with self._lock:
            while x not in self._dist:
                if self._exhausted or len(self._layers) > limit:
                    if not self.has_vertex(x):
                        raise UnknownVertex(f"{x!r} is not a vertex of {self.name}")
                    raise UnknownVertex(f"{x!r} not reached within {limit} layers")
                self._grow(len(self._layers))
            return self._dist[x]

    def vertices(self):
        if not self.is_finite:
            raise InvalidNetwork("vertices() is only available on finite networks")
        return list(self._adj)

    def edges(self):
        """Each undirected edge once, as ``(x, y, c)``."""
        seen = set()
        out = []
        for x in self.vertices():
            for y, c in self._adj[x]:
                if (y, x) not in seen:
                    seen.add((x, y))
                    out.append((x, y, c))
        return out

    def num_vertices(self):
        return len(self._adj) if self.is_finite else math.inf

    # -- ids ----------------------------------------------------------

    def parse_vertex(self, token: str):
        if self._parse_vertex is not None:
            try:
                v = self._parse_vertex(token)
            except (ValueError, KeyError) as exc:
                raise UnknownVertex(f"cannot parse vertex {token!r}: {exc}") from None
        else:
            v = token
            if self.is_finite and v not in self._adj:
                try:
                    v = int(token)
                except ValueError:
                    pass
        if not self.has_vertex(v):
            raise UnknownVertex(f"{token!r} is not a vertex of {self.name}")
        return v

    def format_vertex(self, v):
        if v is INFINITY:
            return "inf"
        return self._format_vertex(v)

    def subnetwork(self, vertex_set, name=None):
        """Full (induced) finite subnetwork on ``vertex_set``."""
        vs = set(vertex_set)
        if self.origin not in vs:
            raise WindowTooSmall("subnetwork must contain the origin")
        order = [v for v in vertex_set]
        edges = []
        for x in order:
            for y, c in self.neighbors(x):
                if y in vs and vertex_key(x) < vertex_key(y):
                    edges.append((x, y, c))
        return Network.finite(edges, self.origin, vertices=order, name=name or f"{self.name}[sub]",
                              parse_vertex=self._parse_vertex, format_vertex=self._format_vertex)

    def __repr__(self):
        size = len(self._adj) if self.is_finite else "inf"
        return f"Network({self.name!r}, kind={self.kind}, origin={self.origin!r}, |V|={size})"


class Potential:
    """A real function on a finite window of vertices, modulo constants.

    The stored representative vanishes at ``anchor`` (the origin unless stated
    otherwise). ``exterior`` is the constant value outside the window for
    finitely supported functions, or ``None`` when unknown.
    """

    __slots__ = ("values", "anchor", "exterior")

    def __init__(self, values: Mapping, anchor, exterior=None):
        if anchor not in values:
            raise WindowTooSmall(f"anchor {anchor!r} is not in the window")
        shift = float(values[anchor])
        self.values = {x: float(u) - shift for x, u in values.items()}
        self.values[anchor] = 0.0
        self.anchor = anchor
        self.exterior = None if exterior is None else float(exterior) - shift

    @classmethod
    def from_function(cls, fn, window, anchor, exterior=None):
        return cls({x: fn(x) for x in window}, anchor, exterior)

    @property
    def window(self):
        return self.values.keys()

    def __call__(self, x):
        try:
            return self.values[x]
        except KeyError:
            if self.exterior is not None and x is not INFINITY:
                return self.exterior
            raise WindowTooSmall(f"{x!r} is outside the potential's window") from None

    def covers(self, x):
        return x in self.values or (self.exterior is not None and x is not INFINITY)

    def diff(self, x, y):
        return self(x) - self(y)

    def reanchored(self, anchor):
        return Potential(self.values, anchor, self.exterior) if anchor != self.anchor else self

    def restricted(self, window):
        window = list(window)
        if self.anchor not in window:
            raise WindowTooSmall("restriction must keep the anchor")
        return Potential({x: self(x) for x in window}, self.anchor)

    def _combine(self, other, a, b):
        if isinstance(other, Potential):
            keys = [x for x in self.values if other.covers(x)]
            if self.anchor not in keys:
                raise WindowMismatch("potentials do not share the anchor vertex")
            ext = None
            if self.exterior is not None and other.exterior is not None:
                ext = a * self.exterior + b * other.exterior
            return Potential({x: a * self.values[x] + b * other(x) for x in keys}, self.anchor, ext)
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, s):
        s = float(s)
        ext = None if self.exterior is None else s * self.exterior
        return Potential({x: s * u for x, u in self.values.items()}, self.anchor, ext)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return f"Potential(|window|={len(self.values)}, anchor={self.anchor!r})"


def dirac(x, window, anchor):
    """The Dirac mass at ``x`` as a finitely supported potential on ``window``."""
    vals = {z: (1.0 if z == x else 0.0) for z in window}
    vals.setdefault(x, 1.0)
    if anchor not in vals:
        vals[anchor] = 0.0
    return Potential(vals, anchor, exterior=0.0)


def constant(window, anchor, value=1.0):
    return Potential({z: value for z in window} | {anchor: value}, anchor, exterior=value)


def _as_fn(u):
    return u if callable(u) else u.__call__


def laplacian_apply(net: Network, u, x):
    """``Σ_{y~x} c_xy (u(x) - u(y))``.

    ``u`` is a :class:`Potential` or any callable on vertices (closed forms).
    """
    nbrs = net.neighbors(x)
    try:
        ux = u(x)
        return math.fsum(c * (ux - u(y)) for y, c in nbrs)
    except WindowTooSmall as exc:
        raise WindowTooSmall(f"neighbourhood of {x!r} is not inside the window: {exc}") from None


def energy(net: Network, u, v, edge_window=None):
    """Dirichlet form ``½ Σ_{x,y ∈ W} c_xy (u(x)-u(y)) (v(x)-v(y))``.

    Only edges with both endpoints in ``edge_window`` contribute. The window
    defaults to the common window of two potentials.
    """
    if edge_window is None:
        if not (isinstance(u, Potential) and isinstance(v, Potential)):
            raise WindowMismatch("edge_window is required for callable arguments")
        edge_window = [x for x in u.values if x in v.values]
    window = set(edge_window)
    for p in (u, v):
        if isinstance(p, Potential):
            missing = [x for x in window if not p.covers(x)]
            if missing:
                raise WindowMismatch(f"edge window not contained in potential window: {missing[:3]!r}")
    terms = []
    for x in window:
        ux, vx = u(x), v(x)
        for y, c in net.neighbors(x):
            if y in window:
                terms.append(c * (ux - u(y)) * (vx - v(y)))
    return 0.5 * math.fsum(terms)


def transition_distribution(net: Network, x):
    """Random-walk step distribution ``p(x, y) = c_xy / c(x)``."""
    nbrs = net.neighbors(x)
    total = math.fsum(c for _, c in nbrs)
    return [(y, c / total) for y, c in nbrs]


class MatrixForm:
    """Sparse view of a finite network: vertex order, edge arrays, Laplacian."""

    def __init__(self, net: Network):
        self.order = net.vertices()
        self.index = {v: i for i, v in enumerate(self.order)}
        rows, cols, cond = [], [], []
        for x, y, c in net.edges():
            rows.append(self.index[x])
            cols.append(self.index[y])
            cond.append(c)
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.cond = np.asarray(cond, dtype=float)
        n = len(self.order)
        off = sp.coo_matrix((-self.cond, (self.rows, self.cols)), shape=(n, n))
        off = off + off.T
        deg = np.bincount(self.rows, self.cond, n) + np.bincount(self.cols, self.cond, n)
        self.L = (off + sp.diags(deg)).tocsr()

    def __len__(self):
        return len(self.order)

    def energy(self, u, v=None):
        """Energy of vertex vectors (1-d, or 2-d with one column per function)."""
        du = u[self.rows] - u[self.cols]
        dv = du if v is None else v[self.rows] - v[self.cols]
        if du.ndim == 1 and dv.ndim == 1:
            return float(np.dot(self.cond, du * dv))
        return (du * self.cond[:, None]).T @ dv


# -- edge-list files ---------------------------------------------------

def _token(tok):
    try:
        return int(tok)
    except ValueError:
        return tok


def parse_network(text: str, name=None) -> Network:
    """Parse ``<id> <id> <conductance>`` lines with ``#`` comments and ``@origin``.

    Integer-looking ids become ints. Without an ``@origin`` directive the first
    vertex mentioned is the origin.
    """
    edges = []
    origin = None
    first = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0].startswith("@"):
            if parts[0] != "@origin" or len(parts) != 2:
                raise NetworkParseError(f"unknown directive {line!r}", lineno)
            if origin is not None:
                raise NetworkParseError("duplicate @origin directive", lineno)
            origin = _token(parts[1])
            continue
        if len(parts) != 3:
            raise NetworkParseError(f"expected '<id> <id> <conductance>', got {line!r}", lineno)
        x, y = _token(parts[0]), _token(parts[1])
        try:
            c = float(parts[2])
        except ValueError:
            raise NetworkParseError(f"bad conductance {parts[2]!r}", lineno) from None
        if not math.isfinite(c) or c < 0:
            raise NetworkParseError(f"conductance must be finite and >= 0, got {parts[2]}", lineno)
        if x == y:
            raise NetworkParseError(f"self-loop at {parts[0]}", lineno)
        if first is None:
            first = x
        edges.append((x, y, c))
    if not edges:
        raise NetworkParseError("no edges")
    if origin is None:
        origin = first
    try:
        return Network.finite(edges, origin, name=name or "file", parse_vertex=_token)
    except UnknownVertex as exc:
        raise NetworkParseError(str(exc)) from None


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read(), name=str(path))


def dump_network(net: Network) -> str:
    lines = [f"@origin {net.format_vertex(net.origin)}"]
    for x, y, c in net.edges():
        lines.append(f"{net.format_vertex(x)} {net.format_vertex(y)} {c!r}")
    return "\n".join(lines) + "\n"


def bfs_order(net: Network, start, allowed):
    """Breadth-first order of ``allowed`` reachable from ``start`` inside ``allowed``."""
    allowed = set(allowed)
    seen = {start}
    order = [start]
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y, _ in net.neighbors(x):
            if y in allowed and y not in seen:
                seen.add(y)
                order.append(y)
                queue.append(y)
    return order
