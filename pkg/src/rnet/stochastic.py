"""Random walks and Gaussian-field Monte Carlo.

Random numbers come from numpy's counter-based Philox generator keyed by the
seed. Each block of ``BLOCK`` samples (or walkers) uses its own substream,
selected by the high word of the Philox counter, so results do not depend on
how blocks are spread over threads. Standard normals are the inverse normal
CDF applied to open-interval uniforms built from 53 random bits.
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla
from scipy.special import ndtr, ndtri

from .errors import BadParam, GramNotPSD, MissingSamples, NotHarmonic, SameVertex, UnknownVertex
from .exhaustion import FREE, WIRED, boundary_of, truncate
from .network import MatrixForm, Network, Potential
from .potential_theory import check_harmonic

GENERATOR_ID = "numpy-philox4x64-10/ndtri"
BLOCK = 4096
SYM_TOL = 1e-9
CLIP_TOL = 1e-12
PSD_TOL = 1e-9
MAX_STEPS = 10_000_000


def default_threads():
    env = os.environ.get("RNET_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _stream(seed, block):
    return np.random.Philox(key=int(seed), counter=[0, 0, 0, int(block)])


def uniforms(seed, block, size):
    """Uniforms in the open interval (0, 1) from substream ``block``."""
    raw = _stream(seed, block).random_raw(int(np.prod(size)))
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return u.reshape(size)


def normals(seed, block, size):
    return ndtri(uniforms(seed, block, size))


def _blocks(n):
    return [(b, b * BLOCK, min(n, (b + 1) * BLOCK)) for b in range((n + BLOCK - 1) // BLOCK)]


def _map_blocks(fn, n, threads):
    blocks = _blocks(n)
    threads = threads or default_threads()
    if threads <= 1 or len(blocks) <= 1:
        return [fn(*blk) for blk in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda blk: fn(*blk), blocks))


# -- random walks ------------------------------------------------------

def hitting_potential(net: Network, target, absorb) -> Potential:
    """``u(y) = P[walk from y reaches target before absorb]`` on a finite network."""
    if target == absorb:
        raise SameVertex("target and absorbing vertex coincide")
    form = MatrixForm(net)
    for z in (target, absorb):
        if z not in form.index:
            raise UnknownVertex(f"{z!r} is not a vertex of {net.name}")
    t, a = form.index[target], form.index[absorb]
    free = np.array([i for i in range(len(form)) if i not in (t, a)], dtype=np.int64)
    u = np.zeros(len(form))
    u[t] = 1.0
    if free.size:
        L = form.L
        A = L[free][:, free].tocsc()
        b = -L[free][:, [t]].toarray().ravel()
        u[free] = spla.splu(A).solve(b)
    return Potential(dict(zip(form.order, u)), absorb)


def hitting_probability(net: Network, target, absorb, start) -> float:
    """Exact ``P[τ_target < τ_absorb]`` for the walk started at ``start``."""
    return hitting_potential(net, target, absorb)(start)


def escape_probability(net: Network, start, target, absorb=None) -> float:
    """Exact probability that the walk from ``start`` reaches ``target`` before
    returning to ``absorb`` (default: ``start``), counting only times >= 1."""
    absorb = start if absorb is None else absorb
    u = hitting_potential(net, target, absorb)
    deg = net.degree(start)
    return math.fsum(c * u(y) for y, c in net.neighbors(start)) / deg


class _WalkTable:
    def __init__(self, net):
        self.form = MatrixForm(net)
        order = self.form.order
        idx = self.form.index
        ptr = [0]
        nbr, key = [], []
        for i, x in enumerate(order):
            nb = net.neighbors(x)
            total = math.fsum(c for _, c in nb)
            acc = np.cumsum([c for _, c in nb]) / total
            acc[-1] = 1.0
            nbr.extend(idx[y] for y, _ in nb)
            key.extend(i + acc)
            ptr.append(len(nbr))
        self.nbr = np.asarray(nbr, dtype=np.int64)
        self.key = np.asarray(key)
        self.ptr = np.asarray(ptr)

    def step(self, pos, u):
        j = np.searchsorted(self.key, pos + u, side="right")
        j = np.minimum(j, self.ptr[pos + 1] - 1)
        return self.nbr[j]


def random_walk_mc(net: Network, start, target, absorb, N, seed, *, strict=False, threads=None,
                   max_steps=MAX_STEPS):
    """Monte Carlo estimate of ``P[τ_target < τ_absorb]`` from ``start``.

    With ``strict`` the walk must take at least one step before a visit
    counts, which gives escape probabilities when ``start == absorb``.
    """
    if N is None or N <= 0:
        raise MissingSamples("random_walk_mc needs N > 0 samples")
    if target == absorb:
        raise SameVertex("target and absorbing vertex coincide")
    table = _WalkTable(net)
    idx = table.form.index
    for z in (start, target, absorb):
        if z not in idx:
            raise UnknownVertex(f"{z!r} is not a vertex of {net.name}")
    s, t, a = idx[start], idx[target], idx[absorb]

    def run(block, lo, hi):
        n = hi - lo
        pos = np.full(n, s, dtype=np.int64)
        hit = np.zeros(n, dtype=bool)
        alive = np.ones(n, dtype=bool)
        if not strict:
            hit[pos == t] = True
            alive[(pos == t) | (pos == a)] = False
        gen = _stream(seed, block)
        steps = 0
        while alive.any():
            if steps >= max_steps:
                raise BadParam(f"walks not absorbed after {max_steps} steps")
            live = np.flatnonzero(alive)
            raw = gen.random_raw(live.size)
            u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
            nxt = table.step(pos[live], u)
            pos[live] = nxt
            at_t = nxt == t
            hit[live[at_t]] = True
            alive[live[at_t | (nxt == a)]] = False
            steps += 1
        return int(hit.sum())

    hits = sum(_map_blocks(run, int(N), threads))
    p = hits / N
    return {"estimate": p, "ci95": 1.96 * math.sqrt(p * (1 - p) / N), "N": int(N), "hits": hits,
            "seed": int(seed), "generator_id": GENERATOR_ID, "strict": strict}


# -- Gaussian fields ---------------------------------------------------

@dataclass
class GaussianFieldBatch:
    """Samples of the centred Gaussian field with covariance ``gram``.

    Columns are labelled: kernel columns by their vertex, extra columns by the
    label they were given. The origin is never a column (its value is 0).
    """

    labels: list
    window: list
    gram: np.ndarray
    samples: np.ndarray
    seed: int
    generator_id: str
    flavor: str
    level: int
    eigenvalues: np.ndarray = None
    clipped: int = 0
    warnings: list = field(default_factory=list)
    harmonic: set = field(default_factory=set)

    @property
    def N(self):
        return self.samples.shape[0]

    def column(self, label):
        return self.samples[:, self.labels.index(label)]

    def to_csv(self, fmt=str):
        buf = io.StringIO()
        buf.write(",".join(fmt(x) for x in self.labels) + "\n")
        np.savetxt(buf, self.samples, delimiter=",", fmt="%.17g")
        return buf.getvalue()


def _kernel_matrix(net, fams, xs, flavor):
    fam0 = fams[xs[0]]
    level, scheme = fam0.level, fam0.scheme
    if any(fams[x].level != level for x in xs):
        raise BadParam("all kernels must come from the same truncation level")
    flav = FREE if flavor == FREE else WIRED
    trunc = truncate(net, level, flav, scheme)
    form = trunc.matrix()
    n = len(trunc.vertices)
    cols = []
    for x in xs:
        fam = fams[x]
        src = fam.v if flavor == FREE else fam.f
        if src is None:
            raise BadParam(f"kernel for {x!r} has no {flavor.lower()} component")
        col = np.array([src(y) for y in trunc.vertices])
        if len(form) > n:
            col = np.append(col, fam.f_infinity)
        cols.append(col)
    return trunc, form, np.column_stack(cols) if cols else np.zeros((len(form), 0))


def psd_factor(G):
    """``(L, eigenvalues, clipped, warnings)`` with ``L L^T`` the clipped ``G``."""
    asym = np.max(np.abs(G - G.T)) if G.size else 0.0
    if asym > SYM_TOL:
        raise GramNotPSD(f"Gram matrix not symmetric (max asymmetry {asym:.3g})")
    G = (G + G.T) / 2
    ev, Q = np.linalg.eigh(G)
    if ev.size and ev.min() < -PSD_TOL:
        raise GramNotPSD(f"Gram matrix eigenvalue {ev.min():.3g} below -{PSD_TOL:g}; kernels not converged?")
    warnings = []
    between = int(np.sum((ev < -CLIP_TOL) & (ev >= -PSD_TOL)))
    if between:
        warnings.append(f"{between} eigenvalue(s) in [-{PSD_TOL:g}, -{CLIP_TOL:g}) clipped to 0")
    clipped = int(np.sum(ev < 0))
    L = Q * np.sqrt(np.clip(ev, 0.0, None))
    return L, ev, clipped, warnings


def sample_field(net: Network, kernels, N, seed, flavor=FREE, *, window=None, extra=None, harmonic=None,
                 threads=None) -> GaussianFieldBatch:
    """Draw ``N`` samples of the field indexed by kernel vertices (and extras).

    ``kernels`` maps vertices to :class:`~rnet.solver.KernelFamily` objects from
    one truncation level. The covariance of the kernel columns is the energy
    Gram matrix of ``v_x`` over the free truncation (``flavor="FREE"``), which
    equals ``v_x(y)``, or of ``f_x`` over the wired truncation. ``extra`` and
    ``harmonic`` add labelled columns (potentials or vertex callables) paired
    by the same energy; ``harmonic`` ones are checked pointwise first.
    FREE flavor only.
    """
    if N is None or N <= 0:
        raise MissingSamples("sample_field needs N > 0 samples")
    if flavor not in (FREE, WIRED):
        raise BadParam(f"unknown flavor {flavor!r}")
    o = net.origin
    xs = [x for x in (window if window is not None else kernels) if x != o]
    if not xs:
        raise BadParam("empty sampling window")
    extra = dict(extra or {})
    harmonic = dict(harmonic or {})
    if (extra or harmonic) and flavor != FREE:
        raise BadParam("extra columns are only supported for the FREE field")
    trunc, form, X = _kernel_matrix(net, kernels, xs, flavor)
    labels = list(xs)
    for name, fn in list(extra.items()) + list(harmonic.items()):
        if name in labels:
            raise BadParam(f"duplicate column label {name!r}")
        labels.append(name)
        col = np.array([fn(y) - fn(o) for y in trunc.vertices])
        X = np.column_stack([X, col])
    if harmonic:
        interior = boundary_of(trunc).interior
        for name, fn in harmonic.items():
            try:
                check_harmonic(net, fn, interior)
            except NotHarmonic as exc:
                raise NotHarmonic(f"column {name!r}: {exc}") from None
    G = form.energy(X)
    G = np.atleast_2d(G)
    L, ev, clipped, warnings = psd_factor(G)
    m = L.shape[0]

    def draw(block, lo, hi):
        return normals(seed, block, (hi - lo, m)) @ L.T

    samples = np.vstack(_map_blocks(draw, int(N), threads))
    return GaussianFieldBatch(labels, xs, G, samples, int(seed), GENERATOR_ID, flavor, trunc.level, ev, clipped,
                              warnings, set(harmonic))


def _coeffs(batch, u):
    if isinstance(u, dict):
        c = np.zeros(len(batch.labels))
        for k, a in u.items():
            c[batch.labels.index(k)] = a
        return c
    c = np.asarray(u, dtype=float)
    if c.shape != (len(batch.labels),):
        raise BadParam(f"coefficient vector must have length {len(batch.labels)}")
    return c


def _double_factorial_odd(n):
    """``(2n)! / (2^n n!)``."""
    return math.factorial(2 * n) // (2 ** n * math.factorial(n))


def moment_check(batch: GaussianFieldBatch, u, n):
    """Empirical ``2n``-th and ``(2n-1)``-th moments of ``⟨u, ξ⟩`` against theory.

    Even moments are ``(2n)!/(2^n n!) ‖u‖_E^{2n}``; odd moments vanish.
    """
    if not 1 <= n <= 3:
        raise BadParam("moment_check supports n = 1, 2, 3")
    c = _coeffs(batch, u)
    norm2 = float(c @ batch.gram @ c)
    X = batch.samples @ c
    N = len(X)
    even = X ** (2 * n)
    odd = X ** (2 * n - 1)
    return {"n": n, "norm_sq": norm2,
            "empirical": float(even.mean()), "predicted": _double_factorial_odd(n) * norm2 ** n,
            "sigma": float(even.std(ddof=1) / math.sqrt(N)),
            "odd_order": 2 * n - 1, "odd_empirical": float(odd.mean()), "odd_predicted": 0.0,
            "odd_sigma": float(odd.std(ddof=1) / math.sqrt(N)), "N": N}


def _mean(a):
    return float(a.mean()), float(a.std(ddof=1) / math.sqrt(len(a)))


def pair_variance(batch: GaussianFieldBatch, x, y):
    """``E[(ξ_x - ξ_y)^2]`` with its standard error; the origin's field is 0."""
    zero = np.zeros(batch.N)
    a = batch.column(x) if x in batch.labels else zero
    b = batch.column(y) if y in batch.labels else zero
    m, s = _mean((a - b) ** 2)
    return {"estimate": m, "sigma": s}


def mc_boundary_integral(batch: GaussianFieldBatch, u_label, h_label):
    """``E[ũ (1 + h̃_x)]`` against the exact pairing ``E(u, h_x) = u(x) - u(o)``.

    Also reports ``E[ũ]`` (should be 0), ``E[1 + h̃_x]`` (total mass, should
    be 1) and how often the density ``1 + h̃_x`` is negative, together with
    the Gaussian prediction ``Φ(-1/‖h_x‖)``.
    """
    if u_label not in batch.harmonic:
        raise NotHarmonic(f"column {u_label!r} was not declared harmonic")
    U = batch.column(u_label)
    H = batch.column(h_label)
    i, j = batch.labels.index(u_label), batch.labels.index(h_label)
    est, sig = _mean(U * (1.0 + H))
    mu, mu_sig = _mean(U)
    mass, mass_sig = _mean(1.0 + H)
    h_norm = math.sqrt(max(batch.gram[j, j], 0.0))
    return {"estimate": est, "sigma": sig, "exact": float(batch.gram[i, j]),
            "mean_u": mu, "mean_u_sigma": mu_sig, "mass": mass, "mass_sigma": mass_sig,
            "negative_density_frequency": float(np.mean(1.0 + H < 0)),
            "negative_density_predicted": float(ndtr(-1.0 / h_norm)) if h_norm > 0 else 0.0,
            "N": batch.N, "seed": batch.seed, "generator_id": batch.generator_id}
