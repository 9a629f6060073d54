"""Grounded Laplacian solves and the exhaustion limits v_x, f_x, h_x and w_x.

``v_x`` is the limit of dipole solutions ``Δv = δ_x - δ_o`` on FREE truncations,
``f_x`` the same limit on WIRED truncations and ``h_x = v_x - f_x``. The
monopole ``w_x`` solves ``Δw = δ_x`` on WIRED truncations grounded at ∞.

Convergence of a kernel is measured by the energy (squared energy norm) of the
difference of consecutive levels: ``E_{B_{k-1}}(v_k - v_{k-1})`` for the free
kernel and ``E_{W_k}(f_k - f̂_{k-1})`` for the wired one, where ``f̂_{k-1}``
extends ``f_{k-1}`` by its value at ∞.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .errors import ChargeImbalance, Inconclusive, NotConverged, Singular, UnknownVertex, WindowTooSmall
from .exhaustion import (BALL, CONSECUTIVE, DEFAULT_TOL, FREE, WIRED, Cauchy, boundary_of, truncate,
                         truncate_pair)
from .network import INFINITY, MatrixForm, Network, Potential, laplacian_apply

DIRECT_LIMIT = 10_000
CG_RTOL = 1e-12
DIVERGENCE_FACTOR = 1e6
SLOPE_WINDOW = 6


class GroundedSystem:
    """The Laplacian of a finite network with one vertex grounded.

    Factorized once; :meth:`solve` accepts one or many right-hand sides.
    """

    def __init__(self, form: MatrixForm, ground, method=None):
        if ground not in form.index:
            raise UnknownVertex(f"ground {ground!r} is not a vertex")
        self.form = form
        self.ground = ground
        g = form.index[ground]
        n = len(form)
        self.keep = np.array([i for i in range(n) if i != g], dtype=np.int64)
        A = form.L[self.keep][:, self.keep].tocsc()
        self.method = method or ("direct" if len(self.keep) <= DIRECT_LIMIT else "cg")
        self._A = A
        self._lu = None
        if len(self.keep) == 0:
            self.method = "direct"
        elif self.method == "direct":
            try:
                self._lu = spla.splu(A)
            except RuntimeError as exc:
                raise Singular(f"grounded Laplacian is singular (network disconnected?): {exc}") from None
        else:
            d = A.diagonal()
            if np.any(d <= 0):
                raise Singular("grounded Laplacian has an isolated vertex")
            self._precond = spla.LinearOperator(A.shape, matvec=lambda r: r / d, dtype=float)

    def _solve_vec(self, b):
        if self.method == "direct":
            return self._lu.solve(b)
        x, info = spla.cg(self._A, b, rtol=CG_RTOL, atol=0.0, M=self._precond, maxiter=20 * len(b) + 100)
        if info != 0:
            raise Singular(f"conjugate gradient stopped without converging (info={info})")
        return x

    def solve(self, B):
        """Full-length solution(s) with 0 at the ground vertex.

        ``B`` has shape ``(n,)`` or ``(n, m)`` in ``form.order``; the ground
        row is ignored.
        """
        B = np.asarray(B, dtype=float)
        out = np.zeros(B.shape)
        if len(self.keep) == 0:
            return out
        rhs = B[self.keep]
        if self.method == "direct":
            sol = self._lu.solve(rhs)
        elif rhs.ndim == 1:
            sol = self._solve_vec(rhs)
        else:
            sol = np.column_stack([self._solve_vec(rhs[:, j]) for j in range(rhs.shape[1])])
        out[self.keep] = sol
        return out


def _charge_vector(form, charge):
    b = np.zeros(len(form))
    for x, q in charge.items():
        if x not in form.index:
            raise UnknownVertex(f"charge placed on unknown vertex {x!r}")
        b[form.index[x]] += q
    return b


def solve_grounded(net: Network, charge, ground, method=None) -> Potential:
    """Solve ``Δv = charge`` off ``ground`` with ``v(ground) = 0``.

    Unless the ground is the ∞ vertex of a wired truncation the charges must
    balance, since a grounded solve silently sends any excess into the ground.
    """
    if not net.is_finite:
        raise UnknownVertex("solve_grounded needs a finite network")
    if ground is not INFINITY:
        total = math.fsum(charge.values())
        if abs(total) > 1e-12:
            raise ChargeImbalance(f"charges sum to {total}, not 0")
    form = MatrixForm(net)
    system = GroundedSystem(form, ground, method)
    u = system.solve(_charge_vector(form, charge))
    return Potential(dict(zip(form.order, u)), ground)


# -- kernel families ---------------------------------------------------

@dataclass
class KernelFamily:
    """Kernels ``v_x``, ``f_x``, ``h_x = v_x - f_x`` at the final truncation level.

    All three are anchored at the origin and share ``window`` (the level-``k``
    vertex set). ``f_infinity`` is the value of the wired solution at ∞.
    """

    x: object
    v: Potential
    f: Potential = None
    h: Potential = None
    f_infinity: float = None
    level: int = 0
    scheme: str = BALL
    converged: bool = False
    convergence: dict = field(default_factory=dict)

    @property
    def window(self):
        return list(self.v.window)

    def harmonic_residual(self, net: Network):
        """Largest ``|Δh(y)|`` over interior vertices of the window."""
        if self.h is None:
            return None
        trunc = truncate(net, self.level, FREE, self.scheme) if self.level else None
        interior = boundary_of(trunc).interior if trunc else self.window
        return max((abs(laplacian_apply(net, self.h, y)) for y in interior), default=0.0)

    def to_rows(self, net: Network):
        rows = []
        for y in self.window:
            f = self.f(y) if self.f is not None else float("nan")
            h = self.h(y) if self.h is not None else float("nan")
            rows.append((net.format_vertex(y), self.v(y), f, h))
        return rows


class _LevelSolution:
    __slots__ = ("k", "verts", "free", "wired", "V", "F", "f_inf")


def solve_level(net, xs, k, scheme, wired=True, method=None):
    """Dipole solutions for every ``x`` in ``xs`` on level-``k`` truncations."""
    sol = _LevelSolution()
    sol.k = k
    truncs = truncate_pair(net, k, scheme, (FREE, WIRED) if wired else (FREE,))
    free = truncs[FREE]
    sol.verts = free.vertices
    sol.free = free.matrix()
    idx = sol.free.index
    n = len(sol.verts)
    o = net.origin
    B = np.zeros((n, len(xs)))
    for j, x in enumerate(xs):
        if x not in idx:
            raise WindowTooSmall(f"{x!r} is outside the level-{k} exhaustion set")
        if x != o:
            B[idx[x], j] += 1.0
            B[idx[o], j] -= 1.0
    sol.V = GroundedSystem(sol.free, o, method).solve(B)
    sol.wired = None
    sol.F = None
    sol.f_inf = None
    if wired:
        wt = truncs[WIRED]
        sol.wired = wt.matrix()
        if wt.infinity_vertex is None:
            sol.F = sol.V.copy()
            sol.f_inf = np.full(len(xs), np.nan)
        else:
            Bw = np.vstack([B, np.zeros((1, len(xs)))])
            full = GroundedSystem(sol.wired, o, method).solve(Bw)
            sol.F = full[:n]
            sol.f_inf = full[n]
    return sol


def _free_delta(prev, cur):
    """``E_{B_{k-1}}(v_k - v_{k-1})`` for each column."""
    m = len(prev.verts)
    d = cur.V[:m] - prev.V
    return np.diag(np.atleast_2d(prev.free.energy(d)))


def _wired_delta(prev, cur):
    """``E_{W_k}(f_k - f̂_{k-1})`` with ``f̂`` extended by its value at ∞."""
    m = len(prev.verts)
    n = len(cur.verts)
    cols = cur.F.shape[1]
    fill = np.where(np.isnan(prev.f_inf), 0.0, prev.f_inf)
    ext = np.empty((len(cur.wired), cols))
    ext[:m] = prev.F
    ext[m:] = fill
    cur_full = np.empty_like(ext)
    cur_full[:n] = cur.F
    if len(cur.wired) > n:
        cur_full[n:] = cur.f_inf
    d = cur_full - ext
    return np.diag(np.atleast_2d(cur.wired.energy(d)))


def _families_from(net, xs, sol, scheme, status):
    o = net.origin
    out = {}
    for j, x in enumerate(xs):
        v = Potential(dict(zip(sol.verts, sol.V[:, j])), o)
        f = h = None
        f_inf = None
        if sol.F is not None:
            f = Potential(dict(zip(sol.verts, sol.F[:, j])), o)
            h = Potential(dict(zip(sol.verts, sol.V[:, j] - sol.F[:, j])), o)
            f_inf = None if np.isnan(sol.f_inf[j]) else float(sol.f_inf[j])
        st = status[x]
        out[x] = KernelFamily(x, v, f, h, f_inf, sol.k, scheme, st["converged"],
                              {"levels": st["levels"], "v": st["v"], "f": st["f"],
                               "converged": st["converged"], "tol": st["tol"]})
    return out


def level_kernels(net: Network, xs, k, scheme=BALL, wired=True, method=None):
    """Kernel families from a single truncation level (no limit taken)."""
    xs = list(xs)
    sol = solve_level(net, xs, k, scheme, wired, method)
    status = {x: {"levels": [k], "v": [], "f": [], "converged": False, "tol": None} for x in xs}
    return _families_from(net, xs, sol, scheme, status)


def _start_level(net, xs, k_max):
    k0 = 1
    for x in xs:
        try:
            d = net.distance(x, limit=k_max)
        except UnknownVertex:
            raise UnknownVertex(f"{x!r} is not within distance {k_max} of the origin") from None
        k0 = max(k0, d)
    return k0


def kernel_families(net: Network, xs, k_max=20, tol=DEFAULT_TOL, *, scheme=BALL, wired=True,
                    require_convergence=True, k_min=None, method=None):
    """Exhaustion limits of the kernels for all ``x`` in ``xs``.

    One factorization per level is shared by every right-hand side. The limit
    for each ``x`` is declared once the level-to-level energy deltas of ``v``
    (and ``f`` when ``wired``) stay below ``tol`` for 3 consecutive levels.
    A finite network whose exhaustion stops growing is solved exactly.
    Raises :class:`NotConverged` (with the families in ``.result``) when the
    limit is not reached by ``k_max`` and ``require_convergence`` is set.
    """
    xs = list(dict.fromkeys(xs))
    k0 = max(_start_level(net, xs, k_max), k_min or 1)
    status = {x: {"levels": [], "v": [], "f": [], "converged": False, "tol": tol} for x in xs}
    checks = {x: Cauchy(tol) for x in xs}
    prev = None
    sol = None
    for k in range(k0, max(k_max, k0) + 1):
        sol = solve_level(net, xs, k, scheme, wired, method)
        exact = prev is not None and len(sol.verts) == len(prev.verts)
        if prev is not None:
            dv = _free_delta(prev, sol)
            df = _wired_delta(prev, sol) if wired else np.zeros_like(dv)
            for j, x in enumerate(xs):
                st = status[x]
                st["levels"].append(k)
                st["v"].append(float(dv[j]))
                st["f"].append(float(df[j]))
                checks[x].push(None, max(dv[j], df[j]))
        for x in xs:
            if exact or (net.is_finite and len(sol.verts) == net.num_vertices()):
                checks[x].run = CONSECUTIVE
            status[x]["converged"] = checks[x].done
        if all(checks[x].done for x in xs):
            break
        prev = sol
    fams = _families_from(net, xs, sol, scheme, status)
    if require_convergence and not all(f.converged for f in fams.values()):
        bad = [x for x, f in fams.items() if not f.converged]
        raise NotConverged(f"kernels for {bad!r} did not converge to tol {tol} by level {sol.k}", fams)
    return fams


def energy_kernel(net: Network, x, k_max=20, tol=DEFAULT_TOL, **kw) -> KernelFamily:
    """Free-truncation limit of the dipole ``Δv = δ_x - δ_o`` (``v`` only)."""
    fams = _unwrap(lambda: kernel_families(net, [x], k_max, tol, wired=False, **kw), x)
    return fams


def fin_kernel(net: Network, x, k_max=20, tol=DEFAULT_TOL, **kw) -> KernelFamily:
    """``v_x``, the wired limit ``f_x`` and ``h_x = v_x - f_x``."""
    return _unwrap(lambda: kernel_families(net, [x], k_max, tol, **kw), x)


def _unwrap(run, x):
    try:
        return run()[x]
    except NotConverged as exc:
        raise NotConverged(str(exc), exc.result[x]) from None


# -- monopoles ---------------------------------------------------------

@dataclass
class MonopoleResult:
    """Wired-limit monopole at ``x``.

    ``w`` is anchored at the origin like every potential; ``w_infinity`` is
    the value of that representative at ∞, so ``value(y)`` gives the
    representative vanishing at infinity.
    """

    x: object
    transient: object
    energy: float = None
    w: Potential = None
    w_infinity: float = None
    level: int = 0
    trace: list = field(default_factory=list)
    levels: list = field(default_factory=list)
    reason: str = ""
    tol: float = DEFAULT_TOL

    def value(self, y):
        return self.w(y) - self.w_infinity

    def to_dict(self):
        return {"transient": self.transient, "energy": self.energy, "level": self.level,
                "energy_trace": list(self.trace), "levels": list(self.levels), "reason": self.reason,
                "tol": self.tol}


def _tail_exponent(levels, energies, window=SLOPE_WINDOW):
    """Fitted ``p`` in ``E_k - E_{k-1} ~ k^{-p}`` over the last ``window`` increments."""
    if len(energies) < window + 1:
        return None
    inc = np.diff(np.asarray(energies[-(window + 1):]))
    ks = np.asarray(levels[-window:], dtype=float)
    if np.any(inc <= 0):
        return None
    slope = np.polyfit(np.log(ks), np.log(inc), 1)[0]
    return float(-slope)


def monopole(net: Network, x=None, k_max=20, tol=DEFAULT_TOL, *, scheme=BALL, method=None,
             k_cap=None, stop_early=True) -> MonopoleResult:
    """Solve ``Δw = δ_x`` on wired truncations grounded at ∞ and classify.

    Transient when the energies ``E(w_k) = w_k(x)`` are Cauchy (3 consecutive
    deltas below ``tol``). Recurrent when they exceed ``1e6 E(w_1)`` or when
    their increments decay no faster than ``1/k`` over the last levels.
    Otherwise :class:`Inconclusive` is raised with the partial result.
    With ``stop_early=False`` the solve continues to ``k_max`` after the
    energies become Cauchy, so ``w`` covers the largest window.
    """
    x = net.origin if x is None else x
    if k_cap is None:
        k_cap = net.meta.get("params", {}).get("patch")
    k_hi = min(k_max, k_cap) if k_cap else k_max
    k0 = _start_level(net, [x], k_hi)
    check = Cauchy(tol)
    energies, levels = [], []
    last = None
    cauchy = False
    for k in range(k0, k_hi + 1):
        wt = truncate(net, k, WIRED, scheme)
        if wt.infinity_vertex is None:
            return MonopoleResult(x, False, reason="finite network: no vertex at infinity to absorb charge",
                                  level=k, tol=tol)
        form = wt.matrix()
        b = np.zeros(len(form))
        b[form.index[x]] = 1.0
        w = GroundedSystem(form, INFINITY, method).solve(b)
        e = float(w[form.index[x]])
        energies.append(e)
        levels.append(k)
        last = (wt, form, w)
        cauchy = cauchy or check.push(e)
        if cauchy and stop_early:
            break
        if not cauchy and e > DIVERGENCE_FACTOR * energies[0]:
            return MonopoleResult(x, False, e, level=k, trace=energies, levels=levels, tol=tol,
                                  reason=f"energy exceeded {DIVERGENCE_FACTOR:g} x first level")
    wt, form, w = last
    n = len(wt.vertices)
    o = net.origin
    pot = Potential(dict(zip(wt.vertices, w[:n])), o)
    w_inf = float(w[form.index[INFINITY]] - w[form.index[o]])
    result = MonopoleResult(x, True, energies[-1], pot, w_inf, levels[-1], energies, levels, tol=tol)
    if cauchy:
        result.reason = "wired energies Cauchy"
        return result
    p = _tail_exponent(levels, energies)
    if p is not None and p <= 1.0:
        result.transient = False
        result.w = None
        result.w_infinity = None
        result.reason = f"energy increments decay like k^-{p:.3g}; divergent"
        return result
    result.transient = "INCONCLUSIVE"
    result.reason = "energies neither Cauchy nor divergent by the last level"
    raise Inconclusive(f"transience undecided at level {levels[-1]} (tol {tol})", result)
