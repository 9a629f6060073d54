"""Gauss-Green splits, charge balance, boundary representation and classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Inconclusive, NotHarmonic, WindowTooSmall
from .exhaustion import (BALL, DEFAULT_TOL, FREE, LimitReport, boundary_terms, take_limit,
                         truncate)
from .network import Network, energy, laplacian_apply
from .solver import kernel_families, level_kernels, monopole

HARMONIC_TOL = 1e-8
MAX_PROBES = 30
RANK_RTOL = 1e-6


@dataclass
class GaussGreenSplit:
    level: int
    interior_sum: float
    boundary_sum: float
    restricted_energy: float

    @property
    def residual(self):
        return abs(self.interior_sum + self.boundary_sum - self.restricted_energy)

    def to_dict(self):
        return {"level": self.level, "interior_sum": self.interior_sum, "boundary_sum": self.boundary_sum,
                "restricted_energy": self.restricted_energy, "residual": self.residual}


def gauss_green_split(net: Network, u, v, k, scheme=BALL) -> GaussGreenSplit:
    """``Σ_{int H} u Δv + Σ_{∂H} u ∂_n v`` against ``E_H(u, v)`` at level ``k``."""
    verts, bd, bsum = boundary_terms(net, u, v, k, scheme)
    try:
        isum = math.fsum(u(x) * laplacian_apply(net, v, x) for x in bd.interior)
    except WindowTooSmall as exc:
        raise WindowTooSmall(f"level {k}: {exc}") from None
    return GaussGreenSplit(k, isum, bsum, energy(net, u, v, verts))


def charge_balance(net: Network, u, k, scheme=BALL):
    """``Σ_{int H} Δu`` and ``-Σ_{∂H} ∂_n u``; equal for every ``u``."""
    verts, bd, neg = boundary_terms(net, lambda _: 1.0, u, k, scheme)
    lhs = math.fsum(laplacian_apply(net, u, x) for x in bd.interior)
    return {"level": k, "lhs": lhs, "rhs": -neg}


def check_harmonic(net: Network, u, vertices, tol=HARMONIC_TOL):
    """Raise :class:`NotHarmonic` unless ``|Δu| <= tol`` at every vertex given."""
    worst, where = 0.0, None
    for y in vertices:
        r = abs(laplacian_apply(net, u, y))
        if r > worst:
            worst, where = r, y
    if worst > tol:
        raise NotHarmonic(f"|Δu({where!r})| = {worst:.3g} exceeds {tol:g}")
    return worst


def harmonic_boundary_repr(net: Network, u, x, k_max=25, tol=DEFAULT_TOL, scheme=BALL, *,
                           harmonic_tol=HARMONIC_TOL) -> LimitReport:
    """Limit of ``s_k = Σ_{∂G_k} u ∂_n h_x + u(o)``, which should reproduce ``u(x)``.

    ``h_x`` is recomputed at every level from that level's truncations, and
    ``u`` is checked to be harmonic on the interior of each level.
    """
    o = net.origin
    k0 = max(1, net.distance(x, k_max))

    def seq():
        for k in range(k0, max(k_max, k0) + 1):
            h = level_kernels(net, [x], k, scheme)[x].h
            verts, bd, s = boundary_terms(net, u, h, k, scheme)
            check_harmonic(net, u, bd.interior, harmonic_tol)
            yield k, s + u(o)

    report = take_limit(seq(), tol, what="harmonic boundary representation")
    report.extra["target"] = u(x)
    return report


# -- classification ----------------------------------------------------

def gram_rank(G, floor, rtol=RANK_RTOL):
    """Numerical rank of a symmetric PSD matrix and its eigenvalues (descending)."""
    ev = np.sort(np.linalg.eigvalsh((G + G.T) / 2))[::-1]
    if ev.size == 0:
        return 0, ev
    cut = max(rtol * max(ev[0], 0.0), floor)
    return int(np.sum(ev > cut)), ev


def harm_gram(net, fams, probes):
    """``E_{B_K}(h_x, h_y)`` for the probe kernels (all at the same level)."""
    level = next(iter(fams.values())).level
    scheme = next(iter(fams.values())).scheme
    form = truncate(net, level, FREE, scheme).matrix()
    H = np.column_stack([[fams[x].h(v) for v in form.order] for x in probes])
    return form.energy(H)


def representative_shift(net: Network, mono, k, shift=1.0, scheme=BALL):
    """How the boundary term of ``E(u, w)`` moves when ``u`` is shifted by a constant.

    With ``w`` a monopole, ``Σ_int (u + s) Δw`` picks up ``s Σ_int Δw = s``,
    so the boundary term must move by ``-s``: it cannot vanish for every
    representative of ``u``.
    """
    w = mono.w
    u = lambda y: 0.0
    us = lambda y: shift
    a = gauss_green_split(net, u, w, k, scheme)
    b = gauss_green_split(net, us, w, k, scheme)
    return {"level": k, "shift": shift, "boundary_term": a.boundary_sum,
            "boundary_term_shifted": b.boundary_sum,
            "boundary_change": b.boundary_sum - a.boundary_sum}


@dataclass
class Classification:
    transient: object
    harm_dim_estimate: int
    evidence: dict = field(default_factory=dict)
    caveats: list = field(default_factory=list)

    def to_dict(self):
        return {"transient": self.transient, "harm_dim_estimate": self.harm_dim_estimate,
                "evidence": self.evidence, "caveats": list(self.caveats)}


def classify(net: Network, k_max=20, tol=DEFAULT_TOL, scheme=BALL, *, max_probes=MAX_PROBES,
             max_radius=6, kernel_levels=6) -> Classification:
    """Transience from wired monopole energies, and a Gram-rank estimate of dim Harm.

    Recurrent networks have ``Harm = 0``. Otherwise probe sets ``B_r minus o``
    grow with ``r`` until the probe count is at least rank + 2 and the rank
    is unchanged at the next radius; if the probe budget runs out first the
    estimate is flagged ``probe_limited``. Kernels are taken from the last
    ``kernel_levels`` truncation levels up to ``k_max``.
    """
    caveats = []
    try:
        mono = monopole(net, k_max=k_max, tol=tol, scheme=scheme)
        transient = mono.transient
    except Inconclusive as exc:
        mono = exc.result
        transient = "INCONCLUSIVE"
        caveats.append("transience inconclusive: wired energies neither Cauchy nor divergent")
    evidence = {"monopole": mono.to_dict()}
    if transient is False:
        evidence["harm"] = {"reason": "recurrent network: no nonconstant finite-energy harmonic functions"}
        return Classification(False, 0, evidence, caveats)
    if mono.w is not None:
        evidence["representative_shift"] = representative_shift(net, mono, max(1, mono.level - 1), scheme=scheme)

    k_cap = net.meta.get("params", {}).get("patch")
    k_hi = min(k_max, k_cap) if k_cap else k_max
    radii = []
    probes = []
    for r in range(1, max_radius + 1):
        layer = [y for y in net.ball(r) if y != net.origin and y not in probes]
        if not layer and radii:
            break
        room = max_probes - len(probes)
        if room <= 0:
            break
        probes.extend(layer[:room])
        radii.append((r, len(probes)))
        if len(layer) > room:
            break
    k_hi = max(k_hi, max(net.distance(y, k_hi) for y in probes))
    fams = kernel_families(net, probes, k_hi, tol, scheme=scheme, require_convergence=False,
                           k_min=max(1, k_hi - kernel_levels + 1))
    converged = all(f.converged for f in fams.values())
    if not converged:
        caveats.append(f"probe kernels not converged to tol {tol} by level {k_hi}")
    G = harm_gram(net, fams, probes)
    floor = tol
    ranks = []
    for r, count in radii:
        rank, ev = gram_rank(G[:count, :count], floor)
        ranks.append({"radius": r, "probes": count, "rank": rank, "eigenvalues": ev.tolist()})
    estimate = None
    for i, row in enumerate(ranks):
        if row["rank"] <= row["probes"] - 2 and i + 1 < len(ranks) and ranks[i + 1]["rank"] == row["rank"]:
            estimate = row["rank"]
            break
    if estimate is None:
        estimate = ranks[-1]["rank"]
        caveats.append("probe_limited: rank still growing at the largest probe set; "
                       "estimate is a lower bound at this probe scale")
    evidence["harm"] = {"probes": [net.format_vertex(y) for y in probes], "level": k_hi,
                        "kernels_converged": converged, "rank_floor": floor, "rank_rtol": RANK_RTOL,
                        "ranks": ranks}
    return Classification(transient, estimate, evidence, caveats)
