"""Local height functions: measure, solve, point localization, evaluation.

The measure of the heights formula is
    mu = sum_e 2/l(e)^2 <e, Z pi(e)> |ds_e| + sum_v tr_v(Z) delta_v,
assembled exactly over Q from the certified integer action.  Points are
located on the reduction graph by walking the cluster tree along the
valuations v(x - alpha_s); the +- component of an even-cluster edge is
resolved by evaluating the seeded branch of (g h)^{1/2} at the point, and
reported as ambiguous (both candidate values) when the evaluation cannot
separate the signs at working precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .annulus import pow_half
from .clusters import Cluster, ClusterPicture
from .errors import NonzeroMass, PrecisionExhausted, ValidationError
from .expansions import Band, annulus_band, expand_poly, f_inv_sqrt_on_band
from .padic import TowerElt, tp_from_rationals
from .skeleton import (
    HeightFunction,
    MetrisedComplex,
    PPMeasure,
    chain_pairing,
    laplacian_solve,
    orthogonal_projection,
)
from .transfer import CertifiedAction

Frac = Fraction


def height_measure(mc: MetrisedComplex, action: CertifiedAction) -> PPMeasure:
    density = {}
    M = action.M_gamma
    for e in mc.edges:
        coeffs = orthogonal_projection(mc, {e.id: 1})
        if coeffs:
            z = [
                sum(Frac(M[i][j]) * coeffs[j] for j in range(len(coeffs)))
                for i in range(len(coeffs))
            ]
            chain = {}
            for zi, cyc in zip(z, mc.cycle_basis):
                for eid, m in cyc.items():
                    chain[eid] = chain.get(eid, Frac(0)) + zi * m
            val = chain_pairing({e.id: 1}, chain, mc.edges)
        else:
            val = Frac(0)
        dens = 2 * val / e.length**2
        if dens:
            density[e.id] = [dens]
    mass = {v.id: Frac(action.traces.get(v.id, 0)) for v in mc.vertices if action.traces.get(v.id, 0)}
    mu = PPMeasure(edge_density=density, vertex_mass=mass)
    if mu.total_mass(mc) != 0:
        raise NonzeroMass(
            "measure has nonzero total mass: the endomorphism input is not trace zero"
        )
    return mu


def height_function(mc: MetrisedComplex, mu: PPMeasure, base) -> HeightFunction:
    return laplacian_solve(mc, mu, base)


@dataclass
class PointLocation:
    kind: str  # "vertex" | "edge"
    candidates: list  # vertex ids or edge ids (two entries when ambiguous)
    offset: Frac | None  # along the edge from the child end
    cluster: str  # smallest containing cluster label
    w: Frac | None  # v(x - alpha) at the deciding cluster

    def to_json(self):
        return {
            "kind": self.kind,
            "candidates": self.candidates,
            "offset": None if self.offset is None else str(self.offset),
            "cluster": self.cluster,
            "w": None if self.w is None else str(self.w),
        }


def _dist_to_cluster(cp: ClusterPicture, cl: Cluster, x0: TowerElt) -> Frac:
    """v(x0 - alpha_cl) with the wild-level cap (= v(x0 - nearest root))."""
    d = x0 - cp.alpha_elt(cl)
    cap = cl.stub.level if cl.stub is not None else None
    if d.is_zeroish():
        v = d.prec
    else:
        v = d.valuation()
    if cap is not None:
        return min(v, cap)
    if d.is_zeroish():
        raise PrecisionExhausted("point is too close to a root at working precision")
    return v


def _vertices_of(mc, label):
    return sorted(vid for (lab, sgn), vid in mc.vertex_of_cluster.items() if lab == label)


def locate_point(cp: ClusterPicture, mc: MetrisedComplex, point, seeds, terms=10) -> PointLocation:
    """Locate a curve point (x0, y0) (exact rationals) or infinity on the graph."""
    K = cp.field
    if point in ("infinity+", "infinity-", "infinity"):
        vids = _vertices_of(mc, cp.top.label)
        return PointLocation(
            kind="vertex", candidates=vids, offset=None, cluster=cp.top.label, w=None
        )
    x0q, y0q = point
    fx = _eval_rational_poly(cp.f_coeffs, Frac(x0q))
    if Frac(y0q) ** 2 != fx:
        raise ValidationError("point does not satisfy y^2 = f(x)")
    prec = min((r.prec for r in cp.rootset.roots), default=Frac(24))
    x0 = K.from_rational(Frac(x0q), prec)
    cur = cp.top
    if _dist_to_cluster(cp, cp.top, x0) < cp.top.depth:
        # outside the top disc: reduces onto the top component
        return PointLocation(
            kind="vertex",
            candidates=_vertices_of(mc, cp.top.label),
            offset=None,
            cluster=cp.top.label,
            w=None,
        )
    while True:
        nxt = None
        for ch in cur.children:
            if ch.is_proper:
                w = _dist_to_cluster(cp, ch, x0)
                if w > cur.depth:
                    nxt = (ch, w)
                    break
            else:
                if ch.members[0] < len(cp.rootset.roots):
                    d = x0 - cp.rootset.roots[ch.members[0]]
                    v = d.prec if d.is_zeroish() else d.valuation()
                    if v > cur.depth:
                        nxt = (None, None)  # singleton residue disc: vertex of cur
                        break
        if nxt is None or nxt[0] is None:
            return PointLocation(
                kind="vertex",
                candidates=_vertices_of(mc, cur.label),
                offset=None,
                cluster=cur.label,
                w=None,
            )
        ch, w = nxt
        ceiling = cp.band_ceiling(ch)
        if w >= ch.depth:
            cur = ch
            continue
        # edge interior on ch's edge(s)
        offset = (ch.depth - w) if ch.is_even else (ch.depth - w) / 2
        edges = [e for e in mc.edges if e.cluster == ch.label]
        if len(edges) == 1:
            return PointLocation(
                kind="edge", candidates=[edges[0].id], offset=offset, cluster=ch.label, w=w
            )
        # resolve +- by evaluating the seeded branch of (g h)^{1/2} at x0
        cand = sorted(e.id for e in edges)
        band = annulus_band(cp, ch)
        if band.v2 <= w <= band.v1:
            try:
                branch = pow_half(
                    expand_poly(_f_tower(cp), band), 1, terms, sign=seeds[ch.label]["gh_sign"]
                )
                val = branch.evaluate(x0 - band.center)
                y0 = K.from_rational(Frac(y0q), prec)
                plus = y0 - val
                minus = y0 + val
                vp = plus.prec if plus.is_zeroish() else plus.valuation()
                vm = minus.prec if minus.is_zeroish() else minus.valuation()
                thresh = val.valuation()
                if vp > thresh and vm <= thresh:
                    sign = 1
                elif vm > thresh and vp <= thresh:
                    sign = -1
                else:
                    sign = 0
                if sign:
                    eid = next(e.id for e in edges if e.sign == sign)
                    return PointLocation(
                        kind="edge", candidates=[eid], offset=offset, cluster=ch.label, w=w
                    )
            except Exception:  # noqa: BLE001 - fall back to the ambiguous report
                pass
        return PointLocation(kind="edge", candidates=cand, offset=offset, cluster=ch.label, w=w)


def _f_tower(cp):
    prec = min((r.prec for r in cp.rootset.roots), default=None)
    if prec is None:
        prec = min(s.factor[0].prec for s in cp.rootset.stubs)
    return tp_from_rationals(cp.field, cp.f_coeffs, prec)


def _eval_rational_poly(coeffs, x):
    acc = Frac(0)
    for c in reversed(coeffs):
        acc = acc * x + Frac(c)
    return acc


def evaluate_height(hf: HeightFunction, loc: PointLocation):
    """Exact rational height, or a pair when the component is ambiguous."""
    if loc.kind == "vertex":
        vals = [hf.at_vertex(v) for v in loc.candidates]
    else:
        vals = [hf.on_edge(e, loc.offset) for e in loc.candidates]
    uniq = sorted(set(vals))
    if len(uniq) == 1:
        return uniq[0]
    return tuple(uniq)
