"""Cluster pictures: the tree of root clusters with depths and invariants.

A cluster is a set of root indices cut out by a disc; the tree is the
ultrametric dendrogram of the pairwise difference valuations.  Each proper
cluster carries its depth, relative depth, nu invariant, parity, genus and a
distinguished root; odd clusters contribute the linear factor (x - alpha) to
the vertex polynomial g_s of their parent.

Wild stub clusters (flat groups whose roots live in wildly ramified
extensions) are supported structurally: they have a tame local factor but no
individual roots, so alpha elements of their singleton children do not exist.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ValidationError, WildRamification
from .padic import TowerElt, tp_from_rationals, tp_mul
from .roots import RootSet, WildStub

Frac = Fraction


@dataclass
class Cluster:
    members: tuple  # sorted root indices
    depth: Frac | None  # None for singletons
    parent: "Cluster | None" = None
    children: list = field(default_factory=list)
    label: str = ""
    stub: WildStub | None = None  # set on flat wild clusters

    # filled by ClusterPicture._decorate
    rel_depth: Frac | None = None
    nu: Frac | None = None
    genus: int = 0
    alpha_idx: int | None = None

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def is_proper(self) -> bool:
        return self.size > 1

    @property
    def is_even(self) -> bool:
        return self.size % 2 == 0

    @property
    def is_odd(self) -> bool:
        return self.size % 2 == 1

    @property
    def is_top(self) -> bool:
        return self.parent is None

    @property
    def uebereven(self) -> bool:
        return self.is_even and bool(self.children) and all(c.is_even for c in self.children)

    def odd_children(self):
        return [c for c in self.children if c.is_odd]

    def proper_children(self):
        return [c for c in self.children if c.is_proper]

    def ancestors(self):
        a = self.parent
        while a is not None:
            yield a
            a = a.parent

    def __repr__(self):
        return f"Cluster({self.label or self.members}, d={self.depth})"


@dataclass
class ClusterPicture:
    rootset: RootSet
    leading_coeff: Frac
    top: Cluster
    clusters: list  # all clusters, canonical DFS order
    f_coeffs: list  # full rational coefficient list including leading coeff

    @property
    def field(self):
        return self.rootset.field

    def proper_clusters(self):
        return [c for c in self.clusters if c.is_proper]

    def by_label(self, label: str) -> Cluster:
        for c in self.clusters:
            if c.label == label:
                return c
        raise KeyError(label)

    def genus_total(self) -> int:
        deg = self.rootset.n
        return (deg - 1) // 2 if deg % 2 else (deg - 2) // 2

    def alpha_elt(self, cl: Cluster) -> TowerElt:
        """Expansion center for a cluster: its distinguished finite root, or
        the stub center for wild clusters."""
        if cl.stub is not None:
            return cl.stub.center
        if cl.alpha_idx is None or cl.alpha_idx >= len(self.rootset.roots):
            raise WildRamification("cluster has no tame representative")
        return self.rootset.roots[cl.alpha_idx]

    def band_ceiling(self, cl: Cluster) -> Frac:
        """Highest valuation level where discs centered at alpha_elt still
        describe the path toward this cluster (below the wild branch level)."""
        return cl.stub.level if cl.stub is not None else cl.depth

    def g_poly(self, cl: Cluster):
        """Monic product of (x - alpha) over odd children (the vertex curve
        polynomial); for singletons, (x - alpha)."""
        K = self.field
        prec = min((r.prec for r in self.rootset.roots), default=None)
        if prec is None:
            prec = min(s.factor[0].prec for s in self.rootset.stubs)
        if not cl.is_proper:
            return [-self.alpha_elt(cl), K.one(prec)]
        if cl.stub is not None:
            return list(cl.stub.factor)
        out = [K.one(prec)]
        for ch in cl.odd_children():
            if ch.stub is not None or (
                ch.alpha_idx is not None and ch.alpha_idx >= len(self.rootset.roots)
            ):
                raise WildRamification("odd child without a tame distinguished root")
            a = self.rootset.roots[ch.alpha_idx]
            out = tp_mul(out, [-a, K.one(prec)])
        return out

    def ascii(self) -> str:
        def render(cl: Cluster) -> str:
            if not cl.is_proper:
                return "o"
            inner = " ".join(render(c) for c in cl.children)
            d = cl.depth if cl.is_top else cl.rel_depth
            return f"({inner})_{d}"

        return render(self.top)


def build_cluster_picture(rs: RootSet, leading_coeff) -> ClusterPicture:
    """Construct the cluster tree from the pairwise valuation matrix."""
    c = Frac(leading_coeff)
    if c == 0:
        raise ValidationError("leading coefficient must be nonzero")
    n = rs.n

    def build(indices: tuple) -> Cluster:
        if len(indices) == 1:
            return Cluster(members=indices, depth=None)
        d = min(rs.val_diff(i, j) for i in indices for j in indices if i < j)
        # partition by the relation v(i,j) > d (transitive for ultrametrics)
        groups = []
        remaining = list(indices)
        while remaining:
            seed = remaining.pop(0)
            grp = [seed]
            rest = []
            for x in remaining:
                if rs.val_diff(seed, x) > d:
                    grp.append(x)
                else:
                    rest.append(x)
            remaining = rest
            groups.append(tuple(sorted(grp)))
        groups.sort(key=lambda g: g[0])
        node = Cluster(members=tuple(sorted(indices)), depth=d)
        for g in groups:
            child = build(g)
            child.parent = node
            node.children.append(child)
        return node

    top = build(tuple(range(n)))
    picture = ClusterPicture(
        rootset=rs,
        leading_coeff=c,
        top=top,
        clusters=[],
        f_coeffs=list(rs.poly),
    )
    _decorate(picture)
    return picture


def _decorate(cp: ClusterPicture):
    rs = cp.rootset
    order = []

    def dfs(cl):
        order.append(cl)
        for ch in cl.children:
            dfs(ch)

    dfs(cp.top)
    for k, cl in enumerate(order):
        cl.label = f"c{k}"
    cp.clusters = order

    # attach stubs to the clusters that exactly match them
    base = len(rs.roots)
    for s in rs.stubs:
        idxs = tuple(range(base, base + s.count))
        base += s.count
        for cl in order:
            if cl.members == idxs:
                cl.stub = s
                break
        else:
            raise WildRamification("wild stub does not match a cluster")

    vc = _val_rational(cp.leading_coeff, rs.field.ell)
    for cl in order:
        cl.alpha_idx = cl.members[0]
        if cl.parent is not None and cl.is_proper:
            cl.rel_depth = cl.depth - cl.parent.depth
        if cl.is_proper:
            nu = vc + cl.size * cl.depth
            node = cl
            for anc in cl.ancestors():
                nu += (anc.size - node.size) * anc.depth
                node = anc
            cl.nu = nu
            odd = len(cl.odd_children())
            # ceil(odd/2 - 1), clamped at 0; zero for uebereven clusters
            cl.genus = 0 if cl.uebereven else max(0, (odd - 1) // 2)


def _val_rational(q: Frac, ell: int) -> Frac:
    from .padic import val_int

    if q == 0:
        raise ValidationError("valuation of zero")
    return Frac(val_int(q.numerator, ell) - val_int(q.denominator, ell))


def is_rational_elt(x: TowerElt) -> bool:
    """True when the element lies in Q_ell (all w- and fractional-pi
    coordinates vanish at working precision)."""
    K = x.field
    for i in range(K.e):
        for j in range(K.f):
            c = x.coeffs[i * K.f + j]
            if c and (j != 0 or (i - x.shift) % K.e != 0):
                return False
    return True


def rational_component_filter(cp: ClusterPicture, has_rational_infinity: bool):
    """Components and edges that can contain reductions of Q_ell-points.

    Returns (component_labels, edge_positions) where edge_positions maps the
    child cluster label to the list of even-nu valuation levels w strictly
    inside (d_parent, d_child)."""
    rs = cp.rootset
    admitted = set()
    edges = {}
    for cl in cp.proper_clusters():
        ok = False
        for ch in cl.children:
            if ch.size == 1 and ch.members[0] < len(rs.roots):
                if is_rational_elt(rs.roots[ch.members[0]]):
                    ok = True
                    break
        if not ok and cl.is_top and has_rational_infinity:
            ok = True
        if not ok and cl.nu.denominator == 1 and cl.nu.numerator % 2 == 0:
            ok = True
        if ok:
            admitted.add(cl.label)
        if not cl.is_top:
            # nu along the annulus: nu(w) = nu_parent + size*(w - d_parent)
            nu0, nu1 = cl.parent.nu, cl.nu
            lo, hi = min(nu0, nu1), max(nu0, nu1)
            positions = []
            m = -((-lo.numerator) // lo.denominator)  # ceil(lo)
            if m % 2:
                m += 1
            while Frac(m) < hi:
                if Frac(m) > lo:
                    w = cl.parent.depth + Frac(m - nu0, cl.size)
                    positions.append(w)
                m += 2
            if positions:
                edges[cl.label] = positions
    return admitted, edges
