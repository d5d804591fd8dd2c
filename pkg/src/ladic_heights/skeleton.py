"""Reduction graphs as metrised complexes, homology, and potential theory.

Vertices come from proper clusters (two for uebereven clusters), edges from
proper non-top clusters: an even cluster contributes a pair of edges of length
delta, an odd one a single edge of length delta/2.  Every edge is oriented
from the child-cluster vertex to the parent-cluster vertex.

The cycle basis consists of fundamental cycles of the non-tree edges of a
spanning tree chosen by Kruskal with priority (odd edges, then "+" edges,
then "-" edges); with this priority every non-tree edge is an even-cluster
edge, which is what the residue transfer matrix needs.

All graph arithmetic is exact over Q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .clusters import ClusterPicture
from .errors import NonzeroMass, ValidationError
from .linalg import r_solve

Frac = Fraction


@dataclass
class Vertex:
    id: int
    cluster: str
    sign: int  # +1 / -1 for uebereven pairs, +1 otherwise
    genus: int


@dataclass
class Edge:
    id: int
    cluster: str  # child cluster owning the annulus
    sign: int  # +1/-1 for even clusters, 0 for odd
    length: Frac
    src: int  # vertex id of the child end (partial_0)
    dst: int  # vertex id of the parent end (partial_1)


@dataclass
class MetrisedComplex:
    vertices: list
    edges: list
    tree_edge_ids: set
    cycle_basis: list  # list of dict edge_id -> int coefficient
    pairing: list  # Gram matrix of the cycle basis, rational
    vertex_of_cluster: dict  # (label, sign) -> vertex id
    picture: ClusterPicture | None = None

    @property
    def betti(self) -> int:
        return len(self.cycle_basis)

    def edge_by_id(self, eid: int) -> Edge:
        return self.edges[eid]

    def edges_of_cluster(self, label: str):
        return [e for e in self.edges if e.cluster == label]

    def genus_identity_holds(self) -> bool:
        if self.picture is None:
            return True
        total = sum(v.genus for v in self.vertices) + self.betti
        return total == self.picture.genus_total()

    def incident(self, vid: int):
        """(edge, +1 if src else -1) pairs, with both ends for self-loops."""
        out = []
        for e in self.edges:
            if e.src == vid:
                out.append((e, +1))
            if e.dst == vid:
                out.append((e, -1))
        return out

    def to_json(self):
        return {
            "vertices": [
                {"id": v.id, "cluster": v.cluster, "sign": v.sign, "genus": v.genus}
                for v in self.vertices
            ],
            "edges": [
                {
                    "id": e.id,
                    "cluster": e.cluster,
                    "sign": e.sign,
                    "length": str(e.length),
                    "src": e.src,
                    "dst": e.dst,
                }
                for e in self.edges
            ],
            "cycle_basis": [
                {str(k): v for k, v in sorted(cyc.items())} for cyc in self.cycle_basis
            ],
            "pairing": [[str(x) for x in row] for row in self.pairing],
        }


class _UnionFind:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, x):
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.p[ra] = rb
        return True


def build_skeleton(cp: ClusterPicture) -> MetrisedComplex:
    proper = cp.proper_clusters()
    if not proper:
        raise ValidationError("cluster picture has no proper cluster")
    vertices = []
    vmap = {}
    for cl in proper:
        signs = (1, -1) if cl.uebereven else (1,)
        for s in signs:
            v = Vertex(id=len(vertices), cluster=cl.label, sign=s, genus=cl.genus)
            vertices.append(v)
            vmap[(cl.label, s)] = v.id

    def vert(cl, want_sign):
        if (cl.label, want_sign) in vmap:
            return vmap[(cl.label, want_sign)]
        return vmap[(cl.label, 1)]

    edges = []
    for cl in proper:
        if cl.is_top:
            continue
        if cl.is_even:
            for s in (1, -1):
                edges.append(
                    Edge(
                        id=len(edges),
                        cluster=cl.label,
                        sign=s,
                        length=cl.rel_depth,
                        src=vert(cl, s),
                        dst=vert(cl.parent, s),
                    )
                )
        else:
            edges.append(
                Edge(
                    id=len(edges),
                    cluster=cl.label,
                    sign=0,
                    length=cl.rel_depth / 2,
                    src=vert(cl, 1),
                    dst=vert(cl.parent, 1),
                )
            )

    # Kruskal with priorities: odd, then "+", then "-"; label order within class
    def priority(e: Edge):
        cls = 0 if e.sign == 0 else (1 if e.sign == 1 else 2)
        return (cls, e.cluster, e.id)

    uf = _UnionFind(len(vertices))
    tree = set()
    for e in sorted(edges, key=priority):
        if uf.union(e.src, e.dst):
            tree.add(e.id)

    # fundamental cycles of non-tree edges via tree paths
    adj = {v.id: [] for v in vertices}
    for e in edges:
        if e.id in tree:
            adj[e.src].append((e.dst, e.id, +1))
            adj[e.dst].append((e.src, e.id, -1))

    def tree_path(a, b):
        """Edge chain (dict) along the tree from a to b."""
        prev = {a: None}
        stack = [a]
        while stack:
            x = stack.pop()
            if x == b:
                break
            for y, eid, orient in adj[x]:
                if y not in prev:
                    prev[y] = (x, eid, orient)
                    stack.append(y)
        chain = {}
        x = b
        while prev[x] is not None:
            px, eid, orient = prev[x]
            chain[eid] = chain.get(eid, 0) + orient
            x = px
        return chain

    basis = []
    for e in edges:
        if e.id in tree:
            continue
        cyc = {e.id: 1}
        for eid, c in tree_path(e.dst, e.src).items():
            cyc[eid] = cyc.get(eid, 0) + c
        basis.append({k: v for k, v in cyc.items() if v})

    C = [[chain_pairing(g1, g2, edges) for g2 in basis] for g1 in basis]
    return MetrisedComplex(
        vertices=vertices,
        edges=edges,
        tree_edge_ids=tree,
        cycle_basis=basis,
        pairing=C,
        vertex_of_cluster=vmap,
        picture=cp,
    )


def chain_pairing(c1: dict, c2: dict, edges) -> Frac:
    """Intersection length pairing of two edge chains."""
    total = Frac(0)
    for eid, a in c1.items():
        b = c2.get(eid)
        if b:
            total += Frac(a) * b * edges[eid].length
    return total


def orthogonal_projection(mc: MetrisedComplex, chain: dict):
    """Coefficients of the orthogonal projection of an edge chain onto the
    cycle basis (length pairing); empty basis projects to nothing."""
    if not mc.cycle_basis:
        return []
    b = [chain_pairing(g, chain, mc.edges) for g in mc.cycle_basis]
    x = r_solve(mc.pairing, b)
    assert x is not None
    return x


# -- piecewise polynomial measures and the Laplacian ---------------------------


@dataclass
class PPMeasure:
    edge_density: dict  # edge_id -> [Frac], polynomial in arc length from src
    vertex_mass: dict  # vertex_id -> Frac

    def total_mass(self, mc: MetrisedComplex) -> Frac:
        total = sum(self.vertex_mass.values(), Frac(0))
        for eid, poly in self.edge_density.items():
            L = mc.edges[eid].length
            total += sum(c * L ** (k + 1) / (k + 1) for k, c in enumerate(poly))
        return total

    def to_json(self, mc):
        return {
            "edges": {str(e): [str(c) for c in poly] for e, poly in sorted(self.edge_density.items())},
            "vertices": {str(v): str(m) for v, m in sorted(self.vertex_mass.items())},
        }


@dataclass
class HeightFunction:
    mc: MetrisedComplex
    pieces: dict  # edge_id -> [Frac], value along edge from the src (child) end
    vertex_values: dict  # vertex_id -> Frac
    base: tuple  # ("vertex", vid) or ("edge", eid, offset)

    def at_vertex(self, vid: int) -> Frac:
        return self.vertex_values[vid]

    def on_edge(self, eid: int, s: Frac) -> Frac:
        poly = self.pieces[eid]
        return sum((c * Frac(s) ** k for k, c in enumerate(poly)), Frac(0))

    def laplacian(self) -> PPMeasure:
        """Exact Laplacian of the piecewise polynomial (for verification)."""
        density = {}
        for eid, poly in self.pieces.items():
            density[eid] = [
                -Frac((k + 2) * (k + 1)) * poly[k + 2] for k in range(len(poly) - 2)
            ]
        mass = {}
        for v in self.mc.vertices:
            acc = Frac(0)
            for e, orient in self.mc.incident(v.id):
                poly = self.pieces.get(e.id, [Frac(0)])
                if orient == +1:
                    acc += poly[1] if len(poly) > 1 else Frac(0)
                else:
                    acc -= _poly_deriv_at(poly, e.length)
            mass[v.id] = -acc
        return PPMeasure(edge_density=density, vertex_mass=mass)

    def to_json(self):
        return {
            "pieces": [
                {
                    "edge": eid,
                    "anchor_vertex": self.mc.edges[eid].src,
                    "coeffs": [str(c) for c in poly],
                    "domain_length": str(self.mc.edges[eid].length),
                }
                for eid, poly in sorted(self.pieces.items())
            ],
            "vertex_values": {str(v): str(x) for v, x in sorted(self.vertex_values.items())},
            "base": [str(x) for x in self.base],
        }


def _poly_deriv_at(poly, s):
    return sum((Frac(k) * poly[k] * Frac(s) ** (k - 1) for k in range(1, len(poly))), Frac(0))


def _poly_at(poly, s):
    return sum((c * Frac(s) ** k for k, c in enumerate(poly)), Frac(0))


def weighted_laplacian_matrix(mc: MetrisedComplex):
    """Vertex Laplacian L with L[v][v] = -sum 1/l(e), L[v][w] = +sum 1/l(e)."""
    n = len(mc.vertices)
    L = [[Frac(0)] * n for _ in range(n)]
    for e in mc.edges:
        if e.src == e.dst:
            continue
        w = 1 / e.length
        L[e.src][e.src] -= w
        L[e.dst][e.dst] -= w
        L[e.src][e.dst] += w
        L[e.dst][e.src] += w
    return L


def laplacian_solve(mc: MetrisedComplex, mu: PPMeasure, base) -> HeightFunction:
    """The piecewise polynomial h with Laplacian mu and h(base) = 0.

    base is ("vertex", vertex_id) or ("edge", edge_id, offset_from_src).
    """
    if mu.total_mass(mc) != 0:
        raise NonzeroMass("measure has nonzero total mass")
    n = len(mc.vertices)
    # particular double integrals per edge: P'' = -g, P(0) = P'(0) = 0
    P = {}
    for e in mc.edges:
        g = mu.edge_density.get(e.id, [])
        P[e.id] = [Frac(0), Frac(0)] + [-g[k] / ((k + 1) * (k + 2)) for k in range(len(g))]
    # solve for vertex potentials phi
    rows = []
    rhs = []
    for v in mc.vertices:
        row = [Frac(0)] * n
        b = Frac(mu.vertex_mass.get(v.id, 0))
        for e, orient in mc.incident(v.id):
            L = e.length
            pL = _poly_at(P[e.id], L)
            dpL = _poly_deriv_at(P[e.id], L)
            if e.src == e.dst:
                b -= dpL  # loop: phi terms cancel
                continue
            if orient == +1:
                # derivative out of src: a_e = (phi_dst - phi_src - P(L))/L
                row[e.dst] += -Frac(1) / L
                row[e.src] += Frac(1) / L
                b += -pL / L
            else:
                # derivative out of dst: -(P'(L) + a_e)
                row[e.src] += -Frac(1) / L
                row[e.dst] += Frac(1) / L
                b += -dpL + pL / L
        # equation: -(sum of outgoing derivatives) = mass  ->  moved to row*phi = b
        rows.append(row)
        rhs.append(b)
    # pin the first vertex potential to zero to fix the constant
    rows.append([Frac(1)] + [Frac(0)] * (n - 1))
    rhs.append(Frac(0))
    phi = r_solve(rows, rhs)
    if phi is None:
        raise ValidationError("laplacian system is inconsistent")
    pieces = {}
    for e in mc.edges:
        L = e.length
        a = (phi[e.dst] - phi[e.src] - _poly_at(P[e.id], L)) / L
        poly = list(P[e.id])
        poly[0] += phi[e.src]
        poly[1] += a
        pieces[e.id] = poly
    hf = HeightFunction(mc=mc, pieces=pieces, vertex_values={v.id: phi[v.id] for v in mc.vertices}, base=tuple(base))
    # normalize at the base point
    if base[0] == "vertex":
        c = hf.vertex_values[base[1]]
    elif base[0] == "edge":
        c = hf.on_edge(base[1], Frac(base[2]))
    else:
        raise ValidationError(f"unknown base spec {base}")
    if c:
        for poly in hf.pieces.values():
            poly[0] -= c
        for v in hf.vertex_values:
            hf.vertex_values[v] -= c
    return hf
