"""Transfer matrices: residues to graph homology, local symbols to vertex
curves, and certified integer rounding.

T has one row per non-tree cycle edge (always an even-cluster edge with the
spanning tree priorities used by the skeleton): the row is the residue of each
basis form over that annulus, pulled back through the chosen branch of
(g h)^{-1/2} = f^{-1/2}, with the sign fixed by the edge orientation as a
bounding annulus of the child wide open.

The certified action is M' = T M_dR T^+ rounded entrywise to centered integer
representatives mod ell^k and certified against the operator-norm bound
|entries| <= c = ||P||_F ||P^{-1}||_F sqrt(d1 d2), C = P P^T; the exact PSD
comparison M^T C M <= d1 d2 C is re-verified over Q.

Vertex traces solve the Gram systems <omega, eta_j> = sum_i a_i <eta_i, eta_j>
with local symbols summed over the children of the vertex cluster plus its own
boundary annulus.  For flat wild clusters (no individual roots) the sum over
the wild singleton children collapses, by the residue theorem on the punctured
underlying affinoid, to a single residue over the boundary annulus of the
connected double cover, computed in the sigma parametrization; the collapse
constant is fixed by cross-checking against the direct route on tame inputs
(see tests).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .annulus import AnnulusFunction, af_inv, fmin, integrate, pow_half, restrict
from .clusters import Cluster, ClusterPicture
from .derham import TowerOps, cup_matrix, second_kind_basis
from .errors import (
    CertificationFailed,
    GramSingular,
    NonzeroResidue,
    PrecisionExhausted,
    RankDeficientT,
    ValidationError,
    WildRamification,
)
from .expansions import (
    Band,
    annulus_band,
    coherent_sqrt_h,
    expand_poly,
    f_inv_sqrt_on_band,
    sigma_cover,
    to_branch_cover,
)
from .linalg import (
    norm_bound_sq,
    r_is_psd,
    r_mat_mul,
    r_transpose,
    t_kernel,
    t_mat_mul,
    t_right_inverse,
    t_solve,
)
from .padic import TowerElt, tp_divmod, tp_from_rationals
from .skeleton import MetrisedComplex

Frac = Fraction

# symbol collapse constant for flat wild odd clusters, calibrated against the
# per-child route on tame inputs (tests/test_transfer.py keeps it honest)
ODD_COLLAPSE = -2


@dataclass
class TransferData:
    T: list  # B x 2g tower matrix
    row_edges: list  # edge ids for the rows
    kernel: list  # list of kernel column vectors (length 2g), size 2g - B
    basis_forms: list  # rational coefficient vectors of the ambient basis


@dataclass
class CertifiedAction:
    M_gamma: list  # integer matrix on the cycle basis
    traces: dict  # vertex id -> int
    bound_sq: Frac  # c^2 for the matrix bound
    k_matrix: int  # digits used for the matrix congruence
    k_traces: int
    d1: int
    d2: int


def phi2_matrix(cp: ClusterPicture, mc: MetrisedComplex, basis_forms, seeds, terms, prec):
    """T with T[e][j] = Res over the non-tree edge annuli of the basis forms."""
    K = cp.field
    rows = []
    row_edges = []
    cache = {}
    for e in mc.edges:
        if e.id in mc.tree_edge_ids:
            continue
        cl = cp.by_label(e.cluster)
        if cl.is_odd:
            raise ValidationError("non-tree edge on an odd cluster annulus")
        if cl.label not in cache:
            band = annulus_band(cp, cl)
            u = f_inv_sqrt_on_band(cp, cl, band, terms, seeds)
            cache[cl.label] = (band, u)
        band, u = cache[cl.label]
        orient = 1 if e.sign == -1 else -1
        row = []
        for vec in basis_forms:
            poly = tp_from_rationals(K, vec, prec)
            integrand = expand_poly(poly, band) * u
            res = integrand.residue()
            half = K.from_rational(Frac(1, 2), res.prec + 2)
            row.append(res * half if orient == 1 else -(res * half))
        rows.append(row)
        row_edges.append(e.id)
    return rows, row_edges


def transfer_data(cp, mc, basis, seeds, terms, prec) -> TransferData:
    T, row_edges = phi2_matrix(cp, mc, basis.forms, seeds, terms, prec)
    K = cp.field
    n = len(basis.forms)
    if T:
        ker = t_kernel(T)
    else:
        ker = [
            [K.one(prec) if i == j else K.zero(prec) for i in range(n)] for j in range(n)
        ]
    if len(ker) != n - len(T):
        raise RankDeficientT(
            f"kernel dimension {len(ker)} != 2g - betti = {n - len(T)}"
        )
    return TransferData(T=T, row_edges=row_edges, kernel=ker, basis_forms=basis.forms)


# -- certified homology action -------------------------------------------------------


def homology_action(td: TransferData, M_dR, mc, d1: int, d2: int, prec) -> tuple:
    """(integer matrix, k digits, c^2 bound): T M T^+ rounded and certified."""
    C = mc.pairing
    bound_sq = norm_bound_sq(C, d1, d2) if C else Frac(0)
    if not td.T:
        return [], 0, bound_sq
    K = td.T[0][0].field
    Mt = [[K.from_rational(x, prec) for x in row] for row in M_dR]
    Tp = t_right_inverse(td.T)
    approx = t_mat_mul(t_mat_mul(td.T, Mt), Tp)
    ints = []
    k_min = None
    for row in approx:
        out = []
        for x in row:
            r, k = x.rational_coord()
            k_min = k if k_min is None else min(k_min, k)
            out.append((r, k))
        ints.append(out)
    ell = K.ell
    M_int = []
    for row in ints:
        out = []
        for r, _ in row:
            mod = ell**k_min
            rr = r % mod
            if rr > mod // 2:
                rr -= mod
            out.append(rr)
        M_int.append(out)
    # certification: |entry| <= c and c + |entry| < ell^k
    for row in M_int:
        for r in row:
            if Frac(r * r) > bound_sq:
                raise CertificationFailed(
                    f"entry {r} exceeds the operator-norm bound at k={k_min}"
                )
            rest = ell**k_min - abs(r)
            if rest <= 0 or Frac(rest * rest) <= bound_sq:
                raise CertificationFailed(
                    f"ell^k too small to separate candidates at k={k_min}"
                )
    # exact operator-norm recheck over Q
    M_q = [[Frac(x) for x in row] for row in M_int]
    S = [
        [
            Frac(d1 * d2) * C[i][j]
            - sum(M_q[a][i] * C[a][b] * M_q[b][j] for a in range(len(C)) for b in range(len(C)))
            for j in range(len(C))
        ]
        for i in range(len(C))
    ]
    if not r_is_psd(S):
        raise CertificationFailed("certified matrix violates M^T C M <= d1 d2 C")
    return M_int, k_min, bound_sq


# -- local symbols -------------------------------------------------------------------


def _g_minus_factor(cp, cl, child):
    """g_{cl} / (x - alpha_{child}) as a tower polynomial."""
    g = cp.g_poly(cl)
    alpha = cp.rootset.roots[child.alpha_idx]
    K = cp.field
    lin = [-alpha, K.one(alpha.prec)]
    q, rem = tp_divmod(g, lin)
    return q


def _residue_pairing(omega_af, eta_af, eps=None):
    """Res(omega * int(eta)) on a common band; eta must have residue ~ 0."""
    r = eta_af.coeffs.get(-1)
    if r is not None and not r.is_zeroish():
        raise NonzeroResidue("eta has a nonzero residue on a bounding annulus")
    eta0 = eta_af.drop_residue_term()
    width = (eta_af.v1 - eta_af.v2) if eta_af.v1 is not None else Frac(1)
    eps = eps if eps is not None else width / 4
    I = integrate(eta0, eps)
    om = restrict(omega_af, I.v1, I.v2)
    om = om.drop_residue_term() if False else om
    prod = om * I
    return prod.residue()


def local_symbol_terms(cp, mc, cl, a_polys, b_polys, hbranch, terms, prec):
    """Matrix of local symbols <a_m . h^{-1/2} dx/2u, b_j dx/2u> on the vertex
    curve of cl, summed over children and the outer annulus (tame route)."""
    K = cp.field
    m_count, j_count = len(a_polys), len(b_polys)
    out = [[K.zero(prec) for _ in range(j_count)] for _ in range(m_count)]
    g_poly = cp.g_poly(cl)

    def add_even_term(band, sigma):
        G = pow_half(expand_poly(g_poly, band), -1, terms)
        H = hbranch.expand_on(band, terms) if hbranch is not None else None
        Hinv = af_inv(H, terms) if H is not None else None
        half = K.from_rational(Frac(1, 2), prec)
        a_exp = [expand_poly(p, band) * G for p in a_polys]
        if Hinv is not None:
            a_exp = [x * Hinv for x in a_exp]
        b_int = [expand_poly(p, band) * G for p in b_polys]
        for mi in range(m_count):
            for ji in range(j_count):
                val = _residue_pairing(a_exp[mi], b_int[ji])
                out[mi][ji] = out[mi][ji] + val.scale_int(sigma) * half

    def add_odd_term(child, band_x, sigma):
        gss = _g_minus_factor(cp, cl, child) if child is not cl else _g_minus_factor(cp, cl, cl)
        Gx = pow_half(expand_poly(gss, band_x), -1, terms)
        Hx = hbranch.expand_on(band_x, terms) if hbranch is not None else None
        Hxinv = af_inv(Hx, terms) if Hx is not None else None
        a_t = [to_branch_cover(expand_poly(p, band_x) * Gx) for p in a_polys]
        if Hxinv is not None:
            Ht = to_branch_cover(Hxinv)
            a_t = [x * Ht for x in a_t]
        b_t = [to_branch_cover(expand_poly(p, band_x) * Gx) for p in b_polys]
        for mi in range(m_count):
            for ji in range(j_count):
                val = _residue_pairing(a_t[mi], b_t[ji])
                out[mi][ji] = out[mi][ji] + val.scale_int(sigma)

    for child in cl.children:
        if child.is_proper and child.stub is None and child.is_even:
            add_even_term(annulus_band(cp, child), +1)
        elif child.is_odd:
            if child.stub is not None or (
                child.size == 1 and child.members[0] >= len(cp.rootset.roots)
            ):
                raise WildRamification("odd child without tame center in symbol sum")
            if child.is_proper:
                band_x = annulus_band(cp, child)
            else:
                lo = cl.depth
                band_x = Band(
                    center=cp.rootset.roots[child.alpha_idx],
                    v1=lo + Frac(3, 4),
                    v2=lo + Frac(1, 4),
                )
            add_odd_term(child, band_x, +1)
        else:
            raise WildRamification("even wild child in symbol sum")
    if cl.is_even:
        add_even_term(annulus_band(cp, cl), -1)
    else:
        add_odd_term(cl, annulus_band(cp, cl), -1)
    return out


def local_symbol_collapsed(cp, cl, a_polys, b_polys, terms, prec):
    """Wild route for a flat odd cluster: the sum over its wild singleton
    children plus the outer term collapses to ODD_COLLAPSE times the residue
    over the boundary annulus of the connected double cover (sigma coords)."""
    K = cp.field
    g_poly = cp.g_poly(cl)
    f_poly = tp_from_rationals(K, cp.f_coeffs, prec)
    h_poly, rem = tp_divmod(f_poly, g_poly)
    band = annulus_band(cp, cl)
    cov = sigma_cover(g_poly, band, terms)
    Hx = pow_half(expand_poly(h_poly, band), -1, terms)
    uinv = af_inv(cov.u, terms)
    m_count, j_count = len(a_polys), len(b_polys)

    def form_sigma(p, with_h):
        px = expand_poly(p, band)
        af = cov.pull(px, terms)
        if with_h:
            af = af * cov.pull(Hx, terms)
        half = K.from_rational(Frac(1, 2), prec)
        return (af * uinv * cov.dtau).scalar(half)

    a_s = [form_sigma(p, True) for p in a_polys]
    b_s = [form_sigma(p, False) for p in b_polys]
    out = [[K.zero(prec) for _ in range(j_count)] for _ in range(m_count)]
    for mi in range(m_count):
        for ji in range(j_count):
            val = _residue_pairing(a_s[mi], b_s[ji])
            out[mi][ji] = out[mi][ji] + val.scale_int(ODD_COLLAPSE)
    return out


# -- vertex traces ---------------------------------------------------------------------


def kernel_action(td: TransferData, M_dR, prec):
    """M_ker with M_dR . N = N . M_ker on the kernel basis."""
    if not td.kernel:
        return []
    K = td.kernel[0][0].field
    n = len(td.kernel[0])
    Ncols = td.kernel
    Nmat = [[Ncols[c][r] for c in range(len(Ncols))] for r in range(n)]
    Mt = [[K.from_rational(x, prec) for x in row] for row in M_dR]
    MN = t_mat_mul(Mt, Nmat)
    cols = []
    for c in range(len(Ncols)):
        rhs = [MN[r][c] for r in range(n)]
        cols.append(t_solve(Nmat, rhs))
    return [[cols[c][r] for c in range(len(cols))] for r in range(len(cols[0]))]


def vertex_traces(cp, mc, td: TransferData, M_dR, seeds, d1, d2, terms, prec):
    """Certified integer traces per positive-genus vertex."""
    K = cp.field
    traces = {v.id: 0 for v in mc.vertices}
    plus_vertices = [v for v in mc.vertices if v.genus > 0]
    if not plus_vertices:
        return traces, 0
    M_ker = kernel_action(td, M_dR, prec)
    m = len(td.kernel)
    # kernel numerators a_m(x)
    a_polys = []
    for vec in td.kernel:
        poly = None
        for i, coeff in enumerate(vec):
            term = [coeff * x for x in tp_from_rationals(K, td.basis_forms[i], prec)]
            poly = term if poly is None else _tp_add_pad(poly, term)
        a_polys.append(poly)
    S_rows = []
    block_of = {}
    for v in plus_vertices:
        cl = cp.by_label(v.cluster)
        g_poly = cp.g_poly(cl)
        ops = TowerOps(K, prec)
        eta = second_kind_basis(ops, g_poly)
        b_polys = [list(vec) for vec in eta.forms]
        gram = cup_matrix(ops, g_poly, eta.forms)
        if cl.stub is not None:
            sym = local_symbol_collapsed(cp, cl, a_polys, b_polys, terms, prec)
        else:
            hbranch = coherent_sqrt_h(cp, cl, sign=seeds[cl.label]["h_sign"])
            sym = local_symbol_terms(cp, mc, cl, a_polys, b_polys, hbranch, terms, prec)
        # solve gram^T a = sym-row for each kernel form: coefficients of omega_m
        # on the eta basis: <omega, eta_j> = sum_i a_i <eta_i, eta_j>
        rows_for_vertex = []
        Gt = [[gram[i][j] for i in range(len(gram))] for j in range(len(gram))]
        for mi in range(m):
            rhs = [sym[mi][j] for j in range(len(b_polys))]
            try:
                coeffs = t_solve(Gt, rhs)
            except Exception as exc:  # noqa: BLE001
                raise GramSingular(str(exc))
            rows_for_vertex.append(coeffs)
        # S-block: rows = eta-coordinates, columns = kernel forms
        block = [[rows_for_vertex[mi][i] for mi in range(m)] for i in range(len(b_polys))]
        block_of[v.id] = (len(S_rows), len(b_polys))
        S_rows.extend(block)
    Sp = t_right_inverse(S_rows)
    M_vert = t_mat_mul(t_mat_mul(S_rows, M_ker), Sp)
    k_min = None
    ell = K.ell
    for v in plus_vertices:
        start, size = block_of[v.id]
        tr = None
        for i in range(size):
            x = M_vert[start + i][start + i]
            tr = x if tr is None else tr + x
        r, k = tr.rational_coord()
        k_min = k if k_min is None else min(k_min, k)
        mod = ell**k
        rr = r % mod
        if rr > mod // 2:
            rr -= mod
        bound = 2 * v.genus * max(d1, d2)
        if abs(rr) > bound:
            raise CertificationFailed(f"vertex trace {rr} exceeds bound {bound}")
        if bound + abs(rr) >= ell**k:
            raise CertificationFailed("trace congruence modulus too small")
        traces[v.id] = rr
    return traces, (k_min or 0)


def _tp_add_pad(a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        if i < len(a) and i < len(b):
            out.append(a[i] + b[i])
        elif i < len(a):
            out.append(a[i])
        else:
            out.append(b[i])
    return out


def certified_action(cp, mc, td, M_dR, seeds, d1, d2, terms, prec) -> CertifiedAction:
    M_int, k_m, bound_sq = homology_action(td, M_dR, mc, d1, d2, prec)
    traces, k_t = vertex_traces(cp, mc, td, M_dR, seeds, d1, d2, terms, prec)
    return CertifiedAction(
        M_gamma=M_int,
        traces=traces,
        bound_sq=bound_sq,
        k_matrix=k_m,
        k_traces=k_t,
        d1=d1,
        d2=d2,
    )
