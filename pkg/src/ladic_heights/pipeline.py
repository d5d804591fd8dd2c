"""Pipeline orchestration: job parsing, precision retry, report assembly.

A job is a JSON-compatible dict; every rational is a "p/q" string (or int).
The pipeline runs roots -> clusters -> seeds -> skeleton -> transfer ->
certification -> measure -> heights, retrying at doubled precision on
recoverable precision failures and enlarging the tower on demand.  Reports are
deterministic for a fixed job.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .clusters import build_cluster_picture, rational_component_filter
from .derham import QOps, second_kind_basis, validate_user_basis
from .errors import (
    LadicError,
    NonzeroMass,
    PrecisionError,
    TowerTooSmall,
    ValidationError,
    WildRamification,
)
from .expansions import square_root_data
from .heights import (
    evaluate_height,
    height_function,
    height_measure,
    locate_point,
)
from .padic import val_int
from .roots import splitting_roots
from .skeleton import build_skeleton
from .transfer import certified_action, transfer_data

Frac = Fraction

REPORT_SCHEMA_VERSION = "1"


def _frac(x) -> Frac:
    if isinstance(x, str):
        return Frac(x)
    if isinstance(x, (int, Fraction)):
        return Frac(x)
    raise ValidationError(f"expected a rational, got {x!r}")


@dataclass
class JobSpec:
    f: list
    ell: int
    matrix: list
    basis: list | None
    d1: int
    d2: int
    basepoint: dict
    points: list
    precision: int
    max_precision: int

    @property
    def genus(self) -> int:
        n = len(self.f) - 1
        return (n - 1) // 2 if n % 2 else (n - 2) // 2


def parse_job(raw: dict) -> JobSpec:
    try:
        f = [_frac(c) for c in raw["f"]]
        ell = int(raw["ell"])
        endo = raw["endomorphism"]
        matrix = [[_frac(x) for x in row] for row in endo["matrix"]]
        basis = endo.get("basis")
        if basis is not None:
            basis = [[_frac(x) for x in vec] for vec in basis]
        d1, d2 = int(endo["d1"]), int(endo["d2"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed job: {exc}")
    if d1 < 1 or d2 < 1:
        raise ValidationError("degrees d1, d2 must be positive")
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValidationError("endomorphism matrix must be square")
    job = JobSpec(
        f=f,
        ell=ell,
        matrix=matrix,
        basis=basis,
        d1=d1,
        d2=d2,
        basepoint=raw.get("basepoint", {"infinity": "+"}),
        points=raw.get("points", []),
        precision=int(raw.get("precision", 12)),
        max_precision=int(raw.get("max_precision", 384)),
    )
    g = job.genus
    if g < 1:
        raise ValidationError("curve must have positive genus")
    expected = 2 * g if basis is None else len(basis)
    if n != expected:
        raise ValidationError(
            f"matrix size {n} does not match the number of basis forms {expected}"
        )
    return job


def _has_rational_infinity(f, ell) -> bool:
    if (len(f) - 1) % 2 == 1:
        return True
    lc = f[-1]
    v = val_int(lc.numerator, ell) - val_int(lc.denominator, ell)
    if v % 2:
        return False
    unit = lc / Frac(ell) ** v
    num = unit.numerator % ell
    den = unit.denominator % ell
    r = num * pow(den, -1, ell) % ell
    return pow(r, (ell - 1) // 2, ell) == 1


def _resolve_base(cp, mc, seeds, spec):
    if "point" in spec:
        x, y = spec["point"]
        loc = locate_point(cp, mc, (_frac(x), _frac(y)), seeds)
        if len(loc.candidates) > 1:
            raise ValidationError("basepoint reduces ambiguously; give a graph position")
        if loc.kind == "vertex":
            return ("vertex", loc.candidates[0]), loc
        return ("edge", loc.candidates[0], loc.offset), loc
    if "infinity" in spec:
        loc = locate_point(cp, mc, "infinity", seeds)
        sign = 1 if spec.get("infinity") in ("+", "", None) else -1
        vids = loc.candidates
        vid = vids[0] if len(vids) == 1 else _vertex_by_sign(mc, cp.top.label, sign)
        return ("vertex", vid), loc
    if "vertex" in spec:
        probe = spec["vertex"]
        x = _frac(probe["x_near"])
        cl = _walk_x_only(cp, x)
        sign = 1 if probe.get("sign", "+") == "+" else -1
        return ("vertex", _vertex_by_sign(mc, cl.label, sign)), None
    raise ValidationError(f"unknown basepoint spec {spec}")


def _vertex_by_sign(mc, label, sign):
    if (label, sign) in mc.vertex_of_cluster:
        return mc.vertex_of_cluster[(label, sign)]
    return mc.vertex_of_cluster[(label, 1)]


def _walk_x_only(cp, x):
    from .heights import _dist_to_cluster

    K = cp.field
    prec = min((r.prec for r in cp.rootset.roots), default=Frac(24))
    x0 = K.from_rational(x, prec)
    cur = cp.top
    while True:
        nxt = None
        for ch in cur.children:
            if ch.is_proper and _dist_to_cluster(cp, ch, x0) > cur.depth:
                w = _dist_to_cluster(cp, ch, x0)
                if w >= ch.depth:
                    nxt = ch
                break
        if nxt is None:
            return cur
        cur = nxt


def run(raw_job: dict, stage: str = "heights") -> dict:
    job = parse_job(raw_job)
    prec = Frac(job.precision)
    min_tower = (1, 1)
    retries = 0
    while True:
        try:
            return _run_once(job, prec, min_tower, stage, retries)
        except TowerTooSmall as exc:
            nf = max(min_tower[0], exc.res_degree)
            ne = max(min_tower[1], exc.ram_index)
            if (nf, ne) == min_tower:
                raise
            min_tower = (nf, ne)
        except PrecisionError:
            if prec * 2 > job.max_precision:
                raise
            prec = prec * 2
            retries += 1


def _run_once(job, prec, min_tower, stage, retries) -> dict:
    rs = splitting_roots(list(job.f), job.ell, prec, min_tower=min_tower)
    cp = build_cluster_picture(rs, job.f[-1])
    report = {
        "schema": REPORT_SCHEMA_VERSION,
        "version": __version__,
        "ell": job.ell,
        "tower": {
            "f": rs.field.f,
            "e": rs.field.e,
            "unram_poly": list(rs.field.unram_poly),
        },
        "precision_audit": {
            "requested": str(job.precision),
            "working": str(prec),
            "retries": retries,
        },
        "cluster_picture": {
            "ascii": cp.ascii(),
            "clusters": [
                {
                    "label": cl.label,
                    "size": cl.size,
                    "depth": None if cl.depth is None else str(cl.depth),
                    "rel_depth": None if cl.rel_depth is None else str(cl.rel_depth),
                    "nu": None if cl.nu is None else str(cl.nu),
                    "parity": "even" if cl.is_even else "odd",
                    "uebereven": cl.uebereven,
                    "genus": cl.genus,
                    "parent": None if cl.parent is None else cl.parent.label,
                    "wild": cl.stub is not None,
                }
                for cl in cp.clusters
                if cl.is_proper
            ],
        },
    }
    admitted, edge_positions = rational_component_filter(
        cp, _has_rational_infinity(job.f, job.ell)
    )
    report["rational_component_filter"] = {
        "components": sorted(admitted),
        "edge_positions": {k: [str(x) for x in v] for k, v in sorted(edge_positions.items())},
    }
    if stage == "clusters":
        return report
    seeds = square_root_data(cp)
    mc = build_skeleton(cp)
    if not mc.genus_identity_holds():
        raise ValidationError("genus identity failed: skeleton inconsistent")
    report["skeleton"] = mc.to_json()
    if stage == "skeleton":
        return report
    g = job.genus
    if job.basis is None:
        basis = second_kind_basis(QOps(), job.f)
    else:
        basis = validate_user_basis(job.basis, job.f)
    if len(basis.forms) != len(job.matrix):
        raise ValidationError("matrix does not match basis size")
    if len(basis.forms) < 2 * g and any(v.genus > 0 for v in mc.vertices):
        raise ValidationError(
            "positive-genus vertices require a full basis of 2g forms"
        )
    terms = max(12, int(2 * prec))
    td = transfer_data(cp, mc, basis, seeds, terms, prec)
    action = certified_action(cp, mc, td, job.matrix, seeds, job.d1, job.d2, terms, prec)
    report["action"] = {
        "M_gamma": action.M_gamma,
        "traces": {str(v): t for v, t in sorted(action.traces.items())},
        "bound_sq": str(action.bound_sq),
        "k_matrix": action.k_matrix,
        "k_traces": action.k_traces,
        "d1": action.d1,
        "d2": action.d2,
        "T": [[x.to_json() for x in row] for row in td.T],
        "T_row_edges": td.row_edges,
    }
    if stage == "action":
        return report
    mu = height_measure(mc, action)
    report["measure"] = mu.to_json(mc)
    base, base_loc = _resolve_base(cp, mc, seeds, job.basepoint)
    hf = height_function(mc, mu, base)
    report["height_function"] = hf.to_json()
    pts = []
    for p in job.points:
        if isinstance(p, dict) and "infinity" in p:
            loc = locate_point(cp, mc, "infinity", seeds)
            inp = {"infinity": p["infinity"]}
        else:
            loc = locate_point(cp, mc, (_frac(p[0]), _frac(p[1])), seeds)
            inp = {"point": [str(_frac(p[0])), str(_frac(p[1]))]}
        val = evaluate_height(hf, loc)
        pts.append(
            {
                "input": inp,
                "location": loc.to_json(),
                "height": [str(v) for v in val] if isinstance(val, tuple) else str(val),
            }
        )
    report["points"] = pts
    if stage == "check":
        report["checks"] = run_checks(cp, mc, td, action, mu, hf, seeds, terms, prec)
    return report


def run_checks(cp, mc, td, action, mu, hf, seeds, terms, prec) -> dict:
    """Invariant suite for the check subcommand."""
    from .linalg import r_is_psd

    out = {}
    out["genus_identity"] = mc.genus_identity_holds()
    out["total_mass_zero"] = mu.total_mass(mc) == 0
    lap = hf.laplacian()
    ok = True
    for e in mc.edges:
        want = mu.edge_density.get(e.id, [])
        got = lap.edge_density.get(e.id, [])
        wantt = [x for x in want]
        gott = [x for x in got]
        while wantt and wantt[-1] == 0:
            wantt.pop()
        while gott and gott[-1] == 0:
            gott.pop()
        if wantt != gott:
            ok = False
    for v in mc.vertices:
        if lap.vertex_mass.get(v.id, Frac(0)) != Frac(mu.vertex_mass.get(v.id, 0)):
            ok = False
    out["laplacian_identity"] = ok
    C = mc.pairing
    if action.M_gamma:
        M = [[Frac(x) for x in row] for row in action.M_gamma]
        n = len(C)
        S = [
            [
                Frac(action.d1 * action.d2) * C[i][j]
                - sum(M[a][i] * C[a][b] * M[b][j] for a in range(n) for b in range(n))
                for j in range(n)
            ]
            for i in range(n)
        ]
        out["operator_norm_psd"] = r_is_psd(S)
    else:
        out["operator_norm_psd"] = True
    out["trace_bounds"] = all(
        abs(t) <= 2 * mc.vertices[v].genus * max(action.d1, action.d2)
        for v, t in action.traces.items()
    )
    out["residue_cycle"] = _residue_cycle_check(cp, mc, td)
    return out


def _residue_cycle_check(cp, mc, td) -> bool:
    """The full residue chain of every basis form is a cycle: the sum of
    residues over the bounding annuli of every wide open vanishes."""
    from .annulus import pow_half
    from .expansions import annulus_band, expand_poly, f_inv_sqrt_on_band
    from .padic import tp_from_rationals

    if not td.T:
        return True
    K = cp.field
    seeds = {cl.label: {"gh_sign": 1, "h_sign": 1} for cl in cp.proper_clusters()}
    prec = min(x.prec for row in td.T for x in row) + 4
    cache = {}
    for vec in td.basis_forms:
        bd = {v.id: K.zero(prec) for v in mc.vertices}
        for e in mc.edges:
            cl = cp.by_label(e.cluster)
            if cl.is_odd:
                continue
            if cl.label not in cache:
                band = annulus_band(cp, cl)
                cache[cl.label] = (band, f_inv_sqrt_on_band(cp, cl, band, 12, seeds))
            band, u = cache[cl.label]
            poly = tp_from_rationals(K, vec, prec)
            res = (expand_poly(poly, band) * u).residue()
            res = res * K.from_rational(Frac(1, 2), res.prec)
            res = res if e.sign == -1 else -res
            bd[e.src] = bd[e.src] + res
            bd[e.dst] = bd[e.dst] - res
        for val in bd.values():
            capped = val.cap_prec(min(val.prec, Frac(2)))
            if not capped.is_zeroish():
                return False
    return True


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)
