"""Small dense linear algebra, exact over Q and precision-tracked over towers.

Rational matrices are lists of lists of Fractions.  Tower matrices are lists
of lists of TowerElt; pivots are chosen with minimal valuation so precision
loss through elimination is as small as possible, and an entry is treated as
zero exactly when it is indistinguishable from zero at its tracked precision.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import GramSingular, RankDeficientT

Frac = Fraction


# -- rational matrices --------------------------------------------------------


def r_identity(n):
    return [[Frac(int(i == j)) for j in range(n)] for i in range(n)]


def r_mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return [[sum((A[i][t] * B[t][j] for t in range(k)), Frac(0)) for j in range(m)] for i in range(n)]


def r_mat_vec(A, v):
    return [sum((A[i][j] * v[j] for j in range(len(v))), Frac(0)) for i in range(len(A))]


def r_transpose(A):
    return [list(row) for row in zip(*A)]


def r_solve(A, b):
    """Solve A x = b exactly; returns None if singular/inconsistent."""
    n = len(A)
    m = len(A[0])
    M = [[Frac(A[i][j]) for j in range(m)] + [Frac(b[i])] for i in range(n)]
    pivots = []
    r = 0
    for c in range(m):
        p = next((i for i in range(r, n) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(n):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if M[i][m] != 0:
            return None
    x = [Frac(0)] * m
    for i, c in enumerate(pivots):
        x[c] = M[i][m]
    return x


def r_inv(A):
    n = len(A)
    M = [list(map(Frac, A[i])) + r_identity(n)[i] for i in range(n)]
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for i in range(n):
            if i != c and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return [row[n:] for row in M]


def r_charpoly(A):
    """Coefficients [c_0, ..., c_{n-1}, 1] of det(tI - A), Faddeev-LeVerrier."""
    n = len(A)
    M = r_identity(n)
    coeffs = [Frac(1)]  # leading
    for k in range(1, n + 1):
        M = r_mat_mul(A, M)
        ck = -sum((M[i][i] for i in range(n)), Frac(0)) / k
        for i in range(n):
            M[i][i] += ck
        coeffs.append(ck)
    return list(reversed(coeffs))


def r_is_psd(S):
    """Exact positive-semidefiniteness test for a symmetric rational matrix."""
    n = len(S)
    ch = r_charpoly(S)  # ch[k] = coefficient of t^k
    # det(tI - S) = prod (t - lambda_i); PSD iff (-1)^{n-k} ch[k] >= 0 for all k
    for k in range(n + 1):
        if (-1) ** (n - k) * ch[k] < 0:
            return False
    return True


def r_ldl(C):
    """C = L D L^T for symmetric positive-definite C; returns (L, diag)."""
    n = len(C)
    L = r_identity(n)
    D = [Frac(0)] * n
    for j in range(n):
        d = C[j][j] - sum((L[j][k] * L[j][k] * D[k] for k in range(j)), Frac(0))
        if d <= 0:
            raise GramSingular("pairing matrix is not positive definite")
        D[j] = d
        for i in range(j + 1, n):
            s = C[i][j] - sum((L[i][k] * L[j][k] * D[k] for k in range(j)), Frac(0))
            L[i][j] = s / d
    return L, D


def norm_bound_sq(C, d1: int, d2: int) -> Frac:
    """Exact rational c^2 with |entries of M_Gamma| <= c, via C = P P^T and
    c = ||P||_F ||P^{-1}||_F sqrt(d1 d2)."""
    n = len(C)
    L, D = r_ldl(C)
    Linv = r_inv(L)
    p_sq = sum(L[i][k] * L[i][k] * D[k] for i in range(n) for k in range(n))
    pinv_sq = sum(Linv[i][k] * Linv[i][k] / D[i] for i in range(n) for k in range(n))
    return p_sq * pinv_sq * d1 * d2


# -- tower-field matrices -----------------------------------------------------


def _is_zero_entry(x):
    return x.is_zeroish()


def t_rref(M, aug=None):
    """Full reduced row echelon form with min-valuation pivoting.

    Returns (R, A, pivots) where row operations applied to M give R and the
    same operations applied to aug give A.
    """
    if not M:
        return [], aug, []
    K = M[0][0].field
    n, m = len(M), len(M[0])
    R = [list(row) for row in M]
    A = [list(row) for row in aug] if aug is not None else None
    pivots = []
    r = 0
    used = set()
    while r < n:
        best = None
        for c in range(m):
            if c in used:
                continue
            for i in range(r, n):
                if not _is_zero_entry(R[i][c]):
                    v = R[i][c].valuation()
                    if best is None or v < best[0]:
                        best = (v, i, c)
        if best is None:
            break
        _, p, c = best
        R[r], R[p] = R[p], R[r]
        if A is not None:
            A[r], A[p] = A[p], A[r]
        inv = R[r][c].inv()
        R[r] = [x * inv for x in R[r]]
        if A is not None:
            A[r] = [x * inv for x in A[r]]
        for i in range(n):
            if i != r and not _is_zero_entry(R[i][c]):
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], R[r])]
                if A is not None:
                    A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        used.add(c)
        pivots.append(c)
        r += 1
    # sort rows by pivot column for a deterministic result
    order = sorted(range(len(pivots)), key=lambda i: pivots[i])
    R = [R[i] for i in order] + R[len(pivots) :]
    if A is not None:
        A = [A[i] for i in order] + A[len(pivots) :]
    pivots = sorted(pivots)
    return R, A, pivots


def t_kernel(M, ambient_prec=None):
    """Basis of the right kernel of M (columns as vectors)."""
    if not M:
        return None  # caller interprets: kernel = everything
    K = M[0][0].field
    n, m = len(M), len(M[0])
    R, _, pivots = t_rref(M)
    prec = ambient_prec or min(x.prec for row in M for x in row)
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for c in free:
        vec = [K.zero(prec) for _ in range(m)]
        vec[c] = K.one(prec)
        for i, p in enumerate(pivots):
            vec[p] = -R[i][c]
        basis.append(vec)
    return basis


def t_right_inverse(M):
    """X with M X = I; requires full row rank at working precision."""
    K = M[0][0].field
    n, m = len(M), len(M[0])
    prec = min(x.prec for row in M for x in row)
    ident = [[K.one(prec) if i == j else K.zero(prec) for j in range(n)] for i in range(n)]
    R, E, pivots = t_rref(M, ident)
    if len(pivots) < n:
        raise RankDeficientT(f"rank {len(pivots)} < {n} at working precision")
    X = [[K.zero(prec) for _ in range(n)] for _ in range(m)]
    for i, p in enumerate(pivots):
        X[p] = list(E[i])
    return X


def t_solve(M, b):
    """One solution of M x = b (assumed consistent at precision)."""
    K = M[0][0].field
    n, m = len(M), len(M[0])
    R, B, pivots = t_rref(M, [[x] for x in b])
    prec = min(x.prec for row in M for x in row)
    x = [K.zero(prec) for _ in range(m)]
    for i, p in enumerate(pivots):
        x[p] = B[i][0]
    return x


def t_mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = A[i][0] * B[0][j]
            for t in range(1, k):
                acc = acc + A[i][t] * B[t][j]
            row.append(acc)
        out.append(row)
    return out


def t_from_rational_matrix(K, A, prec):
    return [[K.from_rational(x, prec) for x in row] for row in A]
