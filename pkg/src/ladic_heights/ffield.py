"""Finite field F_{ell^f} and univariate polynomial factorization over it.

Elements are tuples of ints in [0, ell), length f, coefficients of
1, w, ..., w^{f-1} where w is a root of the defining polynomial.
Polynomials over the field are lists of elements, ascending degree,
normalized so the last entry is nonzero (the empty list is 0).

Factorization is squarefree decomposition + distinct-degree +
Cantor-Zassenhaus equal-degree splitting; the random splitting choices
are driven by a generator seeded from the polynomial itself, so results
are deterministic.
"""

from __future__ import annotations

import hashlib
import random


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FiniteField:
    """F_{ell^f} presented as F_ell[w]/(poly)."""

    def __init__(self, ell: int, poly: tuple[int, ...]):
        # poly: monic of degree f, coefficients ascending, reduced mod ell
        self.ell = ell
        self.f = len(poly) - 1
        assert poly[-1] == 1
        self.poly = poly
        self.order = ell**self.f
        self.zero = (0,) * self.f
        self.one = (1,) + (0,) * (self.f - 1) if self.f > 0 else ()

    def __eq__(self, other):
        return isinstance(other, FiniteField) and (self.ell, self.poly) == (other.ell, other.poly)

    def __hash__(self):
        return hash((self.ell, self.poly))

    def __repr__(self):
        return f"FiniteField({self.ell}^{self.f})"

    # -- element arithmetic ------------------------------------------------

    def el(self, ints) -> tuple:
        v = [c % self.ell for c in ints]
        v += [0] * (self.f - len(v))
        return tuple(v[: self.f])

    def from_int(self, n: int) -> tuple:
        return self.el([n])

    def gen(self) -> tuple:
        if self.f == 1:
            # w is the root of a linear poly: w = -poly[0]
            return self.el([-self.poly[0]])
        return self.el([0, 1])

    def add(self, a, b):
        return tuple((x + y) % self.ell for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.ell for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.ell for x in a)

    def mul(self, a, b):
        ell, f = self.ell, self.f
        prod = [0] * (2 * f - 1) if f > 0 else [0]
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] = (prod[i + j] + x * y) % ell
        # reduce by poly: w^f = -(poly[0] + ... + poly[f-1] w^{f-1})
        for k in range(len(prod) - 1, f - 1, -1):
            c = prod[k]
            if c:
                prod[k] = 0
                for j in range(f):
                    prod[k - f + j] = (prod[k - f + j] - c * self.poly[j]) % ell
        return tuple(prod[:f])

    def pow(self, a, n: int):
        if n < 0:
            return self.pow(self.inv(a), -n)
        r = self.one
        while n:
            if n & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            n >>= 1
        return r

    def inv(self, a):
        if a == self.zero:
            raise ZeroDivisionError("inverse of zero in finite field")
        return self.pow(a, self.order - 2)

    def is_zero(self, a):
        return a == self.zero

    def encode(self, a) -> int:
        """Canonical integer encoding, used for deterministic tie-breaks."""
        n = 0
        for c in reversed(a):
            n = n * self.ell + c
        return n

    def is_square(self, a) -> bool:
        if a == self.zero:
            return True
        return self.pow(a, (self.order - 1) // 2) == self.one

    def sqrt(self, a):
        """A square root of a, or None; canonical = smaller encoding."""
        if a == self.zero:
            return self.zero
        if not self.is_square(a):
            return None
        q = self.order
        if q % 4 == 3:
            r = self.pow(a, (q + 1) // 4)
        else:
            r = self._tonelli(a)
        r2 = self.neg(r)
        return r if self.encode(r) <= self.encode(r2) else r2

    def _tonelli(self, a):
        q = self.order
        s, m = q - 1, 0
        while s % 2 == 0:
            s //= 2
            m += 1
        # deterministic non-square search
        z = None
        rng = random.Random(0xF0F0 ^ q)
        # first try small "integer" elements, then pseudo-random ones
        for n in range(2, 50):
            c = self.from_int(n)
            if c != self.zero and not self.is_square(c):
                z = c
                break
        while z is None:
            c = tuple(rng.randrange(self.ell) for _ in range(self.f))
            if c != self.zero and not self.is_square(c):
                z = c
        c = self.pow(z, s)
        t = self.pow(a, s)
        r = self.pow(a, (s + 1) // 2)
        while t != self.one:
            # find least i with t^(2^i) = 1
            i, tt = 0, t
            while tt != self.one:
                tt = self.mul(tt, tt)
                i += 1
            b = c
            for _ in range(m - i - 1):
                b = self.mul(b, b)
            m = i
            c = self.mul(b, b)
            t = self.mul(t, c)
            r = self.mul(r, b)
        return r


# -- polynomials over the field ---------------------------------------------


def ptrim(F, p):
    while p and F.is_zero(p[-1]):
        p.pop()
    return p


def padd(F, a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else F.zero
        y = b[i] if i < len(b) else F.zero
        out.append(F.add(x, y))
    return ptrim(F, out)


def pscale(F, a, c):
    if F.is_zero(c):
        return []
    return [F.mul(x, c) for x in a]


def pmul(F, a, b):
    if not a or not b:
        return []
    out = [F.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not F.is_zero(x):
            for j, y in enumerate(b):
                out[i + j] = F.add(out[i + j], F.mul(x, y))
    return ptrim(F, out)


def pdivmod(F, a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    binv = F.inv(b[-1])
    q = [F.zero] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b):
        c = F.mul(a[-1], binv)
        d = len(a) - len(b)
        q[d] = c
        for i in range(len(b)):
            a[d + i] = F.sub(a[d + i], F.mul(c, b[i]))
        ptrim(F, a)
        if not a:
            break
    return ptrim(F, q), a


def pmod(F, a, b):
    return pdivmod(F, a, b)[1]


def pgcd(F, a, b):
    a, b = list(a), list(b)
    while b:
        a, b = b, pmod(F, a, b)
    if a:
        a = pscale(F, a, F.inv(a[-1]))
    return a


def pmonic(F, a):
    if not a:
        return a
    return pscale(F, a, F.inv(a[-1]))


def ppowmod(F, a, n, m):
    r = [F.one]
    a = pmod(F, a, m)
    while n:
        if n & 1:
            r = pmod(F, pmul(F, r, a), m)
        a = pmod(F, pmul(F, a, a), m)
        n >>= 1
    return r


def pderiv(F, a):
    return ptrim(F, [F.mul(a[i], F.from_int(i)) for i in range(1, len(a))])


def peval(F, a, x):
    r = F.zero
    for c in reversed(a):
        r = F.add(F.mul(r, x), c)
    return r


def _ell_th_root(F, a):
    """ell-th root of a field element (Frobenius inverse)."""
    return F.pow(a, F.order // F.ell) if F.f > 1 else a


def squarefree_decomposition(F, a):
    """Yield (squarefree factor, multiplicity) pairs, Yun's algorithm in char ell."""
    out = []
    a = pmonic(F, list(a))

    def rec(p, mult):
        if len(p) <= 1:
            return
        dp = pderiv(F, p)
        if not dp:
            # p is a polynomial in x^ell: take ell-th root and recurse
            root = [_ell_th_root(F, p[i]) for i in range(0, len(p), F.ell)]
            rec(ptrim(F, root), mult * F.ell)
            return
        g = pgcd(F, p, dp)
        w = pdivmod(F, p, g)[0]
        m = 1
        while len(w) > 1:
            y = pgcd(F, w, g)
            z = pdivmod(F, w, y)[0]
            if len(z) > 1:
                out.append((pmonic(F, z), m * mult))
            w = y
            g = pdivmod(F, g, y)[0]
            m += 1
        if len(g) > 1:
            rec(g, mult)

    rec(a, 1)
    return out


def _distinct_degree(F, a):
    """Split a squarefree monic poly into products of same-degree irreducibles."""
    out = []
    x = [F.zero, F.one]
    h = list(x)
    f = list(a)
    d = 0
    while len(f) - 1 >= 2 * (d + 1):
        d += 1
        h = ppowmod(F, h, F.order, f)
        g = pgcd(F, padd(F, h, pscale(F, x, F.neg(F.one))), f)
        if len(g) > 1:
            out.append((g, d))
            f = pdivmod(F, f, g)[0]
            h = pmod(F, h, f)
    if len(f) > 1:
        out.append((f, len(f) - 1))
    return out


def _equal_degree(F, a, d, rng):
    """Cantor-Zassenhaus split of a into irreducibles of degree d (odd char)."""
    n = len(a) - 1
    if n == d:
        return [a]
    exp = (F.order**d - 1) // 2
    while True:
        r = [tuple(rng.randrange(F.ell) for _ in range(F.f)) for _ in range(n)]
        r = ptrim(F, r)
        if len(r) <= 1:
            continue
        g = pgcd(F, r, a)
        if 1 < len(g) < len(a):
            pass
        else:
            h = ppowmod(F, r, exp, a)
            g = pgcd(F, padd(F, h, [F.neg(F.one)]), a)
            if not (1 < len(g) < len(a)):
                continue
        rest = pdivmod(F, a, g)[0]
        return _equal_degree(F, g, d, rng) + _equal_degree(F, rest, d, rng)


def factor(F, a):
    """Complete factorization of a nonzero polynomial over F.

    Returns (lc, [(monic irreducible, multiplicity), ...]) sorted canonically.
    """
    if not a:
        raise ValueError("cannot factor the zero polynomial")
    lc = a[-1]
    seed_src = repr((F.ell, F.poly, tuple(a))).encode()
    rng = random.Random(int(hashlib.sha256(seed_src).hexdigest(), 16))
    pieces = []
    for sq, mult in squarefree_decomposition(F, a):
        for g, d in _distinct_degree(F, sq):
            for irr in _equal_degree(F, g, d, rng):
                pieces.append((irr, mult))
    pieces.sort(key=lambda t: (len(t[0]), [F.encode(c) for c in t[0]], t[1]))
    return lc, pieces


def is_irreducible(F, a) -> bool:
    if len(a) - 1 <= 0:
        return False
    if len(a) - 1 == 1:
        return True
    _, pieces = factor(F, pmonic(F, list(a)))
    return len(pieces) == 1 and pieces[0][1] == 1 and len(pieces[0][0]) == len(a)


def roots(F, a):
    """Roots in F of a nonzero polynomial, with multiplicity, sorted by encoding."""
    out = []
    _, pieces = factor(F, list(a))
    for irr, mult in pieces:
        if len(irr) == 2:
            out.extend([F.neg(irr[0])] * mult)
    out.sort(key=F.encode)
    return out
