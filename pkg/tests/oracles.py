"""Independent reference implementations used by the tests.

They share nothing with the package beyond reading coefficients out of jets:
plain dicts, fractions.Fraction and schoolbook loops.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from math import comb


def F(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator)) if not isinstance(x, (int, Fraction)) else Fraction(x)


# polynomials in (z, zbar) as {exponent tuple of length 2n: complex Fraction pair}


def from_jet(j) -> dict:
    out = {}
    for a, b, c in j.terms():
        out[tuple(a) + tuple(b)] = (F(c.re), F(c.im))
    return out


def cmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def clean(p: dict) -> dict:
    return {k: v for k, v in p.items() if v[0] or v[1]}


def padd(p: dict, q: dict) -> dict:
    out = dict(p)
    for k, v in q.items():
        a = out.get(k, (Fraction(0), Fraction(0)))
        out[k] = (a[0] + v[0], a[1] + v[1])
    return clean(out)


def pscale(p: dict, c) -> dict:
    return clean({k: cmul(v, c) for k, v in p.items()})


def pmul(p: dict, q: dict, order: int) -> dict:
    out = {}
    for ka, va in p.items():
        for kb, vb in q.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            if sum(k) > order:
                continue
            prod = cmul(va, vb)
            a = out.get(k, (Fraction(0), Fraction(0)))
            out[k] = (a[0] + prod[0], a[1] + prod[1])
    return clean(out)


def pdiff(p: dict, slot: int) -> dict:
    out = {}
    for k, v in p.items():
        e = k[slot]
        if e == 0:
            continue
        k2 = list(k)
        k2[slot] -= 1
        out[tuple(k2)] = (v[0] * e, v[1] * e)
    return clean(out)


def pconj(p: dict, n: int) -> dict:
    return {k[n:] + k[:n]: (v[0], -v[1]) for k, v in p.items()}


def ptrunc(p: dict, order: int) -> dict:
    return {k: v for k, v in p.items() if sum(k) <= order}


def q_poly(n: int, lam, order: int) -> dict:
    out = {}
    for i in range(n):
        e = [0] * (2 * n)
        e[i] = e[n + i] = 1
        out = padd(out, {tuple(e): (Fraction(1), Fraction(0))})
        e2 = [0] * (2 * n)
        e2[i] = 2
        out = padd(out, {tuple(e2): (F(lam[i]), Fraction(0))})
        e3 = [0] * (2 * n)
        e3[n + i] = 2
        out = padd(out, {tuple(e3): (F(lam[i]), Fraction(0))})
    return ptrunc(out, order)


def ppow(p: dict, k: int, n: int, order: int) -> dict:
    out = {tuple([0] * (2 * n)): (Fraction(1), Fraction(0))}
    for _ in range(k):
        out = pmul(out, p, order)
    return out


def substitute(B_terms: dict, W: dict, n: int, order: int) -> dict:
    """sum b_(I,j) z^I W^j with B_terms {(I, j): (re, im)}."""
    out = {}
    for (I, j), c in B_terms.items():
        zI = {tuple(I) + (0,) * n: c}
        out = padd(out, pmul(zI, ppow(W, j, n, order), order))
    return out


# univariate polynomials as coefficient lists of Fraction


def uadd(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def umul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def utrim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def leibniz_det(m, mul, add, zero, one):
    """Determinant by the permutation expansion; fine up to 6x6."""
    n = len(m)
    total = zero
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = one
        for i in range(n):
            term = mul(term, m[i][perm[i]])
        if inv % 2:
            term = mul(term, [Fraction(-1)] if isinstance(one, list) else Fraction(-1))
        total = add(total, term)
    return total


def binom(a, b):
    return comb(a, b) if 0 <= b <= a else 0


def rplus_entry(mh, i, j, sign):
    """R+/R- entry as a coefficient list, written out independently from the text."""
    b = 2 * i - 1
    if j < mh:
        f = [Fraction(binom(4 * mh - 2 - j, b)), 0, Fraction(-binom(4 * mh - 3 - j, b))]
        g = [Fraction(binom(2 * mh - 1 + j, b)), 0, Fraction(-binom(2 * mh - 2 + j, b))]
        e = 2 * mh - 1 - 2 * j
    else:
        f = [Fraction((mh - 1 + j) * binom(5 * mh - 2 - j, b))]
        g = [Fraction((5 * mh - 2 - j) * binom(mh - 1 + j, b))]
        e = 4 * mh - 1 - 2 * j
    mono = [Fraction(0)] * e + [Fraction((-1) ** e * sign)]
    return utrim(uadd(f, umul(mono, g)))
