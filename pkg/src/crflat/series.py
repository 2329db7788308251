"""Truncated formal power series in z_1..z_n and their conjugates.

A monomial z^alpha zbar^beta is packed into one integer: slot i < n holds
alpha_i and slot n + i holds beta_i, 6 bits per slot.  Multiplying monomials
is then integer addition.  Coefficients are stored as (re, im) pairs of mpq.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Mapping, Sequence

from gmpy2 import mpq

from .algebra import CNum, Rat, rat, rat_str

SHIFT = 6
MASK = (1 << SHIFT) - 1
MAX_ORDER = MASK

INFINITE = math.inf

_ZERO = mpq(0)


class OrderExceeded(ValueError):
    pass


class VariableCountMismatch(ValueError):
    pass


def pack(alpha: Sequence[int], beta: Sequence[int]) -> int:
    key = 0
    for i, e in enumerate(tuple(alpha) + tuple(beta)):
        if e < 0 or e > MASK:
            raise ValueError(f"exponent {e} out of range")
        key |= e << (SHIFT * i)
    return key


def unpack(key: int, n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    ex = [(key >> (SHIFT * i)) & MASK for i in range(2 * n)]
    return tuple(ex[:n]), tuple(ex[n:])


def key_degree(key: int) -> int:
    d = 0
    while key:
        d += key & MASK
        key >>= SHIFT
    return d


def _swap_key(key: int, n: int) -> int:
    """Exchange the z and zbar halves of a packed monomial."""
    lo_mask = (1 << (SHIFT * n)) - 1
    return ((key & lo_mask) << (SHIFT * n)) | (key >> (SHIFT * n))


def _grlex(n: int):
    def sort_key(key: int):
        a, b = unpack(key, n)
        return (sum(a) + sum(b), tuple(-x for x in a + b))

    return sort_key


class Jet:
    """Truncated series with complex rational coefficients and a validity order."""

    __slots__ = ("n", "order", "_c", "_groups")

    def __init__(self, n: int, order: int, coeffs: Mapping[int, tuple] | None = None, _trusted=False):
        if n < 1:
            raise ValueError("need at least one variable")
        if order > MAX_ORDER:
            raise ValueError(f"validity order above {MAX_ORDER} is not supported")
        self.n = n
        self.order = order
        if coeffs is None:
            self._c = {}
        elif _trusted:
            self._c = dict(coeffs)
        else:
            c = {}
            for k, (re, im) in coeffs.items():
                if key_degree(k) > order:
                    continue
                re, im = rat(re), rat(im)
                if re or im:
                    c[k] = (re, im)
            self._c = c
        self._groups = None

    # construction

    @classmethod
    def zero(cls, n: int, order: int) -> "Jet":
        return cls(n, order)

    @classmethod
    def const(cls, n: int, c, order: int) -> "Jet":
        c = CNum.of(c)
        return cls(n, order, {0: (c.re, c.im)})

    @classmethod
    def monomial(cls, n: int, alpha, beta, c=1, order: int = MAX_ORDER) -> "Jet":
        c = CNum.of(c)
        return cls(n, order, {pack(alpha, beta): (c.re, c.im)})

    @classmethod
    def z(cls, n: int, j: int, order: int) -> "Jet":
        """The coordinate z_j (j is 1-based)."""
        return cls(n, order, {1 << (SHIFT * (j - 1)): (mpq(1), _ZERO)})

    @classmethod
    def zbar(cls, n: int, j: int, order: int) -> "Jet":
        return cls(n, order, {1 << (SHIFT * (n + j - 1)): (mpq(1), _ZERO)})

    @classmethod
    def from_terms(cls, n: int, order: int, terms: Iterable) -> "Jet":
        """Build from (alpha, beta, coefficient) triples; repeated monomials add up."""
        acc: dict[int, CNum] = {}
        for alpha, beta, c in terms:
            if len(alpha) != n or len(beta) != n:
                raise VariableCountMismatch("multi-index length differs from n")
            if sum(alpha) + sum(beta) > order:
                raise OrderExceeded(f"term of degree {sum(alpha) + sum(beta)} above order {order}")
            k = pack(alpha, beta)
            acc[k] = acc.get(k, CNum(0)) + CNum.of(c)
        return cls(n, order, {k: (v.re, v.im) for k, v in acc.items()})

    # access

    def _check(self, other: "Jet"):
        if not isinstance(other, Jet):
            raise TypeError("expected a Jet")
        if other.n != self.n:
            raise VariableCountMismatch(f"{self.n} vs {other.n} variables")

    def coeff(self, alpha, beta) -> CNum:
        if sum(alpha) + sum(beta) > self.order:
            raise OrderExceeded(f"degree {sum(alpha) + sum(beta)} above validity order {self.order}")
        re, im = self._c.get(pack(alpha, beta), (_ZERO, _ZERO))
        return CNum(re, im)

    def keys(self) -> list[int]:
        return sorted(self._c, key=_grlex(self.n))

    def terms(self) -> Iterator[tuple[tuple, tuple, CNum]]:
        """Nonzero terms in graded-lexicographic order."""
        for k in self.keys():
            a, b = unpack(k, self.n)
            re, im = self._c[k]
            yield a, b, CNum(re, im)

    def raw(self) -> dict[int, tuple]:
        return dict(self._c)

    def __len__(self) -> int:
        return len(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def __eq__(self, o) -> bool:
        if not isinstance(o, Jet):
            return NotImplemented
        return self.n == o.n and self.order == o.order and self._c == o._c

    def __hash__(self) -> int:
        return hash((self.n, self.order, frozenset(self._c.items())))

    def same_coeffs(self, o: "Jet", upto: int | None = None) -> bool:
        """Coefficient equality up to a degree (default: the common order)."""
        self._check(o)
        d = min(self.order, o.order) if upto is None else upto
        return (self - o).truncate(d).is_zero()

    def __repr__(self) -> str:
        return f"Jet(n={self.n}, order={self.order}, terms={len(self._c)})"

    # arithmetic

    def with_order(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderExceeded("cannot raise the validity order of a jet")
        return self.truncate(order)

    def truncate(self, order: int) -> "Jet":
        order = min(order, self.order)
        return Jet(self.n, order, {k: v for k, v in self._c.items() if key_degree(k) <= order}, _trusted=True)

    def __add__(self, o):
        if not isinstance(o, Jet):
            return self + Jet.const(self.n, o, self.order)
        self._check(o)
        order = min(self.order, o.order)
        c = {k: v for k, v in self._c.items() if key_degree(k) <= order} if order < self.order else dict(self._c)
        for k, (re, im) in o._c.items():
            if order < o.order and key_degree(k) > order:
                continue
            if k in c:
                r0, i0 = c[k]
                r, i = r0 + re, i0 + im
                if r or i:
                    c[k] = (r, i)
                else:
                    del c[k]
            else:
                c[k] = (re, im)
        return Jet(self.n, order, c, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(self.n, self.order, {k: (-r, -i) for k, (r, i) in self._c.items()}, _trusted=True)

    def __sub__(self, o):
        if not isinstance(o, Jet):
            return self + (-CNum.of(o))
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def scale(self, c) -> "Jet":
        c = CNum.of(c)
        if c.is_zero():
            return Jet(self.n, self.order)
        cr, ci = c.re, c.im
        out = {}
        if ci == 0:
            for k, (r, i) in self._c.items():
                out[k] = (r * cr, i * cr)
        else:
            for k, (r, i) in self._c.items():
                out[k] = (r * cr - i * ci, r * ci + i * cr)
        return Jet(self.n, self.order, out, _trusted=True)

    def _grouped(self):
        if self._groups is None:
            g: dict[int, list] = {}
            for k, (r, i) in self._c.items():
                g.setdefault(key_degree(k), []).append((k, r, i))
            self._groups = sorted(g.items())
        return self._groups

    def __mul__(self, o):
        if not isinstance(o, Jet):
            return self.scale(o)
        return mul_trunc(self, o)

    def __rmul__(self, o):
        return self.scale(o)

    def __pow__(self, k: int) -> "Jet":
        out = Jet.const(self.n, 1, self.order)
        for _ in range(k):
            out = out * self
        return out

    def conj(self) -> "Jet":
        n = self.n
        return Jet(n, self.order, {_swap_key(k, n): (r, -i) for k, (r, i) in self._c.items()}, _trusted=True)

    def diff(self, index: int, barred: bool = False) -> "Jet":
        """Partial derivative in z_index (or zbar_index); order drops by one."""
        if not 1 <= index <= self.n:
            raise IndexError(f"variable index {index} outside 1..{self.n}")
        slot = index - 1 + (self.n if barred else 0)
        sh = SHIFT * slot
        one = 1 << sh
        out = {}
        new_order = self.order - 1
        for k, (r, i) in self._c.items():
            e = (k >> sh) & MASK
            if e == 0:
                continue
            nk = k - one
            if key_degree(nk) > new_order:
                continue
            out[nk] = (r * e, i * e)
        return Jet(self.n, new_order, out, _trusted=True)

    def homog(self, m: int) -> "Jet":
        """The total-degree-m part (exact polynomial, validity order kept)."""
        if m > self.order:
            raise OrderExceeded(f"degree {m} above validity order {self.order}")
        return Jet(self.n, self.order, {k: v for k, v in self._c.items() if key_degree(k) == m}, _trusted=True)

    def re_part(self) -> "Jet":
        return (self + self.conj()).scale(mpq(1, 2))

    def im_part(self) -> "Jet":
        return (self - self.conj()).scale(CNum(0, mpq(-1, 2)))

    def ord(self):
        """Least total degree carrying a nonzero coefficient; INFINITE for zero."""
        if not self._c:
            return INFINITE
        return min(key_degree(k) for k in self._c)

    def max_degree(self) -> int:
        return max((key_degree(k) for k in self._c), default=-1)

    def is_real(self) -> bool:
        n = self.n
        for k, (r, i) in self._c.items():
            r2, i2 = self._c.get(_swap_key(k, n), (_ZERO, _ZERO))
            if r2 != r or i2 != -i:
                return False
        return True

    def first_nonreal(self):
        """First monomial (graded-lex) violating coeff(b,a) = conj(coeff(a,b)), or None."""
        n = self.n
        for k in self.keys():
            r, i = self._c[k]
            r2, i2 = self._c.get(_swap_key(k, n), (_ZERO, _ZERO))
            if r2 != r or i2 != -i:
                return unpack(k, n)
        return None

    def permute(self, perm: Sequence[int]) -> "Jet":
        """Relabel variables: old variable perm[i] becomes new variable i (0-based)."""
        n = self.n
        if sorted(perm) != list(range(n)):
            raise ValueError("not a permutation")
        out = {}
        for k, v in self._c.items():
            a, b = unpack(k, n)
            out[pack([a[p] for p in perm], [b[p] for p in perm])] = v
        return Jet(n, self.order, out, _trusted=True)

    def substitute_linear(self, images: Sequence["Jet"]) -> "Jet":
        """Replace z_i and zbar_i by the given jets (2n images), truncating."""
        n = self.n
        if len(images) != 2 * n:
            raise ValueError("need 2n images")
        order = min([self.order] + [im.order for im in images])
        out = Jet(images[0].n, order)
        pows: dict[tuple[int, int], Jet] = {}

        def pw(slot, e):
            if (slot, e) not in pows:
                pows[(slot, e)] = images[slot] ** e if e else Jet.const(images[0].n, 1, order)
            return pows[(slot, e)]

        for k, (r, i) in self._c.items():
            a, b = unpack(k, n)
            t = Jet.const(images[0].n, CNum(r, i), order)
            for slot, e in enumerate(a + b):
                if e:
                    t = t * pw(slot, e)
            out = out + t
        return out

    # serialization

    def to_json(self) -> list[dict]:
        return [
            {"alpha": list(a), "beta": list(b), "re": rat_str(c.re), "im": rat_str(c.im)}
            for a, b, c in self.terms()
        ]

    @classmethod
    def from_json(cls, n: int, order: int, data: Iterable[Mapping]) -> "Jet":
        return cls.from_terms(
            n, order, ((tuple(t["alpha"]), tuple(t["beta"]), CNum(rat(t["re"]), rat(t.get("im", "0")))) for t in data)
        )

    def pretty(self, names: Sequence[str] | None = None) -> str:
        n = self.n
        names = names or [f"z{j + 1}" for j in range(n)]
        parts = []
        for a, b, c in self.terms():
            mono = []
            for j, e in enumerate(a):
                if e:
                    mono.append(names[j] + (f"^{e}" if e > 1 else ""))
            for j, e in enumerate(b):
                if e:
                    mono.append("conj(" + names[j] + ")" + (f"^{e}" if e > 1 else ""))
            parts.append(f"({c})" + ("*" + "*".join(mono) if mono else ""))
        return " + ".join(parts) if parts else "0"


def mul_trunc(a: Jet, b: Jet) -> Jet:
    """Product truncated at min(a.order, b.order)."""
    a._check(b)
    order = min(a.order, b.order)
    if not a._c or not b._c:
        return Jet(a.n, order)
    acc_r: dict[int, Rat] = {}
    acc_i: dict[int, Rat] = {}
    gb = b._grouped()
    for da, ta in a._grouped():
        if da > order:
            break
        for db, tb in gb:
            if da + db > order:
                break
            for ka, ar, ai in ta:
                for kb, br, bi in tb:
                    k = ka + kb
                    if ai:
                        if bi:
                            re = ar * br - ai * bi
                            im = ar * bi + ai * br
                        else:
                            re = ar * br
                            im = ai * br
                    elif bi:
                        re = ar * br
                        im = ar * bi
                    else:
                        re = ar * br
                        im = None
                    if re:
                        acc_r[k] = acc_r.get(k, _ZERO) + re
                    if im:
                        acc_i[k] = acc_i.get(k, _ZERO) + im
    out = {}
    for k in set(acc_r) | set(acc_i):
        r = acc_r.get(k, _ZERO)
        i = acc_i.get(k, _ZERO)
        if r or i:
            out[k] = (r, i)
    return Jet(a.n, order, out, _trusted=True)


def conj_series(a: Jet) -> Jet:
    return a.conj()


def diff(a: Jet, index: int, barred: bool = False) -> Jet:
    return a.diff(index, barred)


def homog(a: Jet, m: int) -> Jet:
    return a.homog(m)


def re_part(a: Jet) -> Jet:
    return a.re_part()


def im_part(a: Jet) -> Jet:
    return a.im_part()


def ord_(a: Jet):
    return a.ord()


def is_real(a: Jet) -> bool:
    return a.is_real()


class HoloCorrection:
    """Weighted-homogeneous holomorphic polynomial B(z, w) = sum b_(I,j) z^I w^j.

    Weights: wt(z_i) = 1, wt(w) = 2, so |I| + 2j = m0 for every term.
    """

    __slots__ = ("n", "m0", "terms")

    def __init__(self, n: int, m0: int, terms: Mapping | None = None):
        self.n = n
        self.m0 = m0
        t = {}
        for (I, j), c in (terms or {}).items():
            I = tuple(I)
            if len(I) != n or sum(I) + 2 * j != m0:
                raise ValueError(f"term {(I, j)} is not of weighted degree {m0}")
            c = CNum.of(c)
            if not c.is_zero():
                t[(I, j)] = c
        if m0 % 2 == 0:
            c = t.get(((0,) * n, m0 // 2))
            if c is not None and c.re != 0:
                raise ValueError("the pure w-power coefficient must have zero real part")
        self.terms = t

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], tuple(-x for x in kv[0][0])))

    def to_json(self) -> dict:
        return {
            "m0": self.m0,
            "terms": [{"I": list(I), "j": j, "re": rat_str(c.re), "im": rat_str(c.im)} for (I, j), c in self.sorted_terms()],
        }

    def __eq__(self, o) -> bool:
        return isinstance(o, HoloCorrection) and (self.n, self.m0, self.terms) == (o.n, o.m0, o.terms)

    def __repr__(self) -> str:
        return f"HoloCorrection(m0={self.m0}, terms={len(self.terms)})"


def substitute_w(B: HoloCorrection, W: Jet) -> Jet:
    """B(z, W) expanded and truncated at W.order."""
    n, order = W.n, W.order
    if B.n != n:
        raise VariableCountMismatch("correction and series differ in n")
    out = Jet(n, order)
    if not B.terms:
        return out
    maxj = max(j for (_, j) in B.terms)
    pows = [Jet.const(n, 1, order)]
    for _ in range(maxj):
        pows.append(pows[-1] * W)
    for (I, j), c in B.sorted_terms():
        zI = Jet.monomial(n, I, (0,) * n, c, order)
        out = out + zI * pows[j]
    return out
