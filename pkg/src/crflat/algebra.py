"""Exact rationals, complex rationals, polynomials in one variable and exact linear algebra.

Rationals are ``gmpy2.mpq`` values.  Every routine here is exact; pivoting is
always "leftmost nonzero column, topmost nonzero row" so results do not depend
on anything but the input.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Union

from gmpy2 import mpq

Rat = type(mpq(0))

ZERO = mpq(0)
ONE = mpq(1)


class NonSquare(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class NoSolution:
    """Returned by :func:`solve_linear` for an inconsistent system."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "NoSolution"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, NoSolution)

    def __hash__(self) -> int:
        return hash("NoSolution")


def rat(x) -> Rat:
    """Coerce int, str ("p/q"), Fraction or mpq to an exact rational."""
    if isinstance(x, Rat):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass a string like '1/4'")
    if isinstance(x, str):
        return mpq(x.strip())
    return mpq(x)


def rat_str(x: Rat) -> str:
    """Serialize as "p/q", or "p" when the denominator is 1."""
    return str(mpq(x))


class CNum:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", rat(re))
        object.__setattr__(self, "im", rat(im))

    def __setattr__(self, name, value):
        raise AttributeError("CNum is immutable")

    @classmethod
    def of(cls, x) -> "CNum":
        if isinstance(x, CNum):
            return x
        if isinstance(x, complex):
            raise TypeError("floating complex values are not accepted")
        return cls(x, 0)

    def __add__(self, o):
        o = CNum.of(o)
        return CNum(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = CNum.of(o)
        return CNum(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return CNum.of(o) - self

    def __neg__(self):
        return CNum(-self.re, -self.im)

    def __mul__(self, o):
        o = CNum.of(o)
        return CNum(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = CNum.of(o)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by complex zero")
        return CNum((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)

    def __rtruediv__(self, o):
        return CNum.of(o) / self

    def __pow__(self, k: int):
        if k < 0:
            return CNum(1) / (self ** (-k))
        out, base = CNum(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "CNum":
        return CNum(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, o) -> bool:
        if isinstance(o, (int, Rat)):
            return self.im == 0 and self.re == o
        if not isinstance(o, CNum):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __repr__(self) -> str:
        return f"CNum({rat_str(self.re)}, {rat_str(self.im)})"

    def __str__(self) -> str:
        if self.im == 0:
            return rat_str(self.re)
        if self.re == 0:
            return f"{rat_str(self.im)}i"
        sign = "+" if self.im > 0 else "-"
        return f"{rat_str(self.re)}{sign}{rat_str(abs(self.im))}i"

    def to_json(self) -> dict:
        return {"re": rat_str(self.re), "im": rat_str(self.im)}

    @classmethod
    def from_json(cls, d: dict) -> "CNum":
        return cls(rat(d["re"]), rat(d["im"]))


I = CNum(0, 1)


class UniPoly:
    """Polynomial in one variable (written ξ) with rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("UniPoly is immutable")

    @classmethod
    def of(cls, x) -> "UniPoly":
        if isinstance(x, UniPoly):
            return x
        return cls([x])

    @classmethod
    def x(cls) -> "UniPoly":
        return cls([0, 1])

    @classmethod
    def monomial(cls, c, k: int) -> "UniPoly":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __add__(self, o):
        o = UniPoly.of(o)
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        return UniPoly([a[i] + (b[i] if i < len(b) else 0) for i in range(len(a))])

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, o):
        return self + (-UniPoly.of(o))

    def __rsub__(self, o):
        return UniPoly.of(o) - self

    def __mul__(self, o):
        o = UniPoly.of(o)
        if not self.coeffs or not o.coeffs:
            return UniPoly()
        out = [ZERO] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out, base = UniPoly([1]), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def divmod(self, o) -> tuple["UniPoly", "UniPoly"]:
        o = UniPoly.of(o)
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(o.coeffs)
        if dq < 0:
            return UniPoly(), self
        quot = [ZERO] * (dq + 1)
        lead = o.coeffs[-1]
        for k in range(dq, -1, -1):
            c = rem[k + len(o.coeffs) - 1] / lead
            quot[k] = c
            if c:
                for i, b in enumerate(o.coeffs):
                    rem[k + i] -= c * b
        return UniPoly(quot), UniPoly(rem[: len(o.coeffs) - 1])

    def __truediv__(self, o):
        """Exact division; raises if the remainder is nonzero."""
        if not isinstance(o, UniPoly):
            c = rat(o)
            return UniPoly([a / c for a in self.coeffs])
        q, r = self.divmod(o)
        if r:
            raise ArithmeticError("inexact polynomial division")
        return q

    def __call__(self, x):
        acc = ZERO if not isinstance(x, CNum) else CNum(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def valuation_at(self, root) -> int:
        """Multiplicity of ``root`` as a zero (the zero polynomial raises)."""
        if self.is_zero():
            raise ValueError("zero polynomial has infinite multiplicity")
        lin = UniPoly([-rat(root), 1])
        k, p = 0, self
        while True:
            q, r = p.divmod(lin)
            if r:
                return k
            k, p = k + 1, q

    def __eq__(self, o) -> bool:
        if isinstance(o, (int, Rat)):
            o = UniPoly([o])
        if not isinstance(o, UniPoly):
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"UniPoly({self})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if k == 0:
                body = rat_str(a)
            else:
                mono = "xi" if k == 1 else f"xi^{k}"
                body = mono if a == 1 else f"{rat_str(a)}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


Scalar = Union[Rat, CNum, UniPoly]


def _zero_like(x):
    if isinstance(x, CNum):
        return CNum(0)
    if isinstance(x, UniPoly):
        return UniPoly()
    return ZERO


def _is_zero(x) -> bool:
    if isinstance(x, (CNum, UniPoly)):
        return x.is_zero()
    return x == 0


class QMatrix:
    """Dense matrix over Rat, CNum or UniPoly."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence], cols: int | None = None):
        grid = tuple(tuple(r) for r in entries)
        ncols = len(grid[0]) if grid else (cols or 0)
        for r in grid:
            if len(r) != ncols:
                raise DimensionMismatch("ragged matrix rows")
        object.__setattr__(self, "entries", grid)
        object.__setattr__(self, "rows", len(grid))
        object.__setattr__(self, "cols", ncols)

    def __setattr__(self, name, value):
        raise AttributeError("QMatrix is immutable")

    @classmethod
    def of_rats(cls, entries, cols: int | None = None) -> "QMatrix":
        return cls([[rat(x) for x in r] for r in entries], cols)

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, o: "QMatrix") -> "QMatrix":
        if self.cols != o.rows:
            raise DimensionMismatch("inner dimensions differ")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(o.cols):
                acc = _zero_like(self.entries[i][0]) if self.cols else ZERO
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * o.entries[k][j]
                row.append(acc)
            out.append(row)
        return QMatrix(out, o.cols)

    def apply(self, v: Sequence) -> list:
        if len(v) != self.cols:
            raise DimensionMismatch("vector length differs from column count")
        out = []
        for r in self.entries:
            acc = ZERO
            for a, x in zip(r, v):
                if not _is_zero(a) and not _is_zero(x):
                    acc = a * x + acc
            out.append(acc)
        return out

    def map_entries(self, f) -> "QMatrix":
        return QMatrix([[f(x) for x in r] for r in self.entries], self.cols)

    def evaluate(self, x0) -> "QMatrix":
        """Evaluate a polynomial matrix at a rational point."""
        return self.map_entries(lambda p: UniPoly.of(p)(rat(x0)))

    def __eq__(self, o) -> bool:
        return isinstance(o, QMatrix) and self.entries == o.entries and self.cols == o.cols

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        return f"QMatrix({self.rows}x{self.cols})"


def _bareiss(a: list[list], one):
    """Fraction-free elimination in place; returns the determinant."""
    n = len(a)
    sign = 1
    prev = one
    for k in range(n - 1):
        if _is_zero(a[k][k]):
            for i in range(k + 1, n):
                if not _is_zero(a[i][k]):
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return _zero_like(one)
        piv = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            for j in range(k + 1, n):
                a[i][j] = (piv * a[i][j] - aik * a[k][j]) / prev
            a[i][k] = _zero_like(one)
        prev = piv
    det = a[n - 1][n - 1]
    return -det if sign < 0 else det


def det_exact(m: QMatrix):
    """Determinant of a matrix over Rat or CNum."""
    if m.rows != m.cols:
        raise NonSquare(f"{m.rows}x{m.cols} matrix has no determinant")
    if m.rows == 0:
        return ONE
    one = CNum(1) if any(isinstance(x, CNum) for r in m.entries for x in r) else ONE
    a = [[(CNum.of(x) if isinstance(one, CNum) else rat(x)) for x in r] for r in m.entries]
    return _bareiss(a, one)


def det_poly(m: QMatrix) -> UniPoly:
    """Determinant of a matrix over the polynomial ring in ξ."""
    if m.rows != m.cols:
        raise NonSquare(f"{m.rows}x{m.cols} matrix has no determinant")
    if m.rows == 0:
        return UniPoly([1])
    a = [[UniPoly.of(x) for x in r] for r in m.entries]
    return _bareiss(a, UniPoly([1]))


class Echelon:
    """Incrementally maintained reduced row echelon form over Rat or CNum.

    Rows are sparse dicts column -> value.  Pivot of a stored row is its
    leftmost nonzero column.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict[int, dict] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def full(self) -> bool:
        return len(self.pivots) == self.ncols

    def _reduce(self, row: dict) -> dict:
        row = {c: v for c, v in row.items() if not _is_zero(v)}
        for c in sorted(set(row) & set(self.pivots)):
            v = row[c]
            for cc, pv in self.pivots[c].items():
                nv = row.get(cc, ZERO) - v * pv
                if _is_zero(nv):
                    row.pop(cc, None)
                else:
                    row[cc] = nv
        return row

    def add_row(self, row: dict) -> bool:
        """Insert a row; returns True when it raised the rank."""
        # stored rows vanish on every other pivot column, so one pass suffices
        row = self._reduce(row)
        if not row:
            return False
        p = min(row)
        inv = row[p]
        row = {c: v / inv for c, v in row.items()}
        for other in self.pivots.values():
            v = other.get(p)
            if v is not None and not _is_zero(v):
                for cc, pv in row.items():
                    nv = other.get(cc, ZERO) - v * pv
                    if _is_zero(nv):
                        other.pop(cc, None)
                    else:
                        other[cc] = nv
        self.pivots[p] = row
        return True

    def kernel(self) -> list[list]:
        free = [c for c in range(self.ncols) if c not in self.pivots]
        basis = []
        for f in free:
            v = [ZERO] * self.ncols
            v[f] = ONE
            for p, row in self.pivots.items():
                x = row.get(f)
                if x is not None:
                    v[p] = -x
            basis.append(v)
        return basis


def _rows_as_dicts(m: QMatrix) -> list[dict]:
    return [{j: x for j, x in enumerate(r) if not _is_zero(x)} for r in m.entries]


def rank(m: QMatrix) -> int:
    e = Echelon(m.cols)
    for r in _rows_as_dicts(m):
        e.add_row(r)
    return e.rank


def kernel_basis(m: QMatrix) -> list[list]:
    """Basis of the right null space, one vector per free column."""
    e = Echelon(m.cols)
    for r in _rows_as_dicts(m):
        e.add_row(r)
    return e.kernel()


def solve_linear(m: QMatrix, rhs: Sequence):
    """One solution of m x = rhs with free variables set to zero, or NoSolution."""
    if len(rhs) != m.rows:
        raise DimensionMismatch("rhs length differs from row count")
    n = m.cols
    e = Echelon(n + 1)
    for r, b in zip(_rows_as_dicts(m), rhs):
        row = dict(r)
        if not _is_zero(b):
            row[n] = b
        e.add_row(row)
    if n in e.pivots:
        return NoSolution()
    x = [ZERO] * n
    for p, row in e.pivots.items():
        x[p] = row.get(n, ZERO)
    return x
