"""Structured binomial matrices D, S, R+, R-, N, T and their exact determinants."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from gmpy2 import mpq

from .algebra import QMatrix, Rat, UniPoly, det_exact, det_poly, rat, rat_str

KINDS = ("D", "S", "Rplus", "Rminus", "N", "T")
XI = UniPoly.x()


class BadSize(ValueError):
    pass


class ZeroXi(ValueError):
    pass


def binom(a: int, b: int) -> int:
    if b < 0 or a < 0 or b > a:
        return 0
    return comb(a, b)


def _p(k: int) -> UniPoly:
    """xi^k for k >= 0."""
    if k < 0:
        raise ValueError(f"negative xi power {k}")
    return UniPoly.monomial(1, k)


def _neg_xi_pow(k: int) -> UniPoly:
    return _p(k) if k % 2 == 0 else -_p(k)


@dataclass(frozen=True)
class StructuredMatrix:
    kind: str
    mhat: int
    matrix: QMatrix

    @property
    def size(self) -> int:
        return self.matrix.rows

    def evaluate(self, xi0) -> QMatrix:
        return self.matrix.evaluate(rat(xi0))


def _entry_R(mh: int, i: int, j: int, sign: int) -> UniPoly:
    b = 2 * i - 1
    if j <= mh - 1:
        first = UniPoly([binom(4 * mh - 2 - j, b)]) - XI * XI * binom(4 * mh - 3 - j, b)
        second = UniPoly([binom(2 * mh - 1 + j, b)]) - XI * XI * binom(2 * mh - 2 + j, b)
        return first + _neg_xi_pow(2 * mh - 1 - 2 * j) * second * sign
    first = UniPoly([(mh - 1 + j) * binom(5 * mh - 2 - j, b)])
    second = UniPoly([(5 * mh - 2 - j) * binom(mh - 1 + j, b)])
    return first + _neg_xi_pow(4 * mh - 1 - 2 * j) * second * sign


def _entry_N(mh: int, i: int, j: int) -> UniPoly:
    b = 2 * i - 1
    if j <= mh - 2:
        first = UniPoly([binom(4 * mh - 2 - j, b)]) - XI * XI * binom(4 * mh - 3 - j, b)
        second = UniPoly([binom(2 * mh + j, b)]) - XI * XI * binom(2 * mh - 1 + j, b)
        return first + _p(2 * mh - 2 - 2 * j) * second
    if j == mh - 1:
        return UniPoly([binom(3 * mh - 1, b)]) - XI * XI * binom(3 * mh - 2, b)
    if j <= 2 * mh - 2:
        first = UniPoly([(mh + j) * binom(5 * mh - 2 - j, b)])
        return first + _p(4 * mh - 2 - 2 * j) * ((5 * mh - 2 - j) * binom(mh + j, b))
    return UniPoly([(3 * mh - 1) * binom(3 * mh - 1, b)])


def _entry_T(mh: int, i: int, j: int) -> UniPoly:
    b = 2 * i + 1
    if j <= mh - 1:
        first = UniPoly([binom(4 * mh - 1 - j, b)]) - XI * XI * binom(4 * mh - 2 - j, b)
        second = UniPoly([binom(2 * mh - 1 + j, b)]) - XI * XI * binom(2 * mh - 2 + j, b)
        return first - _p(2 * mh - 2 * j) * second
    first = UniPoly([(mh + j) * binom(5 * mh - 2 - j, b)])
    return first - _p(4 * mh - 2 - 2 * j) * ((5 * mh - 2 - j) * binom(mh + j, b))


def build_matrix(kind: str, mhat: int) -> StructuredMatrix:
    if kind not in KINDS:
        raise BadSize(f"unknown matrix kind {kind!r}")
    lo = 1 if kind in ("D", "S") else 2
    if not isinstance(mhat, int) or mhat < lo:
        raise BadSize(f"{kind} needs mhat >= {lo}, got {mhat}")
    mh = mhat
    if kind == "D":
        rows = [[UniPoly([binom(2 * mh - j, 2 * i - 2)]) for j in range(1, mh + 1)] for i in range(1, mh + 1)]
    elif kind == "S":
        rows = [[UniPoly([binom(2 * mh + 1 - j, 2 * i - 1)]) for j in range(1, mh + 1)] for i in range(1, mh + 1)]
    elif kind in ("Rplus", "Rminus"):
        sign = 1 if kind == "Rplus" else -1
        k = 2 * mh - 1
        rows = [[_entry_R(mh, i, j, sign) for j in range(1, k + 1)] for i in range(1, k + 1)]
    elif kind == "N":
        k = 2 * mh - 1
        rows = [[_entry_N(mh, i, j) for j in range(1, k + 1)] for i in range(1, k + 1)]
    else:
        k = 2 * mh - 2
        rows = [[_entry_T(mh, i, j) for j in range(1, k + 1)] for i in range(1, k + 1)]
    return StructuredMatrix(kind, mh, QMatrix(rows))


def det_structured(kind: str, mhat: int):
    """Exact determinant: a rational for D and S, a polynomial in xi otherwise."""
    M = build_matrix(kind, mhat)
    if kind in ("D", "S"):
        return det_exact(M.matrix.evaluate(0))
    return det_poly(M.matrix)


@dataclass(frozen=True)
class Factored:
    """det = c * xi^a * (1 - xi)^b * (1 + xi)^d * cofactor, cofactor = 1 when fully split."""

    c: Rat
    xi_exp: int
    one_minus_xi_exp: int
    one_plus_xi_exp: int
    cofactor: UniPoly

    @property
    def is_monomial_form(self) -> bool:
        return self.cofactor.degree <= 0

    def to_json(self) -> dict:
        d = {
            "c": rat_str(self.c),
            "xi_exp": self.xi_exp,
            "one_minus_xi_exp": self.one_minus_xi_exp,
            "one_plus_xi_exp": self.one_plus_xi_exp,
        }
        if not self.is_monomial_form:
            d["cofactor"] = str(self.cofactor)
        return d


def factor_det(p: UniPoly) -> Factored:
    if p.is_zero():
        raise ZeroDivisionError("zero determinant has no factorization")
    a = p.valuation_at(0)
    b = p.valuation_at(1)
    d = p.valuation_at(-1)
    rest = p / (_p(a) * UniPoly([1, -1]) ** b * UniPoly([1, 1]) ** d)
    c = rest.coeffs[-1]
    return Factored(c, a, b, d, rest / c)


def det_report(kind: str, mhat: int) -> dict:
    det = det_structured(kind, mhat)
    poly = det if isinstance(det, UniPoly) else UniPoly([det])
    report = {"kind": kind, "mhat": mhat, "det": str(poly)}
    if poly.is_zero():
        report["factored"] = None
    else:
        report["factored"] = factor_det(poly).to_json()
    return report


@dataclass(frozen=True)
class ClosedFormReport:
    kind: str
    mhat: int
    C1: Rat | None
    xi_exp: int
    linear_exp: int
    exponents_ok: bool
    remainder: UniPoly | None

    @property
    def ok(self) -> bool:
        return self.exponents_ok and self.C1 is not None and self.C1 != 0

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "mhat": self.mhat,
            "C1": None if self.C1 is None else rat_str(self.C1),
            "xi_exp": self.xi_exp,
            "linear_exp": self.linear_exp,
            "exponents_ok": self.exponents_ok,
            "remainder": None if self.remainder is None else str(self.remainder),
        }


def verify_closed_form_R(mhat: int) -> tuple[ClosedFormReport, ClosedFormReport]:
    """Divide det R+ by xi^((m-1)^2)(1-xi)^(3m-2) and det R- by xi^((m-1)^2)(1+xi)^(3m-2)."""
    if mhat < 2:
        raise BadSize("closed form stated for mhat >= 2")
    a = (mhat - 1) ** 2
    b = 3 * mhat - 2
    out = []
    for kind, lin in (("Rplus", UniPoly([1, -1])), ("Rminus", UniPoly([1, 1]))):
        det = det_poly(build_matrix(kind, mhat).matrix)
        q, r = det.divmod(_p(a) * lin ** b)
        if r.is_zero() and q.degree == 0:
            out.append(ClosedFormReport(kind, mhat, q.coeffs[0], a, b, True, None))
        else:
            # report the leftover so a failure is inspectable
            out.append(ClosedFormReport(kind, mhat, None, a, b, False, r if not r.is_zero() else q))
    return out[0], out[1]


def verify_nonsingular(kind: str, mhat: int, xi0) -> bool:
    if kind not in ("N", "T"):
        raise BadSize("nonsingularity at a point is checked for N and T")
    xi0 = rat(xi0)
    if xi0 == 0:
        raise ZeroXi("xi0 must be nonzero")
    return det_exact(build_matrix(kind, mhat).evaluate(xi0)) != 0


def alpha_identity(mhat: int, k0: int) -> UniPoly:
    """LHS - RHS of the alpha identity as a polynomial in alpha (printed with variable xi)."""
    if not 0 <= k0 <= (3 * mhat) // 2:
        raise BadSize(f"k0 must lie in 0..{(3 * mhat) // 2}")
    al = UniPoly.x()
    am1 = al - 1
    lhs = al ** (3 * mhat - 2) - al
    for k in range(1, k0 + 1):
        lhs = lhs - (am1 * al) ** k * (UniPoly([binom(3 * mhat - 3 - k, k - 1)]) + al * binom(3 * mhat - 3 - k, k))
    s = UniPoly()
    for t in range(k0, 3 * mhat - 4 - k0 + 1):
        s = s + UniPoly.monomial(binom(t, k0), 3 * mhat - 4 - k0 - t)
    rhs = (am1 * al) ** (k0 + 1) * s
    return lhs - rhs


def s_recursion_check(mhat: int) -> dict:
    """Check the column-reduction of S: det S_check = (-1)^(m+1) det S^(2m-2) and the scaling law."""
    if mhat < 2:
        raise BadSize("recursion needs mhat >= 2")
    mh = mhat
    S = build_matrix("S", mh).matrix.evaluate(0)
    hat = [[mpq(2 * i - 1, 2 * mh - j + 1) * S[i - 1, j - 1] for j in range(1, mh + 1)] for i in range(1, mh + 1)]
    check = [[hat[i][j] - hat[i][j + 1] if j < mh - 1 else hat[i][j] for j in range(mh)] for i in range(mh)]
    D = build_matrix("D", mh).matrix.evaluate(0)
    hat_is_D = all(hat[i][j] == D[i, j] for i in range(mh) for j in range(mh))
    d_check = det_exact(QMatrix(check))
    d_prev = det_exact(build_matrix("S", mh - 1).matrix.evaluate(0))
    recursion_ok = d_check == (-1) ** (mh + 1) * d_prev
    d_S = det_exact(S)
    scale = mpq(1)
    for k in range(1, mh + 1):
        scale *= mpq(2 * mh - k + 1, 2 * k - 1)
    scaling_ok = d_S == scale * det_exact(QMatrix(hat))
    return {"mhat": mh, "hat_is_D": hat_is_D, "recursion_ok": recursion_ok, "scaling_ok": scaling_ok}
