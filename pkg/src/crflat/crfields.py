"""Tangent vector field coefficients, bracket and Gamma coefficients, and the
three eliminated non-minimality identities, all as truncated jets.

Indices j, k are 1-based and range over 1..n-1; the distinguished variable is z_n.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .algebra import CNum
from .manifold import ManifoldJet, NotApplicable
from .series import Jet

I_UNIT = CNum(0, 1)


class IndexOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class FieldCoeffs:
    A: Jet
    B: tuple  # B[j-1] = B_(j)
    C: tuple  # C[j-1] = C_(j)


class CRFields:
    """Lazily computed field, bracket and Gamma coefficients of one manifold."""

    def __init__(self, M: ManifoldJet):
        self.M = M
        self.n = M.n
        self._lam: dict[tuple[int, int], dict[int, Jet]] = {}
        self._cj: dict[str, Jet] = {}

    @cached_property
    def G(self) -> Jet:
        return self.M.G

    @cached_property
    def E(self) -> Jet:
        return self.M.E

    def dG(self, j):
        return self._d("G", j)

    def dE(self, j):
        return self._d("E", j)

    def _d(self, which, j):
        key = f"d{which}{j}"
        if key not in self._cj:
            f = self.G if which == "G" else self.E
            self._cj[key] = f.diff(j)
        return self._cj[key]

    @cached_property
    def fields(self) -> FieldCoeffs:
        n = self.n
        Gn, En = self.dG(n), self.dE(n)
        A = Gn - En.scale(I_UNIT)
        B = tuple(self.dG(j) - self.dE(j).scale(I_UNIT) for j in range(1, n))
        C = tuple((Gn * self.dE(j) - self.dG(j) * En).scale(CNum(0, 2)) for j in range(1, n))
        return FieldCoeffs(A, B, C)

    def A(self) -> Jet:
        return self.fields.A

    def B(self, j) -> Jet:
        return self.fields.B[j - 1]

    def C(self, j) -> Jet:
        return self.fields.C[j - 1]

    def conj(self, name: str, j: int | None = None) -> Jet:
        key = f"bar{name}{j}"
        if key not in self._cj:
            f = self.A() if name == "A" else (self.B(j) if name == "B" else self.C(j))
            self._cj[key] = f.conj()
        return self._cj[key]

    def _check_jk(self, j, k):
        for x in (j, k):
            if not 1 <= x <= self.n - 1:
                raise IndexOutOfRange(f"index {x} outside 1..{self.n - 1}")

    def bracket(self, j: int, k: int) -> dict[int, Jet]:
        """The six coefficients lambda_(i j k), i = 1..6, of [L_j, conj(L_k)]."""
        self._check_jk(j, k)
        if (j, k) in self._lam:
            return self._lam[(j, k)]
        n = self.n
        A, Bj, Cj = self.A(), self.B(j), self.C(j)
        Ab, Bkb, Ckb = self.conj("A"), self.conj("B", k), self.conj("C", k)
        lam = {
            1: A * Ab.diff(j) - Bj * Ab.diff(n),
            2: -(A * Bkb.diff(j)) + Bj * Bkb.diff(n),
            3: A * Ckb.diff(j) - Bj * Ckb.diff(n),
            4: -(Ab * A.diff(k, True)) + Bkb * A.diff(n, True),
            5: Ab * Bj.diff(k, True) - Bkb * Bj.diff(n, True),
            6: -(Ab * Cj.diff(k, True)) + Bkb * Cj.diff(n, True),
        }
        self._lam[(j, k)] = lam
        return lam

    @cached_property
    def gamma(self) -> tuple:
        """Gamma_(1)..Gamma_(6) built from the lambda_(i11)."""
        n = self.n
        A, B1, C1 = self.A(), self.B(1), self.C(1)
        lam = self.bracket(1, 1)

        def lead(f):
            return A * f.diff(1) - B1 * f.diff(n)

        g1 = lead(lam[1])
        g2 = lead(lam[2])
        g3 = lead(lam[3])
        g4 = (
            lead(lam[4])
            - lam[1] * A.diff(1, True)
            - lam[2] * A.diff(n, True)
            - lam[4] * A.diff(1)
            - lam[5] * A.diff(n)
        )
        g5 = (
            lead(lam[5])
            + lam[1] * B1.diff(1, True)
            + lam[2] * B1.diff(n, True)
            + lam[4] * B1.diff(1)
            + lam[5] * B1.diff(n)
        )
        g6 = (
            lead(lam[6])
            - lam[1] * C1.diff(1, True)
            - lam[2] * C1.diff(n, True)
            - lam[4] * C1.diff(1)
            - lam[5] * C1.diff(n)
        )
        return (g1, g2, g3, g4, g5, g6)

    def bracket_residual(self, j: int, k: int) -> Jet:
        """(Ab l2jk + Bkb l1jk)(A l611 - C1 l411) - (Ab l211 + B1b l111)(A l6jk - Cj l4jk)."""
        self._check_jk(j, k)
        A, Ab = self.A(), self.conj("A")
        Bkb, B1b = self.conj("B", k), self.conj("B", 1)
        C1, Cj = self.C(1), self.C(j)
        ljk = self.bracket(j, k)
        l11 = self.bracket(1, 1)
        left = (Ab * ljk[2] + Bkb * ljk[1]) * (A * l11[6] - C1 * l11[4])
        right = (Ab * l11[2] + B1b * l11[1]) * (A * ljk[6] - Cj * ljk[4])
        return left - right

    @cached_property
    def residual_III(self) -> Jet:
        """(Ab G2 + G1 B1b)(Ab l311 - l111 C1b) - (Ab G3 - G1 C1b)(Ab l211 + l111 B1b)."""
        Ab, B1b, C1b = self.conj("A"), self.conj("B", 1), self.conj("C", 1)
        g = self.gamma
        l11 = self.bracket(1, 1)
        left = (Ab * g[1] + g[0] * B1b) * (Ab * l11[3] - l11[1] * C1b)
        right = (Ab * g[2] - g[0] * C1b) * (Ab * l11[2] + l11[1] * B1b)
        return left - right


_CACHE: dict[int, tuple] = {}


def _fields_of(M: ManifoldJet) -> CRFields:
    # small identity cache so repeated calls on one manifold reuse work
    hit = _CACHE.get(id(M))
    if hit is not None and hit[0] is M:
        return hit[1]
    f = CRFields(M)
    if len(_CACHE) > 16:
        _CACHE.clear()
    _CACHE[id(M)] = (M, f)
    return f


def field_coeffs(M: ManifoldJet) -> FieldCoeffs:
    return _fields_of(M).fields


def bracket_coeffs(M: ManifoldJet, j: int, k: int) -> dict[int, Jet]:
    return _fields_of(M).bracket(j, k)


def gamma_coeffs(M: ManifoldJet) -> tuple:
    return _fields_of(M).gamma


def residual_I(M: ManifoldJet, j: int, k: int):
    if M.n == 2:
        return NotApplicable("no indices 2..n-1 when n = 2")
    for x in (j, k):
        if not 2 <= x <= M.n - 1:
            raise IndexOutOfRange(f"index {x} outside 2..{M.n - 1}")
    return _fields_of(M).bracket_residual(j, k)


def residual_II(M: ManifoldJet, k: int):
    """The same identity as residual_I with j = 1."""
    if M.n == 2:
        return NotApplicable("no indices 2..n-1 when n = 2")
    if not 2 <= k <= M.n - 1:
        raise IndexOutOfRange(f"index {k} outside 2..{M.n - 1}")
    return _fields_of(M).bracket_residual(1, k)


def residual_III(M: ManifoldJet) -> Jet:
    return _fields_of(M).residual_III


def residual_order(M: ManifoldJet) -> int:
    """Guaranteed validity order of every residual (three derivatives deep)."""
    return M.order - 3


@dataclass(frozen=True)
class NonminimalityVerdict:
    nonminimal: bool
    upto: int
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.nonminimal


def all_residuals(M: ManifoldJet) -> list[tuple[str, Jet]]:
    out = []
    n = M.n
    for k in range(2, n):
        out.append((f"II(k={k})", residual_II(M, k)))
    for j in range(2, n):
        for k in range(2, n):
            out.append((f"I(j={j},k={k})", residual_I(M, j, k)))
    out.append(("III", residual_III(M)))
    return out


def is_formally_nonminimal(M: ManifoldJet, upto: int) -> NonminimalityVerdict:
    """True iff every applicable residual vanishes through degree ``upto``."""
    if upto > residual_order(M):
        raise ValueError(f"upto {upto} exceeds residual validity order {residual_order(M)}")
    for name, r in all_residuals(M):
        t = r.truncate(upto)
        if not t.is_zero():
            a, b, c = next(t.terms())
            return NonminimalityVerdict(False, upto, {"residual": name, "alpha": list(a), "beta": list(b), "coeff": c.to_json()})
    return NonminimalityVerdict(True, upto)


def slice_residual_n2(M: ManifoldJet):
    """Psi~_2 (zb1 + 2 l1 z1) - Psi~_1 (zb2 + 2 l2 z2) with Psi~ = p - iE."""
    if M.n != 2:
        return NotApplicable("defined for n = 2 only")
    psi = M.p - M.E.scale(I_UNIT)
    order = psi.order
    l1, l2 = M.lam
    f1 = Jet.zbar(2, 1, order) + Jet.z(2, 1, order).scale(2 * l1)
    f2 = Jet.zbar(2, 2, order) + Jet.z(2, 2, order).scale(2 * l2)
    return psi.diff(2) * f1 - psi.diff(1) * f2


def annihilation_residuals(M: ManifoldJet, j: int) -> tuple[Jet, Jet]:
    """L_j applied to -w + G + iE and to its conjugate; both must vanish."""
    f = _fields_of(M)
    n = M.n
    A, Bj, Cj = f.A(), f.B(j), f.C(j)
    D = M.G + M.E.scale(I_UNIT)
    Db = D.conj()
    r1 = A * D.diff(j) - Bj * D.diff(n) - Cj
    r2 = A * Db.diff(j) - Bj * Db.diff(n)
    return r1, r2
