"""Leading-order objects built from H = E^(m): Phi, Psi, the reduced system,
the (z_1, z_n) slice coefficient tables, their recursions and k-weighted sums.
"""

from __future__ import annotations

from itertools import product
from math import comb
from typing import Sequence

from .algebra import CNum, rat
from .manifold import w_jet
from .series import Jet

I_UNIT = CNum(0, 1)
_C0 = CNum(0)


class BadIndexTotal(ValueError):
    pass


class PremiseViolated(ValueError):
    def __init__(self, kind: str, index: tuple):
        super().__init__(f"premise fails: {kind}{list(index)} is nonzero")
        self.kind = kind
        self.index = index


def _work(H: Jet) -> tuple[Jet, int]:
    m = H.ord()
    if m == float("inf"):
        m = 0
    # results have degree <= m + 3 and at most three derivatives are taken,
    # so this working order keeps every coefficient exact
    order = max(H.max_degree(), m) + 8
    return Jet(H.n, order, H.raw(), _trusted=True), m


def _ws(n: int, lam: Sequence, order: int) -> list[Jet]:
    lam = [rat(x) for x in lam]
    return [w_jet(n, lam, j, order) for j in range(1, n + 1)]


def phi_of(H: Jet, j: int, lam: Sequence) -> Jet:
    """Phi_(j) = w_n H_{jbar} - w_j H_{nbar}."""
    Hw, _ = _work(H)
    n = H.n
    w = _ws(n, lam, Hw.order)
    return (w[n - 1] * Hw.diff(j, True) - w[j - 1] * Hw.diff(n, True)).truncate(Hw.order - 1)


def psi_of(H: Jet, j: int, k: int, lam: Sequence) -> Jet:
    """Psi_(jk) = w_n wb_n (Phi_j)_k - w_n wb_k (Phi_j)_n + wb_k Phi_j."""
    n = H.n
    phi = phi_of(H, j, lam)
    w = _ws(n, lam, phi.order)
    wb = [x.conj() for x in w]
    return w[n - 1] * wb[n - 1] * phi.diff(k) - w[n - 1] * wb[k - 1] * phi.diff(n) + wb[k - 1] * phi


def addnew_residuals(H: Jet, lam: Sequence) -> list[tuple[str, Jet]]:
    """Residuals of the reduced system, named; the (j,k) family is empty when n = 2."""
    n = H.n
    lam = [rat(x) for x in lam]
    psis: dict[tuple[int, int], Jet] = {}

    def psi(j, k):
        if (j, k) not in psis:
            psis[(j, k)] = psi_of(H, j, k, lam)
        return psis[(j, k)]

    P = psi(1, 1)
    order = P.order
    w = _ws(n, lam, order)
    wb = [x.conj() for x in w]
    wn2 = w[n - 1] * wb[n - 1]
    w12 = w[0] * wb[0]
    out = []
    Pb = P.conj()
    for j in [1] + list(range(2, n)):
        for k in range(2, n):
            lhs = (wb[j - 1] * w[k - 1] + (wn2 if j == k else Jet(n, order))) * Pb
            rhs = (wn2 + w12) * psi(j, k).conj()
            out.append((f"jk({j},{k})", lhs - rhs))
    xi, eta = 2 * lam[n - 1], 2 * lam[0]
    r3 = (wn2 + w12) * (wb[n - 1] * P.diff(1) - wb[0] * P.diff(n)) + (
        (w[n - 1] * wb[0]).scale(xi) - (w[0] * wb[n - 1]).scale(eta)
    ) * P
    out.append(("three", r3))
    return out


def residual_three(H: Jet, lam: Sequence) -> Jet:
    return addnew_residuals(H, lam)[-1][1]


class CoeffTable:
    """Slice coefficients X_[tsrh] = coefficient of z_n^t z_1^s zb_n^r zb_1^h.

    ``total`` is the index sum (m for H and Phi, m + 1 for Psi).  Reads with
    a negative index, or an index of the wrong total, return zero.
    """

    def __init__(self, kind: str, m: int, total: int, values: dict, xi, eta):
        self.kind = kind
        self.m = m
        self.total = total
        self.values = {k: v for k, v in values.items() if not v.is_zero()}
        self.xi = rat(xi)
        self.eta = rat(eta)
        self.theta = 1 - self.xi * self.xi
        self._derived: dict[str, "CoeffTable"] = {}

    def __getitem__(self, idx) -> CNum:
        t, s, r, h = idx
        if t < 0 or s < 0 or r < 0 or h < 0 or t + s + r + h != self.total:
            return _C0
        return self.values.get((t, s, r, h), _C0)

    def indices(self):
        T = self.total
        for t in range(T + 1):
            for s in range(T + 1 - t):
                for r in range(T + 1 - t - s):
                    yield (t, s, r, T - t - s - r)

    def is_zero(self) -> bool:
        return not self.values

    def __repr__(self) -> str:
        return f"CoeffTable({self.kind}, m={self.m}, nonzero={len(self.values)})"


def slice_table(f: Jet, kind: str, m: int, total: int, lam: Sequence) -> CoeffTable:
    n = f.n
    vals = {}
    for a, b, c in f.terms():
        if sum(a) + sum(b) != total:
            continue
        if any(a[i] or b[i] for i in range(1, n - 1)):
            continue
        vals[(a[n - 1], a[0], b[n - 1], b[0])] = c
    lam = [rat(x) for x in lam]
    return CoeffTable(kind, m, total, vals, 2 * lam[n - 1], 2 * lam[0])


def h_table(H: Jet, lam: Sequence) -> CoeffTable:
    m = H.ord()
    if m == float("inf"):
        raise ValueError("H is zero; its degree is undetermined (use h_table_of_degree)")
    return slice_table(H, "H", m, m, lam)


def h_table_of_degree(H: Jet, m: int, lam: Sequence) -> CoeffTable:
    return slice_table(H, "H", m, m, lam)


def phi_coeff(Ht: CoeffTable, t: int, s: int, r: int, h: int) -> CNum:
    """Phi_[tsrh] from the H table by the closed recursion."""
    if t + s + r + h != Ht.m:
        raise BadIndexTotal(f"Phi index total {t + s + r + h} != {Ht.m}")
    return _phi(Ht, t, s, r, h)


def _phi(Ht: CoeffTable, t, s, r, h) -> CNum:
    if min(t, s, r, h) < 0:
        return _C0
    xi, eta = Ht.xi, Ht.eta
    return (
        Ht[t, s, r - 1, h + 1] * (xi * (h + 1))
        + Ht[t - 1, s, r, h + 1] * (h + 1)
        - Ht[t, s - 1, r + 1, h] * (r + 1)
        - Ht[t, s, r + 1, h - 1] * (eta * (r + 1))
    )


def phi_table(Ht: CoeffTable) -> CoeffTable:
    if "Phi" not in Ht._derived:
        vals = {idx: _phi(Ht, *idx) for idx in Ht.indices()}
        Ht._derived["Phi"] = CoeffTable("Phi", Ht.m, Ht.m, vals, Ht.xi, Ht.eta)
    return Ht._derived["Phi"]


def _psi(Pt: CoeffTable, t, s, r, h) -> CNum:
    if min(t, s, r, h) < 0:
        return _C0
    xi, eta = Pt.xi, Pt.eta
    return (
        (Pt[t, s + 1, r - 2, h] * xi + Pt[t - 1, s + 1, r - 1, h] * (1 + xi * xi) + Pt[t - 2, s + 1, r, h] * xi) * (s + 1)
        - Pt[t + 1, s, r - 1, h - 1] * (xi * (t + 1))
        - Pt[t, s, r, h - 1] * t
        - Pt[t + 1, s - 1, r - 1, h] * (xi * eta * (t + 1))
        - Pt[t, s - 1, r, h] * (eta * t)
        + Pt[t, s, r, h - 1]
        + Pt[t, s - 1, r, h] * eta
    )


def psi_coeff(Ht: CoeffTable, t: int, s: int, r: int, h: int) -> CNum:
    """Psi_[tsrh] from the H table (through the Phi recursion)."""
    if t + s + r + h != Ht.m + 1:
        raise BadIndexTotal(f"Psi index total {t + s + r + h} != {Ht.m + 1}")
    return _psi(phi_table(Ht), t, s, r, h)


def psi_table(Ht: CoeffTable) -> CoeffTable:
    if "Psi" not in Ht._derived:
        Pt = phi_table(Ht)
        T = Ht.m + 1
        vals = {}
        for t in range(T + 1):
            for s in range(T + 1 - t):
                for r in range(T + 1 - t - s):
                    vals[(t, s, r, T - t - s - r)] = _psi(Pt, t, s, r, T - t - s - r)
        Ht._derived["Psi"] = CoeffTable("Psi", Ht.m, T, vals, Ht.xi, Ht.eta)
    return Ht._derived["Psi"]


def master_coeff_residual(Ht: CoeffTable, t: int, s: int, r: int, h: int) -> CNum:
    """Coefficient of z_n^t z_1^(s-1) zb_n^(r+3) zb_1^h in the third reduced residual,
    written through the Psi table."""
    if t + s + r + h != Ht.m + 1:
        raise BadIndexTotal(f"index total {t + s + r + h} != {Ht.m + 1}")
    if t < 0 or s < 1 or r < -3 or h < 0:
        raise BadIndexTotal("need t >= 0, s >= 1, r >= -3, h >= 0")
    P = psi_table(Ht)
    xi, eta = Ht.xi, Ht.eta
    x2, e2 = xi * xi, eta * eta
    v = (P[t, s, r, h] * xi + P[t - 1, s, r + 1, h] * (2 * x2 + 1) + P[t - 2, s, r + 2, h] * (x2 * xi + 2 * xi) + P[t - 3, s, r + 3, h] * x2) * s
    v += (P[t, s, r + 2, h - 2] + P[t - 1, s, r + 3, h - 2] * xi) * (s * eta)
    v += (P[t, s - 1, r + 2, h - 1] + P[t - 1, s - 1, r + 3, h - 1] * xi) * ((1 + e2) * (s - 1))
    v += (P[t, s - 2, r + 2, h] + P[t - 1, s - 2, r + 3, h] * xi) * ((s - 2) * eta)
    v -= P[t + 1, s - 1, r + 1, h - 1] * ((t + 1) * xi) + P[t, s - 1, r + 2, h - 1] * (t * (1 + x2)) + P[t - 1, s - 1, r + 3, h - 1] * ((t - 1) * xi)
    v -= (P[t + 1, s - 2, r + 1, h] * ((t + 1) * xi) + P[t, s - 2, r + 2, h] * (t * (1 + x2)) + P[t - 1, s - 2, r + 3, h] * ((t - 1) * xi)) * eta
    v -= (
        P[t + 1, s - 1, r + 3, h - 3] * eta
        + P[t + 1, s - 2, r + 3, h - 2] * (2 * e2 + 1)
        + P[t + 1, s - 3, r + 3, h - 1] * (e2 * eta + 2 * eta)
        + P[t + 1, s - 4, r + 3, h] * e2
    ) * (t + 1)
    v += (P[t, s - 1, r + 2, h - 1] * xi + P[t - 1, s - 1, r + 3, h - 1]) * xi
    v += (P[t, s - 2, r + 2, h] * xi + P[t - 1, s - 2, r + 3, h]) * (xi * eta)
    v -= (P[t, s - 1, r + 2, h - 1] * eta + P[t - 1, s - 1, r + 3, h - 1] * (xi * eta) + P[t, s - 2, r + 2, h] + P[t - 1, s - 2, r + 3, h] * xi) * eta
    return v


def master_indices(m: int):
    """All admissible (t, s, r, h): t >= 0, s >= 1, r >= -3, h >= 0, total m + 1."""
    T = m + 1
    for t in range(T + 4):
        for s in range(1, T + 4 - t):
            for h in range(T + 4 - t - s):
                r = T - t - s - h
                if r >= -3:
                    yield (t, s, r, h)


def k_weighted(table: CoeffTable, k: int, s: int, h: int) -> CNum:
    """sum_{t >= k} (-xi)^(total - t - s - h) C(t, k) X_[t, s, total - t - s - h, h]."""
    if k < 0 or s < 0 or h < 0:
        return _C0
    T = table.total
    mxi = -table.xi
    acc = _C0
    for t in range(k, T - s - h + 1):
        v = table[t, s, T - t - s - h, h]
        if v.is_zero():
            continue
        acc = acc + v * (mxi ** (T - t - s - h) * comb(t, k))
    return acc


def check_lemk_premise(Ht: CoeffTable, h0: int) -> None:
    Pt, St = phi_table(Ht), psi_table(Ht)
    for tab, name in ((Pt, "Phi"), (St, "Psi")):
        for idx in tab.indices():
            if idx[3] <= h0 and not tab[idx].is_zero():
                raise PremiseViolated(name, idx)
    for idx in Ht.indices():
        if max(idx[1], idx[3]) <= h0 and not Ht[idx].is_zero():
            raise PremiseViolated("H", idx)


def lemk_residuals(Ht: CoeffTable, h0: int, k: int, s: int, check_premise: bool = True) -> tuple[CNum, CNum, CNum]:
    """LHS - RHS of the three k-weighted identities (Phi from H, Psi from Phi, Psi recursion)."""
    if h0 < -1:
        raise ValueError("h0 must be at least -1")
    if Ht.xi == 0:
        raise ZeroDivisionError("the Phi-from-H identity divides by xi; needs lambda_n != 0")
    if check_premise:
        check_lemk_premise(Ht, h0)
    Pt, St = phi_table(Ht), psi_table(Ht)
    m, xi, eta, th = Ht.m, Ht.xi, Ht.eta, Ht.theta
    a, b = h0 + 1, h0 + 2
    kw = k_weighted
    phi_from_h = kw(Pt, k, s, a) - (
        kw(Ht, k, s, b) * ((h0 + 2) * th)
        + kw(Ht, k - 1, s, b) * (h0 + 2)
        + (kw(Ht, k, s - 1, a) * (m - s - h0 - k) - kw(Ht, k + 1, s - 1, a) * (k + 1)) * (1 / xi)
    )
    psi_from_phi = kw(St, k, s, a) - (
        (kw(Pt, k - 1, s + 1, a) * (xi * th) + kw(Pt, k - 2, s + 1, a) * xi) * (s + 1)
        - kw(Pt, k + 1, s - 1, a) * (eta * (k + 1) * th)
        - kw(Pt, k, s - 1, a) * (eta * (k - 1))
    )
    psi_recursion = (kw(St, k - 2, s, a) * (s * xi * xi * th) + kw(St, k - 3, s, a) * (s * xi * xi)) - (
        (kw(St, k, s - 2, a) * ((k - 1) * th) + kw(St, k - 1, s - 2, a) * (k + 1 - s)) * (xi * eta)
        + kw(St, k + 1, s - 4, a) * ((k + 1) * eta * eta)
    )
    return phi_from_h, psi_from_phi, psi_recursion


def hermitian_basis(n: int, m: int) -> list[Jet]:
    """Real basis of real homogeneous degree-m polynomials in (z, zb).

    For each unordered pair {(a, b), (b, a)}: one element when a == b, else
    z^a zb^b + z^b zb^a and i(z^a zb^b - z^b zb^a).
    """
    basis = []
    seen = set()
    monos = [ex for ex in product(range(m + 1), repeat=2 * n) if sum(ex) == m]
    monos.sort(key=lambda ex: tuple(-x for x in ex))
    for ex in monos:
        a, b = ex[:n], ex[n:]
        if (b, a) in seen:
            continue
        seen.add((a, b))
        if a == b:
            basis.append(Jet.monomial(n, a, b, 1, m))
        else:
            basis.append(Jet.from_terms(n, m, [(a, b, 1), (b, a, 1)]))
            basis.append(Jet.from_terms(n, m, [(a, b, I_UNIT), (b, a, -I_UNIT)]))
    return basis
