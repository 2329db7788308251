"""Normal form of E order by order, the formal flattening driver and the
rigidity kernel of the normalized reduced system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from gmpy2 import mpq

from .algebra import CNum, Echelon, QMatrix, kernel_basis, rat, solve_linear, NoSolution
from .leading import addnew_residuals, hermitian_basis
from .manifold import (
    ManifoldJet,
    NotApplicable,
    defining_series,
    is_reindexed,
    q_jet,
    smallest_nonparabolic_index,
)
from .series import HoloCorrection, Jet, substitute_w


class SingularSystem(RuntimeError):
    pass


class NotReindexed(ValueError):
    pass


@dataclass(frozen=True)
class Constraint:
    """``coefficient(alpha, beta) = 0`` (kind "zero") or its real part only (kind "re")."""

    alpha: tuple
    beta: tuple
    kind: str = "zero"

    @property
    def real_rows(self) -> int:
        if self.kind == "re" or self.alpha == self.beta:
            return 1
        return 2

    def rows_of(self, c: CNum) -> list:
        if self.real_rows == 1:
            return [c.re]
        return [c.re, c.im]

    def to_json(self) -> dict:
        return {"alpha": list(self.alpha), "beta": list(self.beta), "kind": self.kind}


@dataclass(frozen=True)
class NormalFormSpec:
    n: int
    m0: int
    case: str  # "LambdaZero" or "Case(d)" with d in -3..2
    mhat: int | None
    constraints: tuple

    @property
    def real_count(self) -> int:
        return sum(c.real_rows for c in self.constraints)

    def to_json(self) -> dict:
        return {"n": self.n, "m0": self.m0, "case": self.case, "mhat": self.mhat, "constraints": [c.to_json() for c in self.constraints]}


def case_of(m0: int) -> tuple[int, int]:
    """(delta, mhat) with m0 = 6 mhat + delta and delta in -3..2."""
    delta = ((m0 + 3) % 6) - 3
    return delta, (m0 - delta) // 6


def _multi(n: int, total: int):
    """Multi-indices of length n and given total, in a fixed order."""
    out = [ex for ex in product(range(total + 1), repeat=n) if sum(ex) == total]
    out.sort(key=lambda ex: tuple(-x for x in ex))
    return out


def _en(n: int, t: int, first: int = 0) -> tuple:
    """t e_n + first e_1."""
    v = [0] * n
    v[-1] += t
    v[0] += first
    return tuple(v)


def normal_target(n: int, m0: int, lam_n) -> NormalFormSpec:
    if m0 < 3:
        raise ValueError("normal form conditions start at degree 3")
    lam_n = rat(lam_n)
    cons: list[Constraint] = []
    seen = set()

    def add(a, b, kind="zero"):
        if (a, b, kind) in seen:
            return
        seen.add((a, b, kind))
        cons.append(Constraint(tuple(a), tuple(b), kind))

    zero = (0,) * n
    for I in _multi(n, m0):
        add(I, zero)
    for s in range(1, m0 + 1):
        for t in range(s, m0 - s + 1):
            rest = m0 - t - s
            if rest == 0:
                continue
            for J in _multi(n - 1, rest):
                a = tuple(J) + (t,)
                add(a, _en(n, s))
    if lam_n == 0:
        for t in range(m0 // 2 + (m0 % 2), m0):
            add(_en(n, t), _en(n, m0 - t))
        if m0 % 2 == 0:
            pass  # the diagonal t = s is included above as a single real row
        return NormalFormSpec(n, m0, "LambdaZero", None, tuple(cons))
    delta, mh = case_of(m0)
    pure_lo = {-3: 4 * mh - 1, -2: 4 * mh - 1, -1: 4 * mh, 0: 4 * mh + 1, 1: 4 * mh + 1, 2: 4 * mh + 2}[delta]
    mixed = {
        -3: (2 * mh - 2, 3 * mh - 3),
        -2: (2 * mh - 1, 3 * mh - 3),
        -1: (2 * mh - 1, 3 * mh - 2),
        0: (2 * mh - 1, 3 * mh - 2),
        1: (2 * mh, 3 * mh - 1),
        2: (2 * mh, 3 * mh - 1),
    }[delta]
    for t in range(pure_lo, m0):
        add(_en(n, t), _en(n, m0 - t))
    for t in range(mixed[0], mixed[1] + 1):
        add(_en(n, 2 * t + 1, 1), _en(n, m0 - 2 * t - 3, 1))
    if delta == -2:
        add(_en(n, 4 * mh - 3, 1), _en(n, 2 * mh - 1, 1), "re")
    elif delta == 0:
        add(_en(n, 4 * mh), _en(n, 2 * mh), "re")
    elif delta == 2:
        add(_en(n, 4 * mh + 1), _en(n, 2 * mh + 1), "re")
    return NormalFormSpec(n, m0, f"Case({delta})", mh, tuple(cons))


def correction_coordinates(n: int, m0: int) -> list[tuple[tuple, int, str]]:
    """Real coordinates of the correction space: (I, j, "re" | "im")."""
    coords = []
    for j in range(m0 // 2 + 1):
        for I in _multi(n, m0 - 2 * j):
            if 2 * j == m0:
                coords.append((I, j, "im"))
            else:
                coords.append((I, j, "re"))
                coords.append((I, j, "im"))
    return coords


def correction_dimension(n: int, m0: int) -> int:
    return len(correction_coordinates(n, m0))


def constraint_values(spec: NormalFormSpec, E: Jet) -> list:
    out = []
    for c in spec.constraints:
        out.extend(c.rows_of(E.coeff(c.alpha, c.beta)))
    return out


def _correction_from_vector(n: int, m0: int, coords, x) -> HoloCorrection:
    terms: dict = {}
    for (I, j, part), v in zip(coords, x):
        if v == 0:
            continue
        c = terms.get((I, j), CNum(0))
        terms[(I, j)] = c + (CNum(v, 0) if part == "re" else CNum(0, v))
    return HoloCorrection(n, m0, terms)


def normalization_map(M: ManifoldJet, m0: int) -> QMatrix:
    """Real matrix from correction coordinates to constrained coefficients of Im B(z, q) at degree m0."""
    return _normalization_map(M.n, M.lam, m0)


def _normalization_map(n: int, lam, m0: int) -> QMatrix:
    spec = normal_target(n, m0, lam[-1])
    coords = correction_coordinates(n, m0)
    q = q_jet(n, lam, m0)
    cols = []
    for I, j, part in coords:
        B = HoloCorrection(n, m0, {(I, j): CNum(1, 0) if part == "re" else CNum(0, 1)})
        img = substitute_w(B, q).im_part().homog(m0)
        cols.append(constraint_values(spec, img))
    rows = len(cols[0]) if cols else spec.real_count
    return QMatrix([[cols[c][r] for c in range(len(cols))] for r in range(rows)], len(cols))


def apply_correction(M: ManifoldJet, B: HoloCorrection) -> ManifoldJet:
    """Transform by w' = w + B(z, w): D' = D + B(z, D) with D = G + iE."""
    if B.is_zero():
        return M
    if B.m0 < 3:
        raise ValueError("corrections must have weighted order at least 3")
    D = defining_series(M)
    Dn = D + substitute_w(B, D)
    q = M.q
    p = (Dn.re_part() - q).truncate(M.order)
    E = Dn.im_part().truncate(M.order)
    return ManifoldJet(M.n, M.order, M.lam, p, E)


def normalize_order(M: ManifoldJet, m0: int) -> tuple[ManifoldJet, HoloCorrection]:
    if m0 > M.order:
        raise ValueError(f"degree {m0} above manifold order {M.order}")
    spec = normal_target(M.n, m0, M.lam[-1])
    A = _normalization_map(M.n, M.lam, m0)
    rhs = [-v for v in constraint_values(spec, M.E.homog(m0))]
    x = solve_linear(A, rhs)
    if isinstance(x, NoSolution):
        raise SingularSystem(f"normalization system at degree {m0} is inconsistent")
    B = _correction_from_vector(M.n, m0, correction_coordinates(M.n, m0), x)
    M2 = apply_correction(M, B)
    if any(v != 0 for v in constraint_values(spec, M2.E.homog(m0))):
        raise SingularSystem(f"normal form not reached at degree {m0}")
    return M2, B


@dataclass
class FlattenReport:
    outcome: str  # "Flattened" | "Obstructed" | "NotApplicable"
    order: int
    corrections: list = field(default_factory=list)
    obstruction: Jet | None = None
    manifold: ManifoldJet | None = None

    def to_json(self) -> dict:
        d = {
            "outcome": self.outcome,
            "order": self.order,
            "corrections": [B.to_json() for B in self.corrections],
        }
        if self.obstruction is not None:
            d["obstruction"] = self.obstruction.to_json()
        return d


def flatten_to_order(M: ManifoldJet, N: int) -> FlattenReport:
    """Normalize degrees 3..N in turn; stop at the first surviving degree-m part of E."""
    if N > M.order:
        raise ValueError(f"target order {N} above manifold order {M.order}")
    if smallest_nonparabolic_index(M.lam) is None:
        return FlattenReport("NotApplicable", 2)
    if not is_reindexed(M.lam):
        raise NotReindexed("lambda_n must be the smallest non-parabolic invariant; reindex first")
    corrections = []
    cur = M
    for m in range(3, N + 1):
        cur, B = normalize_order(cur, m)
        corrections.append(B)
        H = cur.E.homog(m)
        if not H.is_zero():
            return FlattenReport("Obstructed", m, corrections, H, cur)
    return FlattenReport("Flattened", N, corrections, None, cur)


@dataclass(frozen=True)
class RigidityResult:
    n: int
    lam: tuple
    m: int
    dimension: int
    basis: tuple
    unknowns: int
    rows_used: int


def rigidity_kernel(n: int, lam: Sequence, m: int):
    """Exact kernel of normal-form constraints plus the reduced system on real degree-m H."""
    lam = tuple(rat(x) for x in lam)
    if len(lam) != n:
        raise ValueError("lambda length differs from n")
    if smallest_nonparabolic_index(lam) is None:
        return NotApplicable("all Bishop invariants are parabolic")
    if not is_reindexed(lam):
        raise NotReindexed("lambda_n must be the smallest non-parabolic invariant")
    return _kernel_of_reduced_system(n, lam, m)


def _kernel_of_reduced_system(n: int, lam: tuple, m: int) -> RigidityResult:
    basis = hermitian_basis(n, m)
    nb = len(basis)
    spec = normal_target(n, m, lam[-1])
    ech = Echelon(nb)
    used = 0
    # normal-form rows first
    cols = [constraint_values(spec, h) for h in basis]
    for r in range(spec.real_count):
        used += 1
        ech.add_row({c: cols[c][r] for c in range(nb) if cols[c][r] != 0})
    if not ech.full():
        residuals = [addnew_residuals(h, lam) for h in basis]
        names = [name for name, _ in residuals[0]]
        for ri, name in enumerate(names):
            coeffs: dict[tuple[int, int], dict[int, mpq]] = {}
            for c in range(nb):
                for k, (re, im) in residuals[c][ri][1].raw().items():
                    if re:
                        coeffs.setdefault((k, 0), {})[c] = re
                    if im:
                        coeffs.setdefault((k, 1), {})[c] = im
            for key in sorted(coeffs):
                used += 1
                ech.add_row(coeffs[key])
                if ech.full():
                    break
            if ech.full():
                break
    kern = ech.kernel()
    kjets = []
    for v in kern:
        acc = Jet(n, m)
        for c, x in enumerate(v):
            if x != 0:
                acc = acc + basis[c].scale(x)
        kjets.append(acc)
    return RigidityResult(n, lam, m, len(kern), tuple(kjets), nb, used)


def map_is_square_and_injective(n: int, lam, m0: int) -> tuple[bool, int, int, int]:
    """(ok, rows, cols, kernel dimension) for the normalization map."""
    A = _normalization_map(n, tuple(rat(x) for x in lam), m0)
    k = len(kernel_basis(A))
    return A.rows == A.cols and k == 0, A.rows, A.cols, k
