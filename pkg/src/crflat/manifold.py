"""The model w = q + p + iE, Bishop classes, reindexing and built-in fixtures."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Sequence

from gmpy2 import mpq

from .algebra import CNum, Rat, rat, rat_str
from .series import INFINITE, Jet

HALF = mpq(1, 2)


class BishopClass(Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


class UnknownFixture(KeyError):
    pass


class ManifestError(ValueError):
    pass


class NotApplicable:
    """Value returned when an operation does not apply (e.g. all invariants parabolic)."""

    __slots__ = ("reason",)

    def __init__(self, reason: str = ""):
        self.reason = reason

    def __repr__(self) -> str:
        return f"NotApplicable({self.reason!r})"

    def __eq__(self, o) -> bool:
        return isinstance(o, NotApplicable)

    def __hash__(self) -> int:
        return hash("NotApplicable")


class FlatAlready:
    """Returned by :func:`order_of_E` when E vanishes identically."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "FlatAlready"

    def __eq__(self, o) -> bool:
        return isinstance(o, FlatAlready)

    def __hash__(self) -> int:
        return hash("FlatAlready")


def q_jet(n: int, lam: Sequence[Rat], order: int) -> Jet:
    """q = sum |z_i|^2 + lambda_i (z_i^2 + zbar_i^2)."""
    terms = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        terms.append((tuple(e), tuple(e), 1))
        if lam[i]:
            e2 = [0] * n
            e2[i] = 2
            z = (0,) * n
            terms.append((tuple(e2), z, lam[i]))
            terms.append((z, tuple(e2), lam[i]))
    return Jet.from_terms(n, order, terms)


def w_jet(n: int, lam: Sequence[Rat], j: int, order: int) -> Jet:
    """w_j = z_j + 2 lambda_j zbar_j (j is 1-based)."""
    return Jet.z(n, j, order) + Jet.zbar(n, j, order).scale(2 * lam[j - 1])


@dataclass(frozen=True)
class ManifoldJet:
    n: int
    order: int
    lam: tuple
    p: Jet
    E: Jet

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(rat(x) for x in self.lam))

    @property
    def q(self) -> Jet:
        return q_jet(self.n, self.lam, self.order)

    @property
    def G(self) -> Jet:
        return self.q + self.p

    def w(self, j: int) -> Jet:
        return w_jet(self.n, self.lam, j, self.order)

    def replace(self, p: Jet | None = None, E: Jet | None = None) -> "ManifoldJet":
        return ManifoldJet(self.n, self.order, self.lam, self.p if p is None else p, self.E if E is None else E)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "order": self.order,
            "lambda": [rat_str(x) for x in self.lam],
            "p": self.p.to_json(),
            "E": self.E.to_json(),
        }


def make_manifold(n: int, order: int, lam: Sequence, p: Jet | None = None, E: Jet | None = None) -> ManifoldJet:
    p = p if p is not None else Jet(n, order)
    E = E if E is not None else Jet(n, order)
    return ManifoldJet(n, order, tuple(rat(x) for x in lam), p.truncate(order), E.truncate(order))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    message: str = ""
    monomial: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate(M: ManifoldJet) -> ValidationReport:
    if M.n < 2:
        return ValidationReport(False, "n < 2")
    if len(M.lam) != M.n:
        return ValidationReport(False, "lambda length differs from n")
    for x in M.lam:
        if x < 0:
            return ValidationReport(False, "negative Bishop invariant")
    for name, f in (("p", M.p), ("E", M.E)):
        if f.n != M.n:
            return ValidationReport(False, f"{name} has wrong variable count")
        if f.order < M.order:
            return ValidationReport(False, f"{name} known only to order {f.order}")
        bad = f.first_nonreal()
        if bad is not None:
            return ValidationReport(False, f"{name} not real", bad)
        for a, b, _ in f.terms():
            if sum(a) + sum(b) < 3:
                return ValidationReport(False, f"Ord({name}) < 3", (a, b))
            break
    return ValidationReport(True)


def classify_value(x) -> BishopClass:
    x = rat(x)
    if x < HALF:
        return BishopClass.ELLIPTIC
    if x == HALF:
        return BishopClass.PARABOLIC
    return BishopClass.HYPERBOLIC


def classify(M: ManifoldJet) -> list[tuple[Rat, BishopClass]]:
    return [(x, classify_value(x)) for x in M.lam]


def smallest_nonparabolic_index(lam: Sequence[Rat]):
    """0-based index of the smallest lambda != 1/2, lowest index on ties; None if all parabolic."""
    best = None
    for i, x in enumerate(lam):
        if x == HALF:
            continue
        if best is None or x < lam[best]:
            best = i
    return best


def is_reindexed(lam: Sequence[Rat]) -> bool:
    i = smallest_nonparabolic_index(lam)
    if i is None:
        return False
    return lam[-1] == lam[i]


def permute_manifold(M: ManifoldJet, perm: Sequence[int]) -> ManifoldJet:
    """New variable i is old variable perm[i]."""
    return ManifoldJet(M.n, M.order, tuple(M.lam[p] for p in perm), M.p.permute(perm), M.E.permute(perm))


def reindex_smallest_nonparabolic(M: ManifoldJet):
    """Move the smallest non-parabolic invariant to position n by a transposition.

    Returns (M', perm) where new variable i is old variable perm[i], or
    NotApplicable when every invariant equals 1/2.
    """
    i = smallest_nonparabolic_index(M.lam)
    if i is None:
        return NotApplicable("all Bishop invariants are parabolic")
    perm = list(range(M.n))
    perm[i], perm[-1] = perm[-1], perm[i]
    return permute_manifold(M, perm), tuple(perm)


def inverse_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for new, old in enumerate(perm):
        inv[old] = new
    return tuple(inv)


def defining_series(M: ManifoldJet) -> Jet:
    """G + iE."""
    return M.G + M.E.scale(CNum(0, 1))


def order_of_E(M: ManifoldJet):
    """(m, H) with m = Ord(E) and H its degree-m part, or FlatAlready."""
    m = M.E.ord()
    if m == INFINITE:
        return FlatAlready()
    return m, M.E.homog(m)


# fixtures


def cubic_nonminimal(lam1, lam2, mu1, mu2, order: int = 8) -> ManifoldJet:
    """F = p + iE = mu1|z1|^2(z1 + l1 zb1) + mu2|z2|^2(z2 + l2 zb2) + mu1 z1(|z2|^2 + l2 zb2^2) + mu2 z2(|z1|^2 + l1 zb1^2)."""
    l1, l2 = rat(lam1), rat(lam2)
    m1, m2 = CNum.of(mu1), CNum.of(mu2)
    F = Jet.from_terms(
        2,
        order,
        [
            ((2, 0), (1, 0), m1),
            ((1, 0), (2, 0), m1 * l1),
            ((0, 2), (0, 1), m2),
            ((0, 1), (0, 2), m2 * l2),
            ((1, 1), (0, 1), m1),
            ((1, 0), (0, 2), m1 * l2),
            ((1, 1), (1, 0), m2),
            ((0, 1), (2, 0), m2 * l1),
        ],
    )
    return make_manifold(2, order, (l1, l2), F.re_part(), F.im_part())


def hy2_obstruction(b: dict, a: dict | None = None, order: int = 8) -> ManifoldJet:
    """All invariants zero; E = sum b_(j1 j2) z1^j1 zb2^j2 + conjugate, p = 2 Re sum a_(j1 j2) z1^j1 z2^j2.

    ``b`` maps (j1, j2) with j1, j2 >= 2 to complex numbers and must satisfy
    b_(j,l) = conj(b_(l,j)).
    """
    terms = []
    for (j1, j2), c in b.items():
        c = CNum.of(c)
        if j1 < 2 or j2 < 2:
            raise ValueError("b-table indices must be at least 2")
        other = CNum.of(b.get((j2, j1), 0))
        if other != c.conj():
            raise ValueError(f"b-table not Hermitian at {(j1, j2)}")
        if j1 + j2 > order:
            continue
        terms.append(((j1, 0), (0, j2), c))
        terms.append(((0, j2), (j1, 0), c.conj()))
    E = Jet.from_terms(2, order, terms)
    pterms = []
    for (j1, j2), c in (a or {}).items():
        c = CNum.of(c)
        if j1 + j2 < 3:
            raise ValueError("a-table terms must have degree at least 3")
        if j1 + j2 > order:
            continue
        pterms.append(((j1, j2), (0, 0), c))
        pterms.append(((0, 0), (j1, j2), c.conj()))
    p = Jet.from_terms(2, order, pterms)
    return make_manifold(2, order, (0, 0), p, E)


def _random_rat(rng: random.Random) -> Rat:
    return mpq(rng.randint(-9, 9), rng.randint(1, 5))


def random_real_homogeneous(n: int, m: int, order: int, rng: random.Random) -> Jet:
    """Random real homogeneous degree-m polynomial with small rational coefficients."""
    terms = []
    seen = set()
    for ex in product(range(m + 1), repeat=2 * n):
        if sum(ex) != m:
            continue
        a, b = ex[:n], ex[n:]
        if (b, a) in seen:
            continue
        seen.add((a, b))
        if a == b:
            terms.append((a, b, CNum(_random_rat(rng), 0)))
        else:
            c = CNum(_random_rat(rng), _random_rat(rng))
            terms.append((a, b, c))
            terms.append((b, a, c.conj()))
    return Jet.from_terms(n, order, terms)


def appendix_random(seed: int, m: int = 3, lam=(mpq(1, 4), mpq(1, 3)), order: int | None = None, with_p: bool = True) -> ManifoldJet:
    """n = 2 manifold with random real degree-m E (and p) seeded deterministically."""
    rng = random.Random(seed)
    order = m if order is None else order
    E = random_real_homogeneous(2, m, order, rng)
    p = random_real_homogeneous(2, m, order, rng) if with_p else Jet(2, order)
    return make_manifold(2, order, lam, p, E)


FIXTURES = ("cubic_nonminimal", "hy2_obstruction", "appendix_random")


def fixture(name: str, **params) -> ManifoldJet:
    if name == "cubic_nonminimal":
        return cubic_nonminimal(**params)
    if name == "hy2_obstruction":
        return hy2_obstruction(**params)
    if name == "appendix_random":
        return appendix_random(**params)
    raise UnknownFixture(name)


# manifest files


def _check_real(name: str, f: Jet):
    bad = f.first_nonreal()
    if bad is not None:
        raise ManifestError(f"{name} is not Hermitian at alpha={list(bad[0])}, beta={list(bad[1])}")


def manifold_from_json(d: dict) -> ManifoldJet:
    try:
        n = int(d["n"])
        order = int(d["order"])
        lam = tuple(rat(x) for x in d["lambda"])
        p = Jet.from_json(n, order, d.get("p", []))
        E = Jet.from_json(n, order, d.get("E", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"malformed manifest: {exc}") from exc
    _check_real("p", p)
    _check_real("E", E)
    M = ManifoldJet(n, order, lam, p, E)
    rep = validate(M)
    if not rep:
        raise ManifestError(rep.message)
    return M


def load_manifest(path: str) -> ManifoldJet:
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"not valid JSON: {exc}") from exc
    return manifold_from_json(d)


def dump_manifest(M: ManifoldJet, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(M.to_json(), fh, indent=1, sort_keys=True)
        fh.write("\n")
