import json
import random

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from crflat.algebra import CNum
from crflat.manifold import (
    BishopClass,
    FlatAlready,
    ManifestError,
    NotApplicable,
    UnknownFixture,
    classify,
    defining_series,
    dump_manifest,
    fixture,
    inverse_permutation,
    load_manifest,
    make_manifold,
    manifold_from_json,
    order_of_E,
    permute_manifold,
    random_real_homogeneous,
    reindex_smallest_nonparabolic,
    validate,
)
from crflat.series import Jet


def test_validate_examples():
    assert validate(make_manifold(2, 5, (0, mpq(1, 4))))
    bad = make_manifold(2, 5, (0, 0), E=Jet.monomial(2, (2, 0), (0, 0), 1, 5) + Jet.monomial(2, (0, 0), (2, 0), 1, 5))
    rep = validate(bad)
    assert not rep and rep.message == "Ord(E) < 3"
    nonreal = make_manifold(2, 5, (0, 0), E=Jet.monomial(2, (2, 1), (0, 0), 1, 5))
    rep = validate(nonreal)
    assert not rep and rep.message == "E not real"
    assert not validate(make_manifold(2, 5, (0, mpq(-1))))


def test_classify():
    M = make_manifold(3, 4, (0, mpq(1, 2), mpq(3, 4)))
    assert [c for _, c in classify(M)] == [BishopClass.ELLIPTIC, BishopClass.PARABOLIC, BishopClass.HYPERBOLIC]


def test_reindex_examples():
    M = make_manifold(2, 4, (0, mpq(1, 4)))
    M2, perm = reindex_smallest_nonparabolic(M)
    assert M2.lam == (mpq(1, 4), 0) and perm == (1, 0)
    M2, perm = reindex_smallest_nonparabolic(make_manifold(2, 4, (mpq(1, 4), 0)))
    assert perm == (0, 1)
    assert isinstance(reindex_smallest_nonparabolic(make_manifold(2, 4, (mpq(1, 2), mpq(1, 2)))), NotApplicable)
    M2, perm = reindex_smallest_nonparabolic(make_manifold(3, 4, (mpq(1, 3), mpq(1, 3), mpq(3, 4))))
    assert perm == (2, 1, 0)


@given(st.integers(0, 10_000), st.permutations([0, 1, 2]))
def test_permutation_roundtrip(seed, perm):
    rng = random.Random(seed)
    E = random_real_homogeneous(3, 3, 4, rng)
    p = random_real_homogeneous(3, 4, 4, rng)
    M = make_manifold(3, 4, (mpq(1, 5), mpq(3, 4), 0), p, E)
    M2 = permute_manifold(M, perm)
    assert validate(M2) and M2.E.is_real()
    back = permute_manifold(M2, inverse_permutation(perm))
    assert back == M


def test_defining_series_and_order():
    M = fixture("cubic_nonminimal", lam1=0, lam2=mpq(1, 4), mu1=1, mu2=CNum(0, 1), order=6)
    assert defining_series(M).im_part() == M.E
    m, H = order_of_E(M)
    assert m == 3 and H == M.E.homog(3)
    assert order_of_E(make_manifold(2, 5, (0, 0))) == FlatAlready()
    one = Jet.monomial(2, (2, 0), (1, 1), 1, 6) + Jet.monomial(2, (1, 1), (2, 0), 1, 6)
    m, H = order_of_E(make_manifold(2, 6, (0, 0), E=one))
    assert m == 4 and H == one


def test_cubic_fixture_matches_definition():
    # F = mu1|z1|^2(z1 + l1 zb1) + mu2|z2|^2(z2 + l2 zb2) + mu1 z1(|z2|^2 + l2 zb2^2) + mu2 z2(|z1|^2 + l1 zb1^2)
    l1, l2, mu1, mu2 = mpq(0), mpq(1, 4), CNum(1), CNum(0, 1)
    M = fixture("cubic_nonminimal", lam1=l1, lam2=l2, mu1=mu1, mu2=mu2, order=5)
    z1, z2 = Jet.z(2, 1, 5), Jet.z(2, 2, 5)
    b1, b2 = z1.conj(), z2.conj()
    F = (
        (z1 * b1 * (z1 + b1.scale(l1))).scale(mu1)
        + (z2 * b2 * (z2 + b2.scale(l2))).scale(mu2)
        + (z1 * (z2 * b2 + (b2 * b2).scale(l2))).scale(mu1)
        + (z2 * (z1 * b1 + (b1 * b1).scale(l1))).scale(mu2)
    )
    assert M.p == F.re_part() and M.E == F.im_part()


def test_hy2_fixture():
    M = fixture("hy2_obstruction", b={(2, 2): 1})
    assert M.lam == (0, 0)
    want = Jet.from_terms(2, 8, [((2, 0), (0, 2), 1), ((0, 2), (2, 0), 1)])
    assert M.E == want
    with pytest.raises(ValueError):
        fixture("hy2_obstruction", b={(2, 3): 1})


def test_appendix_fixture_is_deterministic():
    a = fixture("appendix_random", seed=4)
    b = fixture("appendix_random", seed=4)
    assert a == b and a.E.ord() == 3 and a.E.is_real()
    assert fixture("appendix_random", seed=5) != a
    with pytest.raises(UnknownFixture):
        fixture("nope")


def test_manifest_roundtrip(tmp_path):
    M = fixture("appendix_random", seed=2, order=5)
    path = tmp_path / "m.json"
    dump_manifest(M, str(path))
    assert load_manifest(str(path)) == M


def test_manifest_rejects_nonhermitian(tmp_path):
    d = {"n": 2, "order": 4, "lambda": ["0", "1/4"], "p": [], "E": [{"alpha": [2, 1], "beta": [0, 0], "re": "1", "im": "0"}]}
    with pytest.raises(ManifestError, match="not Hermitian"):
        manifold_from_json(d)
    with pytest.raises(ManifestError):
        manifold_from_json({"n": 2})
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ManifestError):
        load_manifest(str(path))
    d = {"n": 2, "order": 4, "lambda": ["0", "1/4"], "E": [{"alpha": [1, 0], "beta": [1, 0], "re": "1", "im": "0"}]}
    with pytest.raises(ManifestError, match="Ord"):
        manifold_from_json(json.loads(json.dumps(d)))
