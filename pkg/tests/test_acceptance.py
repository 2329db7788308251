"""Acceptance suite, criteria 1-7, all exact.

Run under pytest (one PASS/FAIL line per criterion is printed) or directly:

    python3 tests/test_acceptance.py          # PASS/FAIL lines, exit 1 on any FAIL
    python3 tests/test_acceptance.py --json   # canonical reports for criteria 1-6
"""

from __future__ import annotations

import json
import os
import random
import subprocess
import sys
import time

import pytest
from gmpy2 import mpq

from crflat.algebra import CNum, rat_str
from crflat.crfields import (
    annihilation_residuals,
    bracket_coeffs,
    field_coeffs,
    gamma_coeffs,
    residual_III,
    residual_order,
    slice_residual_n2,
)
from crflat.detlab import (
    alpha_identity,
    det_structured,
    verify_closed_form_R,
    verify_nonsingular,
)
from crflat.flatten import (
    constraint_values,
    correction_dimension,
    flatten_to_order,
    map_is_square_and_injective,
    normal_target,
    normalize_order,
    rigidity_kernel,
)
from crflat.leading import (
    h_table,
    lemk_residuals,
    master_coeff_residual,
    master_indices,
    phi_coeff,
    phi_of,
    psi_coeff,
    psi_of,
    psi_table,
    residual_three,
    slice_table,
)
from crflat.manifold import (
    appendix_random,
    cubic_nonminimal,
    hy2_obstruction,
    make_manifold,
    q_jet,
    random_real_homogeneous,
    reindex_smallest_nonparabolic,
    smallest_nonparabolic_index,
)
from crflat.series import HoloCorrection, substitute_w

I2 = CNum(0, 2)


# 1: degree-three normalization, n = 2


def appendix_normalization() -> dict:
    rows = {}
    ok = True
    for label, lam in (("lambda_n=1/3", (mpq(1, 4), mpq(1, 3))), ("lambda_n=0", (mpq(1, 4), mpq(0)))):
        spec = normal_target(2, 3, lam[1])
        zeroed = 0
        for seed in range(25):
            M = appendix_random(seed, 3, lam)
            M2, B = normalize_order(M, 3)
            vals = constraint_values(spec, M2.E.homog(3))
            low = all(M2.E.homog(d) == M.E.homog(d) and M2.p.homog(d) == M.p.homog(d) for d in range(3))
            good = len(spec.constraints) == 6 and all(v == 0 for v in vals) and low and not B.is_zero()
            zeroed += good
            ok &= good
        rows[label] = {"seeds": 25, "normalized": zeroed, "constraints": len(spec.constraints), "case": spec.case}
    return {"ok": ok, "branches": rows}


# 2: normal-form solvability


def normal_form_solvability() -> dict:
    grid = []
    ok = True
    for n in (2, 3):
        for m0 in range(3, 10):
            for lam_n in (mpq(0), mpq(1, 4), mpq(1, 3), mpq(2, 5)):
                lam = (mpq(3, 4),) * (n - 1) + (lam_n,)
                square, rows, cols, kdim = map_is_square_and_injective(n, lam, m0)
                count_ok = normal_target(n, m0, lam_n).real_count == correction_dimension(n, m0) == rows
                ok &= square and count_ok
                grid.append([n, m0, rat_str(lam_n), rows, cols, kdim])
    return {"ok": ok, "cases": len(grid), "grid": grid}


# 3: rigidity


def _reindex(lam):
    lam = list(lam)
    i = smallest_nonparabolic_index(lam)
    lam[i], lam[-1] = lam[-1], lam[i]
    return tuple(lam)


def rigidity() -> dict:
    cases = [((0, 0), m) for m in range(3, 7)]
    for pair in ((mpq(1, 4), 0), (mpq(1, 8), mpq(1, 4)), (mpq(1, 3), mpq(1, 6)), (mpq(3, 4), mpq(1, 4))):
        cases += [(pair, m) for m in range(3, 7)]
    cases += [((0, 0, mpq(1, 4)), m) for m in (3, 4)]
    out = []
    ok = True
    for lam, m in cases:
        lam = tuple(mpq(x) for x in lam)
        r = rigidity_kernel(len(lam), _reindex(lam), m)
        ok &= r.dimension == 0
        out.append([[rat_str(x) for x in lam], m, r.unknowns, r.dimension])
    return {"ok": ok, "cases": out}


# 4: identity spot-checks


def _random_manifold(n, lam, seed, order=7):
    rng = random.Random(seed)
    E = random_real_homogeneous(n, 3, order, rng) + random_real_homogeneous(n, 4, order, rng)
    p = random_real_homogeneous(n, 3, order, rng) + random_real_homogeneous(n, 4, order, rng)
    return make_manifold(n, order, lam, p, E)


def _leading_forms_hold(M) -> bool:
    n, lam = M.n, M.lam
    m = M.E.ord()
    H = M.E.homog(m)
    f = field_coeffs(M)
    wn = M.w(n)
    ok = (f.A - wn.conj()).ord() >= 2
    for j in range(1, n):
        ok &= (f.B[j - 1] - M.w(j).conj()).ord() >= 2
        ok &= (f.C[j - 1] - phi_of(H, j, lam).conj().scale(I2)).truncate(f.C[j - 1].order).ord() >= m + 1
        for k in range(1, n):
            lj = bracket_coeffs(M, j, k)
            d = 1 if j == k else 0
            ok &= (lj[1] + M.w(j).conj()).ord() >= 2
            ok &= (lj[2] + wn.conj().scale(d)).ord() >= 2
            ok &= (lj[4] - M.w(k)).ord() >= 2
            ok &= (lj[5] - wn.scale(d)).ord() >= 2
            phik = phi_of(H, k, lam)
            l3 = lj[3] + (wn.conj() * phik.diff(j)).scale(I2) - (M.w(j).conj() * phik.diff(n)).scale(I2)
            ok &= l3.truncate(lj[3].order).ord() >= m + 1
        r1, r2 = annihilation_residuals(M, j)
        ok &= r1.is_zero() and r2.is_zero()
    g1 = gamma_coeffs(M)[0]
    ok &= (g1 + wn.conj().scale(2 * lam[0])).ord() >= 2
    return bool(ok)


def _conjugation_symmetric(M) -> bool:
    for j in range(1, M.n):
        for k in range(1, M.n):
            a, b = bracket_coeffs(M, j, k), bracket_coeffs(M, k, j)
            for i in (1, 2, 3):
                order = min(a[i].order, b[i + 3].order)
                if not (a[i] + b[i + 3].conj()).truncate(order).is_zero():
                    return False
    return True


def _pushforward_H(n, m, lam, seed):
    # Im B(z, q) for random holomorphic B: degree-m H solving the reduced system
    rng = random.Random(seed)
    terms = {}
    for j in range(m // 2 + 1):
        for a in range(m - 2 * j + 1):
            c = CNum(mpq(rng.randint(-5, 5), rng.randint(1, 3)), mpq(rng.randint(-5, 5), rng.randint(1, 3)))
            terms[((a, m - 2 * j - a), j)] = CNum(0, c.im) if 2 * j == m else c
    return substitute_w(HoloCorrection(n, m, terms), q_jet(n, lam, m)).im_part().homog(m)


def identity_spot_checks() -> dict:
    manifolds = [
        _random_manifold(2, (mpq(1, 8), mpq(1, 3)), 1),
        _random_manifold(3, (mpq(3, 4), mpq(1, 5), mpq(1, 6)), 2),
        _random_manifold(3, (0, mpq(2, 3), mpq(1, 7)), 3),
    ]
    conj_ok = all(_conjugation_symmetric(M) for M in manifolds)
    lead_ok = all(_leading_forms_hold(M) for M in manifolds)
    lam = (mpq(1, 8), mpq(1, 3))
    dual_count = 0
    dual_ok = True
    for m in range(3, 7):
        H = random_real_homogeneous(2, m, m, random.Random(100 + m))
        Ht = h_table(H, lam)
        Pt = slice_table(phi_of(H, 1, lam), "Phi", m, m, lam)
        St = slice_table(psi_of(H, 1, 1, lam), "Psi", m, m + 1, lam)
        Rt = slice_table(residual_three(H, lam), "R", m, m + 3, lam)
        for idx in Ht.indices():
            dual_ok &= phi_coeff(Ht, *idx) == Pt[idx]
            dual_count += 1
        for idx in psi_table(Ht).indices():
            dual_ok &= psi_coeff(Ht, *idx) == St[idx]
            dual_count += 1
        for t, s, r, h in master_indices(m):
            dual_ok &= master_coeff_residual(Ht, t, s, r, h) == Rt[t, s - 1, r + 3, h]
            dual_count += 1
    lemk_ok = True
    lemk_count = 0
    for m in range(3, 7):
        H = _pushforward_H(2, m, lam, m)
        lemk_ok &= residual_three(H, lam).is_zero()
        Ht = h_table(H, lam)
        for k in range(m + 3):
            for s in range(m + 3):
                lemk_ok &= all(x.is_zero() for x in lemk_residuals(Ht, -1, k, s))
                lemk_count += 1
    ok = conj_ok and lead_ok and dual_ok and lemk_ok
    return {
        "ok": bool(ok),
        "conjugation_symmetry": conj_ok,
        "leading_forms": lead_ok,
        "duality": {"ok": bool(dual_ok), "coefficients": dual_count},
        "lemk": {"ok": bool(lemk_ok), "index_pairs": lemk_count},
    }


# 5: fixtures


def fixtures() -> dict:
    C = cubic_nonminimal(0, mpq(1, 4), 1, 2, order=10)
    slice_ok = slice_residual_n2(C).is_zero()
    r3_ok = residual_III(C).truncate(residual_order(C)).is_zero()
    C2, perm = reindex_smallest_nonparabolic(C)
    fc = flatten_to_order(C2, 6)
    cubic_ok = slice_ok and r3_ok and fc.outcome == "Flattened" and fc.order == 6
    # the first nonzero residual sits in degree 6, so the jet must be valid past it
    Y = hy2_obstruction({(2, 2): 1}, order=10)
    r3_nonzero = not residual_III(Y).is_zero()
    fy = flatten_to_order(Y, 4)
    mono = fy.obstruction is not None and not fy.obstruction.coeff((2, 0), (0, 2)).is_zero()
    hy2_ok = r3_nonzero and fy.outcome == "Obstructed" and fy.order == 4 and mono
    return {
        "ok": bool(cubic_ok and hy2_ok),
        "cubic": {"slice_residual_zero": slice_ok, "residual_III_zero": r3_ok, "permutation": list(perm),
                  "flatten": fc.to_json()},
        "hy2": {"residual_III_nonzero": r3_nonzero, "outcome": fy.outcome, "order": fy.order, "has_z1sq_zb2sq": mono,
                "obstruction": fy.to_json().get("obstruction")},
    }


# 6: determinant lab


def determinant_lab() -> dict:
    s2 = det_structured("S", 1)
    ds_ok = all(det_structured(k, m) != 0 for k in ("D", "S") for m in range(1, 16))
    closed = {}
    closed_ok = True
    for m in (2, 3, 4):
        rp, rm = verify_closed_form_R(m)
        closed_ok &= rp.ok and rm.ok
        closed[str(m)] = [rp.to_json(), rm.to_json()]
    grid = [1, -1, mpq(1, 2), mpq(-1, 2), mpq(1, 3), 2, 3]
    nt_ok = all(verify_nonsingular(k, m, x) for k in ("N", "T") for m in (2, 3, 4) for x in grid)
    alpha_ok = all(alpha_identity(m, k0).is_zero() for m in range(1, 5) for k0 in range(3 * m // 2 + 1))
    ok = s2 == 2 and ds_ok and closed_ok and nt_ok and alpha_ok
    return {
        "ok": bool(ok),
        "det_S2": rat_str(s2),
        "D_S_nonzero_to_15": ds_ok,
        "closed_form_R": closed,
        "N_T_nonzero_on_grid": nt_ok,
        "alpha_identity": alpha_ok,
    }


CRITERIA = {
    1: ("degree-three normalization, 25 seeds, both branches", appendix_normalization),
    2: ("normal-form map square and injective", normal_form_solvability),
    3: ("rigidity kernel trivial", rigidity),
    4: ("identity spot-checks", identity_spot_checks),
    5: ("fixtures: cubic flattens, hy2 obstructed at 4", fixtures),
    6: ("determinant lab", determinant_lab),
}

_CACHE: dict[int, tuple[dict, float]] = {}


def canonical(report: dict) -> str:
    return json.dumps(report, sort_keys=True, separators=(",", ":"))


def run_criterion(k: int) -> tuple[dict, float]:
    if k not in _CACHE:
        t = time.perf_counter()
        rep = CRITERIA[k][1]()
        _CACHE[k] = (rep, time.perf_counter() - t)
    return _CACHE[k]


def _line(k: int, ok: bool, title: str, secs: float) -> str:
    return f"criterion {k}: {'PASS' if ok else 'FAIL'}  {title}  ({secs:.1f}s)"


def _say(capsys, text: str) -> None:
    with capsys.disabled():
        print("\n" + text)


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_acceptance_criterion(k, capsys):
    rep, secs = run_criterion(k)
    _say(capsys, _line(k, rep["ok"], CRITERIA[k][0], secs))
    assert rep["ok"], canonical(rep)[:2000]


def determinism() -> dict:
    first = {k: canonical(run_criterion(k)[0]) for k in CRITERIA}
    again = {k: canonical(CRITERIA[k][1]()) for k in CRITERIA}
    in_process = first == again
    script = os.path.abspath(__file__)
    outs = []
    for seed in ("0", "1"):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        res = subprocess.run([sys.executable, script, "--json"], capture_output=True, env=env, check=False)
        outs.append(res.stdout)
    expected = canonical({str(k): json.loads(v) for k, v in first.items()}).encode() + b"\n"
    cross = outs[0] == outs[1] == expected
    return {"ok": in_process and cross, "in_process": in_process, "cross_process": cross}


def test_acceptance_criterion_7_byte_identical_reports(capsys):
    t = time.perf_counter()
    rep = determinism()
    _say(capsys, _line(7, rep["ok"], "byte-identical reports across runs and processes", time.perf_counter() - t))
    assert rep["ok"], rep


def _main(argv) -> int:
    if "--json" in argv:
        reports = {str(k): CRITERIA[k][1]() for k in CRITERIA}
        sys.stdout.write(canonical(reports) + "\n")
        return 0
    failed = False
    for k in sorted(CRITERIA):
        rep, secs = run_criterion(k)
        failed |= not rep["ok"]
        print(_line(k, rep["ok"], CRITERIA[k][0], secs), flush=True)
    t = time.perf_counter()
    rep = determinism()
    failed |= not rep["ok"]
    print(_line(7, rep["ok"], "byte-identical reports across runs and processes", time.perf_counter() - t))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(_main(sys.argv[1:]))
