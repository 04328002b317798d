"""Acceptance suite: one test per criterion, every tolerance exact.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line
per criterion.
"""

import itertools
import json
import random
from fractions import Fraction
from math import gcd

import pytest

from qhdsurf import cli
from qhdsurf import curve_config as cc
from qhdsurf import elliptic_mmod as em
from qhdsurf.degeneration import (dolgachev_brute_force, dolgachev_enumerate,
                                  flip_compute, seifert_anticanonical,
                                  slc_nef_coeffs)
from qhdsurf.exact_arith import (cqs_discrepancies, hj_eval, hj_expand,
                                 hj_sequences)
from qhdsurf.qhd_catalog import (QhdFamilyId, load_catalog, verify_family,
                                 wahl_generate, wahl_recognize)
from qhdsurf.whs_discrepancy import chi_e, qhd_identities, star_discrepancies

F = Fraction


def _families_grid(max_param):
    special = {("3", "b"): [(0, q, q + 1) for q in range(4)]}
    for (valency, fam), rec in sorted(load_catalog().items()):
        names = rec["param_names"]
        tuples = list(itertools.product(range(max_param + 1), repeat=len(names)))
        tuples += special.get((str(valency), fam), [])
        for vals in tuples:
            yield QhdFamilyId(valency, fam, tuple(sorted(zip(names, vals))))


def test_criterion_1_hj_round_trip():
    count = 0
    for m in range(2, 501):
        for q in range(1, m):
            if gcd(m, q) != 1:
                continue
            chain = hj_expand(m, q)
            assert hj_eval(chain) == (m, q)
            count += 1
    # expand o eval on generated chains, plus every sequence identity
    rng = random.Random(1)
    for _ in range(400):
        chain = tuple(rng.randint(2, 12) for _ in range(rng.randint(1, 10)))
        m, q = hj_eval(chain)
        assert hj_expand(m, q) == chain
        seq = hj_sequences(chain)
        r = len(chain)
        assert seq.alpha[r + 1] == m and seq.beta[r] == 1 and seq.beta[r + 1] == 0
        assert (seq.alpha[r] * q) % m == 1 % m
        for i in range(r + 1):
            assert seq.alpha[i + 1] * seq.gamma[i] - seq.alpha[i] * seq.gamma[i + 1] == -1
        for i in range(r + 2):
            assert seq.beta[i] == q * seq.alpha[i] - m * seq.gamma[i]
    print(f"\nPASS criterion 1: HJ round trip on {count} coprime pairs, "
          f"sequence identities on 400 random chains")


def test_criterion_2_and_3_triple_equality_and_identities():
    checked = 0
    for fid in _families_grid(4):
        rep = verify_family(fid)
        assert rep["ok"], (fid, rep["mismatches"][:3])
        star = rep and None
        from qhdsurf.qhd_catalog import instantiate_family
        star = instantiate_family(fid)
        idents = qhd_identities(star, fid.valency)
        assert idents["ok"], fid
        chi, e = chi_e(star)
        assert chi / e < 1
        checked += 1
    print(f"\nPASS criteria 2+3: triple equality and QHD identities on "
          f"{checked} family instances (parameters 0..4 plus special cases)")


def test_criterion_4_wahl_generation():
    gen = wahl_generate(8)
    by_len = {}
    for chain in gen:
        by_len.setdefault(len(chain), set()).add(chain)
        wp = wahl_recognize(chain)
        assert wp is not None
        m, q = hj_eval(chain)
        assert (wp.n * wp.n, wp.n * wp.a - 1) == (m, q)
    for length in range(1, 9):
        assert len(by_len[length]) == 2 ** (length - 1), length
    rng = random.Random(99)
    rejected = 0
    while rejected < 1000:
        chain = tuple(rng.randint(2, 9) for _ in range(rng.randint(1, 8)))
        if chain in gen:
            continue
        assert wahl_recognize(chain) is None, chain
        rejected += 1
    print("\nPASS criterion 4: Wahl counts 1,2,4,...,128; recognition "
          "consistent; 1000 random non-Wahl chains rejected")


def test_criterion_5_lambda_table():
    rep = em.verify_lambda_table(max_param=4, wahl_n=6, wahl_y=3, wahl_d=3)
    assert rep["ok"], rep["failures"][:5]
    print(f"\nPASS criterion 5: lambda table reproduced exactly on "
          f"{rep['checked']} entries (params 0..4, yI with n<=6, y<=3, d<=3)")


def _catalog_builds(max_param):
    for tag in sorted(em.V3V4_ENTRIES):
        ent = em.V3V4_ENTRIES[tag]
        for t in ([None] if ent["param"] is None else range(max_param + 1)):
            yield em.build_mmod(tag, t)
    for tag in em.WAHL_TAGS:
        yield em.build_mmod(tag)
    for n, a in [(2, 1), (3, 1), (3, 2), (4, 3), (5, 2), (6, 5)]:
        for y in (1, 2):
            for d in (1, 2):
                yield em.build_mmod("yI", n=n, a=a, y=y, d=d)


def test_criterion_6_mmod_structure():
    t_sum_by_fiber = {"II": 1, "III": 2, "IV": 3, "I": None}
    checked = 0
    for mmod in _catalog_builds(4):
        rep = em.structure_report(mmod)
        assert rep["k2_bookkeeping"], mmod.name
        assert rep["blowups_equal_contracted"], mmod.name
        assert rep["pullback_ok"], mmod.name
        assert rep["negative_definite_c"], mmod.name
        assert rep["nef"], mmod.name
        assert rep["valid_c"], mmod.name
        assert rep["s0"] == 0, mmod.name
        assert rep["t_high_empty"] and rep["s_high_empty"], mmod.name
        assert rep["t1_shape_ok"], mmod.name
        want = t_sum_by_fiber[mmod.fiber.kind]
        if want is not None:
            assert rep["t_sum"] == want, (mmod.name, rep["t_sum"])
        em.lambda_of(mmod)  # raises on per-component inconsistency
        checked += 1
    print(f"\nPASS criterion 6: structure checks on {checked} catalog builds "
          "(nef, negative definite, K^2 bookkeeping, s0=0, T/S bounds, T1 shape)")


def test_criterion_7_sliding():
    from qhdsurf.curve_config import classify_exceptional
    slid_count = 0
    for tag in sorted(em.V3V4_ENTRIES):
        ent = em.V3V4_ENTRIES[tag]
        for t in ([None] if ent["param"] is None else range(4)):
            mmod = em.build_mmod(tag, t)
            pairs = em.slidable_whites(mmod)
            if not pairs:
                continue
            gamma, leg = pairs[0]
            cls0 = classify_exceptional(mmod.config)
            slid = em.slide(mmod, gamma, leg_index=leg)
            assert em.lambda_of(slid) == em.lambda_of(mmod), (tag, t)
            cls1 = classify_exceptional(slid.config)
            assert cls1["t"].get(1, 0) == cls0["t"].get(1, 0) - 1
            assert cls1["t"].get(2, 0) == cls0["t"].get(2, 0) + 1
            for h in set(cls0["s"]) | set(cls1["s"]):
                if h > 2:
                    assert cls0["s"].get(h, 0) == cls1["s"].get(h, 0)
            back = [w for w in slid.whites()
                    if len(slid.config.neighbors(w)) == 2]
            restored = em.unslide(slid, sorted(back)[0])
            assert cc.is_isomorphic(restored.config, mmod.config), (tag, t)
            slid_count += 1
    assert slid_count >= 40
    print(f"\nPASS criterion 7: slide/unslide identity, lambda invariance and "
          f"S/T transitions on {slid_count} slidable catalog entries")


def test_criterion_8_flip():
    for q in range(9):
        leg = (2,) * q + (q + 6,)
        wahl = (2,) * (q + 4) + (q + 8,)
        z_sing = (2,) * (q + 4) + (q + 2,)
        res = flip_compute(leg, wahl, z_sing, search_bound=13)
        assert res.wplus_cqs == (6, 1)
        assert res.zplus_wahl == (2,) * (q + 4) + (q + 8,)
        assert res.dual_chain == (2, 2, 2, 2, 2)
        assert res.z_chain == z_sing
        total = len(res.zplus_wahl) + 1 + len(res.dual_chain)
        assert total - len(res.contracted_z) == len(z_sing)
    print("\nPASS criterion 8: flip reproduces the worked example for q = 0..8 "
          "(W+ c.q.s. (6,1), Z+ Wahl [2^(q+4), q+8], dual = five 2s)")


def test_criterion_9_slc_coefficients():
    formulas = {
        "II": (lambda n, y: (F(5 * n - 6, 6 * n), F(y * n - 6, 6 * y * n)), 6),
        "III": (lambda n, y: (F(3 * n - 4, 4 * n), F(y * n - 4, 4 * y * n)), 4),
        "IV": (lambda n, y: (F(2 * n - 3, 3 * n), F(y * n - 3, 3 * y * n)), 3),
    }
    for fiber, (formula, bound) in formulas.items():
        for n in range(2, 9):
            for y in (1, 2, 3):
                w, z, verdict = slc_nef_coeffs(fiber, n, y)
                assert (w, z) == formula(n, y)
                assert (z > 0) == (y * n > bound)
    m_table = {"II": F(5, 6), "III": F(3, 4), "IV": F(2, 3),
               "II*": F(1, 6), "III*": F(1, 4), "IV*": F(1, 3)}
    eff_bound = {"II": 1, "III": 1, "IV": 1, "II*": 6, "III*": 4, "IV*": 3}
    for fiber, m in m_table.items():
        for y in range(1, 9):
            val, eff = seifert_anticanonical(fiber, y)
            assert val == F(1, y) - m
            assert eff == (y <= eff_bound[fiber])
    print("\nPASS criterion 9: slc nef coefficients and Seifert anticanonical "
          "values match the closed forms; thresholds exact")


def test_criterion_10_dolgachev():
    plans = dolgachev_enumerate(2, 3)
    assert len(plans) == 6
    count = 0
    for a in range(2, 8):
        for b in range(a, 8):
            if a * b <= 4:
                continue
            closed = dolgachev_enumerate(a, b)
            brute = dolgachev_brute_force(a, b)
            key = lambda p: (p.a, p.b, p.tag, p.params)
            assert sorted(map(key, closed)) == sorted(map(key, brute)), (a, b)
            for p in closed:
                assert p.k_coeff == 1 - F(1, a) - F(1, b)
            count += len(closed)
    print(f"\nPASS criterion 10: (2,3) has exactly 6 plans; closed form equals "
          f"brute force for all a,b <= 7 ({count} plans), k coefficients exact")


def test_criterion_11_bounded_rederivation():
    def key(m):
        return repr(cc.canonical_key(em._shape_with_in_c(m.config)))

    expected = {}
    for tag in ("II(2)", "II(3)", "II(4)", "II(5)"):
        expected[key(em.normalize_mmod(em.build_mmod(tag)))] = tag
    jobs = [("II.v3.f", range(0, 5)), ("II.v3.i", range(0, 4)),
            ("II.v3.j", range(0, 4)), ("II.v3.c", [None]),
            ("II.v3.d", range(0, 2)), ("II.v3.e", [0]), ("II.v3.g", [0]),
            ("II.v3.a", [None]), ("II.v3.b", [None]), ("II.v4.c", range(0, 3))]
    for tag, ts in jobs:
        for t in ts:
            norm = em.normalize_mmod(em.build_mmod(tag, t))
            if norm.config.num_blowups <= 8:
                expected[key(norm)] = f"{tag}[{t}]"
    found = em.enumerate_mmods(em.FiberType("II"), 8)
    found_keys = {key(em.normalize_mmod(m)) for m in found}
    missing = [name for k, name in expected.items() if k not in found_keys]
    extra = found_keys - set(expected)
    assert not missing, missing
    assert not extra, len(extra)
    print(f"\nPASS criterion 11: enumerate_mmods(II, 8) re-derives exactly the "
          f"{len(expected)} catalog classes over type II (search found "
          f"{len(found)} configurations)")


def test_criterion_12_cli_contract(tmp_path, capsys):
    import io
    import os
    golden_dir = os.path.join(os.path.dirname(__file__), "golden")
    names = sorted(n for n in os.listdir(golden_dir) if n.endswith(".json"))
    assert len(names) >= 20
    from .test_cli import GOLDEN_CASES
    for name, argv in GOLDEN_CASES:
        code = cli.run(argv)
        out = capsys.readouterr().out
        with open(os.path.join(golden_dir, f"{name}.json")) as fh:
            assert out == fh.read(), name
        assert code == 0
    assert cli.run(["hj", "expand", "10", "4"]) == 1
    capsys.readouterr()
    bad = [{"valency": 3, "family": "f", "param_names": ["q"],
            "central_self_int_expr": {"const": 3},
            "legs_exprs": [[{"kind": "entry", "expr": {"const": 2}}],
                           [{"kind": "entry", "expr": {"const": 3}}],
                           [{"kind": "run2", "expr": {"q": 1}},
                            {"kind": "entry", "expr": {"const": 6, "q": 1}}]]}]
    path = tmp_path / "corrupt.json"
    path.write_text(json.dumps(bad))
    code = cli.run(["--json", "family", "verify", "3", "f", "--q", "2",
                    "--catalog", str(path)])
    out = capsys.readouterr().out
    assert code == 2 and json.loads(out)["status"] == "verification_failure"
    print(f"\nPASS criterion 12: {len(GOLDEN_CASES)} golden outputs stable; "
          "exit codes 0/1/2 verified including a corrupted-catalog fixture")
