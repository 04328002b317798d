import itertools
import random
from fractions import Fraction

import pytest

from qhdsurf import curve_config as cc
from qhdsurf.exact_arith import hj_eval
from qhdsurf.qhd_catalog import (QhdFamilyId, all_family_keys,
                                 tabulated_chi_over_e, family_id,
                                 instantiate_family, verify_family,
                                 wahl_generate, wahl_recognize)
from qhdsurf.whs_discrepancy import (StarGraph, chi_e, lc_class, qhd_identities,
                                     star_discrepancies, star_to_config,
                                     whs_identity_check)

F = Fraction


def grid(names, lo=0, hi=4):
    return [dict(zip(names, vals))
            for vals in itertools.product(range(lo, hi + 1), repeat=len(names))]


def family_params(key):
    from qhdsurf.qhd_catalog import load_catalog
    return load_catalog()[key]["param_names"]


# ---------------------------------------------------------------------------
# star graphs

def test_chi_e_examples():
    # family (f): chi/e = q/(q+6)
    for q in range(5):
        star = instantiate_family(family_id(3, "f", q=q))
        chi, e = chi_e(star)
        assert chi / e == F(q, q + 6)
    # valency 4: chi/e = (p+1)/(p+2)
    for fam in "abc":
        for p in range(5):
            star = instantiate_family(family_id(4, fam, p=p))
            chi, e = chi_e(star)
            assert chi / e == F(p + 1, p + 2)
    # any star with g = 0, t = 0 has chi = -2
    assert StarGraph(2, 0, ()).chi_value() == -2


def test_lc_class():
    assert lc_class(instantiate_family(family_id(3, "f", q=0))) == "log_canonical_boundary"
    assert lc_class(instantiate_family(family_id(3, "f", q=3))) == "non_log_canonical"
    assert lc_class(StarGraph(9, 0, ((2,), (2,), (2,)))) == "log_terminal"


def test_family_f_ending_values():
    for q in (0, 2, 5):
        star = instantiate_family(family_id(3, "f", q=q))
        disc = star_discrepancies(star)
        ends = [1 + leg[-1] for leg in disc.legs]
        assert ends == [F(3, q + 6), F(2, q + 6), F(1, q + 6)]


def test_valency4_type_a_long_leg():
    for p in range(4):
        star = instantiate_family(family_id(4, "a", p=p))
        disc = star_discrepancies(star)
        assert [1 + d for d in disc.legs[3]] == [
            F(k - (p + 1), p + 2) for k in range(1, p + 3)]
        assert all(1 + d == F(1, 3 * (p + 2)) for d in
                   (disc.legs[0][-1], disc.legs[1][-1], disc.legs[2][-1]))


def test_family_a_symmetric_case():
    for p in range(4):
        star = instantiate_family(family_id(3, "a", p=p, q=p, r=p))
        disc = star_discrepancies(star)
        for leg in disc.legs:
            assert [1 + d for d in leg] == [F(k - p, p + 3) for k in range(1, p + 2)]


def test_whs_identity_check_families():
    for key in all_family_keys():
        names = family_params(key)
        for env in grid(names, 0, 2):
            star = instantiate_family(QhdFamilyId(key[0], key[1], tuple(sorted(env.items()))))
            assert whs_identity_check(star)["ok"], (key, env)


def test_whs_identity_small_hand_case():
    star = StarGraph(2, 0, ((2,), (2,), (2,)))
    assert whs_identity_check(star)["ok"]


def test_qhd_identities_examples():
    assert qhd_identities(instantiate_family(family_id(3, "a", p=1, q=1, r=1)), 3)["ok"]
    assert qhd_identities(instantiate_family(family_id(3, "f", q=2)), 3)["ok"]
    assert qhd_identities(instantiate_family(family_id(4, "b", p=0)), 4)["ok"]


def test_monotonicity_of_discrepancies():
    # chi > 0 and chi/e < 1: discrepancies strictly increase along each leg
    # and every leg end is > -1
    for key in all_family_keys():
        names = family_params(key)
        for env in grid(names, 0, 2):
            star = instantiate_family(QhdFamilyId(key[0], key[1], tuple(sorted(env.items()))))
            chi, e = chi_e(star)
            if chi <= 0:
                continue
            assert chi / e < 1
            disc = star_discrepancies(star)
            assert disc.central > -2
            for leg in disc.legs:
                seq = [disc.central] + list(leg)
                assert all(a < b for a, b in zip(seq, seq[1:]))
                assert leg[-1] > -1


# ---------------------------------------------------------------------------
# Wahl chains

def test_wahl_generate_counts():
    for L in range(1, 9):
        chains = wahl_generate(L)
        by_len = {}
        for ch in chains:
            by_len.setdefault(len(ch), set()).add(ch)
        for ell in range(1, L + 1):
            assert len(by_len[ell]) == 2 ** (ell - 1)


def test_wahl_generate_small():
    assert wahl_generate(1) == {(4,)}
    assert wahl_generate(2) == {(4,), (2, 5), (5, 2)}


def test_generated_chains_are_wahl():
    for ch in wahl_generate(7):
        m, q = hj_eval(ch)
        wp = wahl_recognize(ch)
        assert wp is not None
        assert (wp.n * wp.n, wp.n * wp.a - 1) == (m, q)


def test_wahl_recognize_examples():
    assert wahl_recognize([2, 2, 2, 2, 8]) is not None
    assert wahl_recognize([2, 2, 2, 2, 8]).n == 6
    assert wahl_recognize([2, 2, 2, 2, 8]).a == 5
    assert wahl_recognize([3, 5, 2]).n == 5
    assert wahl_recognize([3, 5, 2]).a == 2
    assert wahl_recognize([2, 3]) is None


def test_wahl_closure_and_completeness():
    # both extension rules stay inside the generated set
    gen7 = wahl_generate(7)
    gen8 = wahl_generate(8)
    for ch in gen7:
        assert (2,) + ch[:-1] + (ch[-1] + 1,) in gen8
        assert (ch[0] + 1,) + ch[1:] + (2,) in gen8
    # every length-(L+1) chain arises from a length-L one
    for ch in gen8 - gen7:
        parents = set()
        if ch[0] == 2:
            parents.add(ch[1:-1] + (ch[-1] - 1,))
        if ch[-1] == 2:
            parents.add((ch[0] - 1,) + ch[1:-1])
        assert any(p in gen7 for p in parents if all(e >= 2 for e in p))


def test_recognition_completeness_small():
    # for L <= 8 recognition accepts exactly the generated chains among
    # all chains with small entries (sampled exhaustively for L <= 4)
    import itertools as it
    gen = wahl_generate(8)
    for L in range(1, 5):
        for ch in it.product(range(2, L + 4), repeat=L):
            assert (wahl_recognize(ch) is not None) == (ch in gen)


def test_recognition_rejects_random_non_wahl():
    rng = random.Random(13)
    gen = wahl_generate(9)
    rejected = 0
    tried = 0
    while rejected < 1000 and tried < 20000:
        L = rng.randint(1, 8)
        ch = tuple(rng.randint(2, 9) for _ in range(L))
        tried += 1
        if ch in gen:
            continue
        assert wahl_recognize(ch) is None
        rejected += 1
    assert rejected == 1000


# ---------------------------------------------------------------------------
# triple verification

def test_verify_family_spot_checks():
    assert verify_family(family_id(3, "f", q=0))["ok"]
    assert verify_family(family_id(3, "g", p=0, q=3, r=2))["ok"]
    assert verify_family(family_id(4, "c", p=3))["ok"]


def test_tabulated_chi_over_e_examples():
    assert tabulated_chi_over_e(family_id(3, "c", q=1, r=2)) == \
        F((1 + 1) * (2 + 1) - 1, (1 + 3) * (2 + 3) - 1)
    assert tabulated_chi_over_e(family_id(3, "e", p=2, q=1)) == \
        1 - F(3 * 5, 2 * 5 * 4 - 3 * 3)
    for fam in "abc":
        assert tabulated_chi_over_e(family_id(4, fam, p=2)) == F(3, 4)


def test_family_errors():
    with pytest.raises(ValueError):
        instantiate_family(family_id(3, "z", q=0))
    with pytest.raises(ValueError):
        instantiate_family(family_id(3, "f", p=0))
    with pytest.raises(ValueError):
        instantiate_family(family_id(3, "f", q=-1))
