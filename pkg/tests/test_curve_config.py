import random
from fractions import Fraction

import pytest

from qhdsurf import curve_config as cc
from qhdsurf.curve_config import (AtIntersection, AtNode, CascadeAmbiguityError,
                                  CurveConfig, CurveRecord, FreePoint, OnCurve,
                                  blow_down, blow_up, chain_config,
                                  contract_cascade, is_negative_definite,
                                  q_invariant, solve_discrepancies)
from qhdsurf.exact_arith import cqs_discrepancies


def test_intersection_matrix_chain():
    cfg = chain_config([3, 5, 2])
    mat = cfg.intersection_matrix(["C1", "C2", "C3"])
    assert mat == [[-3, 1, 0], [1, -5, 1], [0, 1, -2]]
    single = chain_config([4])
    assert single.intersection_matrix() == [[-4]]


def test_negative_definite():
    assert is_negative_definite(chain_config([3, 5, 2]))
    assert is_negative_definite(chain_config([2, 2, 2]))
    zero = CurveConfig([CurveRecord("F", 0)], [])
    assert not is_negative_definite(zero)
    # reduced I3 cycle: determinant 0
    cycle = CurveConfig(
        [CurveRecord(i, -2) for i in range(3)],
        [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
    assert not is_negative_definite(cycle)


def test_solve_discrepancies_matches_closed_form():
    for chain in [(4,), (3, 5, 2), (2, 2, 2), (2, 5), (5, 2, 2), (2, 2, 2, 2, 8)]:
        cfg = chain_config(chain)
        sol = solve_discrepancies(cfg)
        expected = cqs_discrepancies(chain)
        assert [sol[f"C{i + 1}"] for i in range(len(chain))] == expected


def test_solve_discrepancies_random_chains():
    rng = random.Random(3)
    for _ in range(60):
        r = rng.randint(1, 10)
        chain = tuple(rng.randint(2, 12) for _ in range(r))
        cfg = chain_config(chain)
        sol = solve_discrepancies(cfg)
        assert [sol[f"C{i + 1}"] for i in range(r)] == cqs_discrepancies(chain)


def test_blow_up_at_intersection():
    cfg = chain_config([2, 3])
    out = blow_up(cfg, AtIntersection("C1", "C2"), new_id="E")
    assert out.curve("C1").self_int == -3
    assert out.curve("C2").self_int == -4
    assert out.curve("E").self_int == -1
    assert out.edge_mult("C1", "C2") == 0
    assert out.edge_mult("E", "C1") == 1 and out.edge_mult("E", "C2") == 1


def test_blow_up_node_recovers_i1():
    # nodal fiber: self_int 0 with one node, mu_F 1
    i1 = CurveConfig([CurveRecord("F", 0, nodes=1, mu_f=1)], [])
    up = blow_up(i1, AtNode("F"), new_id="G")
    assert up.curve("F").self_int == -4
    assert up.curve("F").nodes == 0
    assert up.curve("G").mu_f == 2
    assert up.curve("G").per_blowup_mu == (1,)
    assert up.edge_mult("F", "G") == 2
    # blowing back down recovers the nodal curve
    down = blow_down(up, "G")
    assert down.curve("F").self_int == 0
    assert down.curve("F").nodes == 1


def test_blow_up_blow_down_inverse_all_loci():
    base = chain_config([2, 3, 4])
    base = CurveConfig(
        [cc.CurveRecord(c.id, c.self_int, in_c=c.in_c, mu_f=i + 1,
                        per_blowup_mu=()) for i, c in enumerate(base.curves)],
        base.edges)
    nodal = CurveConfig(list(base.curves) + [CurveRecord("N", -2, nodes=1, mu_f=2)],
                        list(base.edges) + [("C3", "N", 1)])
    for cfg, locus in [
            (base, OnCurve("C2")),
            (base, AtIntersection("C1", "C2")),
            (base, FreePoint()),
            (nodal, AtNode("N"))]:
        up = blow_up(cfg, locus, new_id="X")
        down = blow_down(up, "X")
        assert down.edges == cfg.edges
        assert down.curves == cfg.curves


def test_blow_down_requires_minus_one():
    cfg = chain_config([2, 3])
    with pytest.raises(ValueError):
        blow_down(cfg, "C1")


def test_contract_middle_of_2_1_2_is_ambiguous():
    cfg = CurveConfig(
        [CurveRecord("A", -2), CurveRecord("E", -1), CurveRecord("B", -2)],
        [("A", "E", 1), ("E", "B", 1)])
    with pytest.raises(CascadeAmbiguityError):
        contract_cascade(cfg, "E")


def test_contract_cascade_example_step8():
    # [2^q, q+6]-(1)-[2^{q+4}, q+8] contracts to [6] for q = 0..8
    for q in range(9):
        entries = [2] * q + [q + 6] + [1] + [2] * (q + 4) + [q + 8]
        cfg = chain_config([abs(e) for e in entries], prefix="Z")
        start = f"Z{q + 2}"  # the (-1)
        cfg = cfg.replace_curve(start, self_int=-1)
        res, contracted = contract_cascade(cfg, start)
        assert len(res.curves) == 1
        assert res.curves[0].self_int == -6

        # [2^{q+4}, q+8]-(1)-[2,2,2,2,2] contracts to [2^{q+4}, q+2]
        entries2 = [2] * (q + 4) + [q + 8] + [1] + [2] * 5
        cfg2 = chain_config(entries2, prefix="Y")
        start2 = f"Y{q + 6}"
        cfg2 = cfg2.replace_curve(start2, self_int=-1)
        res2, _ = contract_cascade(cfg2, start2)
        chain = sorted((c.id for c in res2.curves), key=lambda s: int(s[1:]))
        vals = [-res2.curve(i).self_int for i in chain]
        assert vals == [2] * (q + 4) + [q + 2]


def test_blow_down_multi_intersection_marks_nodes():
    # contract a (-1) meeting a (-4) twice: image is a nodal 0-curve
    cfg = CurveConfig([CurveRecord("A", -4), CurveRecord("E", -1)],
                      [("A", "E", 2)])
    out = blow_down(cfg, "E")
    assert out.curve("A").self_int == 0
    assert out.curve("A").nodes == 1


def test_q_invariant():
    cfg = chain_config([2, 3, 7])
    # single smooth rational curve: q = 1
    for cid in cfg.ids():
        assert q_invariant(cfg, {cid: 1}) == 1
    # q(D+D') = q(D) + q(D') - D.D'
    d1 = {"C1": 1}
    d2 = {"C2": 1}
    both = {"C1": 1, "C2": 1}
    assert q_invariant(cfg, both) == (q_invariant(cfg, d1) + q_invariant(cfg, d2)
                                      - cfg.divisor_dot(d1, d2))
    # q(nD) = n q(D) - C(n,2) D^2
    for n in (2, 3, 5):
        nd = {"C2": n}
        assert q_invariant(cfg, nd) == (n * q_invariant(cfg, d2)
                                        - n * (n - 1) // 2 * cfg.pairing("C2", "C2"))


def test_q_preserved_by_blow_up_of_total_transform():
    rng = random.Random(5)
    for _ in range(30):
        chain = tuple(rng.randint(2, 6) for _ in range(rng.randint(2, 5)))
        cfg = chain_config(chain)
        divisor = {cid: rng.randint(0, 3) for cid in cfg.ids()}
        loci = [OnCurve("C1"), AtIntersection("C1", "C2"), FreePoint()]
        locus = loci[rng.randrange(3)]
        q_before = q_invariant(cfg, divisor)
        up = blow_up(cfg, locus, new_id="X")
        # total transform: new curve with multiplicity = sum over branches
        branches = cc._locus_branches(cfg, locus)
        total = dict(divisor)
        total["X"] = sum(divisor.get(b, 0) for b in branches)
        assert q_invariant(up, total) == q_before
