#!/usr/bin/env python3
"""Derive the QHD family star graphs from the published closed forms.

For each family the published tables fixes chi/e and the ending discrepancies
1+d_{i,r_i} = (qinv_i - chi/e)/m_i of every leg.  Enumerating the m_i
that make qinv_i integral, expanding the legs, and demanding an integer
central self-intersection (plus every printed recursion, the linear
oracle, negative definiteness and chi/e < 1) pins the graphs down.
The fitted parametric data is written to qhd_families.json.
"""

import itertools
import json
import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from qhdsurf import curve_config as cc
from qhdsurf.exact_arith import hj_expand, hj_eval, hj_sequences
from qhdsurf.whs_discrepancy import (StarGraph, star_discrepancies, chi_e,
                                     star_to_config)

F = Fraction


# ---------------------------------------------------------------------------
# published-table data: chi/e, ending values, leg-length constraints, recursions

def fam_a(p, q, r):
    D = (p + 2) * (q + 2) * (r + 2) + 1
    return {
        "x": F((p + 1) * (q + 1) * (r + 1) - 1, D),
        "v": [F((q + 1) * (r + 2) + 1, D),
              F((p + 1) * (q + 2) + 1, D),
              F((r + 1) * (p + 2) + 1, D)],
        "len": [q + 1, p + 1, r + 1],
    }


def rec_a(vals, x, p, q, r):
    v1, v2, v3 = vals["v"]
    checks = []
    for k in range(1, q + 2):
        checks.append(("1", k, k * v3 - x))
    for k in range(1, p + 2):
        checks.append(("2", k, k * v1 - x))
    for k in range(1, r + 2):
        checks.append(("3", k, k * v2 - x))
    if p == q == r:
        for i in "123":
            for k in range(1, p + 2):
                checks.append((i, k, F(k - p, p + 3)))
    return checks


def fam_b(p, q, r):
    D = (p + 2) * (q + 3) * (r + 2) + (q + 2)
    return {
        "x": F((p + 2) * (q + 2) * (r + 1) - (r + 2), D),
        "v": [F((p + 2) * (q + 3) - 1, D),
              F((p + 2) * (r + 1) + 1, D),
              F(4 + q + r, D)],
        "len": [p + q + 2, r + 1, None],
    }


def rec_b(vals, x, p, q, r):
    v1, v2, v3 = vals["v"]
    checks = []
    d1 = {}
    for k in range(1, q + 2):
        d1[k] = k * v2 - x
        checks.append(("1", k, d1[k]))
    for k in range(q + 2, p + q + 3):
        d1[k] = (k - (q + 1)) * v3 + d1[q + 1]
        checks.append(("1", k, d1[k]))
    for k in range(1, r + 2):
        checks.append(("2", k, k * v1 - x))
    if p == 0 and r == q + 1:
        for k in range(1, q + 3):
            val = F(k + 3, q + 4) - 1
            checks.append(("1", k, val))
            checks.append(("2", k, val))
    return checks


def fam_c(q, r):
    D = (q + 3) * (r + 3) - 1
    return {
        "x": F((q + 1) * (r + 1) - 1, D),
        "v": [F(q + 2, D), F(q + r + 4, D), F(r + 2, D)],
        "len": [q + 1, None, r + 1],
    }


def rec_c(vals, x, q, r):
    v1, v2, v3 = vals["v"]
    checks = []
    for k in range(1, q + 2):
        checks.append(("1", k, k * v3 - x))
    for k in range(1, r + 2):
        checks.append(("3", k, k * v1 - x))
    if q == r:
        for k in range(1, q + 2):
            checks.append(("1", k, F(k - q, q + 4)))
            checks.append(("3", k, F(k - q, q + 4)))
    return checks


def fam_d(q, r):
    D = (q + 4) * (r + 2) + 2
    return {
        "x": F((q + 2) * (r + 2) - 2, D),
        "v": [F(r + 2, D), F(2, D), F(r + 4, D)],
        "len": [q + r + 2, None, None],
    }


def rec_d(vals, x, q, r):
    v1, v2, v3 = vals["v"]
    checks = []
    d1 = {}
    for k in range(1, q + 2):
        d1[k] = k * v1 - x
        checks.append(("1", k, d1[k]))
    for k in range(q + 2, q + r + 3):
        d1[k] = (k - (q + 1)) * v2 + d1[q + 1]
        checks.append(("1", k, d1[k]))
    if r == 0:
        for k in range(1, q + 3):
            checks.append(("1", k, F(4 + k, 5 + q) - 1))
    if r == 2:
        for k in range(1, q + 2):
            checks.append(("1", k, F(2 * (k + 3), 2 * q + 9) - 1))
        for k in range(q + 2, q + 5):
            checks.append(("1", k, F(k - (q + 2), 2 * q + 9)))
    return checks


def fam_e(p, q):
    D = 2 * (p + 3) * (q + 3) - 3 * (q + 2)
    return {
        "x": 1 - F(3 * (p + 3), D),
        "v": [F(2 * p + 3, D), F(p + 3, D), F(3, D)],
        "len": [p + q + 2, None, None],
    }


def rec_e(vals, x, p, q):
    # the printed second-range slope factor "k" is (k - (q+1)); the p=3
    # special case confirms the correction
    v1, v2, v3 = vals["v"]
    checks = []
    d1 = {}
    for k in range(1, q + 2):
        d1[k] = k * v1 - x
        checks.append(("1", k, d1[k]))
    for k in range(q + 2, p + q + 3):
        d1[k] = (k - (q + 1)) * v3 + d1[q + 1]
        checks.append(("1", k, d1[k]))
    if p == 0:
        for k in range(1, q + 3):
            checks.append(("1", k, F(k + 3, q + 4) - 1))
    if p == 3:
        for k in range(1, q + 2):
            checks.append(("1", k, F(3 * (k + 2), 3 * q + 10) - 1))
        for k in range(q + 2, q + 6):
            checks.append(("1", k, F(k - (q + 2), 3 * q + 10)))
    return checks


def fam_f(q):
    return {
        "x": F(q, q + 6),
        "v": [F(3, q + 6), F(2, q + 6), F(1, q + 6)],
        "len": [1, None, q + 1],
    }


def rec_f(vals, x, q):
    return [("3", k, F(k - q, q + 6)) for k in range(1, q + 2)]


def fam_g(p, q, r):
    D = (p + 2) * (q + 3) * (r + 3) - q + r + 1
    return {
        "x": F((p + 2) * (q + 2) * (r + 3) - (p + q + 5), D),
        "v": [F((p + 2) * (r + 3) - 1, D), F(r + 4, D), F(p + 3, D)],
        "len": [p + q + r + 3, None, None],
    }


def rec_g(vals, x, p, q, r):
    # same "k" -> "(k - offset)" correction as family (e); the (p=0, r=2)
    # special case confirms it
    v1, v2, v3 = vals["v"]
    checks = []
    d1 = {}
    for k in range(1, q + 2):
        d1[k] = k * v1 - x
        checks.append(("1", k, d1[k]))
    for k in range(q + 2, q + r + 3):
        d1[k] = (k - (q + 1)) * v3 + d1[q + 1]
        checks.append(("1", k, d1[k]))
    for k in range(q + r + 3, p + q + r + 4):
        d1[k] = (k - (q + r + 2)) * v2 + d1[q + r + 2]
        checks.append(("1", k, d1[k]))
    if p == 0 and r == 2:
        for k in range(1, q + 2):
            checks.append(("1", k, F(3 * k - 3 * q - 5, 3 * q + 11)))
        for k in range(q + 2, q + 5):
            checks.append(("1", k, F(k - (q + 3), 3 * q + 11)))
        checks.append(("1", q + 5, F(3, 3 * q + 11)))
    if p == 1 and r == 0:
        for k in range(1, q + 2):
            checks.append(("1", k, F(2 * (k - q) - 3, 2 * q + 7) + 1 - 1))
        for k in range(q + 2, q + 5):
            checks.append(("1", k, F(k - (q + 2), 2 * q + 7)))
    return checks


def fam_h(q):
    return {
        "x": F(q + 1, q + 3),
        "v": [F(1, q + 3), F(1, 2 * (q + 3)), F(1, 2 * (q + 3))],
        "len": [q + 2, None, None],
    }


def rec_h(vals, x, q):
    return [("1", k, F(k - (q + 1), q + 3)) for k in range(1, q + 3)]


def fam_i(q):
    return {
        "x": F(q + 1, q + 3),
        "v": [F(1, q + 3), F(2, 3 * (q + 3)), F(1, 3 * (q + 3))],
        "len": [q + 2, None, None],
    }


rec_i = rec_h


def fam_j(q):
    return {
        "x": F(q + 1, q + 4),
        "v": [F(3, 2 * (q + 4)), F(1, q + 4), F(1, 2 * (q + 4))],
        "len": [None, q + 2, None],
    }


def rec_j(vals, x, q):
    return [("2", k, F(k - (q + 1), q + 4)) for k in range(1, q + 3)]


def fam_v4(tag):
    def data(p):
        shorts = {"a": [F(1, 3 * (p + 2))] * 3,
                  "b": [F(1, 2 * (p + 2)), F(1, 4 * (p + 2)), F(1, 4 * (p + 2))],
                  "c": [F(1, 2 * (p + 2)), F(1, 3 * (p + 2)), F(1, 6 * (p + 2))]}[tag]
        return {"x": F(p + 1, p + 2),
                "v": shorts + [F(1, p + 2)],
                "len": [None, None, None, p + 2]}
    return data


def rec_v4(vals, x, p):
    return [("4", k, F(k - (p + 1), p + 2)) for k in range(1, p + 3)]


FAMILIES = {
    ("3", "a"): (fam_a, rec_a, ("p", "q", "r")),
    ("3", "b"): (fam_b, rec_b, ("p", "q", "r")),
    ("3", "c"): (fam_c, rec_c, ("q", "r")),
    ("3", "d"): (fam_d, rec_d, ("q", "r")),
    ("3", "e"): (fam_e, rec_e, ("p", "q")),
    ("3", "f"): (fam_f, rec_f, ("q",)),
    ("3", "g"): (fam_g, rec_g, ("p", "q", "r")),
    ("3", "h"): (fam_h, rec_h, ("q",)),
    ("3", "i"): (fam_i, rec_i, ("q",)),
    ("3", "j"): (fam_j, rec_j, ("q",)),
    ("4", "a"): (fam_v4("a"), rec_v4, ("p",)),
    ("4", "b"): (fam_v4("b"), rec_v4, ("p",)),
    ("4", "c"): (fam_v4("c"), rec_v4, ("p",)),
}


# ---------------------------------------------------------------------------
# solving

def leg_candidates(v, x, length, qinv_bound=120, max_len=40):
    """Legs [hj_expand(m,q)] with (qinv - x)/m == v, qinv the inverse of q."""
    from math import gcd
    out = []
    for qinv in range(1, qinv_bound + 1):
        m_f = (qinv - x) / v
        if m_f.denominator != 1:
            continue
        m = int(m_f)
        if m < 2 or not 0 < qinv < m or gcd(qinv, m) != 1:
            continue
        q = pow(qinv, -1, m)
        chain = hj_expand(m, q)
        if len(chain) <= max_len and (length is None or len(chain) == length):
            out.append(chain)
    return out


def verify_star(star, vals, checks):
    x_target = vals["x"]
    chi, e = chi_e(star)
    if e <= 0 or chi / e != x_target or chi / e >= 1:
        return False
    # QHD identities (the classification constraint): K_X.C and the
    # ending-discrepancy relation pin the graph among all stars with the
    # same printed discrepancy data.
    ncurves = 1 + sum(len(l) for l in star.legs)
    kx_c = (star.e0 - 2) + sum(e_i - 2 for leg in star.legs for e_i in leg)
    if star.t == 3 and kx_c != 1 + ncurves:
        return False
    if star.t == 4 and kx_c != ncurves:
        return False
    disc = star_discrepancies(star)
    if star.t == 3 and sum(l[-1] for l in disc.legs) - disc.central != -1:
        return False
    if star.t == 4 and disc.legs[-1][-1] - disc.central != 1:
        return False
    for i, leg_d in enumerate(disc.legs):
        if 1 + leg_d[-1] != vals["v"][i]:
            return False
    for leg_idx, k, val in checks:
        li = int(leg_idx) - 1
        if k > len(disc.legs[li]):
            return False
        if 1 + disc.legs[li][k - 1] != val:
            return False
    config = star_to_config(star)
    if not cc.is_negative_definite(config):
        return False
    oracle = cc.solve_discrepancies(config)
    if oracle["C0"] != disc.central:
        return False
    for i, leg in enumerate(star.legs, start=1):
        for j in range(1, len(leg) + 1):
            if oracle[f"L{i}.{j}"] != disc.legs[i - 1][j - 1]:
                return False
    # monotonicity: chi > 0 implies discrepancies grow away from the center
    if chi > 0:
        for leg_d in disc.legs:
            seq = [disc.central] + list(leg_d)
            if any(seq[a] >= seq[a + 1] for a in range(len(seq) - 1)):
                return False
            if chi / e < 1 and leg_d[-1] <= -1:
                return False
    return True


# legs pinned by the fixed-curve columns of the classification tables
ANCHORS = {
    ("3", "h"): {1: (4,), 2: (4,)},
    ("4", "a"): {0: (3,), 1: (3,), 2: (3,)},
    ("4", "b"): {0: (2,), 1: (4,), 2: (4,)},
    ("4", "c"): {0: (2,), 1: (3,), 2: (6,)},
}


def solve_tuple(key, params):
    fam, rec, names = FAMILIES[key]
    vals = fam(*params)
    x = vals["x"]
    if x == 0:
        return None  # log-canonical tuple: e0 not pinned; handled by the fit
    checks = rec(vals, x, *params)
    bound = 120 if len(vals["v"]) == 3 else 48
    anchors = ANCHORS.get(key, {})
    cand_legs = [[anchors[i]] if i in anchors
                 else leg_candidates(v, x, vals["len"][i], qinv_bound=bound)
                 for i, v in enumerate(vals["v"])]
    results = []
    for combo in itertools.product(*cand_legs):
        fracs = [hj_eval(c) for c in combo]
        chi = 2 * 0 - 2 + len(combo) - sum(F(1, m) for m, _ in fracs)
        if chi <= 0:
            continue
        e = chi / x
        e0f = e + sum(F(q, m) for m, q in fracs)
        if e0f.denominator != 1 or e0f < 2:
            continue
        # cheap K_X.C pre-filter before the full verification
        ncurves = 1 + sum(len(c) for c in combo)
        kx_c = (int(e0f) - 2) + sum(e_i - 2 for c in combo for e_i in c)
        if len(combo) == 3 and kx_c != 1 + ncurves:
            continue
        if len(combo) == 4 and kx_c != ncurves:
            continue
        try:
            star = StarGraph(int(e0f), 0, combo)
        except ValueError:
            continue
        if verify_star(star, vals, checks):
            results.append(star)
    return results


# ---------------------------------------------------------------------------
# pattern fitting

def fit_affine(points, names):
    """Fit value = c0 + sum c_i param_i over the dict params->value; exact."""
    rows = [(1,) + tuple(p) for p in points]
    vals = [points[p] for p in points]
    ncols = 1 + len(names)
    # least-squares-free exact fit: solve on a subset, verify on all
    import itertools as it
    for subset in it.combinations(range(len(rows)), min(ncols, len(rows))):
        mat = [rows[i] for i in subset]
        rhs = [vals[i] for i in subset]
        # gaussian solve (may be singular for degenerate subsets)
        m = [[F(x) for x in row] + [F(rhs[i])] for i, row in enumerate(mat)]
        n = len(m)
        cols = ncols
        # reduce
        piv_cols = []
        r = 0
        for cidx in range(cols):
            piv = next((rr for rr in range(r, n) if m[rr][cidx] != 0), None)
            if piv is None:
                continue
            m[r], m[piv] = m[piv], m[r]
            inv = 1 / m[r][cidx]
            for rr in range(n):
                if rr != r and m[rr][cidx]:
                    f = m[rr][cidx] * inv
                    for cc2 in range(cols + 1):
                        m[rr][cc2] -= f * m[r][cc2]
            piv_cols.append(cidx)
            r += 1
        coeffs = [F(0)] * cols
        okrow = True
        for rr in range(r, n):
            if m[rr][cols] != 0:
                okrow = False
        if not okrow:
            continue
        for k, cidx in enumerate(piv_cols):
            coeffs[cidx] = m[k][cols] / m[k][cidx]
        if all(sum(c * v for c, v in zip(coeffs, row)) == val
               for row, val in zip(rows, vals)):
            if all(c.denominator == 1 for c in coeffs):
                return {("const" if i == 0 else names[i - 1]): int(c)
                        for i, c in enumerate(coeffs) if c != 0 or i == 0}
    return None


def chain_structure(chain):
    """Run-length shape: list of ('run2', n) / ('entry', e)."""
    out = []
    for val, grp in itertools.groupby(chain):
        n = len(list(grp))
        if val == 2:
            out.append(("run2", n))
        else:
            out.extend(("entry", val) for _ in range(n))
    return out


def fit_family(key, solved, names):
    """solved: dict params -> StarGraph; returns parametric description."""
    # central
    e0_pts = {p: s.e0 for p, s in solved.items()}
    e0_fit = fit_affine(e0_pts, names)
    if e0_fit is None:
        raise RuntimeError(f"{key}: central fit failed: {e0_pts}")
    legs_fit = []
    nlegs = len(next(iter(solved.values())).legs)
    for i in range(nlegs):
        # structure from the largest tuple; tuples whose shape degenerates
        # (runs vanishing, entries hitting 2) are skipped in the fit and
        # covered by the final whole-grid verification instead
        big = max(solved, key=lambda p: sum(p))
        shape = chain_structure(solved[big].legs[i])
        pts_per_piece = [dict() for _ in shape]
        for p, s in solved.items():
            st = chain_structure(s.legs[i])
            if len(st) != len(shape):
                st = align_shape(st, shape)
                if st is None:
                    continue
            if any(st[j][0] != shape[j][0] for j in range(len(shape))):
                continue
            for j in range(len(shape)):
                pts_per_piece[j][p] = st[j][1]
        items = []
        for piece_idx, (kind, _) in enumerate(shape):
            fit = fit_affine(pts_per_piece[piece_idx], names)
            if fit is None:
                raise RuntimeError(
                    f"{key} leg {i + 1} piece {piece_idx}: no affine fit "
                    f"{pts_per_piece[piece_idx]}")
            items.append({"kind": kind, "expr": fit})
        legs_fit.append(items)
    return {"central": e0_fit, "legs": legs_fit}


def align_shape(st, shape):
    """Insert zero-length run2 pieces so st matches the template shape."""
    out = []
    it = iter(st)
    cur = next(it, None)
    for kind, _ in shape:
        if cur is not None and cur[0] == kind:
            out.append(cur)
            cur = next(it, None)
        elif kind == "run2":
            out.append(("run2", 0))
        else:
            return None
    if cur is not None:
        return None
    return out


def expand_leg(items, env):
    chain = []
    for item in items:
        val = item["expr"].get("const", 0) + sum(
            item["expr"].get(n, 0) * env[n] for n in env)
        if item["kind"] == "run2":
            chain.extend([2] * val)
        else:
            chain.append(val)
    return tuple(chain)


def main():
    grid_by_arity = {1: [(v,) for v in range(0, 7)],
                     2: list(itertools.product(range(0, 5), repeat=2)),
                     3: list(itertools.product(range(0, 4), repeat=3))}
    out = []
    for key in sorted(FAMILIES):
        fam, rec, names = FAMILIES[key]
        solved = {}
        ambiguous = {}
        for params in grid_by_arity[len(names)]:
            res = solve_tuple(key, params)
            if res is None:
                continue
            if len(res) == 1:
                solved[params] = res[0]
            elif len(res) > 1:
                ambiguous[params] = res
            else:
                print(f"  !! {key} {params}: NO solution")
        if ambiguous:
            print(f"{key}: AMBIGUOUS at {list(ambiguous)[:3]}:")
            for p, stars in list(ambiguous.items())[:2]:
                for s in stars:
                    print(f"    {p}: e0={s.e0} legs={s.legs}")
        if not solved:
            print(f"{key}: NOTHING SOLVED")
            continue
        fit = fit_family(key, solved, names)
        # re-verify the fit over the full grid, including chi = 0 tuples
        bad = []
        for params in grid_by_arity[len(names)]:
            env = dict(zip(names, params))
            e0 = fit["central"].get("const", 0) + sum(
                fit["central"].get(n, 0) * env[n] for n in names)
            legs = [expand_leg(items, env) for items in fit["legs"]]
            try:
                star = StarGraph(e0, 0, legs)
            except ValueError as exc:
                bad.append((params, str(exc)))
                continue
            vals = fam(*params)
            checks = rec(vals, vals["x"], *params)
            if not verify_star(star, vals, checks):
                bad.append((params, "full verification failed"))
        status = "OK" if not bad else f"BAD {bad[:4]}"
        print(f"{key}: solved {len(solved)} tuples; fit central={fit['central']} "
              f"legs={fit['legs']}  -> {status}")
        out.append({"valency": int(key[0]), "family": key[1],
                    "param_names": list(names),
                    "central_self_int_expr": fit["central"],
                    "legs_exprs": fit["legs"]})
    dest = os.path.join(os.path.dirname(__file__), "..", "src", "qhdsurf",
                        "data", "qhd_families.json")
    os.makedirs(os.path.dirname(dest), exist_ok=True)
    with open(dest, "w") as fh:
        json.dump(out, fh, indent=1, sort_keys=True)
    print(f"wrote {dest}")


if __name__ == "__main__":
    main()
