"""Dolgachev-degeneration enumeration and the flip combinatorics.

A degeneration plan for D_{a,b} pairs one catalog M-modification whose
lambda contributes 1 - 1/a with the Wahl chain [b+2, 2, ..., 2] over an
I_1 fiber, so that K_W = (1 - 1/a - 1/b) F.  The flip of the Seifert
partial resolution is computed purely through cascade contractions of
chains.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from . import curve_config as cc
from .curve_config import chain_config, contract_cascade
from .elliptic_mmod import (ALIASES, V3V4_ENTRIES, WAHL_TAGS, _affine_t,
                            catalog_lambda)
from .exact_arith import hj_dual, hj_eval, validate_chain
from .qhd_catalog import WahlParams, wahl_generate, wahl_recognize

F = Fraction


# ---------------------------------------------------------------------------
# plans

@dataclass(frozen=True)
class DegenerationPlan:
    a: int
    b: int
    tag: str                 # catalog tag of the M-modification over F1
    params: tuple            # ((name, value), ...) for the tag
    lambda1: Fraction        # table lambda of that M-modification
    lambda_bar: Fraction     # -1, or -1 + (y-1)/y for a yI_1 fiber
    wahl_chain: tuple        # [b+2, 2^(b-2)] over F2 = I_1
    k_coeff: Fraction

    @property
    def display(self) -> str:
        ps = ",".join(f"{k}={v}" for k, v in self.params)
        return f"D_({self.a},{self.b}): {self.tag}" + (f"[{ps}]" if ps else "")


def canonical_coefficient(lambdas, lambda_bar) -> Fraction:
    """The coefficient of F in K_W: lambda_bar + sum of the lambdas."""
    return Fraction(lambda_bar) + sum(map(Fraction, lambdas))


def _fixed_lambda_denominator(tag) -> int:
    return catalog_lambda(tag).denominator


_FIXED_TAGS = ["II.v3.a", "II.v3.b", "II.v3.c", "III.v3.a", "III.v3.b"] + \
    list(WAHL_TAGS)

_PARAM_TAGS = ["II.v3.d", "II.v3.e", "II.v3.f", "II.v3.g", "II.v3.i",
               "II.v3.j", "II.v4.c", "III.v3.c", "III.v3.d", "III.v3.g",
               "III.v3.h", "III.v4.b", "IV.v3.a", "IV.v3.b", "IV.v3.c",
               "IV.v4.a"]

_ALIAS_AT_ZERO = {base: alias for alias, (base, t0) in ALIASES.items() if t0 == 0}


def _display_tag(tag, t):
    if t == 0 and tag in _ALIAS_AT_ZERO:
        return _ALIAS_AT_ZERO[tag]
    return tag


def _wahl_chain_for(b: int) -> tuple:
    return (b + 2,) + (2,) * (b - 2)


def _solve_affine(expr, target):
    """Nonnegative integer t with expr(t) == target, if any."""
    c1 = _affine_t(expr, 1) - _affine_t(expr, 0)
    c0 = _affine_t(expr, 0)
    if c1 == 0:
        return 0 if c0 == target else None
    t, r = divmod(target - c0, c1)
    return t if r == 0 and t >= 0 else None


def _plans_for_orientation(a: int, b: int):
    """Plans whose interesting M-modification sits over the a-side fiber."""
    plans = []
    chain = _wahl_chain_for(b)
    lam2 = F(b - 1, b)
    for tag in _FIXED_TAGS:
        lam = catalog_lambda(tag)
        if lam.denominator == a:
            plans.append(DegenerationPlan(
                a, b, tag, (), lam, F(-1), chain,
                canonical_coefficient([lam, lam2], -1)))
    for tag in _PARAM_TAGS:
        ent = V3V4_ENTRIES[tag]
        t = _solve_affine(ent["lam"][1], a)
        if t is None:
            continue
        lam = catalog_lambda(tag, t)
        name = ent["param"]
        plans.append(DegenerationPlan(
            a, b, _display_tag(tag, t), ((name, t),), lam, F(-1), chain,
            canonical_coefficient([lam, lam2], -1)))
    # yI_1(n, a0) over a multiple fiber of multiplicity y >= 2, yn = a;
    # the associated minimal elliptic surface is the Halphen D_{y,b}
    for y in range(2, a + 1):
        if a % y:
            continue
        n = a // y
        if n < 2:
            continue
        for a0 in range(1, n):
            if gcd(n, a0) != 1 or a0 > n - a0:
                continue
            lam = F(n - 1, y * n)
            lam_bar = F(-1) + F(y - 1, y)
            plans.append(DegenerationPlan(
                a, b, "yI", (("a0", a0), ("d", 1), ("n", n), ("y", y)),
                lam, lam_bar, chain,
                canonical_coefficient([lam, lam2], lam_bar)))
    return plans


def dolgachev_enumerate(a: int, b: int):
    """All Table-lambda plans for QHD degenerations of D_{a,b}."""
    if a < 2 or b < 2 or a * b <= 4:
        raise ValueError("need a, b >= 2 with ab > 4")
    plans = _plans_for_orientation(a, b)
    if a != b:
        plans += _plans_for_orientation(b, a)
    plans.sort(key=lambda p: (p.a, p.tag, p.params))
    return plans


def dolgachev_brute_force(a: int, b: int, param_bound=50):
    """Same plan set found by scanning every entry's parameters directly."""
    if a < 2 or b < 2 or a * b <= 4:
        raise ValueError("need a, b >= 2 with ab > 4")
    plans = []
    for aa, bb in {(a, b), (b, a)}:
        chain = _wahl_chain_for(bb)
        lam2 = F(bb - 1, bb)
        for tag in _FIXED_TAGS:
            lam = catalog_lambda(tag)
            if lam.denominator == aa:
                plans.append(DegenerationPlan(
                    aa, bb, tag, (), lam, F(-1), chain,
                    canonical_coefficient([lam, lam2], -1)))
        for tag in _PARAM_TAGS:
            ent = V3V4_ENTRIES[tag]
            for t in range(param_bound + 1):
                if _affine_t(ent["lam"][1], t) == aa:
                    lam = catalog_lambda(tag, t)
                    plans.append(DegenerationPlan(
                        aa, bb, _display_tag(tag, t), ((ent["param"], t),),
                        lam, F(-1), chain,
                        canonical_coefficient([lam, lam2], -1)))
        for y in range(2, param_bound + 1):
            for n in range(2, param_bound + 1):
                if y * n != aa:
                    continue
                for a0 in range(1, n):
                    if gcd(n, a0) != 1 or a0 > n - a0:
                        continue
                    lam = F(n - 1, y * n)
                    lam_bar = F(-1) + F(y - 1, y)
                    plans.append(DegenerationPlan(
                        aa, bb, "yI", (("a0", a0), ("d", 1), ("n", n), ("y", y)),
                        lam, lam_bar, chain,
                        canonical_coefficient([lam, lam2], lam_bar)))
    plans.sort(key=lambda p: (p.a, p.tag, p.params))
    return plans


# ---------------------------------------------------------------------------
# the k2A flip through continued fractions

class FlipError(ValueError):
    pass


@dataclass(frozen=True)
class FlipResult:
    wplus_cqs: tuple         # (A, B): the c.q.s. 1/A(1,B) on W+
    zplus_wahl: tuple        # the Wahl chain on Z+
    zplus_wahl_params: WahlParams
    zplus_dual_cqs: tuple    # (A, A - B)
    dual_chain: tuple
    z_chain: tuple           # contraction of [W+]-(1)-[dual]
    contracted_w: tuple      # witness: curves contracted on the W' side
    contracted_z: tuple      # witness: curves contracted on the Z+ side


def _cascade_chain(left, right):
    """Contract the (-1) between two chains; returns (entries, n_contracted).

    The configuration is [left..., (1), right...] with the last entry of
    `left` and the first of `right` meeting the (-1)-curve.
    """
    entries = list(left) + [1] + list(right)
    cfg = chain_config(entries, prefix="X", in_c=False)
    start = f"X{len(left) + 1}"
    cfg = cfg.replace_curve(start, self_int=-1)
    result, contracted = contract_cascade(cfg, start)
    order = sorted(result.ids(), key=lambda s: int(s[1:]))
    vals = tuple(-result.curve(cid).self_int for cid in order)
    return vals, tuple(contracted)


def flip_compute(leg_chain, sliding_wahl, z_sing_chain, search_bound=12) -> FlipResult:
    """The k2A flip of [leg]-(1)-[Wahl] via its continued-fraction shadow.

    Contract the W'-side chain to a c.q.s. 1/A(1,B); then find the
    shortest Wahl chain W+ such that [W+]-(1)-[dual of 1/A(1,B)]
    cascade-contracts exactly to the Z-side singularity.
    """
    leg = validate_chain(leg_chain)
    wahl = validate_chain(sliding_wahl)
    z_sing = validate_chain(z_sing_chain)
    if wahl_recognize(wahl) is None:
        raise FlipError(f"{list(wahl)} is not a Wahl chain")
    w_side, contracted_w = _cascade_chain(leg, wahl)
    if not w_side:
        raise FlipError("the W' side contracted to nothing")
    A, B = hj_eval(w_side)
    dual = hj_dual(A, B) if B < A else (2,)
    matches = []
    for length in range(1, search_bound + 1):
        for cand in sorted(ch for ch in wahl_generate(length) if len(ch) == length):
            try:
                z_chain, contracted_z = _cascade_chain(cand, dual)
            except cc.CascadeAmbiguityError:
                continue  # such a candidate cannot contract exactly to one chain
            if z_chain == z_sing or z_chain == z_sing[::-1]:
                matches.append((cand, z_chain, contracted_z))
        if matches:
            break
    if not matches:
        raise FlipError(
            f"no Wahl chain of length <= {search_bound} reproduces the Z side")
    if len(matches) > 1:
        raise FlipError(
            f"flip is ambiguous at minimal length: {[m[0] for m in matches]}")
    cand, z_chain, contracted_z = matches[0]
    # conservation bookkeeping
    total = len(cand) + 1 + len(dual)
    if total - len(contracted_z) != len(z_sing):
        raise FlipError("cascade bookkeeping does not balance")
    return FlipResult(
        wplus_cqs=(A, B), zplus_wahl=cand,
        zplus_wahl_params=wahl_recognize(cand),
        zplus_dual_cqs=(A, A - B), dual_chain=dual,
        z_chain=z_chain, contracted_w=contracted_w, contracted_z=contracted_z)


# ---------------------------------------------------------------------------
# slc nef coefficients

_SLC_COEFFS = {
    "II": lambda n, y: (F(5 * n - 6, 6 * n), F(y * n - 6, 6 * y * n)),
    "III": lambda n, y: (F(3 * n - 4, 4 * n), F(y * n - 4, 4 * y * n)),
    "IV": lambda n, y: (F(2 * n - 3, 3 * n), F(y * n - 3, 3 * y * n)),
}


def slc_nef_coeffs(fiber: str, n: int, y: int):
    """Coefficients of F in K+Delta on W+ and Z+; verdict 'nef' iff both >= 0."""
    if fiber not in _SLC_COEFFS:
        raise ValueError("fiber must be II, III or IV")
    if n < 2 or y < 1:
        raise ValueError("need n >= 2 and y >= 1")
    w_coeff, z_coeff = _SLC_COEFFS[fiber](n, y)
    verdict = "nef" if w_coeff >= 0 and z_coeff >= 0 else "not nef"
    return w_coeff, z_coeff, verdict


_SEIFERT_M = {"II": F(5, 6), "III": F(3, 4), "IV": F(2, 3),
              "II*": F(1, 6), "III*": F(1, 4), "IV*": F(1, 3)}

_SEIFERT_EFFECTIVE_BOUND = {"II": 1, "III": 1, "IV": 1,
                            "II*": 6, "III*": 4, "IV*": 3}


def seifert_anticanonical(fiber: str, y: int):
    """-(K+Delta) = (1/y - m) F on the Seifert partial resolution base;
    returns the coefficient and whether the divisor is effective."""
    if fiber not in _SEIFERT_M:
        raise ValueError("fiber must be II, III, IV, II*, III* or IV*")
    if y < 1:
        raise ValueError("need y >= 1")
    value = F(1, y) - _SEIFERT_M[fiber]
    return value, y <= _SEIFERT_EFFECTIVE_BOUND[fiber]
