"""Star graphs of weighted homogeneous singularities.

Closed-form discrepancies from the star resolution: with
e = e0 - sum q_i/m_i and chi = 2g - 2 + t - sum 1/m_i,

    d(C_0)     = -1 - chi/e,
    d(C_{i,j}) = -1 + alpha_{i,j}/m_i - (chi/e) beta_{i,j}/m_i,

log terminal iff chi < 0, log canonical iff chi <= 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import curve_config as cc
from .exact_arith import hj_eval, hj_sequences, validate_chain


@dataclass(frozen=True)
class StarGraph:
    e0: int
    genus: int
    legs: tuple  # tuple of HJ chains (tuples of ints)

    def __post_init__(self):
        if self.e0 < 1:
            raise ValueError("central self-intersection -e0 needs e0 >= 1")
        if self.genus < 0:
            raise ValueError("negative genus")
        object.__setattr__(self, "legs", tuple(validate_chain(l) for l in self.legs))
        if self.e_value() <= 0:
            raise ValueError("e = e0 - sum q_i/m_i must be positive (contractibility)")

    @property
    def t(self) -> int:
        return len(self.legs)

    def leg_fractions(self):
        return [hj_eval(leg) for leg in self.legs]

    def e_value(self) -> Fraction:
        return self.e0 - sum(Fraction(q, m) for m, q in self.leg_fractions())

    def chi_value(self) -> Fraction:
        return 2 * self.genus - 2 + self.t - sum(Fraction(1, m) for m, _ in self.leg_fractions())


@dataclass(frozen=True)
class StarDiscrepancies:
    central: Fraction
    legs: tuple  # tuple of tuples of Fractions, indexed like the legs


def chi_e(star: StarGraph):
    """The pair (chi, e) of the star graph."""
    return star.chi_value(), star.e_value()


def star_discrepancies(star: StarGraph) -> StarDiscrepancies:
    chi, e = chi_e(star)
    x = chi / e
    central = -1 - x
    legs = []
    for leg in star.legs:
        seq = hj_sequences(leg)
        m = seq.m
        legs.append(tuple(
            -1 + Fraction(seq.alpha[j], m) - x * Fraction(seq.beta[j], m)
            for j in range(1, len(leg) + 1)))
    return StarDiscrepancies(central, tuple(legs))


def lc_class(star: StarGraph) -> str:
    """'log_terminal' / 'log_canonical_boundary' / 'non_log_canonical' by sign of chi."""
    chi = star.chi_value()
    if chi < 0:
        return "log_terminal"
    if chi == 0:
        return "log_canonical_boundary"
    return "non_log_canonical"


def star_to_config(star: StarGraph, in_c=True) -> cc.CurveConfig:
    """The star graph as a CurveConfig (central curve id 'C0', leg curve
    ids 'L{i}.{j}' with j = 1 adjacent to the center)."""
    curves = [cc.CurveRecord("C0", -star.e0, genus=star.genus, in_c=in_c)]
    edges = []
    for i, leg in enumerate(star.legs, start=1):
        prev = "C0"
        for j, e in enumerate(leg, start=1):
            cid = f"L{i}.{j}"
            curves.append(cc.CurveRecord(cid, -e, in_c=in_c))
            edges.append((prev, cid, 1))
            prev = cid
    return cc.CurveConfig(curves, edges)


def whs_identity_check(star: StarGraph) -> dict:
    """Check both closed forms of K_X^2 - K_W^2 + K_X.C and the matrix value.

    Returns a report dict with 'ok' plus the three exact values.
    """
    chi, e = chi_e(star)
    disc = star_discrepancies(star)
    g = star.genus
    lhs = (2 * g - 2 + star.t) * disc.central - sum(l[-1] for l in disc.legs)
    rhs = Fraction(2 - 2 * g) - chi * chi / e
    for leg in star.legs:
        seq = hj_sequences(leg)
        rhs -= Fraction(seq.q_inverse, seq.m)

    config = star_to_config(star)
    dm = cc.solve_discrepancies(config)
    dd = {cid: dm[cid] for cid in config.ids()}
    k2_diff = config.divisor_dot(dd, dd)  # (sum d C)^2 = K_X^2 - K_W^2
    kx_c = sum(config.curve(cid).k_dot() for cid in config.ids())
    matrix_value = k2_diff + kx_c

    ok = (lhs == rhs == matrix_value)
    return {"ok": ok, "combinatorial": lhs, "closed_form": rhs, "matrix": matrix_value}


def qhd_identities(star: StarGraph, valency: int) -> dict:
    """Identities satisfied by QHD star graphs of valency 3 or 4.

    Checks K_X.C, K_X^2 - K_W^2 = -|C|, the ending-discrepancy relation,
    and chi/e < 1.  For valency 4 the long leg must be the last leg.
    """
    if valency not in (3, 4):
        raise ValueError("valency must be 3 or 4")
    if star.t != valency:
        raise ValueError(f"star has {star.t} legs, expected {valency}")
    chi, e = chi_e(star)
    disc = star_discrepancies(star)
    config = star_to_config(star)
    n_curves = len(config.curves)
    kx_c = sum(config.curve(cid).k_dot() for cid in config.ids())
    dm = cc.solve_discrepancies(config)
    k2_diff = config.divisor_dot(dm, dm)

    report = {
        "chi_over_e_lt_1": chi / e < 1,
        "k2_diff_is_minus_curves": k2_diff == -n_curves,
    }
    if valency == 3:
        report["kx_dot_c"] = kx_c == 1 + n_curves
        report["ending_relation"] = (
            sum(l[-1] for l in disc.legs) - disc.central == -1)
    else:
        report["kx_dot_c"] = kx_c == n_curves
        report["ending_relation"] = disc.legs[-1][-1] - disc.central == 1
    report["ok"] = all(report.values())
    return report
