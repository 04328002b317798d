"""Exact rational arithmetic and Hirzebruch-Jung continued fractions.

Chains are plain tuples of ints [e_1, ..., e_r] with every e_i >= 2,
representing m/q = e_1 - 1/(e_2 - 1/(... - 1/e_r)).  All arithmetic is
exact; rationals are `fractions.Fraction` throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

Rational = Fraction

HJChain = tuple  # tuple of ints, e_i >= 2


def validate_chain(chain) -> tuple:
    """Return the chain as a tuple, rejecting malformed input."""
    entries = tuple(int(e) for e in chain)
    if len(entries) == 0:
        raise ValueError("empty HJ chain (the smooth point m=1 is not a chain)")
    for e in entries:
        if e < 2:
            raise ValueError(f"HJ chain entries must be >= 2, got {e}")
    return entries


def hj_expand(m: int, q: int) -> tuple:
    """HJ continued fraction of m/q by the ceiling algorithm.

    Every entry of the result is >= 2 and the expansion is the unique
    such one.  Requires 0 < q < m coprime, or q == 1 <= m.
    """
    if q <= 0:
        raise ValueError(f"need q > 0, got q={q}")
    if q >= m and not (q == 1 and m >= 2):
        raise ValueError(f"need 0 < q < m, got m={m}, q={q}")
    if gcd(m, q) != 1:
        raise ValueError(f"need gcd(m,q)=1, got m={m}, q={q}")
    entries = []
    while q > 0:
        e = -(-m // q)  # ceiling division
        entries.append(e)
        m, q = q, e * q - m
    return tuple(entries)


def hj_eval(chain) -> tuple:
    """Evaluate a chain back to coprime (m, q) with m/q = [e_1,...,e_r]."""
    entries = validate_chain(chain)
    m, q = 1, 0
    for e in reversed(entries):
        m, q = e * m - q, m
    assert gcd(m, q) == 1
    return m, q


@dataclass(frozen=True)
class HJSequences:
    """The alpha/beta/gamma recurrences attached to a chain.

    alpha[i], beta[i], gamma[i] for i = 0..r+1 with
    alpha_{i+1} = e_i alpha_i - alpha_{i-1} (alpha_0=0, alpha_1=1),
    beta_0 = m, beta_1 = q, gamma_0 = -1, gamma_1 = 0 and the same
    recurrence.  beta_r = 1, beta_{r+1} = 0, alpha_{r+1} = m and
    alpha_r is the inverse of q mod m.
    """

    entries: tuple
    alpha: tuple
    beta: tuple
    gamma: tuple

    @property
    def m(self) -> int:
        return self.beta[0]

    @property
    def q(self) -> int:
        return self.beta[1]

    @property
    def q_inverse(self) -> int:
        return self.alpha[-2]


def hj_sequences(chain) -> HJSequences:
    entries = validate_chain(chain)
    m, q = hj_eval(entries)
    alpha = [0, 1]
    beta = [m, q]
    gamma = [-1, 0]
    for e in entries:
        alpha.append(e * alpha[-1] - alpha[-2])
        beta.append(e * beta[-1] - beta[-2])
        gamma.append(e * gamma[-1] - gamma[-2])
    return HJSequences(entries, tuple(alpha), tuple(beta), tuple(gamma))


def hj_dual(m: int, q: int) -> tuple:
    """Chain of the dual singularity 1/m(1, m-q)."""
    if not 0 < q < m:
        raise ValueError(f"need 0 < q < m, got m={m}, q={q}")
    return hj_expand(m, m - q)


def cqs_discrepancies(chain) -> list:
    """Discrepancies d_i = -1 + (beta_i + alpha_i)/m of the chain's c.q.s.

    Each value lies in (-1, 0]; 0 happens exactly on all-2 chains.
    """
    seq = hj_sequences(chain)
    m = seq.m
    r = len(seq.entries)
    return [Fraction(seq.beta[i] + seq.alpha[i], m) - 1 for i in range(1, r + 1)]
