"""Dual-graph calculus of curve configurations on smooth surfaces.

A CurveConfig is a weighted dual graph: vertices are curves carrying
self-intersection, genus, a node count (self-nodal curves are a marker,
not loop edges), contraction membership and multiplicity data; edges
carry intersection multiplicities.  Blow-ups and blow-downs are the
standard arithmetic on these graphs, with full tracking of fiber
multiplicities mu_F and of the multiplicity of every curve in each
individual pull-back divisor E_k.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .exact_arith import Rational


# ---------------------------------------------------------------------------
# records and loci

@dataclass(frozen=True)
class CurveRecord:
    id: object
    self_int: int
    genus: int = 0
    nodes: int = 0
    in_c: bool = False
    mu_f: int = 0
    per_blowup_mu: tuple = ()

    @property
    def mu_e(self) -> int:
        return sum(self.per_blowup_mu)

    @property
    def smooth(self) -> bool:
        return self.nodes == 0

    @property
    def arith_genus(self) -> int:
        # contribution of marked nodes to the arithmetic genus
        return self.genus + self.nodes

    def k_dot(self) -> int:
        """K . C by adjunction, 2 p_a - 2 - C^2."""
        return 2 * self.arith_genus - 2 - self.self_int


@dataclass(frozen=True)
class OnCurve:
    curve: object


@dataclass(frozen=True)
class AtIntersection:
    a: object
    b: object


@dataclass(frozen=True)
class AtNode:
    curve: object


@dataclass(frozen=True)
class FreePoint:
    pass


BlowUpLocus = object  # OnCurve | AtIntersection | AtNode | FreePoint


# ---------------------------------------------------------------------------
# the configuration

class CurveConfig:
    """Immutable weighted dual graph.  Operations return new configs."""

    __slots__ = ("curves", "edges", "_by_id", "_adj")

    def __init__(self, curves, edges):
        curves = tuple(curves)
        ids = [c.id for c in curves]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate curve ids")
        by_id = {c.id: c for c in curves}
        norm = {}
        for a, b, m in edges:
            if a not in by_id or b not in by_id:
                raise ValueError(f"edge ({a},{b}) references missing curve")
            if a == b:
                raise ValueError("self-edges are modeled as node counts, not edges")
            if m <= 0:
                raise ValueError("zero/negative edge multiplicity")
            key = (a, b) if str(a) <= str(b) else (b, a)
            norm[key] = norm.get(key, 0) + m
        object.__setattr__(self, "curves", curves)
        object.__setattr__(self, "edges",
                           tuple(sorted(((a, b, m) for (a, b), m in norm.items()),
                                        key=lambda e: (str(e[0]), str(e[1])))))
        object.__setattr__(self, "_by_id", by_id)
        adj = {c.id: {} for c in curves}
        for a, b, m in self.edges:
            adj[a][b] = m
            adj[b][a] = m
        object.__setattr__(self, "_adj", adj)

    def __setattr__(self, *a):
        raise AttributeError("CurveConfig is immutable")

    # -- accessors ---------------------------------------------------------
    def curve(self, cid) -> CurveRecord:
        return self._by_id[cid]

    def has_curve(self, cid) -> bool:
        return cid in self._by_id

    def ids(self):
        return [c.id for c in self.curves]

    def neighbors(self, cid) -> dict:
        return dict(self._adj[cid])

    def edge_mult(self, a, b) -> int:
        return self._adj[a].get(b, 0)

    def pairing(self, a, b) -> int:
        """Intersection number of two (distinct or equal) curves."""
        if a == b:
            return self.curve(a).self_int
        return self.edge_mult(a, b)

    @property
    def num_blowups(self) -> int:
        if not self.curves:
            return 0
        return len(self.curves[0].per_blowup_mu)

    def in_c_ids(self):
        return [c.id for c in self.curves if c.in_c]

    def replace_curve(self, cid, **changes) -> "CurveConfig":
        return CurveConfig(
            tuple(replace(c, **changes) if c.id == cid else c for c in self.curves),
            self.edges)

    def with_in_c(self, ids) -> "CurveConfig":
        ids = set(ids)
        return CurveConfig(
            tuple(replace(c, in_c=(c.id in ids)) for c in self.curves),
            self.edges)

    # -- intersection theory -------------------------------------------------
    def intersection_matrix(self, order=None):
        order = list(order) if order is not None else self.ids()
        return [[self.pairing(a, b) for b in order] for a in order]

    def divisor_dot(self, d1: dict, d2: dict) -> int:
        total = 0
        for a, ma in d1.items():
            for b, mb in d2.items():
                total += ma * mb * self.pairing(a, b)
        return total

    def divisor_dot_k(self, d: dict) -> int:
        return sum(m * self.curve(a).k_dot() for a, m in d.items())


# ---------------------------------------------------------------------------
# blow-up / blow-down

def _locus_branches(config: CurveConfig, locus) -> list:
    """Curve ids through the locus, with repetition for local multiplicity."""
    if isinstance(locus, FreePoint):
        return []
    if isinstance(locus, OnCurve):
        if not config.has_curve(locus.curve):
            raise ValueError(f"no curve {locus.curve}")
        return [locus.curve]
    if isinstance(locus, AtIntersection):
        if config.edge_mult(locus.a, locus.b) < 1:
            raise ValueError(f"curves {locus.a},{locus.b} do not intersect")
        return [locus.a, locus.b]
    if isinstance(locus, AtNode):
        if config.curve(locus.curve).nodes < 1:
            raise ValueError(f"curve {locus.curve} has no node")
        return [locus.curve, locus.curve]
    raise ValueError(f"unknown locus {locus!r}")


def blow_up(config: CurveConfig, locus, new_id=None) -> CurveConfig:
    """Blow up at the locus, returning the config with one new (-1)-curve."""
    branches = _locus_branches(config, locus)
    if new_id is None:
        k = config.num_blowups + 1
        new_id = f"E{k}"
        while config.has_curve(new_id):
            k += 1
            new_id = f"E{k}"
    if config.has_curve(new_id):
        raise ValueError(f"curve id {new_id} already present")

    nslots = config.num_blowups
    curves = []
    for c in config.curves:
        mult = branches.count(c.id)
        if mult:
            changes = {"self_int": c.self_int - mult * mult,
                       "per_blowup_mu": c.per_blowup_mu + (0,)}
            if isinstance(locus, AtNode) and c.id == locus.curve:
                changes["nodes"] = c.nodes - 1
            curves.append(replace(c, **changes))
        else:
            curves.append(replace(c, per_blowup_mu=c.per_blowup_mu + (0,)))

    new_mu = [0] * nslots
    for b in set(branches):
        rec = config.curve(b)
        w = branches.count(b)
        for i in range(nslots):
            new_mu[i] += w * rec.per_blowup_mu[i]
    new_mu.append(1)
    new_mu_f = sum(branches.count(b) * config.curve(b).mu_f for b in set(branches))
    curves.append(CurveRecord(new_id, -1, mu_f=new_mu_f, per_blowup_mu=tuple(new_mu)))

    edges = list(config.edges)
    if isinstance(locus, AtIntersection):
        edges = [(a, b, m) for a, b, m in edges]
        out = []
        for a, b, m in edges:
            if {a, b} == {locus.a, locus.b}:
                if m > 1:
                    out.append((a, b, m - 1))
            else:
                out.append((a, b, m))
        edges = out
        edges.append((new_id, locus.a, 1))
        edges.append((new_id, locus.b, 1))
    elif isinstance(locus, OnCurve):
        edges.append((new_id, locus.curve, 1))
    elif isinstance(locus, AtNode):
        edges.append((new_id, locus.curve, 2))
    return CurveConfig(curves, edges)


def blow_down(config: CurveConfig, cid) -> CurveConfig:
    """Contract a smooth rational (-1)-curve."""
    c = config.curve(cid)
    if c.self_int != -1 or c.genus != 0 or c.nodes != 0:
        raise ValueError(f"curve {cid} is not a smooth rational (-1)-curve")
    nbrs = config.neighbors(cid)

    # slots that belong to this curve alone can be removed cleanly
    removable = [k for k in range(config.num_blowups)
                 if c.per_blowup_mu[k] == 1
                 and all(o.per_blowup_mu[k] == 0 for o in config.curves if o.id != cid)]

    def strip(mu):
        return tuple(v for k, v in enumerate(mu) if k not in removable)

    curves = []
    for o in config.curves:
        if o.id == cid:
            continue
        k = nbrs.get(o.id, 0)
        if k:
            curves.append(replace(o, self_int=o.self_int + k * k,
                                  nodes=o.nodes + k * (k - 1) // 2,
                                  per_blowup_mu=strip(o.per_blowup_mu)))
        else:
            curves.append(replace(o, per_blowup_mu=strip(o.per_blowup_mu)))

    edges = {}
    for a, b, m in config.edges:
        if cid in (a, b):
            continue
        key = (a, b) if str(a) <= str(b) else (b, a)
        edges[key] = edges.get(key, 0) + m
    for a, b in itertools.combinations(sorted(nbrs, key=str), 2):
        key = (a, b) if str(a) <= str(b) else (b, a)
        edges[key] = edges.get(key, 0) + nbrs[a] * nbrs[b]
    return CurveConfig(curves, [(a, b, m) for (a, b), m in edges.items()])


class CascadeAmbiguityError(ValueError):
    pass


def contract_cascade(config: CurveConfig, start, max_steps=None):
    """Blow down `start`, then keep blowing down the single new (-1)-curve
    produced by each contraction; stop when none is produced.

    Raises CascadeAmbiguityError if a contraction creates two or more new
    (-1)-curves.  Returns (config, contracted_ids).
    """
    cur = start
    contracted = []
    steps = 0
    while True:
        if not config.has_curve(cur):
            raise ValueError(f"no curve {cur}")
        before = {c.id for c in config.curves
                  if c.self_int == -1 and c.nodes == 0 and c.genus == 0}
        config = blow_down(config, cur)
        contracted.append(cur)
        steps += 1
        if max_steps is not None and steps >= max_steps:
            return config, contracted
        fresh = [c.id for c in config.curves
                 if c.self_int == -1 and c.nodes == 0 and c.genus == 0
                 and c.id not in before]
        if not fresh:
            return config, contracted
        if len(fresh) > 1:
            raise CascadeAmbiguityError(
                f"contraction of {contracted[-1]} produced {len(fresh)} new (-1)-curves")
        cur = fresh[0]


# ---------------------------------------------------------------------------
# exact linear algebra

def _det(matrix) -> Fraction:
    n = len(matrix)
    m = [[Fraction(x) for x in row] for row in matrix]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if f:
                for cc in range(col, n):
                    m[r][cc] -= f * m[col][cc]
    return det


def is_negative_definite(config: CurveConfig) -> bool:
    """Exact test: leading principal minors alternate in sign, starting < 0."""
    mat = config.intersection_matrix()
    for k in range(1, len(mat) + 1):
        minor = _det([row[:k] for row in mat[:k]])
        if (-1) ** k * minor <= 0:
            return False
    return True


def solve_linear(matrix, rhs):
    """Solve matrix . x = rhs exactly; matrix must be nonsingular."""
    n = len(matrix)
    m = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular intersection matrix")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col] * inv
                for cc in range(col, n + 1):
                    m[r][cc] -= f * m[col][cc]
    return [m[i][n] / m[i][i] for i in range(n)]


def solve_discrepancies(config: CurveConfig) -> dict:
    """Discrepancies of all curves: the unique exact solution of
    sum_i d(C_i) (C_i . C_j) = K . C_j.

    This is the brute-force oracle for every closed-form discrepancy.
    """
    for c in config.curves:
        if c.nodes != 0:
            raise ValueError(f"curve {c.id} is not smooth; discrepancies undefined")
    if not is_negative_definite(config):
        raise ValueError("intersection matrix is not negative definite")
    order = config.ids()
    mat = config.intersection_matrix(order)
    rhs = [config.curve(cid).k_dot() for cid in order]
    sol = solve_linear(mat, rhs)
    return dict(zip(order, sol))


def q_invariant(config: CurveConfig, divisor: dict) -> Fraction:
    """q(D) = -(D^2 + D.K)/2; equals chi(O_D) for effective D."""
    for cid in divisor:
        if not config.has_curve(cid):
            raise ValueError(f"no curve {cid}")
    d2 = config.divisor_dot(divisor, divisor)
    dk = config.divisor_dot_k(divisor)
    return Fraction(-(d2 + dk), 2)


# ---------------------------------------------------------------------------
# exceptional-divisor bookkeeping

def discrepancies_of_contracted(config: CurveConfig) -> dict:
    """Discrepancies of the in_C curves (0 for every other curve).

    Solved per connected component of the contracted set; each component
    must be negative definite.
    """
    in_c = [c.id for c in config.curves if c.in_c]
    seen = set()
    result = {c.id: Fraction(0) for c in config.curves}
    for root in in_c:
        if root in seen:
            continue
        comp = {root}
        stack = [root]
        while stack:
            cur = stack.pop()
            for nb in config._adj[cur]:
                if config.curve(nb).in_c and nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        seen |= comp
        order = [cid for cid in config.ids() if cid in comp]
        sub = CurveConfig([config.curve(cid) for cid in order],
                          [(a, b, m) for a, b, m in config.edges
                           if a in comp and b in comp])
        for cid, d in solve_discrepancies(sub).items():
            result[cid] = d
    return result


def classify_exceptional(config: CurveConfig) -> dict:
    """Bucket every pull-back divisor E_k into the sets S_h / T_h.

    E_k . C_out,k and E_k . C_in,k are exact intersection numbers of the
    divisor E_k = sum of per_blowup_mu[k] . curve against the contracted
    curves outside/inside its support.  Returns counts s_h, t_h plus a
    per-k report with the support shape (self-intersections ordered along
    the support chain where it is a chain).
    """
    m = config.num_blowups
    s_counts = {}
    t_counts = {}
    per_k = []
    for k in range(m):
        ek = {c.id: c.per_blowup_mu[k] for c in config.curves
              if c.per_blowup_mu[k] != 0}
        out_dot = 0
        in_dot = 0
        for c in config.curves:
            if not c.in_c:
                continue
            dot = sum(mult * config.pairing(cid, c.id) for cid, mult in ek.items())
            if c.id in ek:
                in_dot += dot
            else:
                out_dot += dot
        h = out_dot
        in_t = in_dot == 0
        s_counts[h] = s_counts.get(h, 0) + 1
        if in_t:
            t_counts[h] = t_counts.get(h, 0) + 1
        per_k.append({"k": k, "h": h, "in_T": in_t,
                      "support": sorted(ek),
                      "support_self_ints": sorted(
                          config.curve(cid).self_int for cid in ek)})
    return {"s": s_counts, "t": t_counts, "per_k": per_k}


# ---------------------------------------------------------------------------
# builders

def chain_config(entries, prefix="C", in_c=True, mu_f=None) -> CurveConfig:
    """A chain of smooth rational curves with self-intersections -entries."""
    entries = list(entries)
    curves = []
    edges = []
    for i, e in enumerate(entries):
        curves.append(CurveRecord(f"{prefix}{i + 1}", -int(e), in_c=in_c,
                                  mu_f=0 if mu_f is None else mu_f[i]))
        if i:
            edges.append((f"{prefix}{i}", f"{prefix}{i + 1}", 1))
    return CurveConfig(curves, edges)


# ---------------------------------------------------------------------------
# graph identification

def _wl_key(config: CurveConfig, rounds=None, with_markers=False):
    labels = {}
    for c in config.curves:
        base = (c.self_int, c.genus, c.nodes, c.in_c)
        if with_markers:
            base = base + (c.mu_f,)
        labels[c.id] = base
    n = len(config.curves)
    rounds = rounds if rounds is not None else n
    for _ in range(rounds):
        new = {}
        for c in config.curves:
            nb = sorted((m, labels[o]) for o, m in config._adj[c.id].items())
            new[c.id] = (labels[c.id], tuple(nb))
        # compress
        distinct = sorted(set(new.values()), key=repr)
        comp = {v: i for i, v in enumerate(distinct)}
        newc = {cid: (labels[cid], comp[v]) for cid, v in new.items()}
        if len(set(newc.values())) == len(set(labels.values())):
            labels = newc
            break
        labels = newc
    return labels


def canonical_key(config: CurveConfig, with_markers=False):
    """Hashable isomorphism-invariant key (complete on trees; used as a
    bucket key, with is_isomorphic for exact comparisons)."""
    labels = _wl_key(config, with_markers=with_markers)
    multiset = sorted(repr(v) for v in labels.values())
    edge_ms = sorted(
        (min(repr(labels[a]), repr(labels[b])), max(repr(labels[a]), repr(labels[b])), m)
        for a, b, m in config.edges)
    return (tuple(multiset), tuple(edge_ms))


def is_isomorphic(c1: CurveConfig, c2: CurveConfig, with_markers=False) -> bool:
    """Exact labeled-graph isomorphism (backtracking, WL-pruned)."""
    if len(c1.curves) != len(c2.curves) or len(c1.edges) != len(c2.edges):
        return False
    l1 = _wl_key(c1, with_markers=with_markers)
    l2 = _wl_key(c2, with_markers=with_markers)
    if sorted(repr(v) for v in l1.values()) != sorted(repr(v) for v in l2.values()):
        return False
    ids1 = sorted(c1._by_id, key=lambda c: (repr(l1[c]), str(c)))
    cands = {a: [b for b in c2._by_id if repr(l2[b]) == repr(l1[a])] for a in ids1}

    mapping = {}
    used = set()

    def ok(a, b):
        for a2, b2 in mapping.items():
            if c1.edge_mult(a, a2) != c2.edge_mult(b, b2):
                return False
        return True

    def rec(i):
        if i == len(ids1):
            return True
        a = ids1[i]
        for b in cands[a]:
            if b in used or not ok(a, b):
                continue
            mapping[a] = b
            used.add(b)
            if rec(i + 1):
                return True
            del mapping[a]
            used.discard(b)
        return False

    return rec(0)


# ---------------------------------------------------------------------------
# serialization

def to_json_dict(config: CurveConfig) -> dict:
    return {
        "curves": [
            {"id": str(c.id), "self_int": c.self_int, "genus": c.genus,
             "smooth": c.nodes == 0, "nodes": c.nodes, "in_C": c.in_c,
             "mu_F": c.mu_f, "mu_E": c.mu_e,
             "per_blowup_mu": list(c.per_blowup_mu)}
            for c in config.curves
        ],
        "edges": [[str(a), str(b), m] for a, b, m in config.edges],
    }


def dot_export(config: CurveConfig, name="config") -> str:
    """DOT graph; filled nodes are contracted curves, open nodes are not."""
    lines = [f"graph {name} {{", "  node [shape=circle];"]
    for c in config.curves:
        style = "filled" if c.in_c else "solid"
        fill = "black" if c.in_c else "white"
        font = "white" if c.in_c else "black"
        label = str(c.self_int)
        lines.append(
            f'  "{c.id}" [label="{label}", style={style}, fillcolor={fill}, fontcolor={font}];')
    for a, b, m in config.edges:
        for _ in range(m):
            lines.append(f'  "{a}" -- "{b}";')
    lines.append("}")
    return "\n".join(lines)
