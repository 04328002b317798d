"""Command-line interface.

Every command prints either human-readable lines or, with --json, a
stable JSON document (sorted keys, rationals rendered as "p/q").  Exit
codes: 0 ok, 1 domain error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import curve_config as cc
from . import degeneration as dg
from . import elliptic_mmod as em
from . import exact_arith as ea
from . import qhd_catalog as qc
from . import whs_discrepancy as whs

SCHEMA = "qhdsurf/1"

OK, DOMAIN_ERROR, VERIFICATION_FAILURE = 0, 1, 2


def fmt_rat(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return fmt_rat(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return str(obj)


class Result:
    def __init__(self, status, payload, diagnostics=(), text=None):
        self.status = status
        self.payload = payload
        self.diagnostics = list(diagnostics)
        self.text = text

    def emit(self, as_json):
        if as_json:
            doc = {"schema": SCHEMA,
                   "status": {OK: "ok", DOMAIN_ERROR: "domain_error",
                              VERIFICATION_FAILURE: "verification_failure"}[self.status],
                   "payload": _jsonable(self.payload),
                   "diagnostics": self.diagnostics}
            print(json.dumps(doc, sort_keys=True, indent=1))
        else:
            if self.text is not None:
                print(self.text)
            else:
                print(json.dumps(_jsonable(self.payload), sort_keys=True, indent=1))
            for d in self.diagnostics:
                print(f"! {d}", file=sys.stderr)
        return self.status


def _chain_arg(values):
    return tuple(int(v) for v in values)


def _parse_legs(values):
    return tuple(tuple(int(x) for x in v.replace(" ", "").split(",")) for v in values)


def _star_from_args(args) -> whs.StarGraph:
    if args.family:
        fid = _family_id_from_args(args)
        return qc.instantiate_family(fid, _catalog_from_args(args))
    if args.e0 is None or not args.leg:
        raise ValueError("specify either --family/--valency or --e0 with --leg")
    return whs.StarGraph(args.e0, args.genus, _parse_legs(args.leg))


def _catalog_from_args(args):
    path = getattr(args, "catalog", None) or os.environ.get("QHDSURF_CATALOG")
    return qc.load_catalog(path) if path else None


def _family_id_from_args(args):
    params = {}
    for name in ("p", "q", "r"):
        val = getattr(args, name, None)
        if val is not None:
            params[name] = val
    return qc.family_id(args.valency, args.family, **params)


# ---------------------------------------------------------------------------
# subcommand handlers

def cmd_hj(args):
    if args.op == "expand":
        chain = ea.hj_expand(args.m, args.q)
        return Result(OK, {"chain": list(chain)}, text=f"[{','.join(map(str, chain))}]")
    if args.op == "eval":
        m, q = ea.hj_eval(_chain_arg(args.entries))
        return Result(OK, {"m": m, "q": q}, text=f"{m}/{q}")
    if args.op == "seq":
        seq = ea.hj_sequences(_chain_arg(args.entries))
        payload = {"alpha": list(seq.alpha), "beta": list(seq.beta),
                   "gamma": list(seq.gamma), "m": seq.m, "q": seq.q,
                   "q_inverse": seq.q_inverse}
        text = (f"alpha = {list(seq.alpha)}\nbeta  = {list(seq.beta)}\n"
                f"gamma = {list(seq.gamma)}")
        return Result(OK, payload, text=text)
    if args.op == "dual":
        chain = ea.hj_dual(args.m, args.q)
        return Result(OK, {"chain": list(chain)}, text=f"[{','.join(map(str, chain))}]")
    raise ValueError(f"unknown hj op {args.op}")


def cmd_cqs(args):
    ds = ea.cqs_discrepancies(_chain_arg(args.entries))
    return Result(OK, {"discrepancies": ds},
                  text=" ".join(fmt_rat(d) for d in ds))


def cmd_star(args):
    star = _star_from_args(args)
    if args.op == "disc":
        disc = whs.star_discrepancies(star)
        payload = {"central": disc.central,
                   "legs": [list(l) for l in disc.legs]}
        lines = [f"d(C0) = {fmt_rat(disc.central)}"]
        for i, leg in enumerate(disc.legs, start=1):
            lines.append(f"leg {i}: " + " ".join(fmt_rat(d) for d in leg))
        return Result(OK, payload, text="\n".join(lines))
    if args.op == "class":
        cls = whs.lc_class(star)
        chi, e = whs.chi_e(star)
        return Result(OK, {"class": cls, "chi": chi, "e": e},
                      text=f"{cls} (chi = {fmt_rat(chi)}, e = {fmt_rat(e)})")
    if args.op == "verify":
        rep = whs.whs_identity_check(star)
        status = OK if rep["ok"] else VERIFICATION_FAILURE
        diags = [] if rep["ok"] else [
            f"identity mismatch: {fmt_rat(rep['combinatorial'])} vs "
            f"{fmt_rat(rep['closed_form'])} vs {fmt_rat(rep['matrix'])}"]
        return Result(status, rep, diags,
                      text="ok" if rep["ok"] else "FAILED")
    raise ValueError(f"unknown star op {args.op}")


def cmd_wahl(args):
    if args.op == "gen":
        chains = sorted(qc.wahl_generate(args.length), key=lambda c: (len(c), c))
        return Result(OK, {"chains": [list(c) for c in chains]},
                      text="\n".join(f"[{','.join(map(str, c))}]" for c in chains))
    if args.op == "check":
        wp = qc.wahl_recognize(_chain_arg(args.entries))
        if wp is None:
            return Result(OK, {"wahl": False}, text="not a Wahl chain")
        return Result(OK, {"wahl": True, "n": wp.n, "a": wp.a},
                      text=f"Wahl chain of 1/{wp.n * wp.n}(1,{wp.n * wp.a - 1}), "
                           f"n={wp.n} a={wp.a}")
    raise ValueError(f"unknown wahl op {args.op}")


def cmd_family(args):
    catalog = _catalog_from_args(args)
    if args.op == "show":
        fid = _family_id_from_args(args)
        star = qc.instantiate_family(fid, catalog)
        payload = {"e0": star.e0, "genus": star.genus,
                   "legs": [list(l) for l in star.legs]}
        if args.dot:
            return Result(OK, payload,
                          text=cc.dot_export(whs.star_to_config(star), "star"))
        text = f"central: -{star.e0}; legs: " + " ".join(
            f"[{','.join(map(str, l))}]" for l in star.legs)
        return Result(OK, payload, text=text)
    if args.op == "verify":
        fid = _family_id_from_args(args)
        rep = qc.verify_family(fid, catalog)
        status = OK if rep["ok"] else VERIFICATION_FAILURE
        diags = [f"mismatch at {m[0]}: {tuple(map(str, m[1:]))}"
                 for m in rep["mismatches"]]
        return Result(status, rep, diags, text="ok" if rep["ok"] else "FAILED")
    if args.op == "verify-all":
        import itertools
        failures = []
        checked = 0
        cat = catalog if catalog is not None else qc.load_catalog()
        for (valency, fam), rec in sorted(cat.items()):
            names = rec["param_names"]
            for vals in itertools.product(range(args.max_param + 1),
                                          repeat=len(names)):
                fid = qc.QhdFamilyId(valency, fam,
                                     tuple(sorted(zip(names, vals))))
                rep = qc.verify_family(fid, cat)
                checked += 1
                if not rep["ok"]:
                    failures.append(f"{valency}.{fam} {dict(zip(names, vals))}")
        payload = {"checked": checked, "failures": failures}
        status = OK if not failures else VERIFICATION_FAILURE
        return Result(status, payload, failures,
                      text=f"{checked} instances verified" if not failures
                      else f"{len(failures)} failures")
    raise ValueError(f"unknown family op {args.op}")


def _mmod_from_args(args) -> em.MModConfig:
    if args.tag == "yI":
        return em.build_mmod("yI", n=args.n, a=args.a, y=args.y, d=args.d)
    return em.build_mmod(args.tag, args.t)


def cmd_mmod(args):
    if args.op == "build":
        mmod = _mmod_from_args(args)
        payload = mmod_payload(mmod)
        if args.dot:
            return Result(OK, payload, text=cc.dot_export(mmod.config, "mmod"))
        return Result(OK, payload)
    if args.op == "lambda":
        mmod = _mmod_from_args(args)
        lam = em.lambda_of(mmod)
        return Result(OK, {"lambda": lam}, text=fmt_rat(lam))
    if args.op == "verify-table":
        rep = em.verify_lambda_table(max_param=args.max_param)
        status = OK if rep["ok"] else VERIFICATION_FAILURE
        diags = [f"{t}: got {g} want {w}" for t, _, g, w in rep["failures"]]
        return Result(status, {"checked": rep["checked"], "ok": rep["ok"]},
                      diags, text=f"{rep['checked']} entries verified"
                      if rep["ok"] else "FAILED")
    if args.op == "enumerate":
        fiber = _parse_fiber(args.fiber)
        found = em.enumerate_mmods(fiber, args.depth)
        payload = {"fiber": str(fiber), "depth": args.depth,
                   "count": len(found),
                   "mmods": [mmod_payload(m) for m in found]}
        lines = [f"{len(found)} M-modification(s) over {fiber} with <= "
                 f"{args.depth} blow-ups"]
        for m in found:
            lines.append("  " + describe_mmod(m))
        return Result(OK, payload, text="\n".join(lines))
    if args.op == "slide":
        mmod = _mmod_from_args(args)
        whites = [w for w in mmod.whites()
                  if len(mmod.config.neighbors(w)) == 1]
        if args.gamma:
            gamma = args.gamma
        elif len(whites) == 1:
            gamma = whites[0]
        else:
            raise ValueError(f"choose --gamma among {sorted(mmod.whites(), key=str)}")
        slid = em.slide(mmod, gamma, leg_index=args.leg)
        payload = mmod_payload(slid)
        return Result(OK, payload, text=describe_mmod(slid))
    raise ValueError(f"unknown mmod op {args.op}")


def describe_mmod(m: em.MModConfig) -> str:
    parts = []
    for comp in em.contracted_components(m.config):
        if comp[0] == "wahl":
            parts.append("[" + ",".join(map(str, comp[1])) + "]")
        elif comp[0] == "star":
            star = comp[1]
            parts.append(f"star(-{star.e0}; " + " ".join(
                "[" + ",".join(map(str, l)) + "]" for l in star.legs) + ")")
        else:
            parts.append(comp[0])
    lam = em.lambda_of(m)
    name = m.name or "mmod"
    return f"{name}: {' + '.join(parts)}  (blowups {m.config.num_blowups}, " \
           f"lambda {fmt_rat(lam)})"


def mmod_payload(m: em.MModConfig) -> dict:
    return {"name": m.name, "params": dict(m.params), "fiber": str(m.fiber),
            "base": m.base, "num_blowups": m.config.num_blowups,
            "lambda": em.lambda_of(m),
            "config": cc.to_json_dict(m.config),
            "history": [[type(l).__name__, _jsonable(vars(l)), str(nid)]
                        for l, nid in m.history]}


def _parse_fiber(text) -> em.FiberType:
    t = text.strip()
    y = 1
    if t and t[0].isdigit() and not t.startswith("I"):
        raise ValueError(f"bad fiber {text}")
    i = 0
    while i < len(t) and t[i].isdigit():
        i += 1
    if i:
        y, t = int(t[:i]), t[i:]
    if t in ("II", "III", "IV", "II*", "III*", "IV*"):
        return em.FiberType(t, y=y) if y == 1 else em.FiberType(t)
    if t.startswith("I") and t.endswith("*"):
        return em.FiberType("I*", n=int(t[1:-1]))
    if t.startswith("I"):
        return em.FiberType("I", n=int(t[1:]), y=y)
    raise ValueError(f"bad fiber {text}")


def cmd_dolgachev(args):
    plans = dg.dolgachev_enumerate(args.a, args.b)
    payload = {"a": args.a, "b": args.b, "count": len(plans),
               "plans": [{"a": p.a, "b": p.b, "tag": p.tag,
                          "params": dict(p.params), "lambda1": p.lambda1,
                          "lambda_bar": p.lambda_bar,
                          "wahl_chain": list(p.wahl_chain),
                          "k_coeff": p.k_coeff} for p in plans]}
    lines = [f"{len(plans)} plan(s) for D_({args.a},{args.b}); "
             f"K_W = ({fmt_rat(plans[0].k_coeff)}) F" if plans else "no plans"]
    for p in plans:
        lines.append("  " + p.display + f"  lambda={fmt_rat(p.lambda1)}"
                     f" wahl2=[{','.join(map(str, p.wahl_chain))}]")
    return Result(OK, payload, text="\n".join(lines))


def cmd_flip(args):
    if args.family:
        if args.family != "f":
            raise ValueError("only family (f) flip inputs are tabulated; "
                             "pass --leg/--wahl/--z-sing explicitly otherwise")
        q = args.q or 0
        leg = (2,) * q + (q + 6,)
        wahl = (2,) * (q + 4) + (q + 8,)
        z_sing = (2,) * (q + 4) + (q + 2,)
    else:
        if not (args.leg and args.wahl and args.z_sing):
            raise ValueError("need --family f --q Q or all of --leg --wahl --z-sing")
        leg = _chain_arg(args.leg.split(","))
        wahl = _chain_arg(args.wahl.split(","))
        z_sing = _chain_arg(args.z_sing.split(","))
    res = dg.flip_compute(leg, wahl, z_sing, args.bound)
    payload = {
        "wplus_cqs": list(res.wplus_cqs),
        "zplus_wahl": list(res.zplus_wahl),
        "zplus_wahl_n": res.zplus_wahl_params.n,
        "zplus_wahl_a": res.zplus_wahl_params.a,
        "zplus_dual_cqs": list(res.zplus_dual_cqs),
        "dual_chain": list(res.dual_chain),
        "z_chain": list(res.z_chain),
        "contracted_w": list(res.contracted_w),
        "contracted_z": list(res.contracted_z),
    }
    text = (f"W+ c.q.s.: 1/{res.wplus_cqs[0]}(1,{res.wplus_cqs[1]})\n"
            f"Z+ Wahl chain: [{','.join(map(str, res.zplus_wahl))}] "
            f"(n={res.zplus_wahl_params.n}, a={res.zplus_wahl_params.a})\n"
            f"dual chain: [{','.join(map(str, res.dual_chain))}]\n"
            f"Z contraction: [{','.join(map(str, res.z_chain))}]")
    return Result(OK, payload, text=text)


def cmd_slc_coeffs(args):
    w, z, verdict = dg.slc_nef_coeffs(args.fiber, args.n, args.y)
    payload = {"w_coeff": w, "z_coeff": z, "verdict": verdict}
    return Result(OK, payload,
                  text=f"K+Delta on W+: ({fmt_rat(w)}) F; on Z+: ({fmt_rat(z)}) F; {verdict}")


def cmd_seifert(args):
    val, eff = dg.seifert_anticanonical(args.fiber, args.y)
    payload = {"coefficient": val, "effective": eff}
    return Result(OK, payload,
                  text=f"-(K+Delta) = ({fmt_rat(val)}) F; "
                       f"{'effective' if eff else 'not effective'}")


# ---------------------------------------------------------------------------
# parser

def build_parser():
    p = argparse.ArgumentParser(
        prog="qhdsurf",
        description="Exact combinatorics of QHD surface singularities and "
                    "elliptic-fiber M-modifications")
    p.add_argument("--json", action="store_true", help="machine output")
    sub = p.add_subparsers(dest="command", required=True)

    hj = sub.add_parser("hj", help="Hirzebruch-Jung continued fractions")
    hjs = hj.add_subparsers(dest="op", required=True)
    for name in ("expand", "dual"):
        sp = hjs.add_parser(name)
        sp.add_argument("m", type=int)
        sp.add_argument("q", type=int)
    for name in ("eval", "seq"):
        sp = hjs.add_parser(name)
        sp.add_argument("entries", nargs="+", type=int)
    hj.set_defaults(func=cmd_hj)

    cqs = sub.add_parser("cqs", help="cyclic quotient singularities")
    cqss = cqs.add_subparsers(dest="op", required=True)
    sp = cqss.add_parser("disc")
    sp.add_argument("entries", nargs="+", type=int)
    cqs.set_defaults(func=cmd_cqs)

    star = sub.add_parser("star", help="weighted homogeneous star graphs")
    stars = star.add_subparsers(dest="op", required=True)
    for name in ("disc", "class", "verify"):
        sp = stars.add_parser(name)
        sp.add_argument("--e0", type=int)
        sp.add_argument("--genus", type=int, default=0)
        sp.add_argument("--leg", action="append", default=[],
                        help="comma-separated entries; repeatable")
        sp.add_argument("--valency", type=int)
        sp.add_argument("--family")
        for nm in ("p", "q", "r"):
            sp.add_argument(f"--{nm}", type=int)
        sp.add_argument("--catalog")
    star.set_defaults(func=cmd_star)

    wahl = sub.add_parser("wahl", help="Wahl chains")
    wahls = wahl.add_subparsers(dest="op", required=True)
    sp = wahls.add_parser("gen")
    sp.add_argument("length", type=int)
    sp = wahls.add_parser("check")
    sp.add_argument("entries", nargs="+", type=int)
    wahl.set_defaults(func=cmd_wahl)

    fam = sub.add_parser("family", help="QHD family catalog")
    fams = fam.add_subparsers(dest="op", required=True)
    for name in ("show", "verify"):
        sp = fams.add_parser(name)
        sp.add_argument("valency", type=int)
        sp.add_argument("family")
        for nm in ("p", "q", "r"):
            sp.add_argument(f"--{nm}", type=int)
        sp.add_argument("--catalog")
        sp.add_argument("--dot", action="store_true")
    sp = fams.add_parser("verify-all")
    sp.add_argument("--max-param", type=int, default=2)
    sp.add_argument("--catalog")
    fam.set_defaults(func=cmd_family)

    mm = sub.add_parser("mmod", help="M-modifications of elliptic fibers")
    mms = mm.add_subparsers(dest="op", required=True)
    for name in ("build", "lambda", "slide"):
        sp = mms.add_parser(name)
        sp.add_argument("tag")
        sp.add_argument("--t", type=int)
        sp.add_argument("--n", type=int)
        sp.add_argument("--a", type=int)
        sp.add_argument("--y", type=int, default=1)
        sp.add_argument("--d", type=int, default=1)
        sp.add_argument("--dot", action="store_true")
        if name == "slide":
            sp.add_argument("--leg", type=int)
            sp.add_argument("--gamma")
    sp = mms.add_parser("verify-table")
    sp.add_argument("--max-param", type=int, default=4)
    sp = mms.add_parser("enumerate")
    sp.add_argument("fiber")
    sp.add_argument("--depth", type=int, required=True)
    mm.set_defaults(func=cmd_mmod)

    do = sub.add_parser("dolgachev", help="QHD degenerations of Dolgachev surfaces")
    do.add_argument("--a", type=int, required=True)
    do.add_argument("--b", type=int, required=True)
    do.set_defaults(func=cmd_dolgachev)

    fl = sub.add_parser("flip", help="k2A flip of the Seifert partial resolution")
    fl.add_argument("--family")
    fl.add_argument("--q", type=int)
    fl.add_argument("--leg")
    fl.add_argument("--wahl")
    fl.add_argument("--z-sing", dest="z_sing")
    fl.add_argument("--bound", type=int, default=12)
    fl.set_defaults(func=cmd_flip)

    sc = sub.add_parser("slc-coeffs", help="nef coefficients of the slc limit")
    sc.add_argument("--fiber", required=True, choices=["II", "III", "IV"])
    sc.add_argument("--n", type=int, required=True)
    sc.add_argument("--y", type=int, default=1)
    sc.set_defaults(func=cmd_slc_coeffs)

    se = sub.add_parser("seifert-anticanonical",
                        help="-(K+Delta) on the Seifert partial resolution base")
    se.add_argument("--fiber", required=True,
                    choices=["II", "III", "IV", "II*", "III*", "IV*"])
    se.add_argument("--y", type=int, default=1)
    se.set_defaults(func=cmd_seifert)

    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return DOMAIN_ERROR if exc.code not in (0, None) else 0
    try:
        result = args.func(args)
    except (ValueError, KeyError) as exc:
        return Result(DOMAIN_ERROR, {"error": str(exc)}, [str(exc)],
                      text=f"error: {exc}").emit(args.json)
    return result.emit(args.json)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
