#!/usr/bin/env python3
"""Derive white-curve attachment positions for the QHD catalog entries.

For each entry: instantiate the star family, try every placement of the
non-contracted (-1)-curves (and, for valency-4 entries, every attachment
and orientation of the extra chain), synthesize a blow-up script over
the fiber, and keep the placements passing every M-modification check
with the tabulated lambda.  Prints the survivors per parameter value so
the parametric positions can be frozen into elliptic_mmod.V3V4_ENTRIES.
"""

import itertools
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from qhdsurf import curve_config as cc
from qhdsurf.elliptic_mmod import (FiberType, QhdFamilyId, SynthesisError,
                                   V3V4_ENTRIES, _affine_t,
                                   _attach_chain_via_white,
                                   _star_position_id,
                                   _target_star_with_whites, build_from_target,
                                   catalog_lambda, instantiate_family,
                                   is_valid_mmod, lambda_of, structure_report)


def all_positions(star):
    pos = [(1, 0)]  # central (leg index unused at j=0)
    for i, leg in enumerate(star.legs, start=1):
        pos += [(i, j) for j in range(1, len(leg) + 1)]
    return pos


def try_target(target, fiber, want_lambda):
    try:
        mmod = build_from_target(target, fiber)
    except (SynthesisError, ValueError):
        return None
    if not is_valid_mmod(mmod):
        return None
    try:
        lam = lambda_of(mmod)
    except ValueError:
        return None
    if lam != want_lambda:
        return None
    return mmod


def derive_entry(tag, tvals):
    ent = V3V4_ENTRIES[tag]
    fiber = FiberType(tag.split(".")[0])
    n_whites_by_fiber = {"II": 1, "III": 2, "IV": 3}
    for t in tvals:
        env = {k: _affine_t(v, t) for k, v in ent["family_env"].items()}
        star = instantiate_family(
            QhdFamilyId(3 if ent["valency"] == 3 else 4, ent["family"],
                        tuple(sorted(env.items()))))
        want = catalog_lambda(tag, t)
        k = n_whites_by_fiber[fiber.kind]
        survivors = []
        if ent["valency"] == 3:
            for combo in itertools.combinations_with_replacement(
                    all_positions(star), k):
                target = _target_star_with_whites(star, combo)
                if try_target(target, fiber, want) is not None:
                    survivors.append(combo)
        else:
            chain_items = ent["chain"]["entries"]
            entries = []
            for item in chain_items:
                if isinstance(item, tuple) and item[0] == "run2":
                    entries.extend([2] * _affine_t(item[1], t))
                else:
                    entries.append(_affine_t(item, t))
            orients = {tuple(entries), tuple(reversed(entries))}
            for extra in itertools.combinations_with_replacement(
                    all_positions(star), k - 1):
                base = _target_star_with_whites(star, extra)
                for attach in all_positions(star):
                    attach_id = _star_position_id(star, attach[0], attach[1]) \
                        if attach[1] else "C0"
                    for orient in orients:
                        target = _attach_chain_via_white(
                            base, attach_id, orient, f"W{k}", "D")
                        if try_target(target, fiber, want) is not None:
                            survivors.append((extra, attach, orient))
        print(f"{tag} t={t}: {len(survivors)} placement(s)")
        for s in survivors:
            print(f"    {s}")


def main():
    tags = sys.argv[1:] or sorted(V3V4_ENTRIES)
    for tag in tags:
        ent = V3V4_ENTRIES[tag]
        tvals = [0] if ent["param"] is None else [0, 1, 2]
        derive_entry(tag, tvals)


if __name__ == "__main__":
    main()
