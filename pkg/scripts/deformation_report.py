"""Continuity and unitarity of the deformed regular representation on truncated balls.

Prints, per word length, the worst ratio of ||pi0_z(a) - pi0_w(a)|| to sum |z^n - w^n| with and
without the factor ||S(a)||, then the interior unitarity defect of both conjugation orders.
"""

import argparse
import math
from dataclasses import dataclass, field

import numpy as np

from ulamlab.deformation import (DeformationOps, continuity_rhs_weighted, interior_unitarity_defect,
                                 ps_continuity_gap, ps_structural_checks)
from ulamlab.words import FreeWord, enumerate_ball


@dataclass
class DeformConfig:
    L: int = 8
    max_word: int = 3
    pairs: int = 50
    radius: float = 0.9
    zs: list = field(default_factory=lambda: [-0.3, 0.2, 0.5, 0.8])
    seed: int = 0


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, typ in (("L", int), ("max_word", int), ("pairs", int), ("radius", float), ("seed", int)):
        p.add_argument(f"--{name}", type=typ)
    p.add_argument("--zs", nargs="+", type=float)
    cfg = DeformConfig(**{k: v for k, v in vars(p.parse_args(argv)).items() if v is not None})
    ops = DeformationOps(2, cfg.L)
    rng = np.random.default_rng(cfg.seed)
    pts = [cfg.radius * math.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform()) for _ in range(2 * cfg.pairs)]
    words = enumerate_ball(2, cfg.max_word)
    print("|a|  ||S(a)||max  lhs/rhs  lhs/(||S|| rhs)")
    for m in range(1, cfg.max_word + 1):
        ws = [a for a in words if len(a) == m]
        snorm = max(ps_structural_checks(ops, a, check=False).difference_norm for a in ws)
        r1 = r2 = 0.0
        for z, w in zip(pts[::2], pts[1::2]):
            for a in ws:
                lhs, rhs = ps_continuity_gap(ops, z, w, a)
                if rhs > 0:
                    r1 = max(r1, lhs / rhs)
                    r2 = max(r2, lhs / continuity_rhs_weighted(ops, z, w, a))
        print(f"{m:>3}  {snorm:>11.4f}  {r1:>7.4f}  {r2:>15.4f}")
    print("\nz      L   printed-order defect   inverse-order defect   (a = a)")
    a = FreeWord.parse("a")
    for z in cfg.zs:
        for L in range(4, cfg.L + 1, 2):
            o = DeformationOps(2, L)
            print(f"{z:<6} {L:>2}   {interior_unitarity_defect(o, z, a, 'printed'):>20.3e}"
                  f"   {interior_unitarity_defect(o, z, a, 'inverse'):>20.3e}")


if __name__ == "__main__":
    main()
