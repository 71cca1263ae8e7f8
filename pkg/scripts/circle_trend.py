"""Circle-valued maps exp(2 pi i t phi_ab): truncated defect and fitted distance to characters as t and L vary.

The fitted distance is over characters of the free group on the ball of radius L only, so
it is an upper bound for the truncated distance to one-dimensional representations.
"""

import argparse
import math
from dataclasses import dataclass, field

from ulamlab.quasirep import defect
from ulamlab.witnesses import brooks_phi, coboundary_sup, exp_circle, nearest_circle_hom


@dataclass
class TrendConfig:
    pattern: str = "ab"
    ts: list = field(default_factory=lambda: [0.1, 0.03, 0.01, 0.003, 0.001])
    radii: list = field(default_factory=lambda: [4, 6, 8])
    grid: int = 32


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--pattern")
    p.add_argument("--ts", nargs="+", type=float)
    p.add_argument("--radii", nargs="+", type=int)
    p.add_argument("--grid", type=int)
    cfg = TrendConfig(**{k: v for k, v in vars(p.parse_args(argv)).items() if v is not None})
    phi = brooks_phi(cfg.pattern)
    print(f"{'L':>3} {'t':>8} {'defect':>11} {'2 pi t c':>11} {'D_hat':>9}")
    for L in cfg.radii:
        c = coboundary_sup(phi, L).value
        for t in cfg.ts:
            mu = exp_circle(phi, t, L)
            fit = nearest_circle_hom(mu, L, grid=cfg.grid)
            print(f"{L:>3} {t:>8.3g} {defect(mu, L).value:>11.4e} {2 * math.pi * t * c:>11.4e} {fit.distance:>9.4f}")


if __name__ == "__main__":
    main()
