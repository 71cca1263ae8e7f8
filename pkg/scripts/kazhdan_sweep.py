"""Contraction of the averaging step: defect_1 / eps^2 and the final distance against eps + 120 eps^2.

    python3 scripts/kazhdan_sweep.py --groups cyclic:5 dihedral:4 --dims 2 3 --trials 20
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field

import numpy as np

from ulamlab.correct import average_step, correction_guarantee, kazhdan_correct
from ulamlab.groups import build_group
from ulamlab.quasirep import defect
from ulamlab.reps import perturb, random_representation


@dataclass
class SweepConfig:
    groups: list = field(default_factory=lambda: ["cyclic:5", "cyclic:7", "symmetric:3", "dihedral:4"])
    dims: list = field(default_factory=lambda: [2, 3, 4])
    eps: list = field(default_factory=lambda: [0.002, 0.01, 0.05, 0.09])
    trials: int = 20
    seed: int = 0


def sweep(cfg: SweepConfig):
    for gi, spec in enumerate(cfg.groups):
        G = build_group(spec)
        for d in cfg.dims:
            for ei, eps in enumerate(cfg.eps):
                one, dist, iters = [], [], []
                for t in range(cfg.trials):
                    rng = np.random.default_rng([cfg.seed, gi, d, ei, t])
                    pi = perturb(random_representation(G, d, rng), eps, rng)
                    e = defect(pi).value
                    one.append(defect(average_step(pi)).value / e ** 2)
                    tr = kazhdan_correct(pi, check=False)
                    dist.append(tr.distance / correction_guarantee(e))
                    iters.append(len(tr.iterations))
                yield {"group": spec, "dim": d, "eps": eps, "max_step_ratio": max(one),
                       "max_distance_ratio": max(dist), "max_iterations": max(iters)}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--groups", nargs="+")
    p.add_argument("--dims", nargs="+", type=int)
    p.add_argument("--eps", nargs="+", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    args = {k: v for k, v in vars(p.parse_args(argv)).items() if v is not None}
    w = None
    for row in sweep(SweepConfig(**args)):
        if w is None:
            w = csv.DictWriter(sys.stdout, fieldnames=list(row), lineterminator="\n")
            w.writeheader()
        w.writerow({k: f"{v:.6g}" if isinstance(v, float) else v for k, v in row.items()})


if __name__ == "__main__":
    main()
