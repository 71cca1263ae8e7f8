"""Seeded experiment pipelines behind the command line.

Every pipeline takes a resolved config dict and returns a :class:`Report`; all randomness
comes from one generator seeded by ``config["seed"]``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import correct as corr
from . import deformation as dfm
from . import induction as ind
from . import reps
from . import witnesses as wit
from .errors import UsageError
from .groups import all_subgroups, build_group, coset_system
from .linalg import opnorms
from .quasirep import QuasiRep, defect, one_dim_witness, uniform_distance
from .words import FreeWord, enumerate_ball, word_power

SLACK = 1e-8


@dataclass
class Assertion:
    id: str
    statement: str
    passed: bool
    value: float
    bound: float
    witness: Optional[dict] = None


@dataclass
class EstimateRecord:
    quantity: str
    value: float
    certificate: str
    provenance: str
    source: str


@dataclass
class Report:
    command: str
    config: dict
    config_hash: str
    rows: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    estimates: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def first_failure(self) -> Optional[Assertion]:
        return next((a for a in self.assertions if not a.passed), None)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "config_hash": self.config_hash,
            "passed": self.passed,
            "assertions": [asdict(a) for a in self.assertions],
            "estimates": [asdict(e) for e in self.estimates],
            "rows": self.rows,
        }


class _Checker:
    """Collects the worst case of each asserted inequality ``value <= bound``."""

    def __init__(self):
        self.items = {}

    def check(self, aid, statement, value, bound, witness=None, tol=0.0):
        value, bound = float(value), float(bound)
        ok = value <= bound + tol
        margin = value - bound
        cur = self.items.get(aid)
        if cur is None or (cur[1].passed and not ok) or (cur[1].passed == ok and margin > cur[0]):
            self.items[aid] = (margin, Assertion(aid, statement, ok, value, bound, witness))

    def assertions(self):
        return [self.items[k][1] for k in sorted(self.items)]


# -- configuration -----------------------------------------------------------------

def _str(v):
    if not isinstance(v, str):
        raise TypeError("expected a string")
    return v


def _int(v):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
        raise TypeError("expected an integer")
    return int(v)


def _float(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError("expected a number")
    return float(v)


def _list(conv):
    def f(v):
        return [conv(x) for x in (v if isinstance(v, list) else [v])]
    return f


def _subgroup(v):
    if v == "random":
        return v
    return _list(_int)(v)


def _fmt(v):
    if v not in ("json", "csv"):
        raise TypeError("expected 'json' or 'csv'")
    return v


def _opt_str(v):
    return None if v is None else _str(v)


COMMON = {"seed": (_int, 0), "out": (_opt_str, None), "format": (_fmt, "json")}

SCHEMAS = {
    "correct": {
        "group": (_list(_str), ["cyclic:5"]), "dim": (_list(_int), [2]), "delta": (_list(_float), [0.01]),
        "trials": (_int, 10), "tol": (_float, 1e-12), "max_iter": (_int, 64),
    },
    "stabilize": {
        "group": (_list(_str), ["dihedral:4"]), "dim": (_list(_int), [4]), "delta": (_list(_float), [0.05]),
        "trials": (_int, 10),
    },
    "induce-compress": {
        "group": (_list(_str), ["symmetric:3"]), "subgroup": (_subgroup, "random"), "max_index": (_int, 6),
        "dim": (_list(_int), [1]), "delta": (_list(_float), [0.01]), "trials": (_int, 10),
    },
    "rolli": {
        "dim": (_list(_int), [2]), "delta": (_list(_float), [0.3]), "trunc": (_int, 4),
        "sample_trunc": (_int, 6), "candidates": (_int, 16), "refine": (_int, 100),
    },
    "quasimorphism": {
        "pattern": (_str, "ab"), "t": (_list(_float), [0.1, 0.01, 0.001]), "trunc": (_int, 8), "grid": (_int, 32),
    },
    "deform": {
        "k": (_int, 2), "trunc": (_int, 8), "max_word": (_int, 3), "pairs": (_int, 50), "radius": (_float, 0.9),
        "z_unitary": (_list(_float), [0.5]), "continuity_bound": (_str, "weighted"),
    },
    "witness-scan": {
        "group": (_list(_str), ["cyclic:2", "cyclic:3", "cyclic:5"]), "delta": (_list(_float), [0.05, 0.1, 0.2]),
    },
}


def resolve_config(command: str, raw: dict) -> dict:
    if command not in SCHEMAS:
        raise UsageError(f"unknown command {command!r}")
    schema = {**SCHEMAS[command], **COMMON}
    out = {}
    for key in raw:
        if key not in schema and key != "command":
            raise UsageError(f"config.{key}: unknown field for command {command}")
    if raw.get("command", command) != command:
        raise UsageError(f"config.command: {raw['command']!r} does not match {command!r}")
    for key, (conv, default) in schema.items():
        v = raw.get(key, default)
        try:
            out[key] = conv(v)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"config.{key}: {exc}") from None
    if command == "deform" and out["continuity_bound"] not in ("weighted", "printed"):
        raise UsageError("config.continuity_bound: expected 'weighted' or 'printed'")
    return out


def config_hash(command: str, cfg: dict) -> str:
    core = {k: v for k, v in cfg.items() if k not in ("out", "format")}
    blob = json.dumps({"command": command, "config": core}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# -- pipelines ---------------------------------------------------------------------

def _catalogue(cache, G, spec, d):
    key = (spec, d)
    if key not in cache:
        cache[key] = reps.catalogue(G, d)
    return cache[key]


def run_correct(cfg, prov):
    rng = np.random.default_rng(cfg["seed"])
    chk, rows, est, cache = _Checker(), [], [], {}
    for spec in cfg["group"]:
        G = build_group(spec)
        for d in cfg["dim"]:
            cat = _catalogue(cache, G, spec, d)
            for eps in cfg["delta"]:
                lower, ratios = 0.0, []
                for trial in range(cfg["trials"]):
                    rho = reps.random_representation(G, d, rng, cat)
                    pi = reps.perturb(rho, eps, rng) if eps > 0 else rho
                    trace = corr.kazhdan_correct(pi, cfg["tol"], cfg["max_iter"], check=False)
                    e = trace.initial_defect
                    one = defect(corr.average_step(pi)).value if trace.iterations else e
                    w = {"group": spec, "dim": d, "delta": eps, "trial": trial}
                    rows.append({**w, "defect": e, "one_step_defect": one, "iterations": len(trace.iterations),
                                 "final_defect": trace.final_defect, "distance": trace.distance,
                                 "guarantee": trace.guarantee, "converged": trace.converged})
                    chk.check("perturbation-size", "measured defect of the perturbed map is at most delta",
                              e, eps, w, 1e-12)
                    chk.check("kazhdan-convergence", "averaging reaches defect <= tol",
                              trace.final_defect, cfg["tol"], w)
                    if trace.guarantee is not None:
                        chk.check("kazhdan-correction-bound", "distance moved <= eps + 120 eps^2",
                                  trace.distance, trace.guarantee, w, SLACK)
                    if e <= 0.05:
                        chk.check("one-step-contraction", "defect after one averaging step <= 11 eps^2",
                                  one, 11 * e * e, w, SLACK)
                    lower = max(lower, e / 3)
                    if e > 0:
                        ratios.append(trace.distance / e)
                tag = f"[{spec},{d}]({eps:g})"
                est.append(EstimateRecord(f"F_lower{tag}", lower, "certified-lower-bound", prov,
                                          "defect/3 of sampled maps"))
                if ratios:
                    est.append(EstimateRecord(f"distance_over_defect_max{tag}", max(ratios), "observation", prov,
                                              "kazhdan_correct"))
    return rows, chk.assertions(), est


def _invariant_projection(u, dims, rng):
    mask = rng.random(len(dims)) < 0.5
    if len(dims) > 1 and (mask.all() or not mask.any()):
        mask[int(rng.integers(len(dims)))] ^= True
    cols = np.concatenate([np.arange(sum(dims[:i]), sum(dims[: i + 1])) for i in range(len(dims)) if mask[i]]
                          or [np.array([], dtype=int)]).astype(int)
    B = u[:, cols]
    return B @ B.conj().T


def run_stabilize(cfg, prov):
    rng = np.random.default_rng(cfg["seed"])
    chk, rows, cache = _Checker(), [], {}
    for spec in cfg["group"]:
        G = build_group(spec)
        for d in cfg["dim"]:
            cat = _catalogue(cache, G, spec, d)
            for s in cfg["delta"]:
                for trial in range(cfg["trials"]):
                    nu, u, dims = reps.random_representation_split(G, d, rng, cat)
                    P0 = _invariant_projection(u, dims, rng)
                    v = reps.near_identity(d, s, rng)
                    P = v @ P0 @ v.conj().T
                    P = (P + P.conj().T) / 2
                    spread = corr.projection_spread(nu, P)
                    Q = corr.stabilize_projection(nu, P, spread)
                    Q0 = corr.average_projection(nu, P)
                    w = {"group": spec, "dim": d, "delta": s, "trial": trial}
                    pq = float(opnorms(P - Q))
                    comm = float(opnorms(nu.values @ Q - Q @ nu.values).max())
                    idem = float(opnorms(Q @ Q - Q))
                    q0 = float(opnorms(Q0 - P))
                    rows.append({**w, "rank": int(round(np.trace(P0).real)), "spread": spread, "p_minus_q": pq,
                                 "q0_minus_p": q0, "commutator": comm, "idempotency": idem})
                    chk.check("projection-stabilization-bound", "||P - Q|| <= 2 delta", pq, 2 * spread, w, SLACK)
                    chk.check("stabilized-projection-invariance", "Q commutes with nu", comm, 0.0, w, SLACK)
                    chk.check("stabilized-projection-idempotent", "Q^2 = Q", idem, 0.0, w, 1e-9)
                    chk.check("averaged-projection-distance", "||Q0 - P|| <= delta", q0, spread, w, SLACK)
    return rows, chk.assertions(), []


def pick_subgroup(G, rng, max_index, spec="random"):
    if spec != "random":
        from .groups import generated_subgroup
        return generated_subgroup(G, spec)
    subs = [H for H in all_subgroups(G) if 2 <= G.order // len(H) <= max_index]
    if not subs:
        subs = [tuple(range(G.order))]
    return subs[int(rng.integers(len(subs)))]


def run_induce_compress(cfg, prov):
    rng = np.random.default_rng(cfg["seed"])
    chk, rows = _Checker(), []
    for spec in cfg["group"]:
        G = build_group(spec)
        for trial in range(cfg["trials"]):
            H = pick_subgroup(G, rng, cfg["max_index"], cfg["subgroup"])
            cs = coset_system(G, H)
            Hg = cs.subgroup_group()
            for d in cfg["dim"]:
                mu = reps.random_representation(Hg, d, rng)
                mu1, mu2 = reps.perturb(mu, 0.1, rng), reps.perturb(mu, 0.1, rng)
                b1, b2 = ind.induce(mu1, cs, check=False).total, ind.induce(mu2, cs, check=False).total
                dgap = abs(defect(b1).value - defect(mu1).value)
                ngap = abs(uniform_distance(b1, b2) - uniform_distance(mu1, mu2))
                bar = ind.induce(mu, cs).total
                for s in cfg["delta"]:
                    u = reps.near_identity(bar.dim, s, rng)
                    nu = bar.conjugate(u)
                    delta = uniform_distance(nu, bar)
                    c = ind.compress(nu, mu, cs, delta)
                    w = {"group": spec, "subgroup_order": len(H), "index": cs.index, "dim": d, "delta": s,
                         "trial": trial}
                    rows.append({**w, "induced_defect_gap": dgap, "induced_distance_gap": ngap, **c.as_dict(),
                                 "result_defect": defect(c.result).value})
                    chk.check("induced-defect-equality", "def(mu_bar) = def(mu)", dgap, 0.0, w, 1e-12)
                    chk.check("induced-distance-equality", "||mu1_bar - mu2_bar|| = ||mu1 - mu2||", ngap, 0.0, w, 1e-12)
                    chk.check("compression-spread", "||P - nu(l) P nu(l)^*|| < 2 delta", c.spread, 2 * delta, w, SLACK)
                    chk.check("compression-projection-distance", "||P - Q|| <= 4 delta", c.pq, 4 * delta, w, SLACK)
                    chk.check("compression-polar-from-p", "||P - V|| <= 8 delta", c.pv, 8 * delta, w, SLACK)
                    chk.check("compression-final-distance", "distance to mu <= 16 delta", c.final, 16 * delta, w, SLACK)
    return rows, chk.assertions(), []


def run_rolli(cfg, prov):
    rng = np.random.default_rng(cfg["seed"])
    chk, rows, est = _Checker(), [], []
    L, L2 = cfg["trunc"], cfg["sample_trunc"]
    for n in cfg["dim"]:
        for delta in cfg["delta"]:
            seed = int(rng.integers(2 ** 31))
            data = wit.RolliData(n, delta, seed)
            mu = QuasiRep.free(2, max(L, L2), data)
            r = defect(mu, L)
            w = {"dim": n, "delta": delta, "rolli_seed": seed}
            row = {**w, "trunc": L, "defect": r.value, "witness": f"{r.witness_pair[0]},{r.witness_pair[1]}",
                   "pairs": r.pairs_checked}
            chk.check("rolli-defect-bound", "truncated defect <= delta", r.value, delta, w, 1e-10)
            if L2 > 0:
                r2 = defect(mu, L2)
                row["defect_wide"] = r2.value
                chk.check("rolli-defect-bound-wide", "truncated defect <= delta (wider ball)", r2.value, delta, w, 1e-10)
            tau = max(float(opnorms(data.tau(s, k) - np.eye(n))) for s in (0, 1) for k in range(1, 65))
            chk.check("rolli-tau-ball", "||tau_s(k) - Id|| <= delta/3", tau, delta / 3, w, 1e-12)
            srch = wit.nearest_hom_search(mu, L, cfg["candidates"], seed, cfg["refine"])
            row["nearest_hom_distance"] = srch.distance
            rows.append(row)
            est.append(EstimateRecord(f"def_trunc[{L}][n={n}]({delta:g})", r.value, "observation", prov,
                                      "defect"))
            est.append(EstimateRecord(f"D_hat_search[{L}][n={n}]({delta:g})", srch.distance, "observation", prov,
                                      "nearest_hom_search"))
    return rows, chk.assertions(), est


def run_quasimorphism(cfg, prov):
    chk, rows, est = _Checker(), [], []
    L = cfg["trunc"]
    phi = wit.brooks_phi(cfg["pattern"])
    cb = wit.coboundary_sup(phi, L)
    est.append(EstimateRecord(f"coboundary_sup[{L}]", cb.value, "certified-lower-bound", prov, "coboundary_sup"))
    worst = 0
    for g in enumerate_ball(phi.k, 4):
        for n in range(-3, 4):
            worst = max(worst, abs(phi(word_power(g, n)) - n * phi(g)))
    chk.check("quasimorphism-homogeneity", "phi(g^n) = n phi(g)", worst, 0.0)
    for t in cfg["t"]:
        mu = wit.exp_circle(phi, t, L)
        r = defect(mu, L)
        fit = wit.nearest_circle_hom(mu, L, cfg["grid"])
        bound = 2 * math.pi * t * cb.value
        rows.append({"t": t, "trunc": L, "coboundary_sup": cb.value, "defect": r.value, "bound": bound,
                     "D_hat": fit.distance, "angle_a": fit.angles[0], "angle_b": fit.angles[1]})
        chk.check("circle-defect-bound", "def(mu_t) <= 2 pi t sup|d phi|", r.value, bound, {"t": t}, 1e-12)
        est.append(EstimateRecord(f"D_hat[{L}]({t:g})", fit.distance, "observation", prov, "nearest_circle_hom"))
    return rows, chk.assertions(), est


def _disk(rng, r):
    return complex(r * math.sqrt(rng.random()) * np.exp(2j * math.pi * rng.random()))


def run_deform(cfg, prov):
    rng = np.random.default_rng(cfg["seed"])
    chk, rows, est = _Checker(), [], []
    ops = dfm.DeformationOps(cfg["k"], cfg["trunc"])
    words = enumerate_ball(cfg["k"], cfg["max_word"])
    chk.check("deformation-nilpotency", "P^(L+1) = 0 and P^L != 0",
              abs(dfm.nilpotency_degree(ops) - (cfg["trunc"] + 1)), 0.0)
    for a in words:
        s = dfm.ps_structural_checks(ops, a, check=False)
        w = {"a": str(a)}
        rows.append({"kind": "structure", **w, "dim_K": s.dim_K, "image_leak": s.image_leak,
                     "difference_norm": s.difference_norm, "P_on_K_norm": s.P_on_K_norm, "P_leak": s.P_leak})
        chk.check("deformation-image-in-K", "image of P - lambda P lambda^-1 lies in K(a)", s.image_leak, 0.0, w, 1e-10)
        chk.check("deformation-difference-norm", "||P - lambda P lambda^-1|| <= 2", s.difference_norm, 2.0, w, 1e-9)
        chk.check("deformation-P-contraction", "P preserves K(a) and contracts it",
                  max(s.P_on_K_norm - 1, s.P_leak), 0.0, w, 1e-10)
        chk.check("deformation-dim-K", "dim K(a) = |a| + 1", abs(s.dim_K - len(a) - 1), 0.0, w)
    worst_ratio = 0.0
    for i in range(cfg["pairs"]):
        z, w_ = _disk(rng, cfg["radius"]), _disk(rng, cfg["radius"])
        a = words[int(rng.integers(len(words)))]
        lhs, rhs = dfm.ps_continuity_gap(ops, z, w_, a)
        wrhs = dfm.continuity_rhs_weighted(ops, z, w_, a)
        wit_ = {"a": str(a), "z": [z.real, z.imag], "w": [w_.real, w_.imag]}
        rows.append({"kind": "continuity", "a": str(a), "z_re": z.real, "z_im": z.imag, "w_re": w_.real,
                     "w_im": w_.imag, "lhs": lhs, "rhs": rhs, "weighted_rhs": wrhs})
        if rhs > 0:
            worst_ratio = max(worst_ratio, lhs / rhs)
        if cfg["continuity_bound"] == "printed":
            chk.check("deformation-continuity", "||pi0_z(a) - pi0_w(a)|| <= sum |z^n - w^n|", lhs, rhs, wit_, 1e-9)
        else:
            chk.check("deformation-continuity-weighted",
                      "||pi0_z(a) - pi0_w(a)|| <= ||S(a)|| sum |z^n - w^n|", lhs, wrhs, wit_, 1e-9)
    est.append(EstimateRecord("continuity_lhs_over_sum_max", worst_ratio, "observation", prov, "ps_continuity_gap"))
    for z in cfg["z_unitary"]:
        for a in words[1: 1 + 2 * cfg["k"]]:
            w = {"a": str(a), "z": z}
            rep_err = dfm.representation_error(ops, z, a)
            u_p = dfm.interior_unitarity_defect(ops, z, a, "printed")
            u_i = dfm.interior_unitarity_defect(ops, z, a, "inverse")
            rows.append({"kind": "unitarity", "a": str(a), "z_re": z, "representation_error": rep_err,
                         "unitarity_printed": u_p, "unitarity_inverse": u_i})
            chk.check("deformation-representation", "pi0_z(a) pi0_z(a^-1) = Id", rep_err, 0.0, w, 1e-9)
            chk.check("deformation-unitary-inverse-order", "T_z^-1 pi0_z T_z is isometric", u_i, 0.0, w, 1e-12)
            est.append(EstimateRecord(f"unitarity_defect_printed[{cfg['trunc']}][{a}]({z:g})", u_p, "observation",
                                      prov, "interior_unitarity_defect"))
    return rows, chk.assertions(), est


def run_witness_scan(cfg, prov):
    chk, rows, est = _Checker(), [], []
    for spec in cfg["group"]:
        G = build_group(spec)
        chars = np.array(reps.characters(G))
        for delta in cfg["delta"]:
            best = 0.0
            for g0 in range(G.order):
                if g0 == G.identity:
                    continue
                mu = one_dim_witness(G, g0, delta)
                dv = defect(mu).value
                dist = float(np.abs(mu.values[None, :, 0, 0] - chars).max(axis=1).min())
                w = {"group": spec, "delta": delta, "g0": g0}
                rows.append({**w, "defect": dv, "nearest_character_distance": dist})
                chk.check("one-dim-witness-defect", "def(mu) <= delta", dv, delta, w, 1e-12)
                chk.check("one-dim-witness-distance", "distance to characters >= delta/4", -dist, -delta / 4, w)
                best = max(best, dist)
            est.append(EstimateRecord(f"F1_lower[{spec}]({delta:g})", best, "certified-lower-bound", prov,
                                      "one_dim_witness + exhaustive character distance"))
    return rows, chk.assertions(), est


PIPELINES = {
    "correct": run_correct,
    "stabilize": run_stabilize,
    "induce-compress": run_induce_compress,
    "rolli": run_rolli,
    "quasimorphism": run_quasimorphism,
    "deform": run_deform,
    "witness-scan": run_witness_scan,
}


def run_experiment(command: str, raw_config: dict) -> Report:
    cfg = resolve_config(command, raw_config)
    h = config_hash(command, cfg)
    rows, assertions, estimates = PIPELINES[command](cfg, h)
    return Report(command, cfg, h, rows, assertions, estimates)
