"""Induction of almost-representations from finite-index subgroups, and its inverse.

For coset representatives R with retraction r, the induced map acts on l^2(R, H) by

    (mu_bar(g) f)(x) = mu(x g r(xg)^{-1}) f(r(xg)),

so block (x, r(xg)) of mu_bar(g) is mu(x g r(xg)^{-1}) and every other block vanishes.
Blocks are ordered like ``cs.reps`` (sorted element indices).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correct import SLACK, stabilize_projection
from .errors import BoundViolation, UsageError
from .groups import CosetSystem
from .linalg import opnorms
from .quasirep import QuasiRep, defect, uniform_distance

EQ_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class InducedRep:
    base: QuasiRep
    cosets: CosetSystem
    total: QuasiRep

    @property
    def block_layout(self) -> dict:
        d = self.base.dim
        return {int(x): (i * d, (i + 1) * d) for i, x in enumerate(self.cosets.reps)}

    def layout_json(self) -> dict:
        return {"reps": [int(x) for x in self.cosets.reps], "block_dim": self.base.dim}


def coset_action(cs: CosetSystem) -> np.ndarray:
    """``act[g, i]`` = position of r(x_i g) in the representatives."""
    G = cs.group
    pos = {x: i for i, x in enumerate(cs.reps)}
    act = np.empty((G.order, cs.index), dtype=np.int64)
    for g in range(G.order):
        for i, x in enumerate(cs.reps):
            act[g, i] = pos[int(cs.retract[G.mul(x, g)])]
        if len(set(act[g])) != cs.index:
            raise AssertionError(f"x -> r(xg) is not a permutation for g = {g}")
    return act


def _check_base(mu: QuasiRep, cs: CosetSystem):
    if mu.is_free:
        raise UsageError("induction needs a finite subgroup")
    H = cs.subgroup_group()
    if not mu.domain.same_as(H):
        raise UsageError("map does not live on the subgroup of the coset system")


def induce(mu: QuasiRep, cs: CosetSystem, check: bool = True) -> InducedRep:
    _check_base(mu, cs)
    G = cs.group
    d, m = mu.dim, cs.index
    act = coset_action(cs)
    vals = np.zeros((G.order, m * d, m * d), dtype=np.complex128)
    for g in range(G.order):
        for i, x in enumerate(cs.reps):
            xg = G.mul(x, g)
            lam = G.mul(xg, G.inv(int(cs.retract[xg])))
            j = act[g, i]
            vals[g, i * d: (i + 1) * d, j * d: (j + 1) * d] = mu.values[cs.sub_index[lam]]
    out = InducedRep(mu, cs, QuasiRep(G, vals))
    if check:
        a, b = defect(mu).value, defect(out.total).value
        if abs(a - b) > EQ_TOL:
            raise BoundViolation("induced-defect-equality", abs(a - b), EQ_TOL)
    return out


def restrict_to_subgroup(nu: QuasiRep, cs: CosetSystem) -> QuasiRep:
    return QuasiRep(cs.subgroup_group(), nu.values[list(cs.subgroup)])


def block_e_projection(cs: CosetSystem, d: int) -> np.ndarray:
    i = cs.position(cs.group.identity)
    P = np.zeros((cs.index * d, cs.index * d), dtype=np.complex128)
    P[i * d: (i + 1) * d, i * d: (i + 1) * d] = np.eye(d)
    return P


@dataclass(frozen=True, eq=False)
class Compression:
    result: QuasiRep
    P: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    delta: float
    measured_delta: float
    spread: float
    pq: float
    qv: float
    pv: float
    final: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("delta", "measured_delta", "spread", "pq", "qv", "pv", "final")}


def _bound(name, value, bound):
    if value > bound + SLACK:
        raise BoundViolation(name, value, bound)


def compress(nu: QuasiRep, base: QuasiRep, cs: CosetSystem, delta: float) -> Compression:
    """Recover a representation of the subgroup near ``base`` from a representation ``nu``
    of the whole group near the induced map.

    P is the projection onto the identity block; Q is a nu|_Lambda-invariant projection
    near P; V is the polar part of PQ (V^*V = Q, VV^* = P); the result is V nu V^* read
    in identity-block coordinates.  Each stage bound is checked separately.
    """
    _check_base(base, cs)
    if 4 * delta >= 0.5:
        raise UsageError(f"need 4 delta < 1/2, got delta = {delta}")
    if cs.group.identity not in cs.reps:
        raise UsageError("identity must be a coset representative")
    mu_bar = induce(base, cs, check=False).total
    measured = uniform_distance(nu, mu_bar)
    if measured > delta:
        raise UsageError(f"measured distance {measured:.6g} to the induced map exceeds delta = {delta:.6g}")
    d = base.dim
    P = block_e_projection(cs, d)
    nu_sub = restrict_to_subgroup(nu, cs)
    Vs = nu_sub.values
    spread = float(opnorms(P - Vs @ P @ np.conj(np.swapaxes(Vs, 1, 2))).max())
    _bound("compression-spread", spread, 2 * delta)
    Q = stabilize_projection(nu_sub, P, 2 * delta)
    pq = float(opnorms(P - Q))
    _bound("compression-projection-distance", pq, 4 * delta)
    W, s, Wh = np.linalg.svd(P @ Q)
    V = W[:, :d] @ Wh[:d]
    qv = float(opnorms(Q - V))
    pv = float(opnorms(P - V))
    _bound("compression-polar-from-q", qv, 4 * delta)
    _bound("compression-polar-from-p", pv, 8 * delta)
    i = cs.position(cs.group.identity)
    E = np.zeros((cs.index * d, d), dtype=np.complex128)
    E[i * d: (i + 1) * d] = np.eye(d)
    Vh = V.conj().T
    vals = E.conj().T @ V @ Vs @ Vh @ E
    result = QuasiRep(base.domain, vals)
    final = uniform_distance(result, base)
    _bound("compression-final-distance", final, 16 * delta)
    dv = defect(result).value
    _bound("compression-result-homomorphism", dv, 0.0)
    return Compression(result, P, Q, V, delta, measured, spread, pq, qv, pv, final)
