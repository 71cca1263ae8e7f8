"""Correction of almost-representations of finite groups by averaging.

The invariant mean of a finite group is the uniform average, so one averaging step is
``pi'(h) = mean_x pi(x)^* pi(xh)`` followed by taking the unitary polar part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BoundViolation, SingularMatrixError, SpectralGapError, UsageError
from .linalg import SINGULAR_GUARD, UnitaryMatrix, opnorms, polar, spectral_projection
from .quasirep import HOM_TOL, QuasiRep, defect, uniform_distance

SLACK = 1e-8
EIG_FLOOR = 1e-12


def _require_finite(pi: QuasiRep):
    if pi.is_free:
        raise UsageError("averaging needs a finite group")


def average_raw(pi: QuasiRep) -> np.ndarray:
    """The averaged table ``pi'(h) = (1/|G|) sum_x pi(x)^* pi(xh)`` (not yet unitary)."""
    _require_finite(pi)
    G, V = pi.domain, pi.values
    n, d = G.order, pi.dim
    Vh = np.conj(np.swapaxes(V, 1, 2))
    out = np.empty_like(V)
    hs = max(1, 4_000_000 // max(1, n * d * d))
    for h0 in range(0, n, hs):
        h = np.arange(h0, min(n, h0 + hs))
        # rows of cayley indexed by x, columns by h
        prods = Vh[:, None] @ V[G.cayley[:, h]]
        out[h] = prods.sum(axis=0) / n
    return out


def _unitary_part(A, eig_floor=EIG_FLOOR):
    """A |A|^{-1} for a stack of matrices, with |A|^{-1} from the eigendecomposition of A^*A."""
    gram = np.conj(np.swapaxes(A, 1, 2)) @ A
    gram = (gram + np.conj(np.swapaxes(gram, 1, 2))) / 2
    w, U = np.linalg.eigh(gram)
    bad = np.flatnonzero(w[:, 0] <= eig_floor)
    if bad.size:
        h = int(bad[0])
        raise SingularMatrixError(f"averaged value at element {h} is singular", float(np.sqrt(max(w[h, 0], 0.0))), h)
    inv_abs = (U / np.sqrt(w)[:, None, :]) @ np.conj(np.swapaxes(U, 1, 2))
    return A @ inv_abs


def average_step(pi: QuasiRep) -> QuasiRep:
    """One averaging step followed by unitarisation."""
    return QuasiRep(pi.domain, _unitary_part(average_raw(pi)))


@dataclass
class CorrectionTrace:
    iterations: list
    final: QuasiRep
    initial_defect: float
    final_defect: float
    distance: float
    guarantee: Optional[float]
    converged: bool
    C: float = field(default=1.0)

    def as_dict(self) -> dict:
        return {
            "C": self.C,
            "converged": self.converged,
            "distance": self.distance,
            "final_defect": self.final_defect,
            "guarantee": self.guarantee,
            "initial_defect": self.initial_defect,
            "iterations": [{"defect_before": a, "distance_moved": b} for a, b in self.iterations],
        }


def correction_guarantee(eps: float) -> Optional[float]:
    """eps + 120 eps^2, claimed only for eps < 1/10."""
    return eps + 120 * eps ** 2 if eps < 0.1 else None


def kazhdan_correct(pi: QuasiRep, tol: float = 1e-12, max_iter: int = 64, check: bool = True) -> CorrectionTrace:
    """Iterate :func:`average_step` until the defect is at most ``tol``.

    Stops early, with ``converged=False``, if the defect fails to decrease.
    """
    _require_finite(pi)
    eps = defect(pi).value
    cur, cur_def = pi, eps
    its = []
    while cur_def > tol and len(its) < max_iter:
        nxt = average_step(cur)
        nxt_def = defect(nxt).value
        its.append((cur_def, uniform_distance(cur, nxt)))
        cur = nxt
        if nxt_def >= cur_def:
            cur_def = nxt_def
            break
        cur_def = nxt_def
    dist = uniform_distance(pi, cur)
    guarantee = correction_guarantee(eps)
    trace = CorrectionTrace(its, cur, eps, cur_def, dist, guarantee, cur_def <= tol)
    if check and guarantee is not None and dist > guarantee + SLACK:
        raise BoundViolation("kazhdan-correction-bound", dist, guarantee)
    return trace


# -- projections ---------------------------------------------------------------

def _require_hom(nu: QuasiRep, name="map"):
    _require_finite(nu)
    dv = defect(nu).value
    if dv > HOM_TOL:
        raise UsageError(f"{name} is not a homomorphism (defect {dv:.3e})")


def _require_projection(P, tol=1e-9):
    P = np.asarray(P, dtype=np.complex128)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise UsageError("projection must be square")
    err = max(float(opnorms(P @ P - P)), float(opnorms(P - P.conj().T)))
    if err > tol:
        raise UsageError(f"matrix is not an orthogonal projection (error {err:.3e})")
    return P


def projection_spread(nu: QuasiRep, P) -> float:
    """max_g ||P - nu(g) P nu(g)^*||."""
    V = nu.values
    return float(opnorms(P - V @ P @ np.conj(np.swapaxes(V, 1, 2))).max())


def average_projection(nu: QuasiRep, P) -> np.ndarray:
    V = nu.values
    Q0 = (V @ P @ np.conj(np.swapaxes(V, 1, 2))).sum(axis=0) / V.shape[0]
    return (Q0 + Q0.conj().T) / 2


def stabilize_projection(nu: QuasiRep, P, delta: float) -> np.ndarray:
    """A nu-invariant projection within 2 delta of an almost invariant projection P.

    The hull point used is the uniform average of the conjugates nu(g) P nu(g)^*, which is
    invariant and within delta of P; its spectrum therefore clusters near 0 and 1.
    """
    if not 0 <= delta < 0.5:
        raise UsageError(f"delta must lie in [0, 1/2), got {delta}")
    if nu.dim != np.shape(P)[0]:
        raise UsageError("projection and representation dimensions differ")
    _require_hom(nu)
    P = _require_projection(P)
    spread = projection_spread(nu, P)
    if spread > delta:
        raise UsageError(f"measured spread {spread:.6g} exceeds delta = {delta:.6g}")
    Q0 = average_projection(nu, P)
    w = np.linalg.eigvalsh(Q0)
    inside = w[(w > delta + 1e-6) & (w < 1 - delta - 1e-6)]
    if inside.size:
        raise SpectralGapError(f"averaged projection has eigenvalue {inside[0]!r} in the gap", float(inside[0]))
    Q = spectral_projection(Q0, 0.5)
    V = nu.values
    comm = float(opnorms(V @ Q - Q @ V).max())
    if comm > SLACK:
        raise BoundViolation("stabilized-projection-invariance", comm, SLACK)
    dist = float(opnorms(P - Q))
    if dist > 2 * delta + SLACK:
        raise BoundViolation("projection-stabilization-bound", dist, 2 * delta)
    return Q


# -- intertwiners ----------------------------------------------------------------

@dataclass(frozen=True)
class Conjugation:
    u: UnitaryMatrix
    distance: float
    deviation: float
    bound: float
    intertwining_error: float


def conjugating_unitary(pi: QuasiRep, omega: QuasiRep, eps: float) -> Conjugation:
    """Unitary u with ``omega = u^* pi u`` for representations at uniform distance <= eps.

    ``T = mean_g pi(g) omega(g)^*`` satisfies pi(g) T = T omega(g) and is invertible when
    eps sqrt(d) < 1; u is its polar part.
    """
    d = pi.dim
    if eps * math.sqrt(d) >= 1:
        raise UsageError(f"eps * sqrt(d) = {eps * math.sqrt(d):.6g} must be below 1")
    _require_hom(pi, "pi")
    _require_hom(omega, "omega")
    dist = uniform_distance(pi, omega)
    if dist > eps:
        raise UsageError(f"measured distance {dist:.6g} exceeds eps = {eps:.6g}")
    T = (pi.values @ np.conj(np.swapaxes(omega.values, 1, 2))).sum(axis=0) / pi.values.shape[0]
    if np.linalg.svd(T, compute_uv=False)[-1] <= SINGULAR_GUARD:
        raise SingularMatrixError("averaged intertwiner is singular", 0.0)
    u = UnitaryMatrix.from_array(polar(T)[0])
    U = u.matrix
    err = float(opnorms(omega.values - U.conj().T @ pi.values @ U).max())
    if err > SLACK:
        raise BoundViolation("conjugating-unitary-intertwines", err, SLACK)
    dev = float(opnorms(U - np.eye(d)))
    bound = 3 * math.sqrt(d) * eps
    if dev > bound + SLACK:
        raise BoundViolation("conjugating-unitary-bound", dev, bound)
    return Conjugation(u, dist, dev, bound, err)
