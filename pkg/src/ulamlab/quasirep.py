"""Maps from a group into U(d) sending the identity to Id, and their defects.

A :class:`QuasiRep` is tabulated: one unitary per element of a finite group, or per
reduced word of a free-group ball (length-then-lex order, see :mod:`ulamlab.words`).
Free-domain maps may also carry an evaluator for words outside the table.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from . import _kernels
from .errors import BoundViolation, UsageError
from .groups import FiniteGroup, GroupHom, load_cayley, save_cayley
from .linalg import UNITARY_TOL, matrix_from_json, matrix_to_json, opnorms, spectrum_normal
from .words import FreeWord, ball_arrays, ball_size, enumerate_ball, sphere_offset, word_index

HOM_TOL = 1e-9
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class FreeDomain:
    """The ball of radius ``L`` in the free group on ``k`` generators."""

    k: int
    L: int

    def __post_init__(self):
        ball_size(self.k, self.L)

    @property
    def size(self) -> int:
        return ball_size(self.k, self.L)

    @property
    def words(self) -> list:
        return _words(self.k, self.L)


@lru_cache(maxsize=16)
def _words(k, L):
    return enumerate_ball(k, L)


Domain = Union[FiniteGroup, FreeDomain]


def _domain_size(domain) -> int:
    return domain.order if isinstance(domain, FiniteGroup) else domain.size


@dataclass(frozen=True, eq=False)
class QuasiRep:
    domain: Domain
    values: np.ndarray
    evaluator: Optional[Callable] = None
    unitarity_defect: float = field(init=False, default=0.0)

    def __post_init__(self):
        V = np.array(self.values, dtype=np.complex128)
        n = _domain_size(self.domain)
        if V.ndim != 3 or V.shape[0] != n or V.shape[1] != V.shape[2]:
            raise UsageError(f"values must have shape ({n}, d, d), got {V.shape}")
        if not np.all(np.isfinite(V)):
            raise UsageError("values contain non-finite entries")
        d = V.shape[1]
        eye = np.eye(d)
        gram = np.einsum("nji,njk->nik", V.conj(), V) - eye
        defects = opnorms(gram)
        worst = float(defects.max())
        if worst > UNITARY_TOL:
            raise UsageError(f"value at element {int(defects.argmax())} is not unitary (defect {worst:.3e})")
        e = self.identity
        if opnorms(V[e] - eye) > UNITARY_TOL:
            raise UsageError("value at the identity is not Id")
        V[e] = eye
        V.flags.writeable = False
        object.__setattr__(self, "values", V)
        object.__setattr__(self, "unitarity_defect", worst)

    @classmethod
    def from_function(cls, domain: Domain, f: Callable) -> "QuasiRep":
        if isinstance(domain, FiniteGroup):
            vals = [np.atleast_2d(f(g)) for g in range(domain.order)]
            return cls(domain, np.stack(vals))
        vals = [np.atleast_2d(f(w)) for w in domain.words]
        return cls(domain, np.stack(vals), evaluator=f)

    @classmethod
    def free(cls, k: int, L: int, evaluator: Callable) -> "QuasiRep":
        return cls.from_function(FreeDomain(k, L), evaluator)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def is_free(self) -> bool:
        return isinstance(self.domain, FreeDomain)

    @property
    def identity(self) -> int:
        return self.domain.identity if isinstance(self.domain, FiniteGroup) else 0

    def __call__(self, g):
        if isinstance(g, FreeWord):
            if not self.is_free:
                raise UsageError("finite-group maps are indexed by element")
            idx = word_index(g, self.domain.k)
            if idx < self.values.shape[0]:
                return self.values[idx]
            if self.evaluator is None:
                raise UsageError(f"word {g} lies outside the tabulated ball")
            return np.atleast_2d(self.evaluator(g))
        return self.values[g]

    def restrict(self, L: int) -> "QuasiRep":
        """The same free-domain map on a ball of another radius."""
        if not self.is_free:
            raise UsageError("only free-domain maps can be restricted")
        if L == self.domain.L:
            return self
        if L < self.domain.L:
            return QuasiRep(FreeDomain(self.domain.k, L), self.values[: ball_size(self.domain.k, L)], self.evaluator)
        if self.evaluator is None:
            raise UsageError(f"no evaluator to extend the table from radius {self.domain.L} to {L}")
        return QuasiRep.free(self.domain.k, L, self.evaluator)

    def conjugate(self, u) -> "QuasiRep":
        u = np.asarray(u)
        vals = u @ self.values @ u.conj().T
        ev = None
        if self.evaluator is not None:
            f = self.evaluator
            ev = lambda w: u @ np.atleast_2d(f(w)) @ u.conj().T  # noqa: E731
        return QuasiRep(self.domain, vals, ev)

    def element_label(self, g) -> str:
        if self.is_free:
            return str(self.domain.words[g])
        return self.domain.label(g)


@dataclass(frozen=True)
class DefectReport:
    value: float
    witness_pair: tuple
    truncation: Optional[int] = None
    pairs_checked: int = 0


def _chunked_pair_norms(V, I, J, P, chunk=200_000):
    best, arg = -1.0, 0
    for s in range(0, len(I), chunk):
        i, j, p = I[s: s + chunk], J[s: s + chunk], P[s: s + chunk]
        err = opnorms(V[p] - V[i] @ V[j])
        a = int(np.argmax(err))
        if err[a] > best:
            best, arg = float(err[a]), s + a
    return best, arg


def _finite_defect(mu: QuasiRep) -> DefectReport:
    G = mu.domain
    V = mu.values
    n, d = G.order, mu.dim
    rows = max(1, 2_000_000 // max(1, n * d * d))
    best, wit = -1.0, (0, 0)
    for x0 in range(0, n, rows):
        xs = np.arange(x0, min(n, x0 + rows))
        err = opnorms(V[G.cayley[xs]] - V[xs][:, None] @ V[None, :])
        a = np.unravel_index(int(np.argmax(err)), err.shape)
        if err[a] > best:
            best, wit = float(err[a]), (int(xs[a[0]]), int(a[1]))
    return DefectReport(best, wit, None, n * n)


@lru_cache(maxsize=8)
def _pair_table(k, L):
    codes, lengths = ball_arrays(k, L)
    offsets = np.array([sphere_offset(k, m) for m in range(2 * L + 2)], dtype=np.int64)
    return _kernels.valid_pairs(codes, lengths, ball_size(k, L), k, L, offsets)


def _free_defect(mu: QuasiRep, L: int) -> DefectReport:
    k = mu.domain.k
    mu = mu.restrict(L)
    if mu.dim == 1:
        codes, lengths = ball_arrays(k, L)
        offsets = np.array([sphere_offset(k, m) for m in range(2 * L + 2)], dtype=np.int64)
        vals = np.ascontiguousarray(mu.values[:, 0, 0])
        best, i, j, count = _kernels.scalar_defect_scan(codes, lengths, ball_size(k, L), k, L, offsets, vals)
    else:
        I, J, P = _pair_table(k, L)
        best, a = _chunked_pair_norms(mu.values, I, J, P)
        i, j, count = int(I[a]), int(J[a]), len(I)
    words = mu.domain.words
    return DefectReport(float(best), (words[int(i)], words[int(j)]), L, int(count))


def defect(mu: QuasiRep, L: Optional[int] = None) -> DefectReport:
    """sup ||mu(xy) - mu(x) mu(y)||: all pairs for finite groups, |x|, |y|, |xy| <= L for free ones."""
    if not mu.is_free:
        return _finite_defect(mu)
    if L is None:
        raise UsageError("free-domain defects need a truncation L")
    return _free_defect(mu, L)


def _check_compatible(mu: QuasiRep, nu: QuasiRep):
    if mu.dim != nu.dim:
        raise UsageError(f"dimension mismatch: {mu.dim} vs {nu.dim}")
    if mu.is_free != nu.is_free:
        raise UsageError("cannot compare a finite-group map with a free-group map")
    if mu.is_free:
        if mu.domain.k != nu.domain.k:
            raise UsageError("free domains have different ranks")
    elif not mu.domain.same_as(nu.domain):
        raise UsageError("maps live on different groups")


def distance_report(mu: QuasiRep, nu: QuasiRep) -> tuple:
    """``(sup_g ||mu(g) - nu(g)||, attaining element)``; free domains use the smaller ball."""
    _check_compatible(mu, nu)
    n = min(mu.values.shape[0], nu.values.shape[0])
    err = opnorms(mu.values[:n] - nu.values[:n])
    a = int(np.argmax(err))
    return float(err[a]), a


def uniform_distance(mu: QuasiRep, nu: QuasiRep) -> float:
    return distance_report(mu, nu)[0]


def is_homomorphism(mu: QuasiRep, tol: float = HOM_TOL, L: Optional[int] = None) -> bool:
    return defect(mu, L if mu.is_free else None).value <= tol


def pullback(mu: QuasiRep, hom: GroupHom) -> QuasiRep:
    if mu.is_free or not mu.domain.same_as(hom.target):
        raise UsageError("map must live on the target of the homomorphism")
    if not hom.surjective:
        raise UsageError("pullback needs a surjective homomorphism")
    return QuasiRep(hom.source, mu.values[hom.map])


@dataclass(frozen=True)
class KernelVerdict:
    element: int
    max_power_distance: float
    forced_trivial: bool
    violating_power: Optional[int]


def kernel_triviality_check(nu: QuasiRep, N, bound: float) -> list:
    """Power-distance test behind the sqrt(3) rigidity of kernels.

    If every power of a unitary stays within ``bound < sqrt(3)`` of Id, its spectrum is
    forced to be {1}; elements where this holds are certified trivial.
    """
    if bound >= SQRT3:
        raise UsageError(f"bound {bound} must be below sqrt(3)")
    if nu.is_free:
        raise UsageError("kernel checks need a finite group")
    if defect(nu).value > HOM_TOL:
        raise UsageError("map is not a homomorphism")
    G = nu.domain
    eye = np.eye(nu.dim)
    out = []
    for g in sorted(int(x) for x in N):
        order = G.element_order(g)
        dists = []
        x = G.identity
        for _ in range(order):
            x = G.mul(x, g)
            dists.append(float(opnorms(nu.values[x] - eye)))
        worst = max(dists)
        if worst <= bound:
            spec = spectrum_normal(nu.values[g])
            gap = float(np.max(np.abs(spec - 1.0)))
            if gap > 1e-8:
                raise BoundViolation("kernel-triviality", gap, 1e-8, witness=g)
            out.append(KernelVerdict(g, worst, True, None))
        else:
            out.append(KernelVerdict(g, worst, False, int(np.argmax(dists)) + 1))
    return out


def max_root_power_distance(m: int) -> float:
    """max over n of |z^n - 1| for z = exp(2 pi i / m)."""
    z = np.exp(2j * np.pi / m)
    return float(max(abs(z ** n - 1) for n in range(1, m + 1)))


def one_dim_witness(G: FiniteGroup, g0: int, delta: float) -> QuasiRep:
    """Scalar map equal to 1 except at ``g0``, where it sits at distance delta/2 from 1."""
    if g0 == G.identity:
        raise UsageError("the witness element must differ from the identity")
    if not 0 <= delta <= 2:
        raise UsageError("delta must lie in [0, 2]")
    theta = 2 * math.asin(delta / 4)
    vals = np.ones((G.order, 1, 1), dtype=np.complex128)
    vals[g0, 0, 0] = np.exp(1j * theta)
    return QuasiRep(G, vals)


# -- JSON files ---------------------------------------------------------------

def quasirep_to_json(mu: QuasiRep, cayley_file: Optional[str] = None) -> dict:
    if mu.is_free:
        dom = {"kind": "free", "k": mu.domain.k, "L": mu.domain.L}
        keys = [str(w) for w in mu.domain.words]
    else:
        if cayley_file is None:
            raise UsageError("finite-domain maps need a cayley_file reference")
        dom = {"kind": "finite", "cayley_file": str(cayley_file)}
        keys = [str(g) for g in range(mu.domain.order)]
    return {
        "domain": dom,
        "dim": mu.dim,
        "values": {key: matrix_to_json(v) for key, v in zip(keys, mu.values)},
    }


def quasirep_from_json(obj: dict, base_dir=".") -> QuasiRep:
    dom = obj["domain"]
    d = int(obj["dim"])
    if dom["kind"] == "free":
        domain = FreeDomain(int(dom["k"]), int(dom["L"]))
        keys = [str(w) for w in domain.words]
    elif dom["kind"] == "finite":
        path = Path(dom["cayley_file"])
        domain = load_cayley(path if path.is_absolute() else Path(base_dir) / path)
        keys = [str(g) for g in range(domain.order)]
    else:
        raise UsageError(f"unknown domain kind {dom['kind']!r}")
    missing = [key for key in keys if key not in obj["values"]]
    if missing:
        raise UsageError(f"values missing for elements {missing[:5]}")
    vals = np.stack([matrix_from_json(obj["values"][key]) for key in keys])
    if vals.shape[1:] != (d, d):
        raise UsageError("matrix shapes disagree with dim")
    return QuasiRep(domain, vals)


def save_quasirep(mu: QuasiRep, path, cayley_file: Optional[str] = None) -> None:
    path = Path(path)
    if not mu.is_free and cayley_file is None:
        cayley_file = path.with_suffix(".cayley").name
        save_cayley(mu.domain, path.parent / cayley_file)
    path.write_text(json.dumps(quasirep_to_json(mu, cayley_file), indent=1) + "\n")


def load_quasirep(path) -> QuasiRep:
    path = Path(path)
    return quasirep_from_json(json.loads(path.read_text()), base_dir=path.parent)
