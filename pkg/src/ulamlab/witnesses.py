"""Maps of free groups with small defect that stay far from representations.

* Rolli maps: a word a^{n1} b^{m1} ... is sent to tau_a(n1) tau_b(m1) ..., with tau_s(k) in a
  small ball around Id and tau_s(-k) = tau_s(k)^{-1}.
* Brooks counting quasimorphisms phi_w and the circle-valued maps exp(2 pi i t phi_w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from . import _kernels
from .errors import UsageError
from .quasirep import FreeDomain, QuasiRep
from .reps import random_skew, random_unitary
from .words import FreeWord, ball_arrays, ball_size, cyclic_reduce, enumerate_ball, word_index

SCHEDULES = ("harmonic",)


# -- Rolli -------------------------------------------------------------------------

def rolli_angle(k: int, delta: float) -> float:
    """theta(k) = 2 arcsin(delta/6) (1 - 1/(|k|+1)) sign(k): odd, injective, bounded."""
    return 2 * math.asin(delta / 6) * (1 - 1 / (abs(k) + 1)) * (1 if k > 0 else -1 if k < 0 else 0)


def _direction(n: int, rng) -> np.ndarray:
    """W diag(i, -i, i, -i, ..., [0]) W^* for a Haar unitary W."""
    spec = np.array([1j if j % 2 == 0 else -1j for j in range(n - n % 2)] + [0.0] * (n % 2))
    W = random_unitary(n, rng)
    return (W * spec) @ W.conj().T


@dataclass(frozen=True, eq=False)
class RolliData:
    dim: int
    delta: float
    seed: int
    schedule: str = "harmonic"
    directions: tuple = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if self.dim < 2:
            raise UsageError("Rolli maps need dimension n >= 2")
        if not 0 < self.delta <= 2:
            raise UsageError("delta must lie in (0, 2]")
        if self.schedule not in SCHEDULES:
            raise UsageError(f"unknown angle schedule {self.schedule!r}")
        rng = np.random.default_rng(self.seed)
        X = tuple(_direction(self.dim, rng) for _ in range(2))
        for x in X:
            x.flags.writeable = False
        object.__setattr__(self, "directions", X)
        # eigenbases for exact exponentials: X = W diag(i s) W^*
        eig = []
        for x in X:
            w, W = np.linalg.eigh(-1j * x)
            eig.append((np.round(w), W))
        object.__setattr__(self, "_eig", tuple(eig))

    def tau(self, s: int, k: int) -> np.ndarray:
        key = (s, abs(k))
        if k == 0:
            return np.eye(self.dim, dtype=np.complex128)
        if key not in self._cache:
            w, W = self._eig[s]
            self._cache[key] = (W * np.exp(1j * rolli_angle(abs(k), self.delta) * w)) @ W.conj().T
        t = self._cache[key]
        return t if k >= 0 else t.conj().T

    def __call__(self, w: FreeWord) -> np.ndarray:
        out = np.eye(self.dim, dtype=np.complex128)
        for gen, power in syllables(w):
            out = out @ self.tau(gen, power)
        return out

    def as_dict(self) -> dict:
        return {"dim": self.dim, "delta": self.delta, "seed": self.seed, "schedule": self.schedule}

    @classmethod
    def from_dict(cls, obj) -> "RolliData":
        return cls(int(obj["dim"]), float(obj["delta"]), int(obj["seed"]), obj.get("schedule", "harmonic"))


def syllables(w: FreeWord) -> list:
    """Maximal powers of single generators: ``aaBB -> [(0, 2), (1, -2)]``."""
    out = []
    for g, s in w.letters:
        if out and out[-1][0] == g:
            out[-1][1] += s
        else:
            out.append([g, s])
    return [tuple(x) for x in out]


def rolli(n: int, delta: float, seed: int, L: int = 4) -> QuasiRep:
    data = RolliData(n, delta, seed)
    return QuasiRep.free(2, L, data)


# -- homomorphisms of free groups -------------------------------------------------

@lru_cache(maxsize=8)
def _ball_parents(k, L):
    codes, lengths = ball_arrays(k, L)
    words = enumerate_ball(k, L)
    par = np.zeros(len(words), dtype=np.int64)
    last = np.zeros(len(words), dtype=np.int64)
    for i, w in enumerate(words[1:], start=1):
        par[i] = word_index(FreeWord(w.letters[:-1]), k)
        last[i] = codes[i, lengths[i] - 1]
    return par, last, lengths


def hom_table(gens, L: int) -> np.ndarray:
    """Values on the ball of the homomorphism of F_k with generator images ``gens``."""
    gens = [np.asarray(g, dtype=np.complex128) for g in gens]
    k, d = len(gens), gens[0].shape[0]
    par, last, lengths = _ball_parents(k, L)
    letters = np.empty((2 * k, d, d), dtype=np.complex128)
    for g in range(k):
        letters[2 * g] = gens[g]
        letters[2 * g + 1] = gens[g].conj().T
    out = np.empty((len(par), d, d), dtype=np.complex128)
    out[0] = np.eye(d)
    for m in range(1, L + 1):
        idx = np.flatnonzero(lengths == m)
        out[idx] = out[par[idx]] @ letters[last[idx]]
    return out


@dataclass(frozen=True)
class HomSearch:
    distance: float
    generators: tuple
    candidates: int
    truncation: int


def nearest_hom_search(mu: QuasiRep, L: int, n_candidates: int, seed: int, refine_steps: int = 200) -> HomSearch:
    """Seeded search for a representation of F_k close to ``mu`` on the ball of radius L.

    Candidates are the trivial representation, the values of mu on the generators, and
    Haar-random generator images; the best one is improved by random local moves.  The
    result only bounds the true distance to representations from above.
    """
    if not mu.is_free:
        raise UsageError("search is over homomorphisms of free groups")
    k, d = mu.domain.k, mu.dim
    target = mu.restrict(L).values
    rng = np.random.default_rng(seed)

    def score(gens):
        return float(np.linalg.norm(hom_table(gens, L) - target, ord=2, axis=(1, 2)).max())

    gen_words = [FreeWord(((g, 1),)) for g in range(k)]
    cands = [tuple(np.eye(d) for _ in range(k)), tuple(mu(w) for w in gen_words)]
    while len(cands) < n_candidates:
        cands.append(tuple(random_unitary(d, rng) for _ in range(k)))
    scores = [score(c) for c in cands]
    best = int(np.argmin(scores))
    cur, cur_s = cands[best], scores[best]
    step = 0.1
    for _ in range(refine_steps):
        trial = tuple(u @ expm(step * random_skew(d, rng)) for u in cur)
        s = score(trial)
        if s < cur_s:
            cur, cur_s = trial, s
        else:
            step *= 0.97
    return HomSearch(cur_s, cur, len(cands), L)


# -- quasimorphisms ---------------------------------------------------------------

def count_occurrences(word_codes, pat) -> int:
    m = len(pat)
    return sum(1 for i in range(len(word_codes) - m + 1) if tuple(word_codes[i: i + m]) == pat)


def _signed_count(codes, pat, ipat) -> int:
    return count_occurrences(codes, pat) - count_occurrences(codes, ipat)


def _self_overlapping(pat) -> bool:
    return any(pat[:j] == pat[-j:] for j in range(1, len(pat)))


@dataclass(frozen=True, eq=False)
class Quasimorphism:
    pattern: FreeWord
    evaluator: Callable
    k: int = 2

    def __call__(self, w) -> int:
        if isinstance(w, str):
            w = FreeWord.parse(w)
        return self.evaluator(w)

    def table(self, L: int) -> np.ndarray:
        return np.array([self(w) for w in enumerate_ball(self.k, L)], dtype=np.int64)


def brooks_phi(w, k: Optional[int] = None) -> Quasimorphism:
    """Homogenised Brooks counting quasimorphism for a non-self-overlapping pattern."""
    if isinstance(w, str):
        w = FreeWord.parse(w)
    if len(w) < 2:
        raise UsageError("pattern must have length >= 2")
    conj, core = cyclic_reduce(w)
    if len(conj):
        raise UsageError(f"pattern {w} is not cyclically reduced")
    pat = w.codes
    if _self_overlapping(pat):
        raise UsageError(f"pattern {w} overlaps itself")
    ipat = w.inverse().codes
    N = len(w) + 1
    kk = max(g for g, _ in w.letters) + 1
    k = max(2, kk) if k is None else k
    if k < kk:
        raise UsageError("k is smaller than the number of generators in the pattern")

    def phi(g: FreeWord) -> int:
        c = cyclic_reduce(g)[1].codes
        if not c:
            return 0
        return _signed_count(c * (N + 1), pat, ipat) - _signed_count(c * N, pat, ipat)

    return Quasimorphism(w, phi, k)


def power_limit(phi: Quasimorphism, g: FreeWord, N: int = 64) -> float:
    """C(c^N) / N for the cyclic reduction c of g: an independent, slowly converging evaluator."""
    c = cyclic_reduce(g)[1].codes
    pat, ipat = phi.pattern.codes, phi.pattern.inverse().codes
    return _signed_count(c * N, pat, ipat) / N


@dataclass(frozen=True)
class CoboundaryReport:
    value: float
    witness_pair: tuple
    truncation: int


@lru_cache(maxsize=16)
def _coboundary(pattern: str, k: int, L: int):
    phi = brooks_phi(pattern, k)
    codes, lengths = ball_arrays(k, L)
    vals = phi.table(L)
    pat = np.array(phi.pattern.codes, dtype=np.int8)
    ipat = np.array(phi.pattern.inverse().codes, dtype=np.int8)
    best, i, j = _kernels.coboundary_scan(codes, lengths, ball_size(k, L), vals, pat, ipat, True)
    return int(best), int(i), int(j)


def coboundary_sup(phi: Quasimorphism, L: int) -> CoboundaryReport:
    """max |phi(xy) - phi(x) - phi(y)| over |x|, |y| <= L (a lower bound for ||d phi||)."""
    if L < 1:
        raise UsageError("need L >= 1")
    best, i, j = _coboundary(str(phi.pattern), phi.k, L)
    words = enumerate_ball(phi.k, L)
    return CoboundaryReport(float(best), (words[i], words[j]), L)


def exp_circle(phi: Quasimorphism, t: float, L: int) -> QuasiRep:
    """mu_t = exp(2 pi i t phi) on the ball of radius L."""
    vals = np.exp(2j * np.pi * t * phi.table(L).astype(float))
    return QuasiRep(FreeDomain(phi.k, L), vals[:, None, None],
                    evaluator=lambda w: np.exp(2j * np.pi * t * phi(w)).reshape(1, 1))


@lru_cache(maxsize=8)
def _exponent_sums(k, L):
    codes, lengths = ball_arrays(k, L)
    E = np.zeros((codes.shape[0], k))
    for c in range(2 * k):
        E[:, c >> 1] += (1 if c % 2 == 0 else -1) * (codes == c).sum(axis=1)
    return E


@dataclass(frozen=True)
class CircleFit:
    angles: tuple
    distance: float
    grid_distance: float
    truncation: int


def nearest_circle_hom(mu: QuasiRep, L: int, grid: int = 64) -> CircleFit:
    """Best character nu(w) = exp(i sum_g angle_g * e_g(w)) for a scalar map on the ball."""
    if grid < 8:
        raise UsageError("grid must be >= 8")
    if not mu.is_free or mu.dim != 1:
        raise UsageError("circle fits need a scalar map of a free group")
    k = mu.domain.k
    v = mu.restrict(L).values[:, 0, 0]
    E = _exponent_sums(k, L)

    def f(ang):
        return float(np.abs(v - np.exp(1j * (E @ ang))).max())

    axis = 2 * np.pi * np.arange(grid) / grid
    mesh = np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1).reshape(-1, k)
    scores = np.array([f(a) for a in mesh])
    order = np.argsort(scores, kind="stable")[: min(5, len(scores))]
    best_a, best_s = mesh[order[0]], float(scores[order[0]])
    grid_best = best_s
    h = 2 * np.pi / grid
    for o in order:
        res = minimize(f, mesh[o], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "initial_simplex": _simplex(mesh[o], h)})
        if res.fun < best_s:
            best_a, best_s = res.x, float(res.fun)
    best_a = np.mod(best_a, 2 * np.pi)
    return CircleFit(tuple(float(x) for x in best_a), f(best_a), grid_best, L)


def _simplex(x0, h):
    k = len(x0)
    return np.vstack([x0] + [x0 + h * np.eye(k)[i] for i in range(k)])


def circle_angle_step(x: float) -> tuple:
    """``(|2 pi x|, 2 arcsin(|e^{2 pi i x} - 1| / 2))``; the two agree for x in [-1/2, 1/2]."""
    d = abs(np.exp(2j * np.pi * x) - 1)
    return abs(2 * np.pi * x), 2 * math.asin(min(d / 2, 1.0))
