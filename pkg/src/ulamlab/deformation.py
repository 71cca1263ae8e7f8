"""Deformation of the regular representation of a free group on a truncated l^2.

The basis of ``TruncatedFock(k, L)`` is the ball of radius L in ball order.  P deletes the
last letter.  ``lambda(a)`` is only defined on vectors supported in radius ``L - |a|`` (the
valid domain); those are the first ``ball_size(k, L - |a|)`` basis vectors.  On the valid
domain every operator below agrees exactly with its untruncated counterpart, because P
lowers length and is nilpotent, so all series are finite sums.

With ``S(a) = P lambda(a) - lambda(a) P`` one has

    pi0_z(a) = (1 - zP)^{-1} lambda(a) (1 - zP) = lambda(a) + sum_{n>=0} z^{n+1} P^n S(a).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import BoundViolation, UsageError
from .words import FreeWord, ball_size, enumerate_ball, word_index

TOL_IMAGE = 1e-10
TOL_NORM = 1e-9


@dataclass(frozen=True, eq=False)
class TruncatedFock:
    k: int
    L: int
    basis: list = field(init=False, repr=False)
    parent: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        words = enumerate_ball(self.k, self.L)
        object.__setattr__(self, "basis", words)
        par = np.full(len(words), -1, dtype=np.int64)
        for i, w in enumerate(words[1:], start=1):
            par[i] = word_index(FreeWord(w.letters[:-1]), self.k)
        object.__setattr__(self, "parent", par)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, w: FreeWord) -> int:
        i = word_index(w, self.k)
        if i >= self.dim:
            raise UsageError(f"word {w} lies outside the ball of radius {self.L}")
        return i

    def valid_size(self, a: FreeWord, shrink: int = 0) -> int:
        r = self.L - len(a) - shrink
        if len(a) > self.L or r < 0:
            raise UsageError(f"|a| = {len(a)} leaves no valid domain in radius {self.L}")
        return ball_size(self.k, r)


class DeformationOps:
    """P, T and the per-word operators lambda(a), S(a), P^n S(a) on a truncation."""

    def __init__(self, k: int, L: int):
        self.space = TruncatedFock(k, L)
        N = self.space.dim
        cols = np.arange(1, N)
        self.P = sp.csr_matrix((np.ones(N - 1), (self.space.parent[1:], cols)), shape=(N, N))
        self.T = sp.csr_matrix(([1.0], ([0], [0])), shape=(N, N))
        self._cache = {}

    @property
    def k(self):
        return self.space.k

    @property
    def L(self):
        return self.space.L

    def _check(self, a):
        if isinstance(a, str):
            a = FreeWord.parse(a)
        if any(g >= self.k for g, _ in a.letters):
            raise UsageError(f"word {a} uses generators outside 0..{self.k - 1}")
        self.space.valid_size(a)
        return a

    def shift(self, a) -> sp.csr_matrix:
        """lambda(a) from the valid domain into the ball (N x n_a, isometric)."""
        return self._ops(a)[0]

    def commutator(self, a) -> sp.csr_matrix:
        """S(a) = P lambda(a) - lambda(a) P on the valid domain."""
        return self._ops(a)[1]

    def _ops(self, a):
        a = self._check(a)
        key = str(a)
        if key not in self._cache:
            sp_ = self.space
            n = sp_.valid_size(a)
            rows = np.array([sp_.index(a * b) for b in sp_.basis[:n]], dtype=np.int64)
            lam = sp.csr_matrix((np.ones(n), (rows, np.arange(n))), shape=(sp_.dim, n))
            S = (self.P @ lam - lam @ self.P[:n, :n]).tocsr()
            S.eliminate_zeros()
            powers = [S]
            while powers[-1].nnz and len(powers) <= self.L + 1:
                powers.append((self.P @ powers[-1]).tocsr())
            self._cache[key] = (lam, S, powers[:-1] if not powers[-1].nnz else powers)
        return self._cache[key]

    def prefixes(self, a) -> list:
        """Indices of K(a) = span{delta_a, delta_abar, ..., delta_e}."""
        a = self._check(a)
        return [self.space.index(FreeWord(a.letters[:j])) for j in range(len(a) + 1)]


def _coeff_sum(powers, coeffs):
    out = None
    for c, X in zip(coeffs, powers):
        if c != 0:
            out = c * X if out is None else out + c * X
    return out


def ps_pi0(ops: DeformationOps, z, a) -> sp.csr_matrix:
    """pi0_z(a) on the valid domain, as an (N x n_a) sparse matrix."""
    if abs(z) >= 1:
        raise UsageError("need |z| < 1")
    lam, _, powers = ops._ops(a)
    corr = _coeff_sum(powers, [z ** (n + 1) for n in range(len(powers))])
    out = lam.astype(np.complex128) if corr is None else lam + corr
    return sp.csr_matrix(out, dtype=np.complex128)


def _dense_opnorm(M) -> float:
    """Operator norm of a sparse matrix via its nonzero rows and columns."""
    M = sp.coo_matrix(M)
    if M.nnz == 0:
        return 0.0
    r, rinv = np.unique(M.row, return_inverse=True)
    c, cinv = np.unique(M.col, return_inverse=True)
    D = np.zeros((len(r), len(c)), dtype=np.complex128)
    np.add.at(D, (rinv, cinv), M.data)
    return float(np.linalg.norm(D, 2))


def continuity_rhs(z, w, L: int) -> float:
    return float(sum(abs(z ** n - w ** n) for n in range(1, L + 1)))


def ps_continuity_gap(ops: DeformationOps, z, w, a, check: bool = False) -> tuple:
    """``(||pi0_z(a) - pi0_w(a)||, sum_{n=1}^{L} |z^n - w^n|)`` on the valid domain."""
    if abs(z) > 0.95 or abs(w) > 0.95:
        raise UsageError("continuity checks need |z|, |w| <= 0.95")
    _, _, powers = ops._ops(a)
    diff = _coeff_sum(powers, [z ** (n + 1) - w ** (n + 1) for n in range(len(powers))])
    lhs = 0.0 if diff is None else _dense_opnorm(diff)
    rhs = continuity_rhs(z, w, ops.L)
    if check and lhs > rhs + TOL_NORM:
        raise BoundViolation("deformation-continuity", lhs, rhs, witness=(complex(z), complex(w), str(a)))
    return lhs, rhs


@dataclass(frozen=True)
class StructuralReport:
    word: str
    dim_K: int
    image_leak: float
    difference_norm: float
    P_on_K_norm: float
    P_leak: float

    @property
    def passed(self) -> bool:
        return (self.image_leak <= TOL_IMAGE and self.difference_norm <= 2 + TOL_NORM
                and self.P_on_K_norm <= 1 + TOL_IMAGE and self.P_leak <= TOL_IMAGE)


def ps_structural_checks(ops: DeformationOps, a, check: bool = True) -> StructuralReport:
    """The three facts behind the continuity estimate, on the truncation.

    The difference D = P - lambda(a) P lambda(a)^{-1} is S(a) lambda(a)^{-1}, and lambda(a)
    maps the valid domain isometrically onto the domain of D, so D and S(a) share image
    and norm.
    """
    a = ops._check(a)
    _, S, _ = ops._ops(a)
    K = ops.prefixes(a)
    outside = np.ones(ops.space.dim, dtype=bool)
    outside[K] = False
    image_leak = _dense_opnorm(S[outside]) if S.nnz else 0.0
    dnorm = _dense_opnorm(S)
    PK = ops.P[:, K]
    P_leak = _dense_opnorm(PK[outside])
    pk = float(np.linalg.norm(PK[K].toarray(), 2))
    rep = StructuralReport(str(a), len(K), image_leak, dnorm, pk, P_leak)
    if check and not rep.passed:
        raise BoundViolation("deformation-structure", max(image_leak, dnorm - 2, pk - 1, P_leak), 0.0, witness=str(a))
    return rep


def representation_error(ops: DeformationOps, z, a) -> float:
    """||pi0_z(a) pi0_z(a^-1) - Id|| on vectors supported in radius L - 2|a|."""
    a = ops._check(a)
    n2 = ops.space.valid_size(a, shrink=len(a))
    n1 = ops.space.valid_size(a)
    Ainv = ps_pi0(ops, z, a.inverse())[:, :n2]
    if Ainv[n1:].nnz:
        raise AssertionError("pi0(a^-1) left the valid domain of pi0(a)")
    prod = ps_pi0(ops, z, a) @ Ainv[:n1]
    eye = sp.eye(ops.space.dim, n2, dtype=np.complex128, format="csr")
    return _dense_opnorm(prod - eye)


def _tz(z, N, inverse=False):
    s = cmath.sqrt(1 - z * z)
    d = np.ones(N, dtype=np.complex128)
    d[0] = 1 / s if inverse else s
    return sp.diags(d)


def ps_pi(ops: DeformationOps, z: float, a, order: str = "printed") -> sp.csr_matrix:
    """Rescaled deformation on the valid domain, for real z in (-1, 1).

    ``order="printed"`` gives T_z pi0_z(a) T_z^{-1} with T_z = Id + (sqrt(1 - z^2) - 1) T.
    ``order="inverse"`` gives T_z^{-1} pi0_z(a) T_z, which is the isometric one.
    """
    if isinstance(z, complex) or not -1 < z < 1:
        raise UsageError("pi_z is built for real z in (-1, 1)")
    if order not in ("printed", "inverse"):
        raise UsageError(f"unknown order {order!r}")
    A = ps_pi0(ops, z, a)
    n = A.shape[1]
    flip = order == "inverse"
    return (_tz(z, ops.space.dim, inverse=flip) @ A @ _tz(z, n, inverse=not flip)).tocsr()


def interior_unitarity_defect(ops: DeformationOps, z: float, a, order: str = "printed") -> float:
    """||M^* M - Id|| for pi_z(a) restricted to vectors supported in radius L - |a| - 1."""
    a = ops._check(a)
    n = ops.space.valid_size(a, shrink=1)
    M = ps_pi(ops, z, a, order)[:, :n]
    G = (M.conj().T @ M - sp.eye(n, dtype=np.complex128)).tocsr()
    return _dense_opnorm(G)


def continuity_rhs_weighted(ops: DeformationOps, z, w, a) -> float:
    """||S(a)|| * sum_{n=1}^{L} |z^n - w^n|, the estimate that keeps the norm of S(a)."""
    return _dense_opnorm(ops.commutator(a)) * continuity_rhs(z, w, ops.L)


def nilpotency_degree(ops: DeformationOps) -> int:
    X = sp.eye(ops.space.dim, format="csr")
    n = 0
    while X.nnz:
        X = (ops.P @ X).tocsr()
        X.eliminate_zeros()
        n += 1
    return n
