"""Seeded sampling: Haar unitaries, genuine representations of finite groups, perturbations."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm
from scipy.stats import unitary_group

from .errors import UsageError
from .groups import FiniteGroup, commutator_subgroup, generated_subgroup, quotient, coset_system, subgroup_group
from .quasirep import QuasiRep


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(d, random_state=rng)


def random_skew(d: int, rng: np.random.Generator) -> np.ndarray:
    """Skew-Hermitian matrix of operator norm 1."""
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    H = (A + A.conj().T) / 2
    return 1j * H / np.linalg.norm(H, 2)


def near_identity(d: int, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Unitary ``exp(sX)`` with ``||exp(sX) - Id|| = eps`` exactly (``eps <= 2``)."""
    if not 0 <= eps <= 2:
        raise UsageError("eps must lie in [0, 2]")
    return expm(2 * math.asin(eps / 2) * random_skew(d, rng))


def perturb(mu: QuasiRep, eps: float, rng: np.random.Generator) -> QuasiRep:
    """Move every non-identity value by exactly eps/3, so the defect grows by at most eps."""
    vals = mu.values.copy()
    for g in range(vals.shape[0]):
        if g != mu.identity:
            vals[g] = vals[g] @ near_identity(mu.dim, eps / 3, rng)
    return QuasiRep(mu.domain, vals)


def trivial_rep(G: FiniteGroup, d: int = 1) -> QuasiRep:
    return QuasiRep(G, np.broadcast_to(np.eye(d, dtype=np.complex128), (G.order, d, d)))


def characters(G: FiniteGroup) -> list:
    """All one-dimensional representations, as arrays of values on G, trivial first."""
    K = commutator_subgroup(G)
    A, hom = quotient(G, K)
    n = A.order
    # a generic combination of the commuting regular-representation matrices of A
    # has simple spectrum; its eigenvectors diagonalise every regular matrix
    rng = np.random.default_rng(12345)
    coeffs = rng.normal(size=n) + 1j * rng.normal(size=n)
    R = np.zeros((n, n, n))
    for a in range(n):
        R[a, A.cayley[a], np.arange(n)] = 1.0
    M = np.tensordot(coeffs, R, axes=1)
    _, vecs = np.linalg.eig(M)
    vecs /= np.linalg.norm(vecs, axis=0)
    expo = int(np.lcm.reduce([A.element_order(a) for a in range(n)]))
    chars = []
    for j in range(n):
        v = vecs[:, j]
        vals = np.einsum("i,aij,j->a", v.conj(), R, v)
        k = np.round(np.angle(vals) / (2 * np.pi) * expo).astype(int) % expo
        chars.append(np.exp(2j * np.pi * k / expo)[hom.map])
    chars.sort(key=lambda c: tuple(np.round(np.angle(c), 8) % (2 * np.pi)))
    return chars


def cyclic_induced(G: FiniteGroup, g: int, j: int) -> QuasiRep:
    """Representation induced from the character ``g^m -> exp(2 pi i j m / ord g)`` of <g>."""
    from .induction import induce

    H = generated_subgroup(G, [g])
    Hg, emb = subgroup_group(G, H)
    order = G.element_order(g)
    vals = np.empty((Hg.order, 1, 1), dtype=np.complex128)
    x = G.identity
    for m in range(order):
        vals[H.index(x), 0, 0] = np.exp(2j * np.pi * j * m / order)
        x = G.mul(x, g)
    return induce(QuasiRep(Hg, vals), coset_system(G, H)).total


def catalogue(G: FiniteGroup, max_dim: int) -> list:
    """Genuine representations of dimension <= max_dim: characters and cyclic inductions."""
    out = [QuasiRep(G, c[:, None, None]) for c in characters(G)]
    seen = set()
    for g in range(G.order):
        H = generated_subgroup(G, [g])
        if g == G.identity or H in seen or G.order // len(H) > max_dim:
            continue
        seen.add(H)
        for j in range(G.element_order(g)):
            out.append(cyclic_induced(G, g, j))
    return [rep for rep in out if rep.dim <= max_dim]


def random_representation(G: FiniteGroup, d: int, rng: np.random.Generator, blocks=None) -> QuasiRep:
    """Direct sum of random catalogue blocks, conjugated by a Haar unitary."""
    return random_representation_split(G, d, rng, blocks)[0]


def random_representation_split(G: FiniteGroup, d: int, rng: np.random.Generator, blocks=None):
    """Like :func:`random_representation`, also returning the conjugating unitary and block sizes.

    Column ranges of the unitary belonging to whole blocks span invariant subspaces.
    """
    blocks = catalogue(G, d) if blocks is None else blocks
    chosen, used = [], 0
    while used < d:
        fits = [b for b in blocks if b.dim <= d - used]
        b = fits[int(rng.integers(len(fits)))]
        chosen.append(b)
        used += b.dim
    vals = np.zeros((G.order, d, d), dtype=np.complex128)
    s = 0
    for b in chosen:
        vals[:, s: s + b.dim, s: s + b.dim] = b.values
        s += b.dim
    u = random_unitary(d, rng)
    return QuasiRep(G, u @ vals @ u.conj().T), u, [b.dim for b in chosen]
