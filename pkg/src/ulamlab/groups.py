"""Finite groups as Cayley tables, homomorphisms, coset systems and quotients.

Element orderings of the built-in families:

* ``cyclic(n)``: element ``i`` is ``i mod n``.
* ``dihedral(n)``: order ``2n``, element ``i + n*j`` is ``r^i s^j`` with
  ``s r s = r^-1``.
* ``symmetric(n)``: permutations of ``range(n)`` in lexicographic order of their
  one-line notation; the product is composition, ``(p*q)(x) = p(q(x))``.

The identity is element 0 in every family.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import GroupLoadError, NotASubgroupError, NotNormalError, UsageError


def _frozen(a):
    a = np.array(a, dtype=np.int64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    cayley: np.ndarray
    identity: int = 0
    labels: Optional[tuple] = None
    inverses: np.ndarray = field(init=False)

    def __post_init__(self):
        table = _frozen(self.cayley)
        object.__setattr__(self, "cayley", table)
        _check_table(table, self.identity)
        inv = np.argmax(table == self.identity, axis=1)
        object.__setattr__(self, "inverses", _frozen(inv))
        if self.labels is not None and len(self.labels) != self.order:
            raise GroupLoadError("labels do not match the group order")

    @property
    def order(self) -> int:
        return self.cayley.shape[0]

    def mul(self, a: int, b: int) -> int:
        return int(self.cayley[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def label(self, g: int) -> str:
        return self.labels[g] if self.labels is not None else str(g)

    def element_order(self, g: int) -> int:
        n, x = 1, g
        while x != self.identity:
            x = self.cayley[x, g]
            n += 1
        return n

    def power(self, g: int, n: int) -> int:
        if n < 0:
            g, n = self.inv(g), -n
        x = self.identity
        for _ in range(n):
            x = int(self.cayley[x, g])
        return x

    def same_as(self, other: "FiniteGroup") -> bool:
        return other is self or (
            other.order == self.order
            and other.identity == self.identity
            and np.array_equal(other.cayley, self.cayley)
        )

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"


def _check_table(table, identity):
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] < 1:
        raise GroupLoadError(f"Cayley table must be square and non-empty, got shape {table.shape}")
    n = table.shape[0]
    if table.min() < 0 or table.max() >= n:
        raise GroupLoadError("Cayley table entries out of range")
    ref = np.arange(n)
    for g in range(n):
        if not np.array_equal(np.sort(table[g]), ref):
            raise GroupLoadError(f"row {g} is not a permutation", witness=("row", g))
        if not np.array_equal(np.sort(table[:, g]), ref):
            raise GroupLoadError(f"column {g} is not a permutation", witness=("column", g))
    if not (np.array_equal(table[identity], ref) and np.array_equal(table[:, identity], ref)):
        raise GroupLoadError(f"element {identity} is not an identity", witness=("identity", identity))
    # (ab)c == a(bc), one slab of a at a time
    for a in range(n):
        left = table[table[a]]          # [b, c] -> (ab)c
        right = table[a][table]         # [b, c] -> a(bc)
        bad = np.argwhere(left != right)
        if bad.size:
            b, c = (int(v) for v in bad[0])
            raise GroupLoadError(f"associativity fails for triple ({a}, {b}, {c})", witness=(a, b, c))


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise UsageError("cyclic group needs n >= 1")
    i = np.arange(n)
    return FiniteGroup((i[:, None] + i[None, :]) % n, 0, tuple(str(k) for k in range(n)))


def dihedral(n: int) -> FiniteGroup:
    if n < 1:
        raise UsageError("dihedral group needs n >= 1")
    table = np.empty((2 * n, 2 * n), dtype=np.int64)
    for j in range(2):
        for i in range(n):
            for l in range(2):
                for k in range(n):
                    ii = (i + (k if j == 0 else -k)) % n
                    table[i + n * j, k + n * l] = ii + n * ((j + l) % 2)
    labels = tuple(f"r^{i}" + (" s" if j else "") for j in range(2) for i in range(n))
    return FiniteGroup(table, 0, labels)


def permutation_group(perms: Sequence[tuple]) -> FiniteGroup:
    """Group from an explicit list of permutations closed under composition."""
    perms = [tuple(p) for p in perms]
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    table = np.empty((n, n), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            comp = tuple(p[x] for x in q)
            if comp not in index:
                raise GroupLoadError("permutation set is not closed under composition")
            table[i, j] = index[comp]
    ident = tuple(range(len(perms[0])))
    if ident not in index:
        raise GroupLoadError("permutation set lacks the identity")
    return FiniteGroup(table, index[ident], tuple("(" + " ".join(map(str, p)) + ")" for p in perms))


def symmetric(n: int) -> FiniteGroup:
    if not 1 <= n <= 6:
        raise UsageError("symmetric groups are restricted to 1 <= n <= 6")
    return permutation_group(list(itertools.permutations(range(n))))


def load_cayley(path) -> FiniteGroup:
    """Read a plain-text Cayley table: the order, then one row of products per line."""
    text = Path(path).read_text().split("\n")
    lines = [ln.split() for ln in text if ln.strip()]
    if not lines:
        raise GroupLoadError(f"{path}: empty file")
    try:
        n = int(lines[0][0])
        rows = [[int(v) for v in ln] for ln in lines[1:]]
    except ValueError as exc:
        raise GroupLoadError(f"{path}: non-integer entry ({exc})") from None
    if len(rows) != n or any(len(r) != n for r in rows):
        raise GroupLoadError(f"{path}: expected {n} rows of {n} entries")
    table = np.array(rows, dtype=np.int64) if n else np.zeros((0, 0), dtype=np.int64)
    if n < 1 or table.min() < 0 or table.max() >= n:
        raise GroupLoadError(f"{path}: entries must lie in 0..{n - 1}")
    ref = np.arange(n)
    ids = [e for e in range(n) if np.array_equal(table[e], ref) and np.array_equal(table[:, e], ref)]
    if not ids:
        for g in range(n):
            if not np.array_equal(np.sort(table[g]), ref):
                raise GroupLoadError(f"{path}: row {g} is not a permutation", witness=("row", g))
        raise GroupLoadError(f"{path}: no identity element")
    return FiniteGroup(table, ids[0])


def save_cayley(G: FiniteGroup, path) -> None:
    lines = [str(G.order)] + [" ".join(str(int(v)) for v in row) for row in G.cayley]
    Path(path).write_text("\n".join(lines) + "\n")


def build_group(spec: str) -> FiniteGroup:
    """Build from ``"cyclic:n"``, ``"dihedral:n"``, ``"symmetric:n"`` or ``"file:path"``."""
    kind, _, arg = spec.partition(":")
    builders = {"cyclic": cyclic, "dihedral": dihedral, "symmetric": symmetric}
    if kind == "file":
        return load_cayley(arg)
    if kind not in builders:
        raise UsageError(f"unknown group family {kind!r}")
    try:
        n = int(arg)
    except ValueError:
        raise UsageError(f"bad group parameter in {spec!r}") from None
    return builders[kind](n)


# -- subgroups -------------------------------------------------------------

def check_subgroup(G: FiniteGroup, H) -> tuple:
    H = tuple(sorted({int(h) for h in H}))
    members = set(H)
    if G.identity not in members:
        raise NotASubgroupError("subset does not contain the identity", pair=(G.identity, G.identity))
    for a in H:
        if G.inv(a) not in members:
            raise NotASubgroupError(f"inverse of {a} missing", pair=(a, a))
        for b in H:
            if G.mul(a, b) not in members:
                raise NotASubgroupError(f"product of {a} and {b} leaves the subset", pair=(a, b))
    return H


def generated_subgroup(G: FiniteGroup, gens) -> tuple:
    elems = {G.identity}
    frontier = [G.identity]
    gens = [int(g) for g in gens]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.mul(x, g)
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
        frontier = nxt
    return tuple(sorted(elems))


def all_subgroups(G: FiniteGroup) -> list:
    """Every subgroup generated by at most two elements, sorted by (size, elements)."""
    found = set()
    for a in range(G.order):
        for b in range(a, G.order):
            found.add(generated_subgroup(G, (a, b)))
    return sorted(found, key=lambda h: (len(h), h))


def is_normal(G: FiniteGroup, N) -> bool:
    try:
        check_normal(G, N)
    except NotNormalError:
        return False
    return True


def check_normal(G: FiniteGroup, N) -> tuple:
    N = check_subgroup(G, N)
    members = set(N)
    for g in range(G.order):
        gi = G.inv(g)
        for n in N:
            c = G.mul(G.mul(g, n), gi)
            if c not in members:
                raise NotNormalError(f"{g} * {n} * {g}^-1 = {c} leaves the subgroup", conjugation=(g, n))
    return N


def normal_subgroups(G: FiniteGroup) -> list:
    return [H for H in all_subgroups(G) if is_normal(G, H)]


def commutator_subgroup(G: FiniteGroup) -> tuple:
    comms = set()
    for a in range(G.order):
        for b in range(G.order):
            comms.add(G.mul(G.mul(a, b), G.mul(G.inv(a), G.inv(b))))
    return generated_subgroup(G, sorted(comms))


def center(G: FiniteGroup) -> tuple:
    return tuple(g for g in range(G.order) if np.array_equal(G.cayley[g], G.cayley[:, g]))


def subgroup_group(G: FiniteGroup, H) -> tuple:
    """``H`` as a group in its own right; returns ``(group, embedding)``."""
    H = check_subgroup(G, H)
    pos = {h: i for i, h in enumerate(H)}
    table = [[pos[G.mul(a, b)] for b in H] for a in H]
    labels = tuple(G.label(h) for h in H)
    return FiniteGroup(np.array(table), pos[G.identity], labels), _frozen(H)


# -- homomorphisms -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupHom:
    source: FiniteGroup
    target: FiniteGroup
    map: np.ndarray

    def __post_init__(self):
        m = _frozen(self.map)
        object.__setattr__(self, "map", m)
        if m.shape != (self.source.order,):
            raise UsageError("homomorphism table has the wrong length")
        if m[self.source.identity] != self.target.identity:
            raise UsageError("homomorphism does not send identity to identity")
        lhs = m[self.source.cayley]
        rhs = self.target.cayley[m[:, None], m[None, :]]
        bad = np.argwhere(lhs != rhs)
        if bad.size:
            a, b = (int(v) for v in bad[0])
            raise UsageError(f"map is not multiplicative at pair ({a}, {b})")

    def __call__(self, g: int) -> int:
        return int(self.map[g])

    @property
    def surjective(self) -> bool:
        return len(np.unique(self.map)) == self.target.order

    def kernel(self) -> tuple:
        return tuple(int(g) for g in np.flatnonzero(self.map == self.target.identity))


def quotient(G: FiniteGroup, N) -> tuple:
    """``G/N`` with cosets ordered by their minimal element, plus the projection."""
    N = check_normal(G, N)
    coset_of = np.full(G.order, -1, dtype=np.int64)
    reps = []
    for g in range(G.order):
        if coset_of[g] >= 0:
            continue
        idx = len(reps)
        reps.append(g)
        for n in N:
            coset_of[G.mul(g, n)] = idx
    table = [[coset_of[G.mul(a, b)] for b in reps] for a in reps]
    labels = tuple(G.label(r) + "N" for r in reps)
    Q = FiniteGroup(np.array(table), int(coset_of[G.identity]), labels)
    return Q, GroupHom(G, Q, coset_of)


# -- coset systems -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CosetSystem:
    """Representatives ``R`` of the cosets ``H g`` and the retraction ``r``.

    ``reps`` is sorted by element index and ``retract[g]`` is the representative of
    ``H g``.  ``sub_index[g]`` is the position of ``g`` inside ``subgroup`` (or -1).
    """

    group: FiniteGroup
    subgroup: tuple
    reps: tuple
    retract: np.ndarray
    sub_index: np.ndarray

    @property
    def index(self) -> int:
        return len(self.reps)

    def position(self, rep: int) -> int:
        return self.reps.index(rep)

    def subgroup_group(self):
        return subgroup_group(self.group, self.subgroup)[0]


def coset_system(G: FiniteGroup, H) -> CosetSystem:
    H = check_subgroup(G, H)
    retract = np.full(G.order, -1, dtype=np.int64)
    reps = []
    for g in range(G.order):
        if retract[g] >= 0:
            continue
        coset = [G.mul(h, g) for h in H]
        rep = G.identity if G.identity in coset else min(coset)
        reps.append(rep)
        retract[coset] = rep
    sub_index = np.full(G.order, -1, dtype=np.int64)
    sub_index[list(H)] = np.arange(len(H))
    cs = CosetSystem(G, H, tuple(sorted(reps)), _frozen(retract), _frozen(sub_index))
    _check_cosets(cs)
    return cs


def _check_cosets(cs: CosetSystem):
    G = cs.group
    assert len(cs.reps) * len(cs.subgroup) == G.order
    for x in cs.reps:
        for g in range(G.order):
            xg = G.mul(x, g)
            assert cs.sub_index[G.mul(xg, G.inv(int(cs.retract[xg])))] >= 0
