"""Congruences as block-id sequences, principal congruences and lattices."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra import FiniteAlgebra, Subuniverse, decode, quotient_algebra, restrict_algebra
from .errors import AlgebraError, SizeBoundError


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def block_ids(self):
        roots = [self.find(x) for x in range(len(self.parent))]
        least = {}
        for x, r in enumerate(roots):
            least.setdefault(r, x)
        return tuple(least[r] for r in roots)


@dataclass(frozen=True)
class Congruence:
    """Equivalence on 0..n-1; block_id[x] is the least member of x's block."""

    block_id: tuple

    def __post_init__(self):
        b = self.block_id
        if any(b[b[x]] != b[x] or b[x] > x for x in range(len(b))):
            raise AlgebraError(f"not a canonical block-id sequence: {b}")

    @classmethod
    def from_blocks(cls, n: int, blocks: Iterable[Iterable[int]]):
        uf = _UnionFind(n)
        for block in blocks:
            block = list(block)
            for x in block[1:]:
                uf.union(block[0], x)
        return cls(uf.block_ids())

    @classmethod
    def from_labels(cls, labels: Sequence):
        """Congruence whose blocks are the fibres of a labelling."""
        first = {}
        return cls(tuple(first.setdefault(v, x) for x, v in enumerate(labels)))

    @classmethod
    def zero(cls, n: int):
        return cls(tuple(range(n)))

    @classmethod
    def one(cls, n: int):
        return cls((0,) * n)

    @property
    def size(self) -> int:
        return len(self.block_id)

    def blocks(self) -> list:
        out = {}
        for x, b in enumerate(self.block_id):
            out.setdefault(b, []).append(x)
        return [tuple(v) for _, v in sorted(out.items())]

    def num_blocks(self) -> int:
        return len(set(self.block_id))

    def related(self, a: int, b: int) -> bool:
        return self.block_id[a] == self.block_id[b]

    def leq(self, other: "Congruence") -> bool:
        return all(other.block_id[x] == other.block_id[b] for x, b in enumerate(self.block_id))

    def meet(self, other: "Congruence") -> "Congruence":
        return Congruence.from_labels(list(zip(self.block_id, other.block_id)))

    def join(self, other: "Congruence") -> "Congruence":
        uf = _UnionFind(self.size)
        for x in range(self.size):
            uf.union(x, self.block_id[x])
            uf.union(x, other.block_id[x])
        return Congruence(uf.block_ids())

    def is_zero(self) -> bool:
        return self.block_id == tuple(range(self.size))

    def is_one(self) -> bool:
        return all(b == 0 for b in self.block_id)

    def __str__(self):
        return "|" + "|".join(",".join(map(str, b)) for b in self.blocks()) + "|"


def is_compatible(A: FiniteAlgebra, theta: Congruence) -> bool:
    b = np.array(theta.block_id)
    for o in A.ops:
        if o.arity == 0:
            continue
        tab = A.array(o.name)
        for j in range(o.arity):
            # changing argument j within a block must not change the block of the value
            moved = np.take(tab, b, axis=j)
            if not (b[moved] == b[tab]).all():
                return False
    return True


@lru_cache(maxsize=256)
def _translations(A: FiniteAlgebra) -> np.ndarray:
    """All basic translations x -> f(c..x..c) as rows of an array."""
    n = A.size
    rows = set()
    for o in A.ops:
        if o.arity == 0:
            continue
        tab = A.array(o.name)
        for j in range(o.arity):
            moved = np.moveaxis(tab, j, -1).reshape(-1, n)
            rows.update(map(tuple, moved.tolist()))
    rows.discard(tuple(range(n)))
    return np.array(sorted(rows), dtype=np.int64).reshape(-1, n)


def congruence_generated(A: FiniteAlgebra, pairs: Iterable[tuple]) -> Congruence:
    """Least congruence containing the given pairs (union-find with a pair queue)."""
    uf = _UnionFind(A.size)
    queue = []
    for a, b in pairs:
        if uf.union(a, b):
            queue.append((a, b))
    trans = _translations(A).tolist()
    while queue:
        a, b = queue.pop()
        for t in trans:
            u, v = t[a], t[b]
            if uf.union(u, v):
                queue.append((u, v))
    return Congruence(uf.block_ids())


def principal_congruence(A: FiniteAlgebra, a: int, b: int) -> Congruence:
    if not (0 <= a < A.size and 0 <= b < A.size):
        raise AlgebraError("element outside the universe")
    return congruence_generated(A, [(a, b)])


@dataclass
class CongruenceLattice:
    elements: list
    leq: np.ndarray
    meet_table: np.ndarray
    join_table: np.ndarray

    def __len__(self):
        return len(self.elements)

    def index(self, theta: Congruence) -> int:
        return self.elements.index(theta)

    @property
    def bottom(self) -> Congruence:
        return self.elements[0]

    @property
    def top(self) -> Congruence:
        return self.elements[-1]


def lattice_from_elements(elements: Sequence[Congruence]) -> CongruenceLattice:
    """Order, meet and join tables for a family closed under meet and join."""
    elements = sorted(set(elements), key=lambda c: (-c.num_blocks(), c.block_id))
    pos = {c: i for i, c in enumerate(elements)}
    m = len(elements)
    leq = np.array([[x.leq(y) for y in elements] for x in elements], dtype=bool).reshape(m, m)
    meet = np.zeros((m, m), dtype=np.int64)
    join = np.zeros((m, m), dtype=np.int64)
    for i, j in itertools.combinations_with_replacement(range(m), 2):
        mi = pos[elements[i].meet(elements[j])]
        ji = pos[elements[i].join(elements[j])]
        meet[i, j] = meet[j, i] = mi
        join[i, j] = join[j, i] = ji
    return CongruenceLattice(elements, leq, meet, join)


def congruence_lattice(A: FiniteAlgebra, bound: int = 16) -> CongruenceLattice:
    """All congruences, finest first, with order, meet and join tables."""
    if A.size > bound:
        raise SizeBoundError(f"congruence lattice limited to size {bound}")
    n = A.size
    principals = {principal_congruence(A, a, b) for a, b in itertools.combinations(range(n), 2)}
    zero = Congruence.zero(n)
    found = {zero}
    queue = [zero]
    while queue:
        theta = queue.pop()
        for p in principals:
            j = theta.join(p)
            if j not in found:
                found.add(j)
                queue.append(j)
    return lattice_from_elements(found)


def is_simple(A: FiniteAlgebra) -> bool:
    """At least two elements and no congruences besides 0 and 1."""
    if A.size < 2:
        return False
    return all(principal_congruence(A, a, b).is_one() for a, b in itertools.combinations(range(A.size), 2))


# ------------------------------------------------------------ products, kernels

def _subset_radices(R):
    elems = R.elements if isinstance(R, Subuniverse) else tuple(R)
    parent = R.parent if isinstance(R, Subuniverse) else None
    if parent is None or parent.radices is None:
        raise AlgebraError("relation must be a subuniverse of a product algebra")
    return elems, parent.radices


def tuples_of(R) -> list:
    """Decode the elements of a subuniverse of a product into coordinate tuples."""
    elems, radices = _subset_radices(R)
    return [decode(e, radices) for e in elems]


def projection_kernel(R, sigma: Sequence[int]) -> Congruence:
    """Kernel of the projection of R onto the coordinates in sigma.

    R is a subuniverse of a product; the congruence lives on positions in
    R.elements.
    """
    rows = tuples_of(R)
    return Congruence.from_labels([tuple(r[i] for i in sigma) for r in rows])


def lift_congruence(theta: Congruence, sigma: Sequence[int], radices: Sequence[int]) -> Congruence:
    """theta on the product of the sigma-factors, pulled back to the full product."""
    sub = [radices[i] for i in sigma]
    if theta.size != int(np.prod(sub)):
        raise AlgebraError("congruence does not live on the projected product")
    labels = []
    total = int(np.prod(radices))
    for v in range(total):
        coords = decode(v, radices)
        code = 0
        for i in sigma:
            code = code * radices[i] + coords[i]
        labels.append(theta.block_id[code])
    return Congruence.from_labels(labels)


def is_subdirect(R, arity: int | None = None) -> bool:
    rows = tuples_of(R)
    _, radices = _subset_radices(R)
    return all({r[i] for r in rows} == set(range(radices[i])) for i in range(len(radices)))


def is_linked(R) -> bool:
    """Both projection kernels of a binary subdirect product join to the top."""
    _, radices = _subset_radices(R)
    if len(radices) != 2:
        raise AlgebraError("linkedness is defined for binary products")
    if not is_subdirect(R):
        raise AlgebraError("relation is not subdirect")
    return projection_kernel(R, (0,)).join(projection_kernel(R, (1,))).is_one()


def is_meet_semidistributive(L: CongruenceLattice) -> bool:
    """Check x^y = x^z implies x^y = x^(y v z) on every triple."""
    m = len(L)
    M, J = L.meet_table, L.join_table
    for x in range(m):
        row = M[x]
        for y in range(m):
            for z in range(m):
                if row[y] == row[z] and row[y] != row[J[y, z]]:
                    return False
    return True


def malcev_product_witness(A: FiniteAlgebra, class_pred: Callable, quotient_pred: Callable):
    """Some congruence whose blocks satisfy class_pred and whose quotient
    satisfies quotient_pred; predicates receive algebras."""
    for theta in congruence_lattice(A).elements:
        if not quotient_pred(quotient_algebra(A, theta)):
            continue
        if all(class_pred(restrict_algebra(A, blk)) for blk in theta.blocks()):
            return theta
    return None
