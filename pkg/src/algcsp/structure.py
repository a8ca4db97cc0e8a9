"""Abelianness, sinks, absorption, cube-term blockers, EC structure, affine form."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .algebra import (App, FiniteAlgebra, Subuniverse, Var, all_subuniverses, encode, eval_columns,
                      is_subuniverse, mul, product_algebra, quotient_algebra, restrict_algebra,
                      star_compose, substitute, term_table, _perms)
from .congruence import Congruence, congruence_generated, congruence_lattice
from .errors import AlgebraError, SizeBoundError


# ---------------------------------------------------------------- abelianness

@lru_cache(maxsize=512)
def is_abelian(A: FiniteAlgebra, bound: int = 6) -> bool:
    """Diagonal criterion: the congruence of A^2 generated by collapsing the
    diagonal must keep the diagonal as one of its blocks."""
    if A.size > bound:
        raise SizeBoundError(f"abelian test limited to size {bound}")
    if A.size == 1:
        return True
    A2 = product_algebra([A, A])
    diag = [encode((a, a), A2.radices) for a in range(A.size)]
    theta = congruence_generated(A2, [(diag[0], d) for d in diag[1:]])
    block = {x for x in range(A2.size) if theta.block_id[x] == theta.block_id[diag[0]]}
    return block == set(diag)


# ---------------------------------------------------------------------- sinks

def find_sinks(A: FiniteAlgebra, C: Sequence[int]) -> list:
    """Elements s of C that every operation returns whenever s fills a
    nonempty set of argument places and the rest come from C.

    Any term in which a variable occurs then evaluates to s once that variable
    is s and the others range over a subuniverse C, so these are sinks in the
    term sense.
    """
    C = sorted(set(C))
    out = []
    for s in C:
        good = True
        for o in A.ops:
            if not good:
                break
            for places in range(1, 1 << o.arity):
                free = [j for j in range(o.arity) if not places >> j & 1]
                for rest in itertools.product(C, repeat=len(free)):
                    args = [s] * o.arity
                    for j, c in zip(free, rest):
                        args[j] = c
                    if A.apply(o.name, *args) != s:
                        good = False
                        break
                if not good:
                    break
        if good:
            out.append(s)
    return out


# ----------------------------------------------------------------- absorption

@dataclass(frozen=True)
class AbsorptionCertificate:
    """Verdict of check_absorbing.

    kind is one of "absorbing", "sink-escape", "abelian-parent",
    "exhausted-bound".  An "abelian-parent" verdict names an abelian
    subuniverse C (possibly the whole algebra) in which B meets C in a proper
    nonempty subset.
    """

    kind: str
    term: object = None
    arity: int | None = None
    sink: int | None = None
    subuniverse: tuple | None = None
    depth: int | None = None

    @property
    def absorbing(self) -> bool:
        return self.kind == "absorbing"

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.term is not None:
            out["term"] = str(self.term)
            out["arity"] = self.arity
        if self.sink is not None:
            out["sink"] = self.sink
        if self.subuniverse is not None:
            out["subuniverse"] = list(self.subuniverse)
        if self.kind == "exhausted-bound":
            out["arity"] = self.arity
            out["depth"] = self.depth
        return out

    def __str__(self):
        if self.kind == "absorbing":
            return f"absorbing via {self.term}"
        if self.kind == "sink-escape":
            return f"not absorbing: sink {self.sink} of {set(self.subuniverse)} lies outside"
        if self.kind == "abelian-parent":
            return f"not absorbing: proper trace in abelian {set(self.subuniverse)}"
        return f"unknown (no term up to arity {self.arity}, depth {self.depth}); treated as not absorbing"


def _near_tuples(n: int, B: Sequence[int], k: int) -> np.ndarray:
    """All k-tuples with at most one coordinate outside B, as a (k, N) array."""
    B = list(B)
    rows = set()
    for j in range(k):
        for tup in itertools.product(*[range(n) if i == j else B for i in range(k)]):
            rows.add(tup)
    return np.array(sorted(rows), dtype=np.int64).reshape(-1, k).T


def verify_absorbing(A: FiniteAlgebra, B: Sequence[int], t, arity: int) -> bool:
    cols = _near_tuples(A.size, B, arity)
    inside = np.zeros(A.size, dtype=bool)
    inside[list(B)] = True
    vals = eval_columns(A, t, list(cols))
    return bool(inside[np.broadcast_to(vals, cols.shape[1:])].all())


@lru_cache(maxsize=64)
def _analysis(A: FiniteAlgebra, abelian_bound: int):
    """Subuniverses of A with their sinks and abelianness, reused across queries."""
    subs = all_subuniverses(A, bound=max(A.size, 8))
    info = []
    for C in subs:
        ab = None
        if len(C) > 1 and len(C) <= abelian_bound:
            ab = is_abelian(restrict_algebra(A, C.elements), bound=abelian_bound)
        info.append((frozenset(C.elements), C.elements, find_sinks(A, C.elements), ab))
    return subs, info


class _TermPool:
    """Distinct term operations of one arity, stored as value vectors on a fixed argument list."""

    def __init__(self, A, cols, arity, limit):
        self.limit = limit
        self.mat = np.empty((limit + 1, cols.shape[1]), dtype=np.int64)
        self.terms = []
        self.depths = []
        self.seen = set()
        for i in range(arity):
            self.add(cols[i], Var(i), 0)

    @property
    def vectors(self):
        return self.mat[:len(self.terms)]

    def add(self, vec, term, depth):
        key = vec.tobytes()
        if key in self.seen:
            return False
        self.seen.add(key)
        self.mat[len(self.terms)] = vec
        self.terms.append(term)
        self.depths.append(depth)
        return True


def _search_terms(A, B, k, max_depth, limit, inside, saturate=True):
    """Search the k-ary term operations for one mapping every near-B tuple into B.

    Term operations are identified with their value vectors on the near-B
    tuples and generated by a worklist closure, so terms come out roughly by
    depth.  Returns (term, None) on success, (None, "saturated") when every
    k-ary term operation was seen without success, and (None, "bound") when the
    depth or pool limit stopped the search first.
    """
    cols = _near_tuples(A.size, B, k)
    pool = _TermPool(A, cols, k, limit)
    ops = [(o.name, o.arity, A.array(o.name)) for o in A.ops if o.arity > 0]
    i = 0
    while i < len(pool.vectors):
        if not saturate and pool.depths[i] >= max_depth:
            return None, "bound"
        V = pool.mat[:i + 1]
        terms = pool.terms
        for name, arity, tab in ops:
            if arity == 2:
                # pairs (i, j) and (j, i) for j <= i
                blocks = [(tab[V[:i], V[i][None, :]], [(j, i) for j in range(i)]),
                          (tab[V[i][None, :], V], [(i, j) for j in range(i + 1)])]
            else:
                blocks = []
                for head in itertools.product(range(i + 1), repeat=arity - 1):
                    js = range(i + 1) if i in head else [i]
                    res = tab[tuple(V[h][None, :] for h in head) + (V[list(js)],)]
                    blocks.append((res, [tuple(head) + (j,) for j in js]))
            for res, argsets in blocks:
                if not len(argsets):
                    continue
                ok = inside[res].all(axis=1)
                if ok.any():
                    args = argsets[int(np.flatnonzero(ok)[0])]
                    return App(name, tuple(terms[a] for a in args)), None
                for row, args in zip(res, argsets):
                    if pool.add(row, None, 1 + max(pool.depths[a] for a in args)):
                        pool.terms[-1] = App(name, tuple(terms[a] for a in args))
                        if len(pool.terms) >= limit:
                            return None, "bound"
        i += 1
    return None, "saturated"


def _binary_term_ops(A: FiniteAlgebra, max_depth: int, limit: int):
    """Distinct binary term operations up to the given depth, as (table, term)."""
    grid = np.indices((A.size, A.size)).reshape(2, -1)
    pool = _TermPool(A, grid, 2, limit)
    for depth in range(1, max_depth + 1):
        older = len(pool.vectors)
        V = list(pool.vectors)
        T = list(pool.terms)
        D = list(pool.depths)
        for o in A.ops:
            if o.arity == 0:
                continue
            tab = A.array(o.name)
            for combo in itertools.product(range(older), repeat=o.arity):
                if max(D[i] for i in combo) != depth - 1:
                    continue
                vec = tab[tuple(V[i] for i in combo)]
                if len(pool.vectors) >= limit:
                    break
                pool.add(vec, App(o.name, tuple(T[i] for i in combo)), depth)
    return [(v.reshape(A.size, A.size), t) for v, t in zip(pool.vectors, pool.terms)]


def _search_star(A, B, max_depth, limit, inside):
    """Star composites f*g of binary term operations, giving arity 4."""
    ops = _binary_term_ops(A, max_depth, limit)
    cols = _near_tuples(A.size, B, 4)
    tabs = np.array([t for t, _ in ops])
    G0 = tabs[:, cols[0], cols[1]]
    G1 = tabs[:, cols[2], cols[3]]
    for ft, f in ops:
        res = ft[G0, G1]
        ok = inside[res].all(axis=1)
        hit = np.flatnonzero(ok)
        if len(hit):
            return star_compose(f, ops[hit[0]][1], 2, 2)
    return None


def check_absorbing(A: FiniteAlgebra, B: Sequence[int], max_arity: int = 4, max_depth: int = 3,
                    saturate: bool = True, abelian_bound: int = 16, pool_limit: int | None = None
                    ) -> AbsorptionCertificate:
    """Decide whether B absorbs A, with a witnessing term or a sound refutation.

    Refutations come from an abelian subuniverse meeting B properly or from a
    sink of a subuniverse meeting B that B misses.  The positive search runs
    over term operations of arity 2..max_arity; with ``saturate`` it continues
    past max_depth until the finitely many term operations of that arity are
    exhausted or the pool limit is reached.  Star composites of binary term
    operations are tried for arity 4.  Anything undecided is reported as
    "exhausted-bound".
    """
    B = tuple(sorted(set(B)))
    if not B or not is_subuniverse(A, B):
        raise AlgebraError(f"{set(B)} is not a nonempty subuniverse")
    if len(B) == A.size:
        return AbsorptionCertificate("absorbing", term=Var(0), arity=1)
    Bset = frozenset(B)
    subs, info = _analysis(A, abelian_bound)
    whole = info[-1]
    if whole[3]:
        return AbsorptionCertificate("abelian-parent", subuniverse=whole[1])
    for cset, elems, sinks, _ in info:
        if cset & Bset:
            for s in sinks:
                if s not in Bset:
                    return AbsorptionCertificate("sink-escape", sink=s, subuniverse=elems)
    for cset, elems, sinks, ab in info:
        if ab and cset & Bset and not cset <= Bset:
            return AbsorptionCertificate("abelian-parent", subuniverse=elems)

    inside = np.zeros(A.size, dtype=bool)
    inside[list(B)] = True
    binary_only = all(o.arity == 2 for o in A.ops)
    if pool_limit is None:
        pool_limit = 3000 if binary_only else 300
    for k in range(2, max_arity + 1):
        t, _ = _search_terms(A, B, k, max_depth, pool_limit, inside, saturate)
        if t is not None:
            return AbsorptionCertificate("absorbing", term=t, arity=k)
        if k == 4 and binary_only:
            t = _search_star(A, B, max_depth, pool_limit, inside)
            if t is not None:
                return AbsorptionCertificate("absorbing", term=t, arity=4)
    return AbsorptionCertificate("exhausted-bound", arity=max_arity, depth=max_depth)


@dataclass
class MassReport:
    masses: list
    verdicts: dict = field(default_factory=dict)

    @property
    def exhausted(self) -> list:
        return [B for B, c in self.verdicts.items() if c.kind == "exhausted-bound"]


def mass_report(A: FiniteAlgebra, max_arity: int = 4, max_depth: int = 3, saturate: bool = True) -> MassReport:
    """Minimal absorbing subuniverses together with the verdict on each candidate.

    Candidates are taken in order of size; a subuniverse containing an
    absorbing one found earlier is never minimal and is not examined.
    """
    subs = all_subuniverses(A, bound=max(A.size, 8))
    found = []
    verdicts = {}
    for C in subs:
        elems = frozenset(C.elements)
        if any(f <= elems for f in found):
            continue
        cert = check_absorbing(A, C.elements, max_arity, max_depth, saturate)
        verdicts[C.elements] = cert
        if cert.absorbing:
            found.append(elems)
    masses = [C for C in subs if frozenset(C.elements) in found]
    return MassReport(masses, verdicts)


def minimal_absorbing(A: FiniteAlgebra, max_arity: int = 4, max_depth: int = 3, saturate: bool = True) -> list:
    return mass_report(A, max_arity, max_depth, saturate).masses


# --------------------------------------------------------- cube-term blockers

def _require_cib(A):
    if not A.is_cib():
        raise AlgebraError("expected a commutative idempotent binar")


def has_ctb_cib(A: FiniteAlgebra):
    """A pair (D, S) with S a subuniverse mapping onto the 2-element
    semilattice and D the preimage of its bottom, or None."""
    _require_cib(A)
    for S in all_subuniverses(A, bound=max(A.size, 8)):
        if len(S) < 2:
            continue
        sub = restrict_algebra(A, S.elements)
        for theta in congruence_lattice(sub).elements:
            if theta.num_blocks() != 2:
                continue
            X, Y = theta.blocks()
            meet = theta.block_id[sub.mul(X[0], Y[0])]
            low = X if meet == X[0] else Y
            D = tuple(S.elements[i] for i in low)
            return Subuniverse(A, D), S
    return None


def has_edge_term_cib(A: FiniteAlgebra) -> bool:
    return has_ctb_cib(A) is None


# -------------------------------------------------------------- EC structure

def iterate_second(A: FiniteAlgebra, s, max_steps: int = 10000):
    """Least iterate s(x, s(x, ... s(x, y))) satisfying t(x, t(x, y)) = t(x, y)."""
    t = s
    rows = np.arange(A.size)[:, None]
    for _ in range(max_steps):
        tab = term_table(A, t, 2)
        if (tab[rows, tab] == tab).all():
            return t
        t = substitute(s, [Var(0), t])
    raise AlgebraError("iteration did not stabilise")


@dataclass(frozen=True)
class EcStructure:
    theta: Congruence
    t: object
    class_order: tuple

    def rank(self, a: int) -> int:
        for i, blk in enumerate(self.class_order):
            if a in blk:
                return i
        raise AlgebraError(f"{a} lies in no class")


def _left_identity_candidates(A):
    yield mul(Var(1), mul(Var(0), Var(1)))
    for _, term in _binary_term_ops(A, 3, 2000):
        yield term


def _chain_order(A, theta, t):
    """Blocks ordered bottom-up if t induces a linearly ordered meet semilattice."""
    Q = quotient_algebra(A, theta)
    blocks = theta.blocks()
    q = {b[0]: i for i, b in enumerate(blocks)}
    m = len(blocks)
    reps = [b[0] for b in blocks]
    tab = term_table(A, t, 2)
    qt = [[q[theta.block_id[int(tab[reps[i], reps[j]])]] for j in range(m)] for i in range(m)]
    for i, j in itertools.product(range(m), repeat=2):
        if qt[i][j] != qt[j][i] or qt[i][j] not in (i, j):
            return None
    for i, j, k in itertools.product(range(m), repeat=3):
        if qt[qt[i][j]][k] != qt[i][qt[j][k]]:
            return None
    below = {i: sum(1 for j in range(m) if qt[i][j] == i) for i in range(m)}
    return tuple(blocks[i] for i in sorted(range(m), key=lambda i: -below[i]))


def detect_ec(A: FiniteAlgebra):
    """A congruence with singleton or abelian classes over which a derived
    binary term makes the quotient a chain, or None."""
    if not A.is_idempotent():
        return None
    lattice = congruence_lattice(A)
    for theta in sorted(lattice.elements, key=lambda c: (c.num_blocks(), c.block_id)):
        blocks = theta.blocks()
        if any(len(b) > 1 and not is_abelian(restrict_algebra(A, b)) for b in blocks):
            continue
        for s in _left_identity_candidates(A):
            tab = term_table(A, s, 2)
            if not all(tab[x, y] == x for b in blocks for x in b for y in b):
                continue
            t = iterate_second(A, s)
            order = _chain_order(A, theta, t)
            if order is not None:
                return EcStructure(theta, t, order)
            break
    return None


# ---------------------------------------------------------- affine structure

@dataclass(frozen=True)
class AffineRep:
    prime: int
    coeff: int
    offset: int
    element_map: tuple


def _is_prime(p):
    return p > 1 and all(p % d for d in range(2, int(p ** 0.5) + 1))


def affine_representation(A: FiniteAlgebra):
    """Bijection onto Z_p under which x*y = r*x + r*y + b, or None."""
    _require_cib(A)
    n = A.size
    if n == 1:
        return AffineRep(1, 0, 0, (0,))
    if not _is_prime(n) or n > 7:
        return None
    tab = A.array()
    for phi in _perms(n).tolist():
        lhs = np.array(phi)[tab]
        ph = np.array(phi)
        for r in range(n):
            for b in range(n):
                if ((r * ph[:, None] + r * ph[None, :] + b) % n == lhs).all():
                    return AffineRep(n, r, b, tuple(phi))
    return None
