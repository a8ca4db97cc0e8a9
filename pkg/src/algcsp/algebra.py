"""Finite algebras, terms, subuniverses, products, quotients and isomorphism."""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import AlgebraError, SizeBoundError


# ---------------------------------------------------------------- operations

@dataclass(frozen=True)
class Operation:
    name: str
    arity: int
    table: tuple

    def __post_init__(self):
        if self.arity < 0:
            raise AlgebraError(f"negative arity for {self.name}")


@dataclass(frozen=True)
class FiniteAlgebra:
    """Universe 0..size-1 with operation tables stored flat in lexicographic order.

    ``radices`` is set on products and records the factor sizes so elements
    can be decoded back into tuples.
    """

    size: int
    ops: tuple
    name: str = field(default="", compare=False)
    radices: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        n = self.size
        if n < 1:
            raise AlgebraError("universe must be nonempty")
        names = set()
        for op in self.ops:
            if op.name in names:
                raise AlgebraError(f"duplicate operation {op.name}")
            names.add(op.name)
            if len(op.table) != n ** op.arity:
                raise AlgebraError(f"table of {op.name} has length {len(op.table)}, expected {n ** op.arity}")
            if any(not (0 <= v < n) for v in op.table):
                raise AlgebraError(f"table of {op.name} leaves the universe")

    @classmethod
    def binar(cls, rows, name="", opname="mul"):
        """Single binary operation given as a square table of rows."""
        n = len(rows)
        flat = tuple(int(v) for row in rows for v in row)
        if any(len(row) != n for row in rows):
            raise AlgebraError("binary table must be square")
        return cls(n, (Operation(opname, 2, flat),), name=name)

    def op(self, name: str) -> Operation:
        for o in self.ops:
            if o.name == name:
                return o
        raise AlgebraError(f"unknown operation symbol {name!r}")

    @cached_property
    def _arrays(self):
        return {o.name: np.array(o.table, dtype=np.int64).reshape((self.size,) * o.arity) for o in self.ops}

    def array(self, name: str | None = None) -> np.ndarray:
        """Operation table as an ndarray with one axis per argument."""
        if name is None:
            name = self.ops[0].name
        self.op(name)
        return self._arrays[name]

    @cached_property
    def rows(self):
        """Nested-list table of the first operation (binars)."""
        return self.array().tolist()

    def apply(self, name: str, *args: int) -> int:
        o = self.op(name)
        if len(args) != o.arity:
            raise AlgebraError(f"{name} takes {o.arity} arguments, got {len(args)}")
        idx = 0
        for a in args:
            idx = idx * self.size + a
        return o.table[idx]

    def mul(self, a: int, b: int) -> int:
        return self.rows[a][b]

    @property
    def signature(self):
        return tuple((o.name, o.arity) for o in self.ops)

    def is_idempotent(self) -> bool:
        n = self.size
        for o in self.ops:
            if o.arity == 0:
                return False
            step = sum(n ** i for i in range(o.arity))
            if any(o.table[a * step] != a for a in range(n)):
                return False
        return True

    def is_cib(self) -> bool:
        if len(self.ops) != 1 or self.ops[0].arity != 2:
            return False
        t = self.array()
        return bool((t == t.T).all()) and self.is_idempotent()

    def __repr__(self):
        label = self.name or "FiniteAlgebra"
        return f"<{label} size={self.size} ops={[o.name for o in self.ops]}>"


# ---------------------------------------------------------------------- json

def _nest(flat, n, k):
    if k == 0:
        return flat[0]
    if k == 1:
        return list(flat)
    step = n ** (k - 1)
    return [_nest(flat[i * step:(i + 1) * step], n, k - 1) for i in range(n)]


def _flatten(obj):
    if isinstance(obj, list):
        return [v for item in obj for v in _flatten(item)]
    return [obj]


def algebra_to_json(A: FiniteAlgebra) -> dict:
    return {"size": A.size,
            "ops": [{"name": o.name, "arity": o.arity, "table": _nest(list(o.table), A.size, o.arity)}
                    for o in A.ops]}


def algebra_from_json(obj: dict, name: str = "") -> FiniteAlgebra:
    try:
        n = int(obj["size"])
        ops = []
        for spec in obj["ops"]:
            flat = _flatten(spec["table"])
            if any(isinstance(v, bool) or not isinstance(v, int) for v in flat):
                raise AlgebraError("table entries must be integers")
            ops.append(Operation(str(spec["name"]), int(spec["arity"]), tuple(flat)))
    except (KeyError, TypeError) as exc:
        raise AlgebraError(f"malformed algebra description: {exc}") from exc
    return FiniteAlgebra(n, tuple(ops), name=name)


def load_algebra(path) -> FiniteAlgebra:
    with open(path) as fh:
        obj = json.load(fh)
    return algebra_from_json(obj, name=str(path).rsplit("/", 1)[-1].removesuffix(".json"))


# --------------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    index: int

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class App:
    op: str
    args: tuple

    def __str__(self):
        return f"{self.op}({','.join(str(a) for a in self.args)})"


Term = Var | App


def app(op: str, *args) -> App:
    return App(op, tuple(args))


def mul(a, b) -> App:
    """Shorthand for the binary symbol used by every binar in the catalog."""
    return App("mul", (a, b))


def term_arity(t) -> int:
    """One more than the largest variable index (0 for ground terms)."""
    if isinstance(t, Var):
        return t.index + 1
    return max((term_arity(a) for a in t.args), default=0)


def term_depth(t) -> int:
    if isinstance(t, Var):
        return 0
    return 1 + max((term_depth(a) for a in t.args), default=0)


def substitute(t, images: Sequence):
    """Replace variable i by images[i]."""
    if isinstance(t, Var):
        return images[t.index]
    return App(t.op, tuple(substitute(a, images) for a in t.args))


_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9]*|\(|\)|,)")


def parse_term(text: str):
    """Inverse of ``str`` on terms: ``mul(mul(x0,x1),x2)``."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise AlgebraError(f"cannot parse term at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()

    def parse(i):
        tok = tokens[i]
        if i + 1 < len(tokens) and tokens[i + 1] == "(":
            args = []
            i += 2
            if tokens[i] == ")":
                return App(tok, ()), i + 1
            while True:
                sub, i = parse(i)
                args.append(sub)
                if tokens[i] == ",":
                    i += 1
                elif tokens[i] == ")":
                    return App(tok, tuple(args)), i + 1
                else:
                    raise AlgebraError(f"unexpected token {tokens[i]!r}")
        m = re.fullmatch(r"x(\d+)", tok)
        if not m:
            raise AlgebraError(f"bad variable name {tok!r}")
        return Var(int(m.group(1))), i + 1

    try:
        term, end = parse(0)
    except IndexError as exc:
        raise AlgebraError(f"truncated term {text!r}") from exc
    if end != len(tokens):
        raise AlgebraError(f"trailing input in {text!r}")
    return term


def star_compose(f, g, f_arity: int | None = None, g_arity: int | None = None):
    """The term (f*g)(a) = f(g(a_11..a_1m), ..., g(a_l1..a_lm)) of arity l*m."""
    l = term_arity(f) if f_arity is None else f_arity
    m = term_arity(g) if g_arity is None else g_arity
    blocks = [substitute(g, [Var(i * m + j) for j in range(m)]) for i in range(l)]
    return substitute(f, blocks)


def eval_term(A: FiniteAlgebra, t, env: Sequence[int]) -> int:
    if isinstance(t, Var):
        if t.index >= len(env):
            raise AlgebraError(f"environment too short for x{t.index}")
        return env[t.index]
    o = A.op(t.op)
    if len(t.args) != o.arity:
        raise AlgebraError(f"{t.op} takes {o.arity} arguments, got {len(t.args)}")
    return A.apply(t.op, *(eval_term(A, a, env) for a in t.args))


def eval_columns(A: FiniteAlgebra, t, columns: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate t pointwise on parallel arrays of arguments."""
    if isinstance(t, Var):
        return columns[t.index]
    o = A.op(t.op)
    if len(t.args) != o.arity:
        raise AlgebraError(f"{t.op} takes {o.arity} arguments, got {len(t.args)}")
    vals = tuple(eval_columns(A, a, columns) for a in t.args)
    if o.arity == 0:
        return np.full(np.shape(columns[0]) if columns else (), o.table[0])
    return A.array(t.op)[vals]


def term_table(A: FiniteAlgebra, t, arity: int | None = None) -> np.ndarray:
    """The term operation as an ndarray with one axis per variable."""
    k = term_arity(t) if arity is None else arity
    grids = np.indices((A.size,) * k) if k else []
    return np.asarray(eval_columns(A, t, list(grids)))


# --------------------------------------------------------------- subuniverses

@dataclass(frozen=True)
class Subuniverse:
    parent: FiniteAlgebra = field(compare=False, hash=False, repr=False)
    elements: tuple

    def __contains__(self, a):
        return a in self.elements

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return "{" + ",".join(map(str, self.elements)) + "}"


def _close(A: FiniteAlgebra, members: list, done: int = 0) -> list:
    """Grow ``members`` in place to a subuniverse.

    members[:done] is assumed already closed, so only combinations involving a
    later element are formed.
    """
    present = set(members)
    for o in A.ops:
        if o.arity == 0 and o.table[0] not in present:
            present.add(o.table[0])
            members.append(o.table[0])
    binaries = [A.array(o.name).tolist() for o in A.ops if o.arity == 2]
    others = [o for o in A.ops if o.arity not in (0, 2)]
    i = done
    while i < len(members) or others:
        while i < len(members):
            x = members[i]
            for tab in binaries:
                rx = tab[x]
                for y in members[:i + 1]:
                    for z in (rx[y], tab[y][x]):
                        if z not in present:
                            present.add(z)
                            members.append(z)
            i += 1
        grew = False
        for o in others:
            for args in itertools.product(list(members), repeat=o.arity):
                z = A.apply(o.name, *args)
                if z not in present:
                    present.add(z)
                    members.append(z)
                    grew = True
        if not grew:
            break
    return members


def subuniverse_closure(A: FiniteAlgebra, seed: Iterable[int]) -> Subuniverse:
    seed = list(dict.fromkeys(seed))
    if not seed:
        raise AlgebraError("closure of the empty set is not taken")
    if any(not (0 <= a < A.size) for a in seed):
        raise AlgebraError("seed element outside the universe")
    return Subuniverse(A, tuple(sorted(_close(A, seed))))


def is_subuniverse(A: FiniteAlgebra, subset: Iterable[int]) -> bool:
    s = sorted(set(subset))
    return bool(s) and tuple(sorted(_close(A, list(s)))) == tuple(s)


def all_subuniverses(A: FiniteAlgebra, bound: int = 8) -> list:
    """Every nonempty subuniverse, ordered by size then lexicographically."""
    if A.size > bound:
        raise SizeBoundError(f"subuniverse enumeration limited to size {bound}")
    found = {}
    queue = []
    for a in range(A.size):
        s = frozenset(_close(A, [a]))
        if s not in found:
            found[s] = None
            queue.append(s)
    while queue:
        s = queue.pop()
        base = list(s)
        for a in range(A.size):
            if a in s:
                continue
            t = frozenset(_close(A, base + [a], done=len(base)))
            if t not in found:
                found[t] = None
                queue.append(t)
    keys = sorted((tuple(sorted(s)) for s in found), key=lambda e: (len(e), e))
    return [Subuniverse(A, e) for e in keys]


# ------------------------------------------------------------------ products

def encode(coords: Sequence[int], radices: Sequence[int]) -> int:
    v = 0
    for c, r in zip(coords, radices):
        v = v * r + c
    return v


def decode(v: int, radices: Sequence[int]) -> tuple:
    out = []
    for r in reversed(radices):
        v, c = divmod(v, r)
        out.append(c)
    return tuple(reversed(out))


def product_algebra(algebras: Sequence[FiniteAlgebra]) -> FiniteAlgebra:
    """Direct product; elements are mixed-radix codes, coordinate 0 most significant."""
    if not algebras:
        raise AlgebraError("empty product")
    sig = algebras[0].signature
    if any(B.signature != sig for B in algebras):
        raise AlgebraError("factors have different signatures")
    radices = tuple(B.size for B in algebras)
    size = int(np.prod(radices))
    elems = np.array([decode(v, radices) for v in range(size)], dtype=np.int64).reshape(size, len(radices))
    weights = np.array([int(np.prod(radices[i + 1:])) for i in range(len(radices))], dtype=np.int64)
    ops = []
    for name, k in sig:
        args = np.indices((size,) * k).reshape(k, -1) if k else np.zeros((0, 1), dtype=np.int64)
        code = np.zeros(args.shape[1], dtype=np.int64)
        for j, B in enumerate(algebras):
            tab = B.array(name)
            coord = tab[tuple(elems[args[i], j] for i in range(k))] if k else np.full(1, tab)
            code += coord * weights[j]
        ops.append(Operation(name, k, tuple(int(v) for v in code)))
    label = " x ".join(B.name or "?" for B in algebras)
    return FiniteAlgebra(size, tuple(ops), name=label, radices=radices)


# ----------------------------------------------------- quotients, restrictions

def quotient_map(block_id: Sequence[int]) -> list:
    """Element -> index of its block, blocks numbered in order of least member."""
    reps = sorted(set(block_id))
    pos = {r: i for i, r in enumerate(reps)}
    return [pos[b] for b in block_id]


def quotient_algebra(A: FiniteAlgebra, theta) -> FiniteAlgebra:
    """A/theta; theta is a Congruence or a block-id sequence."""
    block_id = tuple(getattr(theta, "block_id", theta))
    if len(block_id) != A.size:
        raise AlgebraError("congruence size does not match algebra")
    q = quotient_map(block_id)
    reps = sorted(set(block_id))
    m = len(reps)
    ops = []
    for o in A.ops:
        flat = []
        for args in itertools.product(range(m), repeat=o.arity):
            val = q[A.apply(o.name, *(reps[a] for a in args))]
            flat.append(val)
        ops.append(Operation(o.name, o.arity, tuple(flat)))
    Q = FiniteAlgebra(m, tuple(ops), name=f"{A.name}/theta" if A.name else "")
    # compatibility check: every representative choice must agree
    for o in A.ops:
        for args in itertools.product(range(A.size), repeat=o.arity):
            if q[A.apply(o.name, *args)] != Q.apply(o.name, *(q[a] for a in args)):
                raise AlgebraError("partition is not compatible with the operations")
    return Q


def restrict_algebra(A: FiniteAlgebra, B) -> FiniteAlgebra:
    """Subalgebra on B, re-indexed by the sorted order of B."""
    elems = tuple(sorted(set(B)))
    if not is_subuniverse(A, elems):
        raise AlgebraError(f"{set(elems)} is not a subuniverse")
    pos = {e: i for i, e in enumerate(elems)}
    ops = []
    for o in A.ops:
        flat = tuple(pos[A.apply(o.name, *args)] for args in itertools.product(elems, repeat=o.arity))
        ops.append(Operation(o.name, o.arity, flat))
    label = f"{A.name}|{{{','.join(map(str, elems))}}}" if A.name else ""
    return FiniteAlgebra(len(elems), tuple(ops), name=label)


# ----------------------------------------------------------------- isomorphism

_PERM_CACHE: dict = {}


def _perms(n: int) -> np.ndarray:
    if n not in _PERM_CACHE:
        _PERM_CACHE[n] = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    return _PERM_CACHE[n]


def find_isomorphism(A: FiniteAlgebra, B: FiniteAlgebra, max_size: int = 8):
    """First bijection (lexicographic) h with h(f^A(a)) = f^B(h(a)), or None."""
    if A.size != B.size or A.signature != B.signature:
        return None
    n = A.size
    if n > max_size:
        raise SizeBoundError(f"isomorphism search limited to size {max_size}")
    P = _perms(n)
    ok = np.ones(len(P), dtype=bool)
    for name, k in A.signature:
        ta = np.array(A.op(name).table, dtype=np.int64)
        tb = np.array(B.op(name).table, dtype=np.int64)
        if k == 0:
            ok &= P[:, ta[0]] == tb[0]
            continue
        args = np.indices((n,) * k).reshape(k, -1)
        idx = np.zeros((len(P), args.shape[1]), dtype=np.int64)
        for i in range(k):
            idx = idx * n + P[:, args[i]]
        ok &= (tb[idx] == P[:, ta]).all(axis=1)
        if not ok.any():
            return None
    hits = np.flatnonzero(ok)
    return tuple(int(v) for v in P[hits[0]]) if len(hits) else None


def is_isomorphic(A: FiniteAlgebra, B: FiniteAlgebra) -> bool:
    return find_isomorphism(A, B) is not None


def relabel(A: FiniteAlgebra, h: Sequence[int]) -> FiniteAlgebra:
    """The isomorphic copy of A obtained by renaming a to h[a]."""
    n = A.size
    inv = [0] * n
    for a, b in enumerate(h):
        inv[b] = a
    ops = []
    for o in A.ops:
        flat = tuple(h[A.apply(o.name, *(inv[x] for x in args))]
                     for args in itertools.product(range(n), repeat=o.arity))
        ops.append(Operation(o.name, o.arity, flat))
    return FiniteAlgebra(n, tuple(ops), name=A.name)


def canonical_form(A: FiniteAlgebra, max_size: int = 6) -> tuple:
    """Lexicographically least concatenated flat table over all relabelings."""
    if A.size > max_size:
        raise SizeBoundError(f"canonical form limited to size {max_size}")
    return min(tuple(v for o in relabel(A, p).ops for v in o.table) for p in _perms(A.size).tolist())


def enumerate_cibs(n: int, chunk: int = 1 << 20) -> list:
    """One representative per isomorphism class of CIBs on n elements.

    Representatives are in canonical form and sorted by it.
    """
    if n < 1:
        raise AlgebraError("n must be positive")
    if n > 5:
        raise SizeBoundError("CIB enumeration limited to n <= 5")
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    m = len(pairs)
    if m == 0:
        return [FiniteAlgebra.binar([[0]], name="trivial")]
    where = {p: j for j, p in enumerate(pairs)}
    weights = np.array([n ** (m - 1 - j) for j in range(m)], dtype=np.int64)
    plans = []
    for p in _perms(n).tolist():
        inv = [0] * n
        for a, b in enumerate(p):
            inv[b] = a
        src = [where[tuple(sorted((inv[a], inv[b])))] for a, b in pairs]
        plans.append((np.array(p, dtype=np.int8), np.array(src)))
    total = n ** m
    canon = set()
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = ((codes[:, None] // weights[None, :]) % n).astype(np.int8)
        best = codes.copy()
        for p, src in plans:
            best = np.minimum(best, (p[digits[:, src]].astype(np.int64) * weights).sum(axis=1))
        canon.update(np.unique(best).tolist())
    out = []
    for code in sorted(canon):
        rows = [[a if a == b else 0 for b in range(n)] for a in range(n)]
        for j, (a, b) in enumerate(pairs):
            v = (code // int(weights[j])) % n
            rows[a][b] = rows[b][a] = v
        out.append(FiniteAlgebra.binar(rows))
    return out


def is_semilattice(A: FiniteAlgebra) -> bool:
    if len(A.ops) != 1 or A.ops[0].arity != 2 or not A.is_cib():
        return False
    t = A.array()
    left = t[t, :]           # left[a, b, c] = (a*b)*c
    right = t[:, t]          # right[a, b, c] = a*(b*c)
    return bool((left == right).all())
