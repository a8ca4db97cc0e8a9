"""CSP instances over finite algebras, a brute-force oracle and instance transforms."""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .algebra import FiniteAlgebra, algebra_from_json, is_subuniverse, quotient_map, restrict_algebra
from .errors import AlgebraError, InstanceError

BRUTE_FORCE_LIMIT = 1 << 24


@dataclass(frozen=True)
class Constraint:
    scope: tuple
    relation: tuple

    def __post_init__(self):
        if len(set(self.scope)) != len(self.scope):
            raise InstanceError(f"scope {self.scope} is not injective")
        if any(len(r) != len(self.scope) for r in self.relation):
            raise InstanceError("relation tuple length differs from scope length")

    @classmethod
    def make(cls, scope, tuples):
        return cls(tuple(int(v) for v in scope), tuple(sorted({tuple(int(x) for x in r) for r in tuples})))

    @cached_property
    def rel_set(self) -> frozenset:
        return frozenset(self.relation)

    def project(self, positions: Sequence[int]) -> "Constraint":
        """Constraint on the listed scope positions, relation projected onto them."""
        return Constraint.make([self.scope[p] for p in positions],
                               {tuple(r[p] for p in positions) for r in self.relation})


@dataclass(frozen=True)
class CspInstance:
    """Variables 0..n-1; variable i ranges over domains[i], a subset of algebras[i]."""

    algebras: tuple
    domains: tuple
    constraints: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.algebras) != len(self.domains):
            raise InstanceError("one algebra per variable is required")
        for c in self.constraints:
            if any(not (0 <= v < len(self.domains)) for v in c.scope):
                raise InstanceError(f"scope {c.scope} mentions an unknown variable")

    @classmethod
    def over(cls, A: FiniteAlgebra, domains, constraints, name=""):
        """Instance whose domains all live in one parent algebra."""
        domains = tuple(tuple(sorted(set(d))) for d in domains)
        return cls((A,) * len(domains), domains, tuple(constraints), name=name)

    @property
    def n(self) -> int:
        return len(self.domains)

    @property
    def parent(self):
        """The shared algebra, or None when variables use different algebras."""
        if self.algebras and all(B is self.algebras[0] or B == self.algebras[0] for B in self.algebras):
            return self.algebras[0]
        return None

    def domain_algebra(self, i: int) -> FiniteAlgebra:
        return _restricted(self.algebras[i], self.domains[i])

    def with_constraints(self, constraints) -> "CspInstance":
        return CspInstance(self.algebras, self.domains, tuple(constraints), name=self.name)


_RESTRICT_CACHE: dict = {}


def _restricted(A, dom):
    key = (A, dom)
    if key not in _RESTRICT_CACHE:
        _RESTRICT_CACHE[key] = restrict_algebra(A, dom)
    return _RESTRICT_CACHE[key]


# ---------------------------------------------------------------- satisfaction

def satisfies(f: Sequence[int], c: Constraint) -> bool:
    return tuple(f[v] for v in c.scope) in c.rel_set


def is_solution(I: CspInstance, f: Sequence[int]) -> bool:
    if f is None or len(f) != I.n:
        return False
    if any(f[i] not in I.domains[i] for i in range(I.n)):
        return False
    return all(satisfies(f, c) for c in I.constraints)


def _solution_mask(I: CspInstance, start: int, stop: int) -> tuple:
    """Boolean mask over assignment indices [start, stop) plus the value columns."""
    sizes = [len(d) for d in I.domains]
    idx = np.arange(start, stop, dtype=np.int64)
    cols = []
    stride = 1
    strides = []
    for s in reversed(sizes):
        strides.append(stride)
        stride *= s
    strides.reverse()
    for i, d in enumerate(I.domains):
        cols.append(np.array(d, dtype=np.int64)[(idx // strides[i]) % sizes[i]])
    ok = np.ones(len(idx), dtype=bool)
    for c in I.constraints:
        if not c.relation:
            ok[:] = False
            break
        if not c.scope:
            continue
        bases = [I.algebras[v].size for v in c.scope]
        code = np.zeros(len(idx), dtype=np.int64)
        for v, b in zip(c.scope, bases):
            code = code * b + cols[v]
        allowed = set()
        for r in c.relation:
            k = 0
            for x, b in zip(r, bases):
                k = k * b + x
            allowed.add(k)
        total = int(np.prod(bases))
        if total <= 1 << 22:
            table = np.zeros(total, dtype=bool)
            table[list(allowed)] = True
            ok &= table[code]
        else:
            ok &= np.isin(code, np.fromiter(allowed, dtype=np.int64))
    return ok, cols


def _search_space(I):
    total = 1
    for d in I.domains:
        total *= len(d)
    if total > BRUTE_FORCE_LIMIT:
        raise InstanceError(f"search space {total} exceeds the brute-force limit")
    return total


def brute_force_solve(I: CspInstance, chunk: int = 1 << 20):
    """Lexicographically least solution (domains in increasing order), or None."""
    total = _search_space(I)
    if I.n == 0:
        return () if all(c.relation for c in I.constraints) else None
    for start in range(0, total, chunk):
        ok, cols = _solution_mask(I, start, min(total, start + chunk))
        hit = np.flatnonzero(ok)
        if len(hit):
            return tuple(int(col[hit[0]]) for col in cols)
    return None


def all_solutions(I: CspInstance, chunk: int = 1 << 20) -> list:
    total = _search_space(I)
    if I.n == 0:
        return [()] if all(c.relation for c in I.constraints) else []
    out = []
    for start in range(0, total, chunk):
        ok, cols = _solution_mask(I, start, min(total, start + chunk))
        sel = np.flatnonzero(ok)
        out.extend(zip(*(col[sel].tolist() for col in cols)))
    return [tuple(s) for s in out]


# ------------------------------------------------------------------ validation

def _close_binary(tabs, sizes, members) -> frozenset:
    """Semi-naive closure for algebras whose operations are all binary."""
    m = len(sizes)
    radix = np.cumprod([1] + list(sizes[:0:-1]))[::-1]
    M = np.array(members, dtype=np.int64).reshape(-1, m)
    seen = set((M @ radix).tolist())
    new = M
    while len(new):
        codes = []
        for tab in tabs:
            for L, R in ((new, M), (M, new)):
                code = 0
                for c in range(m):
                    code = code + radix[c] * tab[c][L[:, c][:, None], R[:, c][None, :]]
                codes.append(code.ravel())
        fresh = [c for c in np.unique(np.concatenate(codes)).tolist() if c not in seen]
        seen.update(fresh)
        f = np.array(fresh, dtype=np.int64)
        new = np.stack([(f // radix[c]) % sizes[c] for c in range(m)], axis=1).reshape(-1, m)
        M = np.concatenate([M, new])
    return frozenset(map(tuple, M.tolist()))


def generate_subpower(algebras: Sequence[FiniteAlgebra], tuples) -> frozenset:
    """Subuniverse of the product generated by the given tuples."""
    members = list(dict.fromkeys(tuple(int(v) for v in t) for t in tuples))
    present = set(members)
    if not algebras or not members:
        return frozenset(present)
    sig = algebras[0].signature
    tabs = [[B.array(name) for B in algebras] for name, _ in sig]
    arities = [k for _, k in sig]
    if all(k == 2 for k in arities):
        return _close_binary(tabs, [B.size for B in algebras], members)
    i = 0
    while i < len(members):
        x = members[i]
        for tab, k in zip(tabs, arities):
            if k == 0:
                continue
            for rest in itertools.product(members[:i + 1], repeat=k - 1):
                for pos in range(k):
                    args = list(rest[:pos]) + [x] + list(rest[pos:])
                    z = tuple(int(tab[c][tuple(a[c] for a in args)]) for c in range(len(algebras)))
                    if z not in present:
                        present.add(z)
                        members.append(z)
        i += 1
    return frozenset(present)


def is_closed_relation(algebras: Sequence[FiniteAlgebra], rel) -> bool:
    rel = set(rel)
    return not rel or generate_subpower(algebras, rel) == frozenset(rel)


def validate(I: CspInstance, allow_subpower: bool = False) -> list:
    """Problems with the instance, as readable strings (empty when well formed)."""
    issues = []
    for i, (A, d) in enumerate(zip(I.algebras, I.domains)):
        if not d:
            issues.append(f"domain {i} is empty")
        elif any(not (0 <= x < A.size) for x in d):
            issues.append(f"domain {i} leaves the universe")
        elif not is_subuniverse(A, d):
            issues.append(f"domain {i} is not a subuniverse")
    if issues:
        return issues
    for j, c in enumerate(I.constraints):
        for p, v in enumerate(c.scope):
            vals = {r[p] for r in c.relation}
            if not vals <= set(I.domains[v]):
                issues.append(f"constraint {j} uses values outside domain {v}")
            elif not allow_subpower and vals != set(I.domains[v]):
                issues.append(f"constraint {j} is not subdirect at variable {v}")
        if c.scope and c.relation and not is_closed_relation([I.algebras[v] for v in c.scope], c.relation):
            issues.append(f"constraint {j} is not closed under the operations")
    return issues


def normalize(I: CspInstance) -> CspInstance:
    """Shrink domains to the values every constraint projection allows and
    drop relation tuples that leave the shrunken domains; the solution set is
    unchanged.  Domains may stop being subuniverses, and may become empty."""
    domains = [set(d) for d in I.domains]
    constraints = list(I.constraints)
    changed = True
    while changed:
        changed = False
        constraints = [Constraint(c.scope, tuple(r for r in c.relation
                                                 if all(x in domains[v] for x, v in zip(r, c.scope))))
                       for c in constraints]
        for c in constraints:
            for p, v in enumerate(c.scope):
                vals = {r[p] for r in c.relation}
                if not domains[v] <= vals:
                    domains[v] &= vals
                    changed = True
    return CspInstance(I.algebras, tuple(tuple(sorted(d)) for d in domains), tuple(constraints), name=I.name)


# ------------------------------------------------------------------ transforms

def partial_instance(I: CspInstance, k: int) -> CspInstance:
    """Restriction to variables 0..k-1; scopes keep their in-range positions."""
    if not (0 <= k <= I.n):
        raise InstanceError("k out of range")
    out = []
    for c in I.constraints:
        keep = [p for p, v in enumerate(c.scope) if v < k]
        if keep:
            out.append(c.project(keep))
    return CspInstance(I.algebras[:k], I.domains[:k], tuple(out), name=I.name)


def quotient_maps(I: CspInstance, thetas: Sequence) -> list:
    """Per variable, a dict from domain element to its block index.

    thetas[i] is a congruence of the domain algebra of variable i (positions
    in the sorted domain)."""
    maps = []
    for i, d in enumerate(I.domains):
        bid = tuple(getattr(thetas[i], "block_id", thetas[i]))
        if len(bid) != len(d):
            raise InstanceError(f"congruence {i} has the wrong size")
        q = quotient_map(bid)
        maps.append({e: q[p] for p, e in enumerate(d)})
    return maps


def quotient_instance(I: CspInstance, thetas: Sequence) -> CspInstance:
    from .algebra import quotient_algebra
    maps = quotient_maps(I, thetas)
    algebras = tuple(quotient_algebra(I.domain_algebra(i), thetas[i]) for i in range(I.n))
    domains = tuple(tuple(range(B.size)) for B in algebras)
    cons = tuple(Constraint.make(c.scope, {tuple(maps[v][x] for x, v in zip(r, c.scope)) for r in c.relation})
                 for c in I.constraints)
    return CspInstance(algebras, domains, cons, name=I.name)


def quotient_assignment(I: CspInstance, thetas: Sequence, f: Sequence[int]) -> tuple:
    maps = quotient_maps(I, thetas)
    return tuple(maps[i][x] for i, x in enumerate(f))


def block_instance(I: CspInstance, blocks: Sequence) -> CspInstance:
    """Domains cut down to the chosen blocks, relations to their product."""
    blocks = tuple(tuple(sorted(set(b))) for b in blocks)
    if len(blocks) != I.n:
        raise InstanceError("one block per variable is required")
    for i, b in enumerate(blocks):
        if not set(b) <= set(I.domains[i]):
            raise InstanceError(f"block {i} is not inside its domain")
    sets = [set(b) for b in blocks]
    cons = tuple(Constraint(c.scope, tuple(r for r in c.relation if all(x in sets[v] for x, v in zip(r, c.scope))))
                 for c in I.constraints)
    return CspInstance(I.algebras, blocks, cons, name=I.name)


def instance_size_bound(n: int, p: int, q: int, r: int, J: int, m: int) -> int:
    """n*p*q^(r+1) + J*m*q^(m+1) + J*m*n."""
    return n * p * q ** (r + 1) + J * m * q ** (m + 1) + J * m * n


# ------------------------------------------------------------------------ json

def _resolve_algebra(ref, base: Path | None):
    from .catalog import fixture_path
    if isinstance(ref, dict):
        return algebra_from_json(ref)
    if not isinstance(ref, str):
        raise InstanceError("algebra must be a file reference or an inline description")
    candidates = []
    if base is not None:
        candidates += [base / ref, base / f"{ref}.json"]
    candidates.append(fixture_path(ref))
    for p in candidates:
        if p.is_file():
            with open(p) as fh:
                return algebra_from_json(json.load(fh), name=p.stem)
    raise InstanceError(f"cannot find algebra {ref!r}")


def instance_from_json(obj: dict, base: Path | None = None) -> CspInstance:
    try:
        n = int(obj["variables"])
        if "algebras" in obj:
            algs = tuple(_resolve_algebra(a, base) for a in obj["algebras"])
            if len(algs) != n:
                raise InstanceError("need one algebra per variable")
        else:
            A = _resolve_algebra(obj["algebra"], base)
            algs = (A,) * n
        doms = obj.get("domains")
        if doms is None:
            doms = [list(range(B.size)) for B in algs]
        if len(doms) != n:
            raise InstanceError("need one domain per variable")
        domains = tuple(tuple(sorted(set(int(x) for x in d))) for d in doms)
        cons = tuple(Constraint.make(c["scope"], c["tuples"]) for c in obj.get("constraints", []))
    except (KeyError, TypeError, ValueError, AlgebraError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"malformed instance: {exc}") from exc
    return CspInstance(algs, domains, cons)


def load_instance(path) -> CspInstance:
    path = Path(path)
    with open(path) as fh:
        obj = json.load(fh)
    return instance_from_json(obj, base=path.parent)


def instance_to_json(I: CspInstance) -> dict:
    from .algebra import algebra_to_json
    out = {"variables": I.n}
    if I.parent is not None:
        out["algebra"] = algebra_to_json(I.parent)
    else:
        out["algebras"] = [algebra_to_json(B) for B in I.algebras]
    out["domains"] = [list(d) for d in I.domains]
    out["constraints"] = [{"scope": list(c.scope), "tuples": [list(r) for r in c.relation]}
                          for c in I.constraints]
    return out


# ------------------------------------------------------------ random instances

def _surjective_seed(rng: random.Random, domains) -> set:
    """max(|D|) tuples whose c-th coordinates run over all of domains[c]."""
    L = max(len(d) for d in domains)
    cols = []
    for d in domains:
        col = list(d) + [rng.choice(d) for _ in range(L - len(d))]
        rng.shuffle(col)
        cols.append(col)
    return set(zip(*cols))


def random_subdirect_relation(rng: random.Random, algebras, domains, tries: int = 8) -> frozenset:
    """A small subdirect subuniverse of the product of the given domains.

    Each try closes a seed that already covers every coordinate; the smallest
    closure wins, which keeps tight (often bijective) relations common.
    """
    best = None
    for _ in range(tries):
        rel = generate_subpower(algebras, _surjective_seed(rng, domains))
        if best is None or len(rel) < len(best):
            best = rel
    return best


def random_instance(rng: random.Random, choices: Sequence, n: int, J: int, max_arity: int = 3) -> CspInstance:
    """Random subdirect instance; each variable draws an (algebra, domain) pair from choices."""
    picks = [rng.choice(choices) for _ in range(n)]
    algebras = tuple(a for a, _ in picks)
    domains = tuple(tuple(sorted(d)) for _, d in picks)
    cons = []
    for _ in range(J):
        m = rng.randint(min(2, n), min(max_arity, n))
        scope = rng.sample(range(n), m)
        rel = random_subdirect_relation(rng, [algebras[v] for v in scope], [domains[v] for v in scope])
        cons.append(Constraint.make(scope, rel))
    return CspInstance(algebras, domains, tuple(cons))
