"""Solving strategies for CSP instances and a dispatcher choosing among them."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import FiniteAlgebra, find_isomorphism, is_semilattice
from .catalog import example_a, fixture, s2, simple4, sq3
from .congruence import Congruence
from .csp import (BRUTE_FORCE_LIMIT, Constraint, CspInstance, block_instance, brute_force_solve,
                  is_solution, partial_instance, quotient_instance)
from .errors import InstanceError, NonAffineRelationError, WitnessError
from .algebra import term_table
from .structure import EcStructure, affine_representation, detect_ec

STRATEGIES = ("oracle", "backtracking", "affine", "sq3s2", "quotient-block", "simple4", "least-block", "auto")


@dataclass
class SolveOutcome:
    decision: str
    witness: tuple | None
    strategy: str
    trace: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.decision == "sat"

    def to_json(self) -> dict:
        out = {"status": self.decision, "assignment": list(self.witness) if self.witness is not None else None,
               "strategy": self.strategy}
        return out


def _sat(I, witness, strategy, trace=None):
    witness = tuple(int(x) for x in witness)
    if not is_solution(I, witness):
        raise WitnessError(f"{strategy}: constructed assignment {witness} is not a solution")
    return SolveOutcome("sat", witness, strategy, trace or {})


def _unsat(strategy, trace=None):
    return SolveOutcome("unsat", None, strategy, trace or {})


# ---------------------------------------------------------------- backtracking

def _propagate(domains, constraints, var_cons):
    """Generalised arc consistency; returns False on a wipe-out."""
    queue = list(range(len(constraints)))
    queued = set(queue)
    while queue:
        j = queue.pop()
        queued.discard(j)
        scope, rel = constraints[j]
        live = [r for r in rel if all(x in domains[v] for x, v in zip(r, scope))]
        constraints[j] = (scope, live)
        for p, v in enumerate(scope):
            support = {r[p] for r in live}
            if not domains[v] <= support:
                domains[v] = domains[v] & support
                if not domains[v]:
                    return False
                for k in var_cons[v]:
                    if k != j and k not in queued:
                        queued.add(k)
                        queue.append(k)
    return True


def backtracking_solve(I: CspInstance, seed: dict | None = None) -> SolveOutcome:
    """Arc consistency plus depth-first search, smallest domain first.

    ``seed`` pins some variables to given values before the search.
    """
    domains = [set(d) for d in I.domains]
    for v, x in (seed or {}).items():
        domains[v] = domains[v] & {x}
    constraints = [(c.scope, list(c.relation)) for c in I.constraints]
    var_cons = [[] for _ in range(I.n)]
    for j, c in enumerate(I.constraints):
        for v in c.scope:
            var_cons[v].append(j)
    nodes = 0

    def search(doms, cons):
        nonlocal nodes
        nodes += 1
        if not _propagate(doms, cons, var_cons):
            return None
        open_vars = [v for v in range(I.n) if len(doms[v]) > 1]
        if not open_vars:
            return tuple(min(d) for d in doms)
        v = min(open_vars, key=lambda u: (len(doms[u]), u))
        for x in sorted(doms[v]):
            d2 = [set(d) for d in doms]
            d2[v] = {x}
            found = search(d2, list(cons))
            if found is not None:
                return found
        return None

    if any(not d for d in domains) or any(not c.relation for c in I.constraints):
        return _unsat("backtracking", {"nodes": 0})
    sol = search(domains, constraints)
    if sol is None:
        return _unsat("backtracking", {"nodes": nodes})
    return _sat(I, sol, "backtracking", {"nodes": nodes})


def oracle_solve(I: CspInstance) -> SolveOutcome:
    sol = brute_force_solve(I)
    return _unsat("oracle") if sol is None else _sat(I, sol, "oracle")


# ---------------------------------------------------------------------- affine

def _rref_mod(M: np.ndarray, p: int):
    M = M.copy() % p
    rows, cols = M.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if not len(nz):
            continue
        k = r + nz[0]
        M[[r, k]] = M[[k, r]]
        M[r] = (M[r] * pow(int(M[r, c]), -1, p)) % p
        for i in range(rows):
            if i != r and M[i, c]:
                M[i] = (M[i] - M[i, c] * M[r]) % p
        pivots.append(c)
        r += 1
    return M[:r], pivots


def _nullspace_mod(B: np.ndarray, m: int, p: int) -> list:
    """Basis of {w : B w = 0} in GF(p)^m."""
    if B.shape[0] == 0:
        return [np.eye(m, dtype=np.int64)[i] for i in range(m)]
    R, piv = _rref_mod(B, p)
    free = [c for c in range(m) if c not in piv]
    out = []
    for f in free:
        w = np.zeros(m, dtype=np.int64)
        w[f] = 1
        for row, c in zip(R, piv):
            w[c] = (-row[f]) % p
        out.append(w)
    return out


def affine_solve(I: CspInstance) -> SolveOutcome:
    """Gaussian elimination over Z_p when every domain is a one-element or
    prime-order abelian CIB and every relation is a coset of a subspace."""
    p = None
    maps = []
    for i in range(I.n):
        D = I.domain_algebra(i)
        if D.size == 1:
            maps.append(None)
            continue
        rep = affine_representation(D) if D.is_cib() else None
        if rep is None or rep.prime == 1:
            raise InstanceError(f"domain {i} has no affine representation")
        if p is not None and rep.prime != p:
            raise InstanceError("domains of different prime order")
        p = rep.prime
        maps.append({e: rep.element_map[k] for k, e in enumerate(I.domains[i])})
    p = p or 2
    inverse = [None if m is None else {v: e for e, v in m.items()} for m in maps]

    def coord(i, x):
        return 0 if maps[i] is None else maps[i][x]

    rows, rhs = [], []
    for i in range(I.n):
        if maps[i] is None:
            pass
    for c in I.constraints:
        if not c.relation:
            return _unsat("affine", {"empty_relation": list(c.scope)})
        m = len(c.scope)
        if m == 0:
            continue
        pts = np.array([[coord(v, x) for x, v in zip(r, c.scope)] for r in c.relation], dtype=np.int64)
        origin = pts[0]
        diffs = (pts[1:] - origin) % p
        basis, _ = _rref_mod(diffs, p) if len(diffs) else (np.zeros((0, m), dtype=np.int64), [])
        if len(c.relation) != p ** len(basis):
            raise NonAffineRelationError(f"relation on scope {c.scope} is not a coset")
        for w in _nullspace_mod(basis, m, p):
            row = np.zeros(I.n, dtype=np.int64)
            for k, v in enumerate(c.scope):
                row[v] = (row[v] + w[k]) % p
            rows.append(row)
            rhs.append(int(w @ origin % p))
    if rows:
        aug = np.column_stack([np.array(rows), np.array(rhs)])
        R, piv = _rref_mod(aug, p)
        if I.n in piv:
            return _unsat("affine", {"prime": p, "equations": len(rows)})
        x = np.zeros(I.n, dtype=np.int64)
        for row, c in zip(R, piv):
            x[c] = row[I.n]
    else:
        x = np.zeros(I.n, dtype=np.int64)
    witness = [I.domains[i][0] if maps[i] is None else inverse[i][int(x[i])] for i in range(I.n)]
    return _sat(I, witness, "affine", {"prime": p, "equations": len(rows)})


# ------------------------------------------------------------ helper plumbing

def _sub_instance(I: CspInstance, variables) -> tuple:
    """Instance on the given variables, constraints projected onto them."""
    variables = list(variables)
    pos = {v: k for k, v in enumerate(variables)}
    cons = []
    for c in I.constraints:
        keep = [q for q, v in enumerate(c.scope) if v in pos]
        if keep:
            proj = c.project(keep)
            cons.append(Constraint(tuple(pos[v] for v in proj.scope), proj.relation))
    return CspInstance(tuple(I.algebras[v] for v in variables), tuple(I.domains[v] for v in variables),
                       tuple(cons)), pos


def _bottom(D: FiniteAlgebra):
    """The element b with b*x = b for all x, if any."""
    for b in range(D.size):
        if all(D.mul(b, x) == b for x in range(D.size)):
            return b
    return None


@lru_cache(maxsize=256)
def _iso(A: FiniteAlgebra, B: FiniteAlgebra):
    if A.size != B.size or A.signature != B.signature or A.size > 8:
        return None
    return find_isomorphism(A, B)


def _relabel_instance(I: CspInstance, h, target: FiniteAlgebra) -> CspInstance:
    doms = tuple(tuple(sorted(h[x] for x in d)) for d in I.domains)
    cons = tuple(Constraint.make(c.scope, [[h[x] for x in r] for r in c.relation]) for c in I.constraints)
    return CspInstance((target,) * I.n, doms, cons, name=I.name)


def _onto_fixture(I: CspInstance, target: FiniteAlgebra):
    """Copy of I over target (when its parent is isomorphic) and the way back."""
    A = I.parent
    if A is None:
        raise InstanceError("instance must have a single parent algebra")
    if A == target:
        return I, None
    h = _iso(A, target)
    if h is None:
        raise InstanceError(f"parent algebra is not isomorphic to {target.name}")
    back = {b: a for a, b in enumerate(h)}
    return _relabel_instance(I, h, target), back


def _pull_back(out: SolveOutcome, I: CspInstance, back) -> SolveOutcome:
    if back is None or out.witness is None:
        return out
    return _sat(I, [back[x] for x in out.witness], out.strategy, out.trace)


def _require_subdirect(I: CspInstance):
    for c in I.constraints:
        for q, v in enumerate(c.scope):
            if {r[q] for r in c.relation} != set(I.domains[v]):
                raise InstanceError("strategy requires subdirect constraints")


# --------------------------------------------------------------------- sq3s2

def sq3s2_solve(I: CspInstance) -> SolveOutcome:
    """Domains copies of the affine 3-element quasigroup, the 2-element
    semilattice, or single points.  Solve the affine part, put the bottom
    element on every semilattice variable, and check the result."""
    _require_subdirect(I)
    S3, S2 = sq3(), s2()
    alpha, rest = [], {}
    for i in range(I.n):
        D = I.domain_algebra(i)
        if D.size == 1:
            rest[i] = I.domains[i][0]
        elif D.size == 3 and _iso(D, S3) is not None:
            alpha.append(i)
        elif D.size == 2 and _iso(D, S2) is not None:
            rest[i] = I.domains[i][_bottom(D)]
        else:
            raise InstanceError(f"domain {i} is neither affine of order 3 nor a 2-element semilattice")
    trace = {"alpha": alpha}
    if any(not c.relation for c in I.constraints):
        return _unsat("sq3s2", trace)
    if alpha:
        J, pos = _sub_instance(I, alpha)
        inner = affine_solve(J)
        if not inner.sat:
            return _unsat("sq3s2", trace)
        g = [None] * I.n
        for v in alpha:
            g[v] = inner.witness[pos[v]]
    else:
        g = [None] * I.n
    for v, x in rest.items():
        g[v] = x
    if not is_solution(I, g):
        raise WitnessError("sq3s2: extension by semilattice bottoms failed")
    return _sat(I, g, "sq3s2", trace)


# ------------------------------------------------------------- quotient-block

THETA_EXAMPLE_A = Congruence((0, 0, 2, 3))


def quotient_block_solve(I: CspInstance) -> SolveOutcome:
    """Instances over subalgebras of the 4-element algebra with congruence
    |01|2|3| and affine quotient.  Solve the quotient instance, then read off a
    solution choosing 0 inside the block {0,1}."""
    J, back = _onto_fixture(I, example_a())
    full = tuple(range(4))
    thetas = [THETA_EXAMPLE_A if d == full else Congruence.zero(len(d)) for d in J.domains]
    Q = quotient_instance(J, thetas)
    inner = sq3s2_solve(Q)
    trace = {"quotient": inner.decision}
    if not inner.sat:
        return _pull_back(_unsat("quotient-block", trace), I, back)
    g = []
    for i, d in enumerate(J.domains):
        blocks = thetas[i].blocks()
        chosen = [d[p] for p in blocks[inner.witness[i]]]
        g.append(0 if 0 in chosen and 1 in chosen or set(d) == {0, 1} else chosen[0])
    trace["quotient_solution"] = inner.witness
    out = _sat(J, g, "quotient-block", trace)
    return _pull_back(out, I, back)


# ------------------------------------------------------------------- simple4

def _which_simple4(A: FiniteAlgebra):
    for i in range(7):
        if _iso(A, simple4(i)) is not None:
            return i
    return None


def simple4_solve(I: CspInstance) -> SolveOutcome:
    """Instances over subalgebras of one of the seven simple 4-element CIBs.

    The decision comes from the affine instance on the variables whose domain
    is the 3-element affine subalgebra {1,2,3}; the witness from a search
    seeded with that affine solution."""
    A = I.parent
    k = _which_simple4(A) if A is not None else None
    if k is None:
        raise InstanceError("parent algebra is not one of the seven simple 4-element CIBs")
    J, back = _onto_fixture(I, simple4(k))
    _require_subdirect(J)
    alpha = [i for i, d in enumerate(J.domains) if d == (1, 2, 3)]
    trace = {"algebra": f"a{k}", "alpha": alpha}
    if any(not c.relation for c in J.constraints):
        return _pull_back(_unsat("simple4", trace), I, back)
    seed = {}
    if alpha:
        sub, pos = _sub_instance(J, alpha)
        inner = affine_solve(sub)
        if not inner.sat:
            return _pull_back(_unsat("simple4", trace), I, back)
        seed = {v: inner.witness[pos[v]] for v in alpha}
    found = backtracking_solve(J, seed)
    if not found.sat:
        trace["seed_failed"] = True
        found = backtracking_solve(J)
        if not found.sat:
            raise WitnessError("simple4: affine part solvable but the instance has no solution")
    out = _sat(J, found.witness, "simple4", trace)
    return _pull_back(out, I, back)


# --------------------------------------------------------------- least-block

def _chains(I: CspInstance, ec: EcStructure) -> list:
    """For each variable, the nonempty traces of the ordered classes on its domain."""
    out = []
    for d in I.domains:
        ds = set(d)
        out.append([tuple(x for x in blk if x in ds) for blk in ec.class_order if ds & set(blk)])
    return out


def _check_almost_meet(A: FiniteAlgebra, ec: EcStructure, chains):
    tab = term_table(A, ec.t, 2)
    for chain in chains:
        for j, Cj in enumerate(chain):
            for Ck in chain[j:]:
                for u in Cj:
                    for v in Ck:
                        if tab[u, v] != u:
                            raise WitnessError("least-block: derived term is not a left meet on the chain")


def _block_solve(I: CspInstance) -> SolveOutcome:
    try:
        return affine_solve(I)
    except InstanceError:
        return backtracking_solve(I)


def least_block_solve(I: CspInstance, ec: EcStructure | None = None) -> SolveOutcome:
    """Fix variables one at a time to the least class admitting a partial solution."""
    A = I.parent
    if A is None:
        raise InstanceError("least-block needs a single parent algebra")
    ec = ec or detect_ec(A)
    if ec is None:
        raise InstanceError("parent algebra has no edge-by-chain structure")
    chains = _chains(I, ec)
    _check_almost_meet(A, ec, chains)
    chosen = []
    js = []
    last = None
    for k in range(I.n):
        Ik = partial_instance(I, k + 1)
        for j, C in enumerate(chains[k]):
            res = _block_solve(block_instance(Ik, chosen + [C]))
            if res.sat:
                chosen.append(C)
                js.append(j)
                last = res
                break
        else:
            return _unsat("least-block", {"j": js, "failed_at": k})
    if I.n == 0:
        return SolveOutcome("sat" if all(c.relation for c in I.constraints) else "unsat",
                            () if all(c.relation for c in I.constraints) else None, "least-block", {"j": []})
    return _sat(I, last.witness, "least-block", {"j": js})


# ----------------------------------------------------------------- dispatcher

def classify_instance(I: CspInstance) -> str:
    """Strategy the dispatcher would pick for I."""
    A = I.parent
    if A is not None:
        if is_semilattice(A):
            return "backtracking"
        if A.is_cib() and affine_representation(A) is not None:
            return "affine"
        if _iso(A, example_a()) is not None:
            return "quotient-block"
        if A.is_cib() and _which_simple4(A) is not None:
            return "simple4"
        if A.is_cib() and detect_ec(A) is not None:
            return "least-block"
    if all(I.domain_algebra(i).size == 1 or _iso(I.domain_algebra(i), sq3()) is not None
           or _iso(I.domain_algebra(i), s2()) is not None for i in range(I.n)):
        return "sq3s2"
    return "fallback"


def dispatch_solve(I: CspInstance, strategy: str = "auto") -> SolveOutcome:
    if strategy not in STRATEGIES:
        raise InstanceError(f"unknown strategy {strategy!r}")
    if strategy == "auto":
        strategy = classify_instance(I)
        if strategy == "fallback":
            total = 1
            for d in I.domains:
                total *= len(d)
            out = oracle_solve(I) if total <= BRUTE_FORCE_LIMIT else backtracking_solve(I)
            out.strategy = "fallback"
            return out
    if strategy == "least-block":
        out = least_block_solve(I)
        if not out.sat:
            # the block recursion can miss solutions whose top-ranked classes
            # are forced; confirm a negative answer before reporting it
            check = backtracking_solve(I)
            if check.sat:
                out = _sat(I, check.witness, "least-block", dict(out.trace, confirmed_by_search=False))
        return out
    solver = {
        "oracle": oracle_solve,
        "backtracking": backtracking_solve,
        "affine": affine_solve,
        "sq3s2": sq3s2_solve,
        "quotient-block": quotient_block_solve,
        "simple4": simple4_solve,
        "least-block": least_block_solve,
    }[strategy]
    return solver(I)
