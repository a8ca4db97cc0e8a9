"""Reproducible checks of the classification, absorption and counterexample results.

Every suite returns a VerificationReport whose cases compare an expected
value against a freshly computed one by plain equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .algebra import (FiniteAlgebra, all_subuniverses, canonical_form, decode, encode, eval_term,
                      find_isomorphism, is_subuniverse, mul, parse_term, product_algebra, quotient_algebra,
                      restrict_algebra, term_table, Var)
from .catalog import cibs_up_to, ec_algebras, example_a, fixture, fixture_path, s2, simple4, sq3
from .congruence import (Congruence, congruence_lattice, is_simple, malcev_product_witness,
                         projection_kernel, tuples_of)
from .csp import brute_force_solve, load_instance
from .structure import affine_representation, check_absorbing, is_abelian, mass_report, verify_absorbing
from .algebra import Subuniverse, is_semilattice

# Reference tables, written out by hand.
SQ3_TABLE = [[0, 2, 1], [2, 1, 0], [1, 0, 2]]
T1_TABLE = [[0, 0, 1], [0, 1, 2], [1, 2, 2]]
T2_TABLE = [[0, 0, 2], [0, 1, 1], [2, 1, 2]]
EXAMPLE_A_TABLE = [[0, 0, 3, 2], [0, 1, 3, 2], [3, 3, 2, 1], [2, 2, 1, 3]]
T_TABLE = [[0, 0, 0, 0], [0, 1, 1, 1], [2, 2, 2, 2], [3, 3, 3, 3]]
SIMPLE4_PARAMS = [(0, 1), (1, 1), (1, 2), (0, 3), (1, 3), (2, 2), (2, 3)]
SIMPLE4_SUBALGEBRAS = [
    [(0, 1), (0, 2), (1, 2, 3)],
    [(0, 1), (1, 2, 3)],
    [(0, 1), (1, 2, 3)],
    [(0, 1), (0, 2), (0, 3), (1, 2, 3)],
    [(0, 1), (0, 3), (1, 2, 3)],
    [(0, 1), (0, 2), (0, 3), (1, 2, 3)],
    [(0, 1), (0, 2), (0, 3), (1, 2, 3)],
]
SIMPLE4_MASSES = [[(0,)]] * 3 + [[(0, 1, 2, 3)]] * 4


@dataclass
class Case:
    description: str
    expected: object
    actual: object

    @property
    def passed(self) -> bool:
        return self.expected == self.actual

    def to_json(self) -> dict:
        return {"description": self.description, "expected": _plain(self.expected),
                "actual": _plain(self.actual), "pass": self.passed}


def _plain(v):
    if isinstance(v, (set, frozenset)):
        return sorted((_plain(x) for x in v), key=repr)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return v


@dataclass
class VerificationReport:
    suite: str
    cases: list = field(default_factory=list)
    bounds: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def check(self, description: str, expected, actual):
        self.cases.append(Case(description, expected, actual))

    @property
    def passed(self) -> int:
        return sum(c.passed for c in self.cases)

    @property
    def failed(self) -> int:
        return len(self.cases) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def summary(self) -> str:
        return f"{self.suite}: {self.passed}/{len(self.cases)} cases pass"

    def to_json(self) -> dict:
        return {"suite": self.suite, "ok": self.ok, "passed": self.passed, "failed": self.failed,
                "bounds": _plain(self.bounds), "notes": self.notes,
                "cases": [c.to_json() for c in self.cases]}


def _proper_nontrivial(A):
    return [S.elements for S in all_subuniverses(A) if 1 < len(S) < A.size]


def _mass_sets(A):
    rep = mass_report(A)
    return [B.elements for B in rep.masses], len(rep.exhausted)


# --------------------------------------------------------------- classification

def simple_with_affine_subalgebra(n: int = 4) -> list:
    """Simple n-element CIBs of the catalog having an affine 3-element subalgebra.

    For n = 4 these are the simple algebras that nothing short of the
    rectangularity argument handles."""
    out = []
    for A in cibs_up_to(n):
        if A.size != n or not is_simple(A):
            continue
        if any(len(S) == 3 and S.elements != tuple(range(A.size))
               and affine_representation(restrict_algebra(A, S.elements)) is not None
               for S in all_subuniverses(A)):
            out.append(A)
    return out


def _form_tables():
    first, second = [], []
    for a, b in itertools.product(range(4), repeat=2):
        first.append([[0, 0, a, b], [0, 1, 3, 2], [a, 3, 2, 1], [b, 2, 1, 3]])
        second.append([[0, 1, a, b], [1, 1, 3, 2], [a, 3, 2, 1], [b, 2, 1, 3]])
    return first, second


def classify_cibs_report(max_size: int = 4) -> VerificationReport:
    if not 1 <= max_size <= 4:
        raise ValueError("classification is reproduced for sizes 1 to 4")
    rep = VerificationReport("classify-cibs", bounds={"max_size": max_size})
    catalog = cibs_up_to(max_size)
    by_size = {n: [A for A in catalog if A.size == n] for n in range(1, max_size + 1)}
    rep.notes.append({n: len(v) for n, v in by_size.items()})

    if max_size >= 2:
        two = by_size[2]
        rep.check("number of 2-element CIBs", 1, len(two))
        rep.check("the 2-element CIB is the semilattice", True, is_semilattice(two[0]))

    if max_size >= 3:
        refs = [FiniteAlgebra.binar(t) for t in (SQ3_TABLE, T1_TABLE, T2_TABLE)]
        rep.check("bundled 3-element tables match the reference tables",
                  [SQ3_TABLE, T1_TABLE, T2_TABLE], [fixture(n).rows for n in ("sq3", "t1", "t2")])
        simples = [A for A in by_size[3] if is_simple(A)]
        rep.check("simple 3-element CIBs up to isomorphism",
                  sorted(canonical_form(B) for B in refs), sorted(canonical_form(A) for A in simples))
        with_slt = [A for A in simples if any(len(S) == 2 for S in all_subuniverses(A))]
        rep.check("simple 3-element CIBs with a 2-element subalgebra", 2, len(with_slt))
        rep.check("simple 3-element CIB without proper subalgebras is the affine one",
                  [canonical_form(refs[0])],
                  [canonical_form(A) for A in simples if not _proper_nontrivial(A)])
        nonsimple = [A for A in by_size[3] if A.size == 3 and not is_simple(A)]
        slsl = [A for A in nonsimple if malcev_product_witness(A, is_semilattice, is_semilattice) is not None]
        rep.check("nonsimple 3-element CIBs that are semilattice-by-semilattice", len(nonsimple), len(slsl))

    if max_size >= 4:
        first, second = _form_tables()
        fixtures = [simple4(i) for i in range(7)]
        rep.check("bundled 4-element simple tables follow the first form",
                  [first[4 * a + b] for a, b in SIMPLE4_PARAMS], [A.rows for A in fixtures])
        simple_first = [FiniteAlgebra.binar(t) for t in first if is_simple(FiniteAlgebra.binar(t))]
        simple_second = [FiniteAlgebra.binar(t) for t in second if is_simple(FiniteAlgebra.binar(t))]
        classes = {canonical_form(A) for A in simple_first + simple_second}
        rep.check("nonisomorphic simple algebras among the 32 candidate tables", 7, len(classes))
        rep.check("every simple table of the second form has a first-form twin", True,
                  {canonical_form(A) for A in simple_second} <= {canonical_form(A) for A in simple_first})
        rep.check("candidate classes are exactly the seven bundled algebras",
                  sorted(classes), sorted(canonical_form(A) for A in fixtures))
        rest = simple_with_affine_subalgebra(4)
        rep.notes.append(f"{sum(1 for A in by_size[4] if is_simple(A))} simple 4-element CIBs in all; "
                         f"{len(rest)} of them have an affine 3-element subalgebra")
        rep.check("simple 4-element CIBs with an affine 3-element subalgebra are the seven",
                  sorted(canonical_form(A) for A in fixtures), sorted(canonical_form(A) for A in rest))
        rep.check("each of the seven has a 2-element semilattice subalgebra", [True] * 7,
                  [any(len(S) == 2 for S in all_subuniverses(A)) for A in fixtures])
        rep.check("proper nontrivial subalgebras of the seven",
                  SIMPLE4_SUBALGEBRAS, [_proper_nontrivial(A) for A in fixtures])

        strict = ec_algebras()
        covered = ec_algebras(skip_affine_quotient=True)
        extra = len(strict) - len(covered)
        rep.notes.append(f"{len(strict)} four-element CIBs have a two-block congruence with semilattice "
                         f"quotient and an affine 3-element block; {extra} of them also "
                         f"{'has' if extra == 1 else 'have'} an affine 3-element quotient and "
                         f"{'belongs' if extra == 1 else 'belong'} to that earlier case")
        rep.check("nonsimple 4-element CIBs with semilattice quotient over an affine block "
                  "(not already affine-quotient)", 7, len(covered))
        rep.check("all of them are nonsimple", [True] * len(covered), [not is_simple(A) for A in covered])

        masses, exhausted = {}, 0
        for name, A in [("s2", s2()), ("sq3", sq3())] + [(f"a{i}", A) for i, A in enumerate(fixtures)]:
            m, e = _mass_sets(A)
            masses[name] = m
            exhausted += e
        rep.check("masses of the semilattice, the affine algebra and the seven",
                  {"s2": [(0,)], "sq3": [(0, 1, 2)], **{f"a{i}": SIMPLE4_MASSES[i] for i in range(7)}}, masses)
        rep.check("undecided absorption verdicts during mass computation", 0, exhausted)
        rep.check("the subalgebra {1,2,3} is its own mass in every one of the seven",
                  [[(0, 1, 2)]] * 7, [_mass_sets(restrict_algebra(A, (1, 2, 3)))[0] for A in fixtures])

    abel = [A for A in catalog if A.size >= 2 and is_abelian(A)]
    rep.check("abelian CIBs of size 2 or more, up to isomorphism",
              [canonical_form(sq3())] if max_size >= 3 else [], [canonical_form(A) for A in abel])
    rep.check("abelian CIBs of even size", 0, sum(1 for A in abel if A.size % 2 == 0))
    rep.check("one-element CIBs are abelian", True, all(is_abelian(A) for A in by_size[1]))
    return rep


# ---------------------------------------------------- product-relation suites

SIMPLE_CIBS = ("s2", "t1", "t2", "sq3") + tuple(f"a{i}" for i in range(7))


def declared_families(max_product: int = 16) -> list:
    """Tuples of simple CIB names, at most one affine, product size <= max_product."""
    algs = {n: fixture(n) for n in SIMPLE_CIBS}
    out = []
    for k in (2, 3):
        for combo in itertools.combinations_with_replacement(SIMPLE_CIBS, k):
            if combo.count("sq3") > 1:
                continue
            size = 1
            for n in combo:
                size *= algs[n].size
            if size <= max_product:
                out.append(combo)
    return out


def _subdirect_relations(algs):
    """Subdirect subuniverses of the product, with kernel data."""
    P = product_algebra(algs)
    for R in all_subuniverses(P, bound=P.size):
        rows = tuples_of(R)
        if all({r[i] for r in rows} == set(range(B.size)) for i, B in enumerate(algs)):
            yield P, R, rows


def _kernels(R, k):
    return [projection_kernel(R, (i,)) for i in range(k)]


def verify_rectangularity(families=None, max_product: int = 16) -> VerificationReport:
    """Whenever a relation meets a product of masses it contains all of it."""
    families = families if families is not None else declared_families(max_product)
    rep = VerificationReport("rectangularity", bounds={"max_product": max_product, "families": len(families)})
    masses = {}
    checked = excluded = violations = 0
    for fam in families:
        algs = [fixture(n) for n in fam]
        for n, A in zip(fam, algs):
            if n not in masses:
                masses[n] = [B.elements for B in mass_report(A).masses]
        for P, R, rows in _subdirect_relations(algs):
            ker = _kernels(R, len(fam))
            if len(set(ker)) < len(ker):
                excluded += 1
                continue
            rset = set(rows)
            for choice in itertools.product(*[masses[n] for n in fam]):
                box = set(itertools.product(*choice))
                if box & rset:
                    checked += 1
                    if not box <= rset:
                        violations += 1
                        rep.notes.append(f"violation in {fam}: {sorted(rows)} vs {choice}")
    rep.bounds.update(checked=checked, excluded_equal_kernels=excluded)
    rep.check("relation/mass-product pairs violating rectangularity", 0, violations)
    rep.check("at least one nonvacuous configuration examined", True, checked > 0)
    return rep


def verify_linking(families=None, max_product: int = 16) -> VerificationReport:
    """Some coordinate kernel joins with the kernel of the remaining coordinates to the top."""
    families = families if families is not None else declared_families(max_product)
    rep = VerificationReport("linking", bounds={"max_product": max_product, "families": len(families)})
    checked = excluded = unlinked = 0
    for fam in families:
        algs = [fixture(n) for n in fam]
        k = len(fam)
        for P, R, rows in _subdirect_relations(algs):
            ker = _kernels(R, k)
            if len(set(ker)) < k:
                excluded += 1
                continue
            checked += 1
            linked = any(ker[i].join(projection_kernel(R, [j for j in range(k) if j != i])).is_one()
                         for i in range(k))
            if not linked:
                unlinked += 1
                rep.notes.append(f"unlinked relation in {fam}: {sorted(rows)}")
    rep.bounds.update(checked=checked, excluded_equal_kernels=excluded)
    rep.check("admissible relations with no linked coordinate", 0, unlinked)
    rep.check("at least one admissible relation examined", True, checked > 0)
    return rep


def fry_pan_shapes(max_product: int = 16) -> list:
    return [(a, b) for a in range(3) for b in range(3) if a + b >= 1 and 3 ** a * 2 ** b <= max_product]


def verify_fry_pan(shapes=None, max_product: int = 16) -> VerificationReport:
    """Relations over affine^a x semilattice^b contain (affine part) x (all bottoms)."""
    shapes = shapes if shapes is not None else fry_pan_shapes(max_product)
    rep = VerificationReport("fry-pan", bounds={"max_product": max_product, "shapes": shapes})
    checked = failures = 0
    for a, b in shapes:
        algs = [sq3()] * a + [s2()] * b
        for P, R, rows in _subdirect_relations(algs):
            checked += 1
            rset = set(rows)
            want = {r[:a] + (0,) * b for r in rows}
            if not want <= rset:
                failures += 1
                rep.notes.append(f"shape {(a, b)}: {sorted(rows)}")
    rep.bounds["checked"] = checked
    rep.check("subdirect relations missing their bottom-extended affine part", 0, failures)
    return rep


# ------------------------------------------------------------ counterexamples

def reproduce_mass_product_example() -> VerificationReport:
    rep = VerificationReport("mass-products")
    A = fixture("mass3")
    rep.check("proper nonempty subuniverses",
              [(0,), (1,), (2,), (0, 1), (0, 2)], [S.elements for S in all_subuniverses(A) if len(S) < 3])
    m, e = _mass_sets(A)
    rep.check("masses of the factor", [(1,), (2,)], m)
    four = parse_term("mul(mul(x0,x1),mul(x2,x3))")
    rep.check("(x y)(z w) absorbs {1} and {2}", [True, True],
              [verify_absorbing(A, (1,), four, 4), verify_absorbing(A, (2,), four, 4)])
    rep.check("{0} is not absorbing", False, check_absorbing(A, (0,)).absorbing)
    P = product_algebra([A, A])
    pm, pe = _mass_sets(P)
    rep.check("masses of the square", [(1, 1), (1, 2), (2, 1), (2, 2)],
              [decode(B[0], (3, 3)) for B in pm if len(B) == 1] if all(len(B) == 1 for B in pm) else pm)
    rep.check("undecided absorption verdicts", 0, e + pe)
    R = {(0, 0), (1, 1), (2, 2)}
    S = {(0, 0), (1, 2), (2, 1)}
    for name, rel in (("R", R), ("S", S)):
        rep.check(f"{name} is a subdirect subuniverse of the square", True,
                  is_subuniverse(P, [encode(r, (3, 3)) for r in rel]))
    rep.check("R and S meet in (0,0) only", {(0, 0)}, R & S)
    pairs = [(i, j) for i in (1, 2) for j in (1, 2)]
    rep.check("R meets the mass product B_ij iff i = j",
              {p: p[0] == p[1] for p in pairs}, {p: p in R for p in pairs})
    rep.check("S meets the mass product B_ij iff i != j",
              {p: p[0] != p[1] for p in pairs}, {p: p in S for p in pairs})
    I = load_instance(fixture_path("masspt-instance"))
    rep.check("two-constraint instance has the solution (0,0)", (0, 0), brute_force_solve(I))
    return rep


def reproduce_majority_example() -> VerificationReport:
    rep = VerificationReport("majority")
    A = fixture("majority")
    R = {(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)}
    S = {(0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1)}
    P = product_algebra([A, A, A])
    for name, rel in (("R", R), ("S", S)):
        rep.check(f"{name} is closed under the majority operation", True,
                  is_subuniverse(P, [encode(r, (2, 2, 2)) for r in rel]))
        rep.check(f"{name} is subdirect", [{0, 1}] * 3, [{r[i] for r in rel} for i in range(3)])
    m, e = _mass_sets(A)
    rep.check("masses of the 2-element majority algebra", [(0,), (1,)], m)
    rep.check("undecided absorption verdicts", 0, e)
    products = [set(itertools.product(*c)) for c in itertools.product(m, repeat=3)]
    rep.check("R contains every mass product it meets", True, all(p <= R for p in products if p & R))
    rep.check("S contains every mass product it meets", True, all(p <= S for p in products if p & S))
    rep.check("mass products meeting both R and S", 0, sum(1 for p in products if p & R and p & S))
    rep.check("R and S are disjoint", set(), R & S)
    return rep


def _xor_label(t):
    return t[0] + 2 * t[1] + 4 * t[2]


def reproduce_xor_example() -> VerificationReport:
    rep = VerificationReport("xor")
    A = fixture("xor")
    P = product_algebra([A, A, A])
    R = {t for t in itertools.product((0, 1), repeat=3) if sum(t) % 2 == 0}
    S = {t for t in itertools.product((0, 1), repeat=3) if sum(t) % 2 == 1}
    rep.check("labels of R", {0, 3, 5, 6}, {_xor_label(t) for t in R})
    rep.check("labels of S", {1, 2, 4, 7}, {_xor_label(t) for t in S})
    codes = sorted(encode(t, (2, 2, 2)) for t in R)
    rep.check("R is a subuniverse of the cube", True, is_subuniverse(P, codes))
    rep.check("S is a subuniverse of the cube", True, is_subuniverse(P, [encode(t, (2, 2, 2)) for t in S]))
    Rsub = Subuniverse(P, tuple(codes))
    labels = [_xor_label(decode(c, (2, 2, 2))) for c in codes]

    def partition(theta):
        return sorted(sorted(labels[i] for i in blk) for blk in theta.blocks())

    ker = [projection_kernel(Rsub, (i,)) for i in range(3)]
    rep.check("projection kernels as partitions of R",
              [[[0, 6], [3, 5]], [[0, 5], [3, 6]], [[0, 3], [5, 6]]], [partition(k) for k in ker])
    rep.check("kernels pairwise meet to 0 and join to 1", [(True, True)] * 3,
              [(ker[i].meet(ker[j]).is_zero(), ker[i].join(ker[j]).is_one())
               for i, j in itertools.combinations(range(3), 2)])
    RA = restrict_algebra(P, codes)
    lat = congruence_lattice(RA)
    rep.check("size of the congruence lattice of R", 5, len(lat))
    middle = sorted(partition(t) for t in lat.elements if not t.is_zero() and not t.is_one())
    rep.check("nontrivial congruences of R are the three kernels",
              sorted(partition(k) for k in ker), middle)
    full = {(a, b) for a in (0, 1) for b in (0, 1)}
    rep.check("every 2-coordinate projection of R is A x A", [full] * 3,
              [{(t[i], t[j]) for t in R} for i, j in itertools.combinations(range(3), 2)])
    rep.check("every 2-coordinate projection of S is A x A", [full] * 3,
              [{(t[i], t[j]) for t in S} for i, j in itertools.combinations(range(3), 2)])
    rep.check("R and S are disjoint", set(), R & S)
    rep.check("neither singleton absorbs", [False, False],
              [check_absorbing(A, (0,)).absorbing, check_absorbing(A, (1,)).absorbing])
    I = load_instance(fixture_path("xor-instance"))
    rep.check("instance with constraints R and S has no solution", None, brute_force_solve(I))
    return rep


def verify_example_identities() -> VerificationReport:
    rep = VerificationReport("example-identities")
    A = example_a()
    rep.check("bundled table", EXAMPLE_A_TABLE, A.rows)
    x, y = Var(0), Var(1)
    t = mul(x, mul(y, mul(x, y)))
    tab = term_table(A, t, 2)
    rep.check("table of x(y(xy))", T_TABLE, tab.tolist())
    ttx = mul(x, mul(mul(x, mul(y, mul(x, y))), mul(x, mul(x, mul(y, mul(x, y))))))
    rep.check("t(x, t(x, y)) = t(x, y) on all pairs", True,
              all(tab[a, int(tab[a, b])] == tab[a, b] for a in range(4) for b in range(4)))
    rep.check("the identity as a single composed term", tab.tolist(), term_table(A, ttx, 2).tolist())
    theta = Congruence((0, 0, 2, 3))
    Q = quotient_algebra(A, theta)
    rep.check("the quotient by |01|2|3| is the affine 3-element algebra", True,
              find_isomorphism(Q, sq3()) is not None)
    rep.check("t(x, y) = x on all 9 pairs of blocks", [[a] * 3 for a in range(3)], term_table(Q, t, 2).tolist())
    rep.check("t(1,2)", 1, eval_term(A, t, (1, 2)))
    rep.check("row 0 of t", [0, 0, 0, 0], tab[0].tolist())
    rep.check("congruences of the algebra", ["|0|1|2|3|", "|0,1|2|3|", "|0,1,2,3|"],
              [str(c) for c in congruence_lattice(A).elements])
    rep.check("proper nontrivial subuniverses", [(0, 1), (1, 2, 3)], _proper_nontrivial(A))
    return rep


SUITES = {
    "classify-cibs": classify_cibs_report,
    "rectangularity": verify_rectangularity,
    "linking": verify_linking,
    "fry-pan": verify_fry_pan,
    "mass-products": reproduce_mass_product_example,
    "majority": reproduce_majority_example,
    "xor": reproduce_xor_example,
    "example-identities": verify_example_identities,
}


def run_suites(names=None) -> list:
    names = list(SUITES) if not names or names == ["all"] else names
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    return [SUITES[n]() for n in names]
