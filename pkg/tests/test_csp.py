import itertools
import json
import random

import pytest
from hypothesis import given, strategies as st

from algcsp.algebra import all_subuniverses, subuniverse_closure
from algcsp.catalog import example_a, fixture, fixture_path, s2, simple4, sq3
from algcsp.congruence import Congruence, congruence_lattice
from algcsp.csp import (Constraint, CspInstance, all_solutions, block_instance, brute_force_solve,
                        generate_subpower, instance_from_json, instance_size_bound, instance_to_json,
                        is_closed_relation, is_solution, load_instance, normalize, partial_instance,
                        quotient_assignment, quotient_instance, random_instance, random_subdirect_relation,
                        satisfies, validate)
from algcsp.errors import InstanceError

M3 = fixture("mass3")
R_DIAG = [(0, 0), (1, 1), (2, 2)]
S_SWAP = [(0, 0), (1, 2), (2, 1)]


def _choices(A):
    return [(A, S.elements) for S in all_subuniverses(A) if len(S) > 1]


def _masspt():
    return CspInstance.over(M3, [range(3)] * 2, [Constraint.make((0, 1), R_DIAG), Constraint.make((0, 1), S_SWAP)])


# ------------------------------------------------------------ basics

def test_constraint_checks():
    with pytest.raises(InstanceError):
        Constraint.make((0, 0), [(1, 1)])
    with pytest.raises(InstanceError):
        Constraint((0, 1), ((1,),))
    c = Constraint.make((1, 0), [(2, 1), (0, 0), (2, 1)])
    assert c.relation == ((0, 0), (2, 1))
    assert c.project([1]).scope == (0,) and c.project([1]).relation == ((0,), (1,))


def test_satisfies():
    R = Constraint.make((0, 1), R_DIAG)
    assert satisfies((0, 0), R)
    assert not satisfies((1, 2), R)
    assert satisfies((), Constraint((), ((),)))


def test_oracle_examples():
    assert brute_force_solve(_masspt()) == (0, 0)
    assert brute_force_solve(load_instance(fixture_path("xor-instance"))) is None
    free = CspInstance((s2(), sq3()), ((0, 1), (0, 1, 2)), ())
    assert len(all_solutions(free)) == 6


def test_unknown_variable_rejected():
    with pytest.raises(InstanceError):
        CspInstance.over(M3, [range(3)], [Constraint.make((0, 1), R_DIAG)])


# -------------------------------------------------------------- validation

def test_validate_and_normalize():
    assert validate(_masspt()) == []
    I = CspInstance.over(sq3(), [range(3)] * 2, [Constraint.make((0, 1), [(0, 0), (1, 1)])])
    issues = validate(I)
    assert any("not subdirect" in s for s in issues)
    assert any("not closed" in s for s in issues)
    J = CspInstance.over(sq3(), [range(3)] * 2, [Constraint.make((0, 1), [(0, 0), (1, 1), (2, 2)]),
                                                 Constraint.make((0, 1), [(1, 0), (2, 1), (0, 2)])])
    assert validate(J) == []
    K = CspInstance.over(sq3(), [range(3)] * 2, [Constraint.make((0,), [(0,)]),
                                                 Constraint.make((0, 1), [(1, 1), (2, 2)])])
    N = normalize(K)
    assert N.domains[0] == ()
    assert brute_force_solve(K) is None


def test_validate_domain_problems():
    I = CspInstance.over(sq3(), [(0, 1)], [])
    assert validate(I) == ["domain 0 is not a subuniverse"]
    assert validate(CspInstance.over(sq3(), [()], [])) == ["domain 0 is empty"]


def test_allow_subpower_relaxes_subdirectness():
    R = generate_subpower([sq3(), sq3()], [(0, 0)])
    I = CspInstance.over(sq3(), [range(3)] * 2, [Constraint.make((0, 1), R)])
    assert validate(I) and validate(I, allow_subpower=True) == []


# -------------------------------------------------------------- subpowers

def test_generate_subpower_matches_naive_closure(rng):
    algs = [sq3(), example_a(), simple4(2)]
    for _ in range(40):
        A, B = rng.choice(algs), rng.choice(algs)
        seed = {(rng.randrange(A.size), rng.randrange(B.size)) for _ in range(rng.randint(1, 3))}
        cur = set(seed)
        while True:
            new = {(A.mul(a, c), B.mul(b, d)) for (a, b) in cur for (c, d) in cur} - cur
            if not new:
                break
            cur |= new
        assert generate_subpower([A, B], seed) == frozenset(cur)
        assert is_closed_relation([A, B], cur)


def test_random_relations_are_subdirect_and_closed(rng):
    ch = _choices(example_a())
    for _ in range(30):
        picks = [rng.choice(ch) for _ in range(3)]
        algs = [a for a, _ in picks]
        doms = [d for _, d in picks]
        R = random_subdirect_relation(rng, algs, doms)
        assert is_closed_relation(algs, R)
        for i, d in enumerate(doms):
            assert {r[i] for r in R} == set(d)


# -------------------------------------------------------------- transforms

def test_partial_instance_example():
    rel = [(a, b, c) for a in range(3) for b in range(3) for c in range(3) if (a + b + c) % 3 == 0]
    I = CspInstance.over(sq3(), [range(3)] * 8, [Constraint.make((2, 4, 7), rel)])
    P = partial_instance(I, 5)
    (c,) = P.constraints
    assert c.scope == (2, 4) and set(c.relation) == {(a, b) for a in range(3) for b in range(3)}
    assert partial_instance(I, 8) == I
    assert partial_instance(I, 0).constraints == ()


def test_quotient_instance_examples():
    A = example_a()
    I = CspInstance.over(A, [range(4), (1, 2, 3), (0, 1)], [])
    theta = [Congruence((0, 0, 2, 3)), Congruence.zero(3), Congruence.one(2)]
    Q = quotient_instance(I, theta)
    sizes = [B.size for B in Q.algebras]
    assert sizes == [3, 3, 1]
    zero = quotient_instance(_masspt(), [Congruence.zero(3)] * 2)
    assert brute_force_solve(zero) == (0, 0)
    one = quotient_instance(_masspt(), [Congruence.one(3)] * 2)
    assert all(c.relation == ((0, 0),) for c in one.constraints)


def test_block_instance():
    I = _masspt()
    B = block_instance(I, [(1, 2), (0,)])
    assert all(c.relation == () for c in B.constraints)
    assert brute_force_solve(B) is None
    with pytest.raises(InstanceError):
        block_instance(I, [(0,)])


def test_size_bound():
    assert instance_size_bound(4, 1, 4, 2, 2, 2) == 528
    assert instance_size_bound(1, 1, 1, 2, 1, 1) == 3
    assert instance_size_bound(3, 2, 2, 1, 0, 5) == 3 * 2 * 2 ** 2


# ------------------------------------------------------------------- json

def test_json_round_trip(rng):
    for _ in range(10):
        I = random_instance(rng, _choices(example_a()), rng.randint(1, 5), rng.randint(0, 4))
        assert instance_from_json(json.loads(json.dumps(instance_to_json(I)))) == I


def test_malformed_json():
    with pytest.raises(InstanceError):
        instance_from_json({"variables": 2, "algebra": "sq3", "constraints": [{"scope": [0]}]})
    with pytest.raises(InstanceError):
        instance_from_json({"variables": 1, "algebra": "no-such-algebra"})
    with pytest.raises(InstanceError):
        instance_from_json({"variables": 2, "algebra": "sq3", "domains": [[0, 1, 2]]})


# ------------------------------------------------- properties over a corpus

@given(st.integers(0, 2 ** 32))
def test_transform_coherence(seed):
    r = random.Random(seed)
    A = example_a()
    I = random_instance(r, _choices(A), r.randint(1, 6), r.randint(0, 6))
    sols = all_solutions(I)
    assert (brute_force_solve(I) is None) == (not sols)
    lattices = [congruence_lattice(I.domain_algebra(i)).elements for i in range(I.n)]
    thetas = [r.choice(L) for L in lattices]
    Q = quotient_instance(I, thetas)
    for f in sols[:20]:
        assert is_solution(Q, quotient_assignment(I, thetas, f))
        k = r.randint(0, I.n)
        assert is_solution(partial_instance(I, k), f[:k])
    blocks = [r.choice([tuple(d[p] for p in b) for b in t.blocks()]) for d, t in zip(I.domains, thetas)]
    for g in all_solutions(block_instance(I, blocks)):
        assert is_solution(I, g)
    assert set(all_solutions(normalize(I))) == set(sols)
