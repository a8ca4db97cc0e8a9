import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from algcsp.algebra import (App, FiniteAlgebra, Var, algebra_from_json, algebra_to_json, all_subuniverses,
                            canonical_form, decode, encode, enumerate_cibs, eval_term, find_isomorphism,
                            is_isomorphic, is_semilattice, mul, parse_term, product_algebra,
                            quotient_algebra, relabel, restrict_algebra, star_compose, subuniverse_closure,
                            substitute, term_arity, term_table)
from algcsp.catalog import cibs_up_to, example_a, fixture, s2, simple4, sq3, trivial
from algcsp.congruence import Congruence
from algcsp.errors import AlgebraError, SizeBoundError

SMALL = cibs_up_to(4)


# ----------------------------------------------------------- construction

def test_table_length_and_range_are_checked():
    with pytest.raises(AlgebraError):
        FiniteAlgebra.binar([[0, 1], [1]])
    with pytest.raises(AlgebraError):
        FiniteAlgebra.binar([[0, 2], [2, 1]])


def test_flags(named):
    assert named["sq3"].is_cib() and named["sq3"].is_idempotent()
    assert named["majority"].is_idempotent() and not named["majority"].is_cib()
    assert not FiniteAlgebra.binar([[0, 0], [1, 1]]).is_cib()


def test_json_round_trip(named):
    for A in named.values():
        B = algebra_from_json(json.loads(json.dumps(algebra_to_json(A))))
        assert B == A


def test_malformed_json_rejected():
    with pytest.raises(AlgebraError):
        algebra_from_json({"size": 2})
    with pytest.raises(AlgebraError):
        algebra_from_json({"size": 2, "ops": [{"name": "m", "arity": 2, "table": [[0, "a"], [0, 1]]}]})


def test_fixture_tables_are_verbatim(named):
    assert named["sq3"].rows == [[0, 2, 1], [2, 1, 0], [1, 0, 2]]
    assert named["s2"].rows == [[0, 0], [0, 1]]
    assert named["t1"].rows == [[0, 0, 1], [0, 1, 2], [1, 2, 2]]
    assert named["t2"].rows == [[0, 0, 2], [0, 1, 1], [2, 1, 2]]
    assert named["example-a"].rows == [[0, 0, 3, 2], [0, 1, 3, 2], [3, 3, 2, 1], [2, 2, 1, 3]]
    assert named["mass3"].rows == [[0, 1, 2], [1, 1, 0], [2, 0, 2]]


# ------------------------------------------------------------------- terms

def test_eval_examples():
    assert eval_term(sq3(), mul(Var(0), Var(1)), (0, 1)) == 2
    assert eval_term(example_a(), Var(0), (3, 1)) == 3
    t = mul(Var(0), mul(Var(1), mul(Var(0), Var(1))))
    assert eval_term(example_a(), t, (1, 2)) == 1


def test_eval_errors():
    with pytest.raises(AlgebraError):
        eval_term(sq3(), App("nope", (Var(0), Var(1))), (0, 1))
    with pytest.raises(AlgebraError):
        eval_term(sq3(), App("mul", (Var(0),)), (0,))


def test_parse_and_print_round_trip():
    text = "mul(mul(x0,x1),mul(x2,x3))"
    t = parse_term(text)
    assert str(t) == text and term_arity(t) == 4


def test_star_compose_examples():
    p = star_compose(Var(0), Var(0), 1, 1)
    assert term_arity(p) == 1 and eval_term(sq3(), p, (2,)) == 2
    xy = mul(Var(0), Var(1))
    fg = star_compose(xy, xy)
    assert eval_term(sq3(), fg, (0, 1, 1, 2)) == 1
    f3 = App("maj", (Var(0), Var(1), Var(2)))
    assert term_arity(star_compose(xy, f3)) == 6


@given(st.integers(0, 10 ** 6))
def test_star_compose_matches_nested_evaluation(seed):
    import random
    r = random.Random(seed)
    A = r.choice(SMALL[1:])

    def rand_term(arity, depth):
        if depth == 0 or r.random() < 0.3:
            return Var(r.randrange(arity))
        return mul(rand_term(arity, depth - 1), rand_term(arity, depth - 1))

    l, m = r.randint(1, 3), r.randint(1, 3)
    f, g = rand_term(l, 3), rand_term(m, 3)
    env = [r.randrange(A.size) for _ in range(l * m)]
    inner = [eval_term(A, g, env[i * m:(i + 1) * m]) for i in range(l)]
    assert eval_term(A, star_compose(f, g, l, m), env) == eval_term(A, f, inner)


def test_term_table_is_vectorized_eval():
    A = example_a()
    t = mul(Var(1), mul(Var(0), Var(1)))
    tab = term_table(A, t, 2)
    assert tab.shape == (4, 4)
    assert all(tab[a, b] == eval_term(A, t, (a, b)) for a in range(4) for b in range(4))


def test_substitute():
    t = substitute(mul(Var(0), Var(1)), [Var(1), Var(0)])
    assert str(t) == "mul(x1,x0)"


# ------------------------------------------------------------ subuniverses

def test_closure_examples():
    assert subuniverse_closure(sq3(), {0, 1}).elements == (0, 1, 2)
    assert subuniverse_closure(example_a(), {1, 2}).elements == (1, 2, 3)
    assert subuniverse_closure(simple4(0), {2}).elements == (2,)
    with pytest.raises(AlgebraError):
        subuniverse_closure(sq3(), [])


@given(st.data())
def test_closure_is_a_closure_operator(data):
    A = data.draw(st.sampled_from(SMALL))
    S = data.draw(st.sets(st.integers(0, A.size - 1), min_size=1))
    T = S | data.draw(st.sets(st.integers(0, A.size - 1)))
    cS = set(subuniverse_closure(A, S).elements)
    assert S <= cS
    assert set(subuniverse_closure(A, cS).elements) == cS
    assert cS <= set(subuniverse_closure(A, T).elements)


def test_subuniverse_lists():
    m3 = [S.elements for S in all_subuniverses(fixture("mass3")) if len(S) < 3]
    assert m3 == [(0,), (1,), (2,), (0, 1), (0, 2)]
    a0 = [S.elements for S in all_subuniverses(simple4(0)) if 1 < len(S) < 4]
    assert a0 == [(0, 1), (0, 2), (1, 2, 3)]
    assert [S.elements for S in all_subuniverses(s2())] == [(0,), (1,), (0, 1)]
    with pytest.raises(SizeBoundError):
        all_subuniverses(product_algebra([sq3(), sq3()]))


def test_subuniverses_brute_force_oracle():
    for A in SMALL:
        closed = []
        for k in range(1, A.size + 1):
            for sub in itertools.combinations(range(A.size), k):
                s = set(sub)
                if all(A.mul(a, b) in s for a in s for b in s):
                    closed.append(sub)
        assert sorted(closed, key=lambda e: (len(e), e)) == [S.elements for S in all_subuniverses(A)]


# ----------------------------------------------------------------- products

def test_product_examples():
    P = product_algebra([s2(), s2()])
    assert decode(P.mul(encode((0, 1), (2, 2)), encode((1, 1), (2, 2))), (2, 2)) == (0, 1)
    assert product_algebra([sq3(), sq3()]).size == 9
    M = fixture("mass3")
    PP = product_algebra([M, M])
    b12 = encode((1, 2), (3, 3))
    assert subuniverse_closure(PP, [b12]).elements == (b12,)
    with pytest.raises(AlgebraError):
        product_algebra([sq3(), fixture("majority")])


@given(st.lists(st.integers(1, 5), min_size=1, max_size=4), st.data())
def test_encode_decode_inverse(radices, data):
    coords = tuple(data.draw(st.integers(0, r - 1)) for r in radices)
    v = encode(coords, radices)
    assert 0 <= v < int(np.prod(radices)) and decode(v, radices) == coords


# ------------------------------------------------------ quotients, restriction

def test_quotient_examples():
    A = example_a()
    Q = quotient_algebra(A, Congruence((0, 0, 2, 3)))
    assert is_isomorphic(Q, sq3())
    assert quotient_algebra(A, Congruence.one(4)).size == 1
    assert find_isomorphism(quotient_algebra(A, Congruence.zero(4)), A) == (0, 1, 2, 3)
    with pytest.raises(AlgebraError):
        quotient_algebra(A, Congruence((0, 1, 1, 3)))


def test_restrict_examples():
    assert is_isomorphic(restrict_algebra(example_a(), (1, 2, 3)), sq3())
    assert restrict_algebra(simple4(0), (0, 1)).rows == [[0, 0], [0, 1]]
    A = simple4(3)
    assert restrict_algebra(A, range(4)) == A
    with pytest.raises(AlgebraError):
        restrict_algebra(example_a(), (0, 2))


# -------------------------------------------------------------- isomorphism

def test_isomorphism_examples():
    assert find_isomorphism(sq3(), sq3()) == (0, 1, 2)
    h = find_isomorphism(restrict_algebra(example_a(), (1, 2, 3)), sq3())
    assert h is not None
    assert find_isomorphism(fixture("t1"), fixture("t2")) is None


def test_isomorphism_is_an_equivalence(catalog4, rng):
    algs = list(catalog4)
    for A in algs:
        p = list(range(A.size))
        rng.shuffle(p)
        B = relabel(A, p)
        C = relabel(B, list(reversed(range(A.size))))
        h = find_isomorphism(A, B)
        assert h is not None
        back = find_isomorphism(B, A)
        assert back is not None and all(back[h[a]] == a for a in range(A.size)) or is_isomorphic(B, A)
        assert is_isomorphic(A, C)


def test_relabel_carries_tables():
    A = example_a()
    h = (2, 0, 3, 1)
    B = relabel(A, h)
    assert all(B.mul(h[a], h[b]) == h[A.mul(a, b)] for a in range(4) for b in range(4))


# ---------------------------------------------------------------- enumeration

def _naive_cib_classes(n):
    """Independent enumeration: all tables, canonical form by brute force over permutations."""
    pairs = list(itertools.combinations(range(n), 2))
    perms = list(itertools.permutations(range(n)))
    seen = set()
    for vals in itertools.product(range(n), repeat=len(pairs)):
        T = [[a if a == b else 0 for b in range(n)] for a in range(n)]
        for (a, b), v in zip(pairs, vals):
            T[a][b] = T[b][a] = v
        best = None
        for p in perms:
            inv = [0] * n
            for i, q in enumerate(p):
                inv[q] = i
            flat = tuple(p[T[inv[x]][inv[y]]] for x in range(n) for y in range(n))
            best = flat if best is None or flat < best else best
        seen.add(best)
    return seen


@pytest.mark.parametrize("n,count", [(1, 1), (2, 1), (3, 7), (4, 192)])
def test_cib_counts_match_independent_enumeration(n, count):
    algs = enumerate_cibs(n)
    assert len(algs) == count
    assert {canonical_form(A) for A in algs} == _naive_cib_classes(n)


def test_enumerated_cibs_pairwise_nonisomorphic(catalog4):
    for A, B in itertools.combinations(catalog4, 2):
        if A.size == B.size:
            assert find_isomorphism(A, B) is None


@given(st.integers(2, 4), st.data())
def test_random_cib_matches_exactly_one_member(n, data):
    T = [[a if a == b else None for b in range(n)] for a in range(n)]
    for a, b in itertools.combinations(range(n), 2):
        T[a][b] = T[b][a] = data.draw(st.integers(0, n - 1))
    A = FiniteAlgebra.binar(T)
    hits = [B for B in enumerate_cibs(n) if is_isomorphic(A, B)]
    assert len(hits) == 1


def test_unique_two_element_cib_is_the_semilattice():
    (A,) = enumerate_cibs(2)
    assert is_isomorphic(A, s2())


def test_is_semilattice():
    assert is_semilattice(s2())
    assert not is_semilattice(sq3())
    assert not is_semilattice(fixture("t1"))
    assert not is_semilattice(fixture("majority"))
    assert is_semilattice(restrict_algebra(simple4(0), (0, 1)))
