import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from algcsp.algebra import (FiniteAlgebra, Var, all_subuniverses, mul, parse_term, product_algebra,
                            restrict_algebra, star_compose, term_table, encode)
from algcsp.catalog import cibs_up_to, ec_algebras, example_a, fixture, s2, simple4, sq3, trivial
from algcsp.congruence import Congruence, congruence_lattice, is_simple
from algcsp.errors import AlgebraError, SizeBoundError
from algcsp.structure import (AbsorptionCertificate, affine_representation, check_absorbing, detect_ec,
                              find_sinks, has_ctb_cib, has_edge_term_cib, is_abelian, iterate_second,
                              mass_report, minimal_absorbing, verify_absorbing)

SMALL = cibs_up_to(4)
x, y = Var(0), Var(1)


def _sets(subs):
    return [tuple(S.elements) for S in subs]


# ------------------------------------------------------------- abelianness

def _term_condition_fails(A, cap=400):
    """Independent check: look for a binary polynomial p with
    p(a,c) = p(a,d) but p(b,c) != p(b,d)."""
    n = A.size
    xs = tuple(a for a in range(n) for _ in range(n))
    ys = tuple(b for _ in range(n) for b in range(n))
    pool = [xs, ys] + [(e,) * (n * n) for e in range(n)]
    seen = set(pool)
    i = 0
    while i < len(pool) and len(pool) < cap:
        f = pool[i]
        for g in pool[:i + 1]:
            h = tuple(A.rows[f[k]][g[k]] for k in range(n * n))
            if h in seen:
                continue
            for a, b, c, d in itertools.product(range(n), repeat=4):
                if h[a * n + c] == h[a * n + d] and h[b * n + c] != h[b * n + d]:
                    return True
            seen.add(h)
            pool.append(h)
        i += 1
    return False


def test_abelian_examples():
    assert is_abelian(sq3()) and is_abelian(trivial())
    assert not is_abelian(s2())
    with pytest.raises(SizeBoundError):
        is_abelian(product_algebra([sq3(), sq3()]))


def test_abelian_agrees_with_term_condition_search():
    for A in SMALL:
        assert is_abelian(A) == (not _term_condition_fails(A)), A.rows


def test_no_even_order_abelian_cib():
    by_size = {n: [A for A in SMALL if A.size == n and is_abelian(A)] for n in (1, 2, 3, 4)}
    assert len(by_size[1]) == 1 and by_size[2] == [] and by_size[4] == []
    assert len(by_size[3]) == 1 and by_size[3][0].rows == sq3().rows or \
        affine_representation(by_size[3][0]) is not None


# ---------------------------------------------------------------------- sinks

def test_sink_examples():
    assert find_sinks(fixture("mass3"), (0, 1)) == [1]
    assert find_sinks(sq3(), (2,)) == [2]
    assert find_sinks(sq3(), (0, 1, 2)) == []
    assert find_sinks(s2(), (0, 1)) == [0]


def test_absorbing_sets_contain_reachable_sinks():
    sample = [A for A in SMALL if A.size == 3] + [simple4(i) for i in range(7)] + list(ec_algebras())
    for A in sample + [fixture("mass3"), example_a()]:
        subs = all_subuniverses(A)
        for B in subs:
            if not check_absorbing(A, B.elements).absorbing:
                continue
            for C in subs:
                if set(B.elements) & set(C.elements):
                    for s in find_sinks(A, C.elements):
                        assert s in B.elements


# ----------------------------------------------------------------- absorption

def test_absorption_examples():
    M = fixture("mass3")
    four_t = mul(mul(Var(0), Var(1)), mul(Var(2), Var(3)))
    assert verify_absorbing(M, (1,), four_t, 4)
    assert check_absorbing(M, (1,)).absorbing
    a0_t = mul(mul(x, mul(x, y)), mul(y, mul(x, y)))
    assert verify_absorbing(simple4(0), (0,), a0_t, 2)
    c = check_absorbing(sq3(), (0,))
    assert c.kind == "abelian-parent"
    with pytest.raises(AlgebraError):
        check_absorbing(sq3(), (0, 1))


def test_same_binary_term_fails_on_a1_a2():
    a0_t = mul(mul(x, mul(x, y)), mul(y, mul(x, y)))
    assert not verify_absorbing(simple4(1), (0,), a0_t, 2)
    assert not verify_absorbing(simple4(2), (0,), a0_t, 2)
    for i in (1, 2):
        cert = check_absorbing(simple4(i), (0,))
        assert cert.absorbing and verify_absorbing(simple4(i), (0,), cert.term, cert.arity)


def test_certificates_are_sound():
    sample = [A for A in SMALL if A.size <= 3] + [simple4(i) for i in range(7)]
    for A in sample + [fixture("mass3"), example_a()]:
        for B in all_subuniverses(A):
            cert = check_absorbing(A, B.elements)
            if cert.kind == "exhausted-bound":
                assert (cert.arity, cert.depth) == (4, 3)
            elif cert.absorbing:
                assert verify_absorbing(A, B.elements, cert.term, cert.arity)
            elif cert.kind == "sink-escape":
                assert cert.sink not in B.elements
                assert cert.sink in find_sinks(A, cert.subuniverse)
            else:
                C = cert.subuniverse
                assert is_abelian(restrict_algebra(A, C))
                assert set(B.elements) & set(C) and not set(C) <= set(B.elements)


def test_abelian_parents_are_absorption_free():
    for A in [sq3(), trivial()]:
        for B in all_subuniverses(A):
            if len(B) < A.size:
                assert not check_absorbing(A, B.elements).absorbing


def test_star_composites_keep_absorbing():
    A = simple4(0)
    f = check_absorbing(A, (0,)).term
    for g in [mul(x, y), mul(y, mul(x, y)), mul(mul(x, y), x)]:
        assert verify_absorbing(A, (0,), star_compose(f, g, 2, 2), 4)
        assert verify_absorbing(A, (0,), star_compose(g, f, 2, 2), 4)


def test_certificate_json():
    assert check_absorbing(simple4(0), (0,)).to_json()["kind"] == "absorbing"
    j = AbsorptionCertificate("exhausted-bound", arity=4, depth=3).to_json()
    assert j == {"kind": "exhausted-bound", "arity": 4, "depth": 3}


# --------------------------------------------------------------------- masses

def test_mass_examples():
    assert _sets(minimal_absorbing(fixture("mass3"))) == [(1,), (2,)]
    assert _sets(minimal_absorbing(s2())) == [(0,)]
    for i in range(3):
        assert _sets(minimal_absorbing(simple4(i))) == [(0,)]
    for i in range(3, 7):
        assert _sets(minimal_absorbing(simple4(i))) == [(0, 1, 2, 3)]
    assert not mass_report(simple4(0)).exhausted


def test_masses_of_products_are_products_of_masses():
    algs = [sq3(), s2(), fixture("mass3")]
    for A, B in itertools.product(algs, repeat=2):
        P = product_algebra([A, B])
        expect = sorted(tuple(sorted(encode((a, b), P.radices) for a in MA.elements for b in MB.elements))
                        for MA in minimal_absorbing(A) for MB in minimal_absorbing(B))
        assert sorted(_sets(minimal_absorbing(P))) == expect


# ---------------------------------------------------------------- blockers

def test_cube_term_blockers():
    D, S = has_ctb_cib(simple4(0))
    assert D.elements == (0,) and S.elements == (0, 1)
    assert has_ctb_cib(sq3()) is None
    D, S = has_ctb_cib(s2())
    assert (D.elements, S.elements) == ((0,), (0, 1))
    assert has_edge_term_cib(sq3()) and not has_edge_term_cib(s2())
    assert not has_edge_term_cib(example_a())
    with pytest.raises(AlgebraError):
        has_ctb_cib(fixture("majority"))


# ------------------------------------------------------------------ EC form

def test_iterate_second():
    s = mul(y, mul(x, y))
    t = iterate_second(example_a(), s)
    tab = term_table(example_a(), t, 2)
    assert (tab[np.arange(4)[:, None], tab] == tab).all()
    assert str(iterate_second(s2(), mul(x, y))) == "mul(x0,x1)"
    q = term_table(sq3(), iterate_second(sq3(), mul(y, mul(x, y))), 2)
    assert (q == np.arange(3)[:, None]).all()


def test_detect_ec_examples():
    ec = detect_ec(s2())
    assert ec.class_order == ((0,), (1,))
    ec = detect_ec(sq3())
    assert ec.theta.is_one()
    assert detect_ec(example_a()) is None


def test_ec_catalog():
    strict = ec_algebras()
    assert len(strict) == 8 and len(ec_algebras(skip_affine_quotient=True)) == 7
    for A in strict:
        ec = detect_ec(A)
        assert ec is not None
        base = iterate_second(A, mul(y, mul(x, y)))
        assert (term_table(A, ec.t, 2) == term_table(A, base, 2)).all()
        sizes = sorted(len(b) for b in ec.class_order)
        assert sizes == [1, 3]
        tab = term_table(A, ec.t, 2)
        assert all(tab[a, tab[a, b]] == tab[a, b] for a in range(4) for b in range(4))


@given(st.sampled_from(SMALL))
def test_iterate_second_output_satisfies_identity(A):
    tab = term_table(A, iterate_second(A, mul(y, mul(x, y))), 2)
    n = A.size
    assert (tab[np.arange(n)[:, None], tab] == tab).all()


# ---------------------------------------------------------------- affine form

def test_affine_representation():
    rep = affine_representation(sq3())
    assert (rep.prime, rep.coeff, rep.offset) == (3, 2, 0)
    assert affine_representation(s2()) is None
    assert affine_representation(trivial()).prime == 1


def test_affine_representation_matches_table():
    for A in SMALL:
        rep = affine_representation(A)
        if rep is None or rep.prime == 1:
            continue
        p, r, b, m = rep.prime, rep.coeff, rep.offset, rep.element_map
        assert 2 * r % p == 1 and b == 0
        assert all(m[A.mul(u, v)] == (r * m[u] + r * m[v] + b) % p for u in range(A.size) for v in range(A.size))
