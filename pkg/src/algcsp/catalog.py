"""Named algebras shipped as JSON fixtures, plus small enumerated catalogs.

Set ``ALGCSP_FIXTURES`` to a directory to load fixtures from there instead of
the copies bundled with the package.
"""

from __future__ import annotations

import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .algebra import FiniteAlgebra, enumerate_cibs, load_algebra

SIMPLE4 = tuple(f"a{i}" for i in range(7))
ALGEBRA_FIXTURES = ("sq3", "s2", "t1", "t2", "example-a", "mass3", "majority", "xor") + SIMPLE4


def fixture_dir() -> Path:
    override = os.environ.get("ALGCSP_FIXTURES")
    if override:
        return Path(override)
    return Path(str(resources.files("algcsp") / "fixtures"))


def fixture_path(name: str) -> Path:
    """Resolve a fixture name (with or without .json) or an existing path."""
    p = Path(name)
    if p.suffix == ".json" and p.exists():
        return p
    stem = name.removesuffix(".json")
    return fixture_dir() / f"{stem}.json"


@lru_cache(maxsize=None)
def _load(path: str) -> FiniteAlgebra:
    return load_algebra(path)


def fixture(name: str) -> FiniteAlgebra:
    A = _load(str(fixture_path(name)))
    return FiniteAlgebra(A.size, A.ops, name=name.removesuffix(".json"))


def sq3() -> FiniteAlgebra:
    return fixture("sq3")


def s2() -> FiniteAlgebra:
    return fixture("s2")


def example_a() -> FiniteAlgebra:
    return fixture("example-a")


def simple4(i: int) -> FiniteAlgebra:
    return fixture(f"a{i}")


def trivial() -> FiniteAlgebra:
    return FiniteAlgebra.binar([[0]], name="trivial")


@lru_cache(maxsize=None)
def cibs_up_to(n: int = 4) -> tuple:
    """Every CIB of size 1..n, one per isomorphism class."""
    out = []
    for k in range(1, n + 1):
        for i, A in enumerate(enumerate_cibs(k)):
            out.append(FiniteAlgebra(A.size, A.ops, name=f"cib{k}.{i}"))
    return tuple(out)


@lru_cache(maxsize=None)
def ec_algebras(skip_affine_quotient: bool = False) -> tuple:
    """The 4-element CIBs with a two-block congruence, quotient the 2-element
    semilattice, and one block a copy of the 3-element affine quasigroup.

    With ``skip_affine_quotient`` drop those that also map onto the 3-element
    affine quasigroup; exactly one such algebra exists.
    """
    from .algebra import is_isomorphic, quotient_algebra, restrict_algebra
    from .congruence import congruence_lattice

    S3 = sq3()
    if skip_affine_quotient:
        return tuple(A for A in ec_algebras() if not any(
            t.num_blocks() == 3 and is_isomorphic(quotient_algebra(A, t), S3)
            for t in congruence_lattice(A).elements))
    found = []
    for A in enumerate_cibs(4):
        for theta in congruence_lattice(A).elements:
            blocks = theta.blocks()
            if sorted(map(len, blocks)) != [1, 3]:
                continue
            big = max(blocks, key=len)
            if is_isomorphic(restrict_algebra(A, big), S3):
                found.append(A)
                break
    return tuple(FiniteAlgebra(A.size, A.ops, name=f"ec{i}") for i, A in enumerate(found))
