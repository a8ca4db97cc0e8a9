"""
Small commutative idempotent binars
===================================

Enumerate every CIB on at most four elements, then look at which are simple
and which are abelian.
"""

from collections import Counter

from algcsp import cibs_up_to, congruence_lattice, is_abelian, is_simple, sq3
from algcsp.algebra import canonical_form

catalog = cibs_up_to(4)
print("classes per size:", dict(Counter(A.size for A in catalog)))

# simplicity: the congruence lattice has exactly two elements
simple = Counter(A.size for A in catalog if is_simple(A))
print("simple classes per size:", dict(simple))

# only the one-element algebra and the 3-element affine quasigroup are abelian
abelian = [A for A in catalog if is_abelian(A)]
print("abelian:", [A.rows for A in abelian])
print("3-element abelian one is the affine quasigroup:",
      canonical_form(abelian[-1]) == canonical_form(sq3()))

# the lattice of a nonsimple algebra, blocks named by their least element
A = catalog[5]
print(A.rows, [str(t) for t in congruence_lattice(A).elements])
