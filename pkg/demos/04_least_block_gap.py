"""
Where the least-class recursion goes wrong
==========================================

On one of the 4-element algebras with a semilattice quotient over an affine
block, fixing each variable to the least class admitting a partial solution
can commit to a class that no full solution uses.  Two variables suffice.
"""

from algcsp import Constraint, CspInstance, FiniteAlgebra, brute_force_solve, detect_ec
from algcsp.solvers import dispatch_solve, least_block_solve

A = FiniteAlgebra.binar([[0, 0, 3, 2], [0, 1, 2, 3], [3, 2, 2, 0], [2, 3, 0, 3]])
ec = detect_ec(A)
print("classes, least first:", ec.class_order, "term:", ec.t)

I = CspInstance.over(A, [range(4)] * 2, [
    Constraint.make((0, 1), [(a, a) for a in range(4)]),      # x0 = x1
    Constraint.make((0, 1), [(0, 3), (1, 1), (2, 0), (3, 2)]),  # a closed bijection
])

print("exhaustive search:", brute_force_solve(I))
out = least_block_solve(I)
print("least-class recursion:", out.decision, out.trace)
# the first variable alone is satisfiable in the lower class, so the recursion
# takes it, and then the pair has no solution inside that choice
print("dispatcher, which confirms negative answers:", dispatch_solve(I, "least-block").witness)
