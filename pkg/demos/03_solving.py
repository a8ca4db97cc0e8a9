"""
Solving instances
=================

Build random subdirect instances over the 4-element algebra with an affine
quotient, solve them with the quotient-then-block strategy and compare with
exhaustive search.
"""

import random

from algcsp import brute_force_solve, dispatch_solve, example_a, random_instance
from algcsp.algebra import all_subuniverses

A = example_a()
choices = [(A, S.elements) for S in all_subuniverses(A) if len(S) > 1]
rng = random.Random(0)

agree = 0
for k in range(200):
    I = random_instance(rng, choices, n=rng.randint(1, 7), J=rng.randint(0, 8))
    out = dispatch_solve(I)
    truth = brute_force_solve(I)
    agree += out.sat == (truth is not None)
    if k < 5:
        print(f"n={I.n} J={len(I.constraints)} -> {out.decision} {out.witness} via {out.strategy}")
print(f"agreement with exhaustive search: {agree}/200")
