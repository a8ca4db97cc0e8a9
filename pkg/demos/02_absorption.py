"""
Absorbing subuniverses
======================

For each of the seven simple 4-element algebras with an affine 3-element
subalgebra, find the minimal absorbing subuniverses together with the
certificate the search produced for every candidate.
"""

from algcsp import mass_report, simple4
from algcsp.structure import verify_absorbing

for i in range(7):
    A = simple4(i)
    rep = mass_report(A)
    print(f"a{i}: masses {[B.elements for B in rep.masses]}")
    for B, cert in rep.verdicts.items():
        print(f"    {B}: {cert}")
        # any positive verdict can be re-checked independently
        if cert.absorbing:
            assert verify_absorbing(A, B, cert.term, cert.arity)
