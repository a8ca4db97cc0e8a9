"""Finite algebras, their congruences and absorption, and CSP solvers over them."""

from .algebra import (App, FiniteAlgebra, Operation, Subuniverse, Var, all_subuniverses, canonical_form,
                      enumerate_cibs, eval_term, find_isomorphism, is_isomorphic, is_semilattice,
                      load_algebra, parse_term, product_algebra, quotient_algebra, restrict_algebra,
                      subuniverse_closure, term_table)
from .catalog import cibs_up_to, ec_algebras, example_a, fixture, s2, simple4, sq3, trivial
from .congruence import (Congruence, CongruenceLattice, congruence_lattice, is_linked, is_simple,
                         is_subdirect, principal_congruence, projection_kernel)
from .csp import (Constraint, CspInstance, all_solutions, block_instance, brute_force_solve, is_solution,
                  load_instance, partial_instance, quotient_instance, random_instance, validate)
from .errors import AlgebraError, InstanceError, NonAffineRelationError, SizeBoundError, WitnessError
from .solvers import (SolveOutcome, affine_solve, backtracking_solve, dispatch_solve, least_block_solve,
                      quotient_block_solve, simple4_solve, sq3s2_solve)
from .structure import (AbsorptionCertificate, affine_representation, check_absorbing, detect_ec,
                        find_sinks, has_ctb_cib, is_abelian, mass_report, minimal_absorbing)
from .verify import (VerificationReport, classify_cibs_report, reproduce_majority_example,
                     reproduce_mass_product_example, reproduce_xor_example, verify_example_identities,
                     verify_fry_pan, verify_linking, verify_rectangularity)

__version__ = "0.1.0"
