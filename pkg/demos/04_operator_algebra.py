"""
Hidden-polarization operators on a truncated Fock space
=======================================================

H2 and H3 are built from the pair operator a_y a_x rather than from a_y^dag a_x.
Their commutators close on an su(1,1)-like algebra.  The check runs on the
block with at most cutoff-2 photons, away from the truncation edge.
"""

import math

from hopsim.fock import (
    FockSpace,
    check_factorization,
    check_hops_criterion,
    hops_mixture,
    stokes_ops,
    uncertainty_check,
    vacuum,
    verify_algebra,
)

report = verify_algebra(FockSpace(6))
for r in report.relations:
    flag = "" if r.expected_zero is None else ("ok" if r.passed else "FAILED")
    print(f"{r.label:<40} {r.residual:9.2e} {flag}")
sign = report.sign
print(f"\n[H0,H2] = {sign['verified']}2i H3 holds; the usual quote has {sign['claimed']}2i H3")

# a phase-averaged mixture of coherent states obeying a_y rho = p_h rho a_x^dag
rho = hops_mixture(math.pi / 2, 0.0, 0.7, 64, FockSpace(12))
_, s1, s2, s3 = stokes_ops(rho.space)
print("\nHOPS mixture: criterion residual", f"{check_hops_criterion(rho, 1.0):.1e}",
      " factorization", f"{check_factorization(rho, 1.0, 'hops', 2):.1e}")
print("Stokes expectations:", [f"{abs(rho.expect(op)):.1e}" for op in (s1, s2, s3)])

u = uncertainty_check(vacuum(FockSpace(6)), 2, 3)
print(f"vacuum: var(H2) var(H3) = {u.var_j * u.var_k:.3f} >= {u.bound:.3f}")
