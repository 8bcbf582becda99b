"""
Ordinary and hidden polarization indices
========================================

A two-mode field is a pair of complex amplitudes.  Its ordinary index is the
ratio of the two amplitudes; its hidden index fixes the amplitude ratio and
the *sum* of the two phases instead of their difference.
"""

import cmath
import math

from hopsim.polarization import (
    HopsParams,
    PolarParams,
    amplitudes_from_hops,
    amplitudes_from_polar,
    basis_from_primary,
    hops_from_amplitudes,
    ihop_from_angles,
    iop,
    project_amplitudes,
)

# circularly polarized light: equal magnitudes, quarter-wave phase difference
amps = amplitudes_from_polar(PolarParams(a0=math.sqrt(2), chi=math.pi / 2, delta=math.pi / 2, phi_bar=math.pi / 4))
print("circular amplitudes:", amps.primary, amps.orthogonal)
print("ordinary index p   :", iop(amps).value)

# the same field seen from a circular basis has everything in one mode
basis = basis_from_primary((1 / math.sqrt(2), 1j / math.sqrt(2)))
circ = project_amplitudes(amps, basis)
print("in circular basis  :", circ.primary, circ.orthogonal)

# hidden parametrization: the carrier phase phi enters the two modes with opposite signs
for phi in (0.0, 0.7, 2.0):
    h = amplitudes_from_hops(HopsParams(a0=2.0, chi_h=math.pi / 2, delta_h=0.3, phi=phi))
    back = hops_from_amplitudes(h)
    arg_sum = cmath.phase(h.primary) + cmath.phase(h.orthogonal)
    print(f"phi={phi:.1f}  arg sum={arg_sum:+.3f}  recovered delta_h={back.delta_h:+.3f}")

print("hidden index for (chi_h, delta_h) = (pi/2, pi/2):", ihop_from_angles(math.pi / 2, math.pi / 2).value)
