"""
Photocounting schemes
=====================

Three detection arrangements: a bare polarizing splitter, one behind a 45
degree rotator, and one behind a phase shifter plus rotator.  The bare splitter
measures h0 and h1.  The operator audit shows the two rotated ones measure
the Stokes quantities S2, S3 and not the hidden H2, H3.
"""

import math

from hopsim.ensemble import Hops, RandomnessSpec, classical_hidden, generate_ensemble
from hopsim.fock import FockSpace
from hopsim.measurement import DetectorModel, Scheme, convergence_table, estimate, identity_audit, simulate_counts

e = generate_ensemble(Hops(math.pi / 3, 0.4), RandomnessSpec.constant(1.0, seed=7), 5000)
h = classical_hidden(e)
print("ensemble h0, h1:", round(h.h0, 4), round(h.h1, 4))

for scheme in Scheme:
    rec = simulate_counts(e, scheme, DetectorModel(efficiency=1.0), shots_per_sample=20, seed=3)
    est = estimate(rec, scheme)
    print(f"{scheme.value:>22}: sum {est.mean_sum:.4f} +- {est.stderr_sum:.4f}   "
          f"diff {est.mean_diff:+.4f} +- {est.stderr_diff:.4f}")

rec = simulate_counts(e, Scheme.DIRECT, DetectorModel(), 20, seed=3)
print("\nrunning estimate of h1 (direct scheme):")
for shots, _, _, md, sd in convergence_table(rec, Scheme.DIRECT, points=6):
    print(f"  {shots:>6} shots: {md:+.4f} +- {sd:.4f}")

audit = identity_audit(FockSpace(6))
print("\noperator audit:", {k: round(v, 3) for k, v in audit.residuals.items()}, "D3 =", audit.d3_stokes_sign + "S3")
