"""
Making hidden polarization with a phase-conjugating interferometer
==================================================================

A polarizing splitter sends one component to an ordinary mirror and the other
to a phase-conjugating mirror.  Conjugation flips the sign of the random mean
phase in one arm, so after recombination the phase difference is random and
the phase sum is fixed.
"""

import math

from hopsim.ensemble import Polarized, RandomnessSpec, generate_ensemble, randomness_audit
from hopsim.pcmi import DeviceConfig, hops_certificate, pcmi_run

source = generate_ensemble(Polarized(chi=math.pi / 2, delta=math.pi / 4), RandomnessSpec.rayleigh(1.0, seed=1), 1000)
print("input :", randomness_audit(source).classification)

for dm, dp in ((0.0, 0.0), (0.5, -0.2)):
    cfg = DeviceConfig(delta_m=dm, delta_pcm=dp)
    out = pcmi_run(source, cfg)
    audit = randomness_audit(out)
    cert = hops_certificate(out, math.pi / 2, math.pi / 4, cfg)
    print(f"delta_m={dm:+.1f} delta_pcm={dp:+.1f}: {audit.classification}, "
          f"phase sum {audit.sum_mean:+.4f} (expected {-math.pi / 4 + dm + dp:+.4f}), certificate {cert.passed}")

# conjugating twice undoes the conversion
twice = pcmi_run(pcmi_run(source, DeviceConfig()), DeviceConfig())
print("two passes:", randomness_audit(twice).classification)
