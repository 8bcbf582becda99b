"""Classical signal-wave model of the phase-conjugating Michelson interferometer.

Light is projected onto a working basis ``(eps, eps_perp)`` by the polarizer
and split by an ideal polarizing beam splitter.  The ``eps`` component returns
from an ordinary mirror with a constant phase ``delta_m``; the ``eps_perp``
component returns from a phase-conjugating mirror, which conjugates the
complex amplitude and adds a constant phase ``delta_pcm``.  The two reflected
beams are recombined without any further relative phase.  Propagation phases
along the arms are absorbed into the two constants.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .ensemble import (
    Derived,
    FieldEnsemble,
    FieldSample,
    Hops,
    Polarized,
    circular_mean,
    circular_variance,
)
from .polarization import (
    LINEAR_BASIS,
    ModeAmplitudes,
    PolarizationBasis,
    phase,
    polar_from_amplitudes,
    polar_components,
    project_amplitudes,
    project_components,
    wrap_pi,
)

MIRROR_ARM = "mirror"
PCM_ARM = "pcm"
AFTER_SPLIT = "after-split"
AFTER_REFLECT = "after-reflect"


class ContractViolation(ValueError):
    """An arm element was applied to a signal in the wrong arm or stage."""


def _check_phase(name, value):
    if not (math.isfinite(value) and -math.pi < value <= math.pi):
        raise ValueError(f"{name}={value!r} outside (-pi, pi]")


@dataclass(frozen=True)
class DeviceConfig:
    delta_m: float = 0.0
    delta_pcm: float = 0.0
    basis: PolarizationBasis = LINEAR_BASIS

    def __post_init__(self):
        _check_phase("delta_m", self.delta_m)
        _check_phase("delta_pcm", self.delta_pcm)

    def to_dict(self):
        return {
            "delta_m": self.delta_m,
            "delta_pcm": self.delta_pcm,
            "basis": {
                "tag": self.basis.tag,
                "eps": [[z.real, z.imag] for z in self.basis.eps],
                "eps_perp": [[z.real, z.imag] for z in self.basis.eps_perp],
            },
        }


@dataclass(frozen=True)
class ArmSignal:
    amplitude: complex
    arm: str
    stage: str = AFTER_SPLIT

    def __post_init__(self):
        z = complex(self.amplitude)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError("arm amplitude must be finite")
        object.__setattr__(self, "amplitude", z)


def polarizer_output(sample: FieldSample, config: DeviceConfig) -> ModeAmplitudes:
    return project_amplitudes(sample.amplitudes, config.basis)


def split(amps: ModeAmplitudes):
    """Ideal PBS: ``eps`` component to the mirror arm, ``eps_perp`` to the PCM arm."""
    return ArmSignal(amps.primary, MIRROR_ARM), ArmSignal(amps.orthogonal, PCM_ARM)


def mirror_reflect(a: ArmSignal, delta_m: float) -> ArmSignal:
    if a.arm != MIRROR_ARM or a.stage != AFTER_SPLIT:
        raise ContractViolation(f"mirror expects a mirror-arm signal after the split, got {a.arm}/{a.stage}")
    return ArmSignal(a.amplitude * cmath.exp(1j * delta_m), MIRROR_ARM, AFTER_REFLECT)


def pcm_reflect(a: ArmSignal, delta_pcm: float) -> ArmSignal:
    """Conjugate the amplitude (magnitude kept, phase negated) and add ``delta_pcm``."""
    if a.arm != PCM_ARM or a.stage != AFTER_SPLIT:
        raise ContractViolation(f"PCM expects a PCM-arm signal after the split, got {a.arm}/{a.stage}")
    return ArmSignal(a.amplitude.conjugate() * cmath.exp(1j * delta_pcm), PCM_ARM, AFTER_REFLECT)


def recombine(mirror: ArmSignal, pcm: ArmSignal, basis_tag: str) -> ModeAmplitudes:
    if mirror.arm != MIRROR_ARM or pcm.arm != PCM_ARM:
        raise ContractViolation("recombiner needs one mirror-arm and one PCM-arm signal")
    if mirror.stage != AFTER_REFLECT or pcm.stage != AFTER_REFLECT:
        raise ContractViolation("recombiner needs reflected signals")
    return ModeAmplitudes(mirror.amplitude, pcm.amplitude, basis_tag)


def pcmi_sample(sample: FieldSample, config: DeviceConfig) -> ModeAmplitudes:
    """Push one realization through the device element by element."""
    mirror, pcm = split(polarizer_output(sample, config))
    return recombine(mirror_reflect(mirror, config.delta_m), pcm_reflect(pcm, config.delta_pcm), config.basis.tag)


def _output_kind(e: FieldEnsemble, config: DeviceConfig):
    params = (("delta_m", config.delta_m), ("delta_pcm", config.delta_pcm), ("input", e.kind.name))
    if e.basis_tag != "linear" or config.basis.tag != "linear":
        return Derived("pcmi", params)
    dm, dp = config.delta_m, config.delta_pcm
    if isinstance(e.kind, Polarized):
        return Hops(e.kind.chi, wrap_pi(-e.kind.delta + dm + dp))
    if isinstance(e.kind, Hops):
        return Polarized(e.kind.chi_h, wrap_pi(-e.kind.delta_h - dm + dp))
    return Derived("pcmi", params)


def pcmi_run(e: FieldEnsemble, config: DeviceConfig) -> FieldEnsemble:
    """Vectorized device pass over a linear-basis ensemble.

    The output holds the (eps, eps_perp) components in ``ax`` / ``ay``.  When
    the working basis is linear, a polarized input comes out as a hidden-
    polarized ensemble (and vice versa) and ``kind`` says so.
    """
    if e.basis_tag != "linear":
        raise ValueError("pcmi_run expects an ensemble in the linear basis")
    primary, orthogonal = project_components(e.ax, e.ay, config.basis)
    out_p = primary * np.exp(1j * config.delta_m)
    out_o = np.conj(orthogonal) * np.exp(1j * config.delta_pcm)
    meta = {"source": "pcmi", "device": config.to_dict(), "input_kind": e.kind.to_dict()}
    if e.spec is not None:
        meta["input_randomness"] = e.spec.to_dict()
    return FieldEnsemble(out_p, out_o, _output_kind(e, config), None, config.basis.tag, meta)


def expected_input_angles(kind: Polarized, config: DeviceConfig):
    """``(chi, delta)`` of a linear-basis polarized kind as seen in the device basis."""
    p, o = polar_components(1.0, kind.chi, kind.delta, 0.0)
    pb, ob = project_components(p, o, config.basis)
    params = polar_from_amplitudes(ModeAmplitudes(complex(pb), complex(ob)))
    return params.chi, params.delta


@dataclass
class Check:
    name: str
    value: float
    target: float
    tolerance: float
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class Certificate:
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def to_dict(self):
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def hops_certificate(e_out: FieldEnsemble, expected_chi: float, expected_delta: float,
                     config: DeviceConfig = DeviceConfig()) -> Certificate:
    """Check that an ensemble is hidden-polarized with the ratio and phase sum the device should give.

    Expected: amplitude ratio ``tan(chi/2)`` and phase sum
    ``-delta + delta_m + delta_pcm``, both with zero spread.
    """
    if len(e_out) < 2:
        raise ValueError("a certificate needs at least two samples")
    mag_p, mag_o = np.abs(e_out.ax), np.abs(e_out.ay)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mag_p > 0, mag_o / mag_p, np.inf)
    finite = np.all(np.isfinite(ratio))
    ratio_var = float(np.var(ratio, ddof=1)) if finite else math.inf
    ratio_mean = float(np.mean(ratio)) if finite else math.inf
    sums = phase(e_out.ay) + phase(e_out.ax)
    sum_cv = circular_variance(sums)
    sum_mean = circular_mean(sums)
    target_sum = wrap_pi(-expected_delta + config.delta_m + config.delta_pcm)
    target_ratio = math.tan(expected_chi / 2.0)
    sum_err = abs(wrap_pi(sum_mean - target_sum))

    cert = Certificate()
    cert.checks.append(Check("ratio_variance", ratio_var, 0.0, 1e-12, ratio_var <= 1e-12))
    cert.checks.append(Check("phase_sum_circular_variance", sum_cv, 0.0, 1e-12, sum_cv <= 1e-12))
    cert.checks.append(Check("ratio", ratio_mean, target_ratio, 1e-10, abs(ratio_mean - target_ratio) <= 1e-10))
    cert.checks.append(Check("phase_sum", wrap_pi(sum_mean), target_sum, 1e-10, sum_err <= 1e-10))
    return cert

