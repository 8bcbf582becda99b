"""Two-mode complex amplitudes, polarization bases and the IOP / IHOP indices.

Amplitudes are dimensionless (field normalization constant set to 1).  All
objects here are immutable and every function is pure.

Phase conventions
-----------------
* the phase of a zero amplitude is taken to be 0;
* phase differences / sums (``delta``, ``delta_h``) live in (-pi, pi];
* random carrier phases (``phi_bar``, ``phi``) live in [0, 2*pi).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

TWO_PI = 2.0 * math.pi

IOP = "IOP"
IHOP = "IHOP"


class UndefinedIndexError(ValueError):
    """Both mode amplitudes vanish, so an index or parametrization is undefined."""


def _mod_2pi(x):
    # np.mod of a tiny negative number can round up to exactly 2*pi
    m = np.mod(x, TWO_PI)
    return np.where(m >= TWO_PI, 0.0, m)


def wrap_pi(angle):
    """Wrap an angle (scalar or array) into (-pi, pi]."""
    wrapped = math.pi - _mod_2pi(math.pi - np.asarray(angle, dtype=float))
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


def wrap_2pi(angle):
    """Wrap an angle (scalar or array) into [0, 2*pi)."""
    wrapped = _mod_2pi(np.asarray(angle, dtype=float))
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


def phase(z):
    """Argument of ``z`` with arg(0) := 0 (works on scalars and arrays)."""
    z = np.asarray(z, dtype=complex)
    out = np.where(z == 0, 0.0, np.angle(z))
    return float(out) if np.ndim(out) == 0 else out


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


@dataclass(frozen=True)
class ModeAmplitudes:
    """Complex amplitudes along the two vectors of a polarization basis.

    ``primary`` is the component along the first basis vector (e.g. x or
    epsilon) and ``orthogonal`` the component along its orthogonal partner.
    """

    primary: complex
    orthogonal: complex
    basis_tag: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "primary", complex(self.primary))
        object.__setattr__(self, "orthogonal", complex(self.orthogonal))
        if not (_finite(self.primary) and _finite(self.orthogonal)):
            raise ValueError(f"non-finite amplitudes: {self.primary!r}, {self.orthogonal!r}")

    @property
    def intensity(self) -> float:
        return abs(self.primary) ** 2 + abs(self.orthogonal) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.primary, self.orthogonal], dtype=complex)


@dataclass(frozen=True)
class PolarizationBasis:
    """Orthonormal pair of complex unit vectors ``(eps, eps_perp)``.

    Both vectors are given by their Cartesian (x, y) components.  Use
    :func:`basis_from_primary` to build one from its first vector.
    """

    eps: Tuple[complex, complex]
    eps_perp: Tuple[complex, complex]
    tag: str = "custom"

    def __post_init__(self):
        eps = tuple(complex(c) for c in self.eps)
        perp = tuple(complex(c) for c in self.eps_perp)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "eps_perp", perp)
        tol = 1e-12
        if abs(abs(eps[0]) ** 2 + abs(eps[1]) ** 2 - 1.0) > tol:
            raise ValueError("eps is not normalized")
        if abs(abs(perp[0]) ** 2 + abs(perp[1]) ** 2 - 1.0) > tol:
            raise ValueError("eps_perp is not normalized")
        if abs(eps[0].conjugate() * perp[0] + eps[1].conjugate() * perp[1]) > tol:
            raise ValueError("eps and eps_perp are not orthogonal")

    def matrix(self) -> np.ndarray:
        """Unitary taking Cartesian components to (primary, orthogonal) components."""
        return np.array([np.conj(self.eps), np.conj(self.eps_perp)], dtype=complex)


LINEAR_BASIS = PolarizationBasis((1.0, 0.0), (0.0, 1.0), tag="linear")


def basis_from_primary(eps, tag: str = "custom") -> PolarizationBasis:
    """Complete ``eps`` to an orthonormal basis with ``eps_perp = (-eps_y*, eps_x*)``.

    The input is renormalized if it is not already a unit vector.

    Raises
    ------
    ValueError
        If ``eps`` is the zero vector or not finite.
    """
    ex, ey = (complex(c) for c in eps)
    if not (_finite(ex) and _finite(ey)):
        raise ValueError("eps must be finite")
    norm = math.sqrt(abs(ex) ** 2 + abs(ey) ** 2)
    if norm == 0.0:
        raise ValueError("eps must be a non-zero vector")
    if abs(norm - 1.0) > 1e-15:
        ex, ey = ex / norm, ey / norm
    if ex == 1 and ey == 0 and tag == "custom":
        tag = "linear"
    return PolarizationBasis((ex, ey), (-ey.conjugate(), ex.conjugate()), tag=tag)


def project_components(ax, ay, basis: PolarizationBasis):
    """Array form of :func:`project_amplitudes`; returns ``(primary, orthogonal)``."""
    (ex, ey), (px, py) = basis.eps, basis.eps_perp
    ax = np.asarray(ax, dtype=complex)
    ay = np.asarray(ay, dtype=complex)
    return ex.conjugate() * ax + ey.conjugate() * ay, px.conjugate() * ax + py.conjugate() * ay


def project_amplitudes(cartesian: ModeAmplitudes, basis: PolarizationBasis) -> ModeAmplitudes:
    """Re-express Cartesian amplitudes in ``basis``.

    ``primary = eps_x* A_x + eps_y* A_y`` and, with the canonical partner
    vector, ``orthogonal = -eps_y A_x + eps_x A_y``.  The map is unitary.
    """
    if cartesian.basis_tag != "linear":
        raise ValueError(f"expected amplitudes in the linear basis, got {cartesian.basis_tag!r}")
    p, o = project_components(cartesian.primary, cartesian.orthogonal, basis)
    return ModeAmplitudes(complex(p), complex(o), basis_tag=basis.tag)


@dataclass(frozen=True)
class PolarizationIndex:
    """Complex index ``orthogonal / primary`` (IOP) or its hidden analogue (IHOP).

    When the primary amplitude vanishes the index is infinite: ``infinite``
    is set and ``value`` holds ``inf``.
    """

    value: complex
    kind: str
    infinite: bool = False

    def __post_init__(self):
        if self.kind not in (IOP, IHOP):
            raise ValueError(f"unknown index kind {self.kind!r}")
        if not self.infinite and not _finite(complex(self.value)):
            raise ValueError("finite index expected")

    @property
    def modulus(self) -> float:
        return math.inf if self.infinite else abs(self.value)

    @property
    def argument(self) -> float:
        return 0.0 if self.infinite else phase(self.value)


_INFINITE = complex(math.inf, 0.0)


def iop(amps: ModeAmplitudes) -> PolarizationIndex:
    """Index of polarization ``p = A_perp / A``."""
    if amps.primary == 0:
        if amps.orthogonal == 0:
            raise UndefinedIndexError("index undefined: both amplitudes are zero")
        return PolarizationIndex(_INFINITE, IOP, infinite=True)
    return PolarizationIndex(amps.orthogonal / amps.primary, IOP)


def ihop_from_angles(chi_h: float, delta_h: float) -> PolarizationIndex:
    """Index of hidden polarization ``tan(chi_h/2) exp(i delta_h)``."""
    _check_range("chi_h", chi_h, 0.0, math.pi, closed_low=True, closed_high=True)
    _check_range("delta_h", delta_h, -math.pi, math.pi, closed_low=False, closed_high=True)
    if chi_h == math.pi:
        return PolarizationIndex(_INFINITE, IHOP, infinite=True)
    return PolarizationIndex(math.tan(chi_h / 2.0) * cmath.exp(1j * delta_h), IHOP)


def _check_range(name, value, lo, hi, closed_low, closed_high):
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite")
    low_ok = value >= lo if closed_low else value > lo
    high_ok = value <= hi if closed_high else value < hi
    if not (low_ok and high_ok):
        lb = "[" if closed_low else "("
        rb = "]" if closed_high else ")"
        raise ValueError(f"{name}={value!r} outside {lb}{lo:g}, {hi:g}{rb}")


@dataclass(frozen=True)
class PolarParams:
    """Ordinary-polarization parametrization: amplitude, ratio angle, phase difference, mean phase."""

    a0: float
    chi: float
    delta: float
    phi_bar: float = 0.0

    def __post_init__(self):
        _check_range("a0", self.a0, 0.0, math.inf, True, False)
        _check_range("chi", self.chi, 0.0, math.pi, True, True)
        _check_range("delta", self.delta, -math.pi, math.pi, False, True)
        _check_range("phi_bar", self.phi_bar, 0.0, TWO_PI, True, False)


@dataclass(frozen=True)
class HopsParams:
    """Hidden-polarization parametrization: amplitude, ratio angle, phase sum, carrier phase."""

    a0: float
    chi_h: float
    delta_h: float
    phi: float = 0.0

    def __post_init__(self):
        _check_range("a0", self.a0, 0.0, math.inf, True, False)
        _check_range("chi_h", self.chi_h, 0.0, math.pi, True, True)
        _check_range("delta_h", self.delta_h, -math.pi, math.pi, False, True)
        _check_range("phi", self.phi, 0.0, TWO_PI, True, False)


def polar_components(a0, chi, delta, phi_bar):
    """Array-friendly closed form behind :func:`amplitudes_from_polar`."""
    primary = a0 * np.cos(chi / 2.0) * np.exp(1j * (phi_bar - delta / 2.0))
    orthogonal = a0 * np.sin(chi / 2.0) * np.exp(1j * (phi_bar + delta / 2.0))
    return primary, orthogonal


def hops_components(a0, chi_h, delta_h, phi):
    """Array-friendly closed form behind :func:`amplitudes_from_hops`."""
    primary = a0 * np.cos(chi_h / 2.0) * np.exp(1j * (phi + delta_h / 2.0))
    orthogonal = a0 * np.sin(chi_h / 2.0) * np.exp(1j * (-phi + delta_h / 2.0))
    return primary, orthogonal


def amplitudes_from_polar(params: PolarParams, basis_tag: str = "linear") -> ModeAmplitudes:
    p, o = polar_components(params.a0, params.chi, params.delta, params.phi_bar)
    return ModeAmplitudes(complex(p), complex(o), basis_tag)


def amplitudes_from_hops(params: HopsParams, basis_tag: str = "linear") -> ModeAmplitudes:
    p, o = hops_components(params.a0, params.chi_h, params.delta_h, params.phi)
    return ModeAmplitudes(complex(p), complex(o), basis_tag)


def _magnitudes(amps: ModeAmplitudes):
    mp, mo = abs(amps.primary), abs(amps.orthogonal)
    if mp == 0 and mo == 0:
        raise UndefinedIndexError("parameters undefined: both amplitudes are zero")
    return math.hypot(mp, mo), 2.0 * math.atan2(mo, mp)


def polar_from_amplitudes(amps: ModeAmplitudes) -> PolarParams:
    """Invert :func:`amplitudes_from_polar`.

    The mean phase is recovered as ``arg(primary) + delta/2`` rather than as a
    half-sum of wrapped phases, which would only be defined modulo pi.
    """
    a0, chi = _magnitudes(amps)
    arg_p, arg_o = phase(amps.primary), phase(amps.orthogonal)
    delta = wrap_pi(arg_o - arg_p)
    return PolarParams(a0, chi, delta, wrap_2pi(arg_p + delta / 2.0))


def hops_from_amplitudes(amps: ModeAmplitudes) -> HopsParams:
    """Invert :func:`amplitudes_from_hops` (carrier phase from ``arg(primary) - delta_h/2``)."""
    a0, chi_h = _magnitudes(amps)
    arg_p, arg_o = phase(amps.primary), phase(amps.orthogonal)
    delta_h = wrap_pi(arg_o + arg_p)
    return HopsParams(a0, chi_h, delta_h, wrap_2pi(arg_p - delta_h / 2.0))
