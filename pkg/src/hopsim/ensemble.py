"""Seeded classical two-mode field ensembles and their Stokes / hidden parameters.

An ensemble stores the linear-basis amplitudes of every realization as two
complex arrays.  Generation is split into fixed-size chunks, each with its own
substream derived from the master seed, so the samples do not depend on how
many workers produced them.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np

from . import __version__
from ._io import atomic_write_text
from ._streams import chunk_generator, map_chunks
from .polarization import (
    TWO_PI,
    ModeAmplitudes,
    hops_components,
    phase,
    polar_components,
    wrap_pi,
)

# substream domain for ensemble draws (measurement uses another one)
_DOMAIN = 1


# -- ensemble kinds ---------------------------------------------------------


@dataclass(frozen=True)
class Polarized:
    """Ordinary polarized light: fixed ``chi`` and ``delta``, random ``a0`` and mean phase."""

    chi: float
    delta: float
    name = "polarized"

    def __post_init__(self):
        if not 0.0 <= self.chi <= math.pi:
            raise ValueError(f"chi={self.chi!r} outside [0, pi]")
        if not -math.pi < self.delta <= math.pi:
            raise ValueError(f"delta={self.delta!r} outside (-pi, pi]")

    def to_dict(self):
        return {"name": self.name, "chi": self.chi, "delta": self.delta}


@dataclass(frozen=True)
class Hops:
    """Hidden-polarized light: fixed ``chi_h`` and ``delta_h``, random ``a0`` and carrier phase."""

    chi_h: float
    delta_h: float
    name = "hops"

    def __post_init__(self):
        if not 0.0 <= self.chi_h <= math.pi:
            raise ValueError(f"chi_h={self.chi_h!r} outside [0, pi]")
        if not -math.pi < self.delta_h <= math.pi:
            raise ValueError(f"delta_h={self.delta_h!r} outside (-pi, pi]")

    def to_dict(self):
        return {"name": self.name, "chi_h": self.chi_h, "delta_h": self.delta_h}


@dataclass(frozen=True)
class Unpolarized:
    """Independent amplitudes and independent uniform phases in the two modes."""

    name = "unpolarized"

    def to_dict(self):
        return {"name": self.name}


@dataclass(frozen=True)
class Derived:
    """Ensemble produced by a transformation (e.g. the interferometer) of another one."""

    source: str
    params: tuple = ()
    name = "derived"

    def to_dict(self):
        return {"name": self.name, "source": self.source, "params": dict(self.params)}


EnsembleKind = Union[Polarized, Hops, Unpolarized, Derived]


def kind_from_dict(d: dict) -> EnsembleKind:
    name = d.get("name")
    if name == "polarized":
        return Polarized(float(d["chi"]), float(d["delta"]))
    if name == "hops":
        return Hops(float(d["chi_h"]), float(d["delta_h"]))
    if name == "unpolarized":
        return Unpolarized()
    if name == "derived":
        return Derived(str(d["source"]), tuple(sorted(d.get("params", {}).items())))
    raise ValueError(f"unknown ensemble kind {name!r}")


# -- randomness -------------------------------------------------------------


@dataclass(frozen=True)
class RandomnessSpec:
    """Distribution of the overall amplitude ``a0`` plus the master seed.

    ``amplitude`` is one of ``("constant", a0)``, ``("uniform", lo, hi)`` or
    ``("rayleigh", scale)``.  Random phases are always uniform on [0, 2*pi).
    """

    seed: int
    amplitude: tuple = ("constant", 1.0)

    def __post_init__(self):
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        amp = tuple(self.amplitude)
        object.__setattr__(self, "amplitude", amp)
        law, args = amp[0], [float(a) for a in amp[1:]]
        if law == "constant":
            if len(args) != 1 or not args[0] >= 0:
                raise ValueError("constant amplitude needs a0 >= 0")
        elif law == "uniform":
            if len(args) != 2 or not 0 <= args[0] < args[1]:
                raise ValueError("uniform amplitude needs 0 <= lo < hi")
        elif law == "rayleigh":
            if len(args) != 1 or not args[0] > 0:
                raise ValueError("rayleigh amplitude needs scale > 0")
        else:
            raise ValueError(f"unknown amplitude law {law!r}")

    @classmethod
    def constant(cls, a0: float, seed: int) -> "RandomnessSpec":
        return cls(seed, ("constant", float(a0)))

    @classmethod
    def uniform(cls, lo: float, hi: float, seed: int) -> "RandomnessSpec":
        return cls(seed, ("uniform", float(lo), float(hi)))

    @classmethod
    def rayleigh(cls, scale: float, seed: int) -> "RandomnessSpec":
        return cls(seed, ("rayleigh", float(scale)))

    def draw_amplitudes(self, rng: np.random.Generator, size: int) -> np.ndarray:
        law = self.amplitude[0]
        if law == "constant":
            return np.full(size, float(self.amplitude[1]))
        if law == "uniform":
            return rng.uniform(self.amplitude[1], self.amplitude[2], size)
        return rng.rayleigh(self.amplitude[1], size)

    def to_dict(self):
        return {"seed": int(self.seed), "amplitude": list(self.amplitude)}

    @classmethod
    def from_dict(cls, d):
        amp = d["amplitude"]
        return cls(int(d["seed"]), (amp[0], *[float(a) for a in amp[1:]]))


# -- ensembles --------------------------------------------------------------


@dataclass(frozen=True)
class FieldSample:
    amplitudes: ModeAmplitudes
    draw_index: int


@dataclass(frozen=True, eq=False)
class FieldEnsemble:
    """Realizations of a two-mode field, stored as complex arrays ``ax``, ``ay``.

    For ensembles expressed in a non-linear basis (``basis_tag``), ``ax`` and
    ``ay`` hold the primary and orthogonal components respectively.
    """

    ax: np.ndarray
    ay: np.ndarray
    kind: EnsembleKind
    spec: Optional[RandomnessSpec] = None
    basis_tag: str = "linear"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ax = np.array(self.ax, dtype=complex)
        ay = np.array(self.ay, dtype=complex)
        if ax.ndim != 1 or ax.shape != ay.shape:
            raise ValueError("ax and ay must be 1-d arrays of equal length")
        if ax.size == 0:
            raise ValueError("an ensemble needs at least one sample")
        if not (np.all(np.isfinite(ax)) and np.all(np.isfinite(ay))):
            raise ValueError("ensemble amplitudes must be finite")
        ax.flags.writeable = False
        ay.flags.writeable = False
        object.__setattr__(self, "ax", ax)
        object.__setattr__(self, "ay", ay)

    def __len__(self) -> int:
        return self.ax.size

    def sample(self, i: int) -> FieldSample:
        return FieldSample(ModeAmplitudes(self.ax[i], self.ay[i], self.basis_tag), i)

    def __iter__(self) -> Iterator[FieldSample]:
        return (self.sample(i) for i in range(len(self)))

    @property
    def samples(self):
        return list(self)

    def header(self) -> dict:
        return {
            "format": "hopsim-ensemble",
            "version": __version__,
            "kind": self.kind.to_dict(),
            "randomness": None if self.spec is None else self.spec.to_dict(),
            "basis": self.basis_tag,
            "n": len(self),
            "meta": self.meta,
        }


def generate_ensemble(kind: EnsembleKind, spec: RandomnessSpec, n: int, workers: int = 1) -> FieldEnsemble:
    """Draw ``n`` realizations of ``kind`` with randomness ``spec``.

    The output is bit-identical for identical ``(kind, spec, n)`` whatever the
    value of ``workers``.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if isinstance(kind, Derived):
        raise ValueError("derived ensembles cannot be generated directly")

    def chunk(index, start, stop):
        rng = chunk_generator(spec.seed, index, _DOMAIN)
        m = stop - start
        if isinstance(kind, Unpolarized):
            # each mode gets half the intensity law, independently
            mag_x = spec.draw_amplitudes(rng, m) / math.sqrt(2.0)
            mag_y = spec.draw_amplitudes(rng, m) / math.sqrt(2.0)
            ph_x = rng.uniform(0.0, TWO_PI, m)
            ph_y = rng.uniform(0.0, TWO_PI, m)
            return mag_x * np.exp(1j * ph_x), mag_y * np.exp(1j * ph_y)
        a0 = spec.draw_amplitudes(rng, m)
        ph = rng.uniform(0.0, TWO_PI, m)
        if isinstance(kind, Polarized):
            return polar_components(a0, kind.chi, kind.delta, ph)
        return hops_components(a0, kind.chi_h, kind.delta_h, ph)

    parts = map_chunks(chunk, int(n), workers)
    ax = np.concatenate([p[0] for p in parts])
    ay = np.concatenate([p[1] for p in parts])
    return FieldEnsemble(ax, ay, kind, spec)


def ensemble_from_amplitudes(ax, ay, kind: Optional[EnsembleKind] = None, **meta) -> FieldEnsemble:
    """Wrap explicit linear-basis amplitudes (e.g. a phase grid) as an ensemble."""
    return FieldEnsemble(ax, ay, kind or Derived("explicit"), None, "linear", meta)


# -- statistics -------------------------------------------------------------


def _mean_and_stderr(values: np.ndarray):
    n = values.size
    mean = float(np.mean(values))
    if n < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(n))


@dataclass(frozen=True)
class ClassicalStokes:
    s0: float
    s1: float
    s2: float
    s3: float
    stderr: tuple

    @property
    def values(self):
        return (self.s0, self.s1, self.s2, self.s3)

    @property
    def degree_of_polarization(self) -> float:
        return math.sqrt(self.s1**2 + self.s2**2 + self.s3**2) / self.s0 if self.s0 > 0 else 0.0


@dataclass(frozen=True)
class ClassicalHidden:
    h0: float
    h1: float
    h2: float
    h3: float
    stderr: tuple

    @property
    def values(self):
        return (self.h0, self.h1, self.h2, self.h3)


def _intensity_terms(e: FieldEnsemble):
    ix = np.abs(e.ax) ** 2
    iy = np.abs(e.ay) ** 2
    return iy + ix, iy - ix


def classical_stokes(e: FieldEnsemble) -> ClassicalStokes:
    """Ensemble Stokes parameters with ``s2 + i s3 = <2 A_y A_x*>``."""
    total, diff = _intensity_terms(e)
    cross = 2.0 * e.ay * np.conj(e.ax)
    stats = [_mean_and_stderr(v) for v in (total, diff, cross.real, cross.imag)]
    return ClassicalStokes(*(m for m, _ in stats), stderr=tuple(s for _, s in stats))


def classical_hidden(e: FieldEnsemble) -> ClassicalHidden:
    """Hidden-polarization parameters with ``h2 + i h3 = <2 A_y A_x>`` (no conjugate)."""
    total, diff = _intensity_terms(e)
    cross = 2.0 * e.ay * e.ax
    stats = [_mean_and_stderr(v) for v in (total, diff, cross.real, cross.imag)]
    return ClassicalHidden(*(m for m, _ in stats), stderr=tuple(s for _, s in stats))


def circular_variance(angles) -> float:
    """``1 - |mean(exp(i theta))|``; 0 for a constant angle, near 1 for uniform angles."""
    return max(0.0, float(1.0 - abs(np.mean(np.exp(1j * np.asarray(angles, dtype=float))))))


def circular_mean(angles) -> float:
    return float(np.angle(np.mean(np.exp(1j * np.asarray(angles, dtype=float)))))


@dataclass(frozen=True)
class AuditReport:
    n: int
    ratio_mean: float
    ratio_variance: float
    ratio_excluded: int
    difference_mean: float
    difference_circular_variance: float
    sum_mean: float
    sum_circular_variance: float
    classification: str

    def to_dict(self):
        return dict(self.__dict__)


def randomness_audit(e: FieldEnsemble, tol: float = 1e-10) -> AuditReport:
    """Decide which amplitude/phase combinations of an ensemble are non-random.

    Samples with ``A_x = 0`` are left out of the amplitude ratio and counted in
    ``ratio_excluded``.  A quantity counts as non-random when its (circular)
    variance is at most ``tol``.  An ensemble with one mode empty in every
    sample is classified ``"polarized"`` (its relative phase is meaningless).
    """
    n = len(e)
    if n < 2:
        raise ValueError("randomness audit needs at least two samples")
    mag_x, mag_y = np.abs(e.ax), np.abs(e.ay)
    valid = mag_x > 0
    excluded = int(n - np.count_nonzero(valid))
    ratios = mag_y[valid] / mag_x[valid]
    if ratios.size >= 2:
        ratio_mean, ratio_var = float(np.mean(ratios)), float(np.var(ratios, ddof=1))
    elif ratios.size == 1:
        ratio_mean, ratio_var = float(ratios[0]), math.nan
    else:
        ratio_mean, ratio_var = math.inf, math.nan

    arg_x, arg_y = phase(e.ax), phase(e.ay)
    diff, total = arg_y - arg_x, arg_y + arg_x
    diff_cv, sum_cv = circular_variance(diff), circular_variance(total)

    if excluded == n or not np.any(mag_y > 0):
        label = "polarized"
    else:
        ratio_fixed = excluded == 0 and ratio_var <= tol
        if ratio_fixed and diff_cv <= tol:
            label = "polarized"
        elif ratio_fixed and sum_cv <= tol:
            label = "hidden-polarized"
        else:
            label = "neither"
    return AuditReport(
        n=n,
        ratio_mean=ratio_mean,
        ratio_variance=ratio_var,
        ratio_excluded=excluded,
        difference_mean=wrap_pi(circular_mean(diff)),
        difference_circular_variance=diff_cv,
        sum_mean=wrap_pi(circular_mean(total)),
        sum_circular_variance=sum_cv,
        classification=label,
    )


# -- CSV exchange format ----------------------------------------------------

COLUMNS = "re_ax,im_ax,re_ay,im_ay"


class EnsembleFormatError(ValueError):
    """Malformed ensemble file; ``line`` is the 1-based offending line (0 if unknown)."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def ensemble_to_csv(e: FieldEnsemble) -> str:
    """Serialize as ``# <json header>``, a column row, then one row per sample."""
    buf = io.StringIO()
    buf.write("# " + json.dumps(e.header(), sort_keys=True) + "\n")
    buf.write(COLUMNS + "\n")
    data = np.column_stack([e.ax.real, e.ax.imag, e.ay.real, e.ay.imag])
    np.savetxt(buf, data, fmt="%.17g", delimiter=",")
    return buf.getvalue()


def write_ensemble(e: FieldEnsemble, path) -> None:
    atomic_write_text(path, ensemble_to_csv(e))


def ensemble_from_csv(text: str) -> FieldEnsemble:
    lines = text.splitlines()
    if not lines:
        raise EnsembleFormatError("empty ensemble file", 1)
    if not lines[0].startswith("#"):
        raise EnsembleFormatError("missing '# {...}' header", 1)
    try:
        header = json.loads(lines[0][1:])
        kind = kind_from_dict(header["kind"])
        spec = None if header.get("randomness") is None else RandomnessSpec.from_dict(header["randomness"])
    except (ValueError, KeyError, TypeError) as exc:
        raise EnsembleFormatError(f"bad header: {exc}", 1) from None
    if len(lines) < 2 or lines[1].strip() != COLUMNS:
        raise EnsembleFormatError(f"expected column row {COLUMNS!r}", 2)
    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise EnsembleFormatError(f"expected 4 fields, got {len(parts)}", lineno)
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise EnsembleFormatError(f"non-numeric field in {line!r}", lineno) from None
        if not all(math.isfinite(v) for v in values):
            raise EnsembleFormatError("non-finite amplitude", lineno)
        rows.append(values)
    if not rows:
        raise EnsembleFormatError("ensemble file has no samples", len(lines))
    data = np.asarray(rows)
    if "n" in header and header["n"] != len(rows):
        raise EnsembleFormatError(f"header says n={header['n']} but found {len(rows)} rows", 1)
    return FieldEnsemble(
        data[:, 0] + 1j * data[:, 1],
        data[:, 2] + 1j * data[:, 3],
        kind,
        spec,
        header.get("basis", "linear"),
        header.get("meta", {}) or {},
    )


def read_ensemble(path) -> FieldEnsemble:
    with open(path, encoding="utf-8") as fh:
        return ensemble_from_csv(fh.read())
