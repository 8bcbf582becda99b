"""Photodetection schemes for the hidden-polarization parameters.

Three arrangements feed a polarizing beam splitter and two detectors whose
counts are summed and differenced:

* ``direct``: no optics before the splitter;
* ``rotated45``: a rotator at 45 degrees;
* ``phase-shifted-rotated``: a phase shifter followed by the rotator.

Counting is semiclassical: given the classical intensity of a realization, each
detector registers a Poisson number of photons with mean ``efficiency * |A|**2``.

:func:`identity_audit` compares, as matrices, what the two rotated schemes
actually measure (``n_x' - n_y'``) with the operators H2 / H3 they are meant
to measure and with the Stokes operators S2 / S3.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List

import numpy as np

from ._io import dumps
from ._streams import chunk_generator, map_chunks
from .ensemble import FieldEnsemble
from .fock import FockSpace, hidden_ops, ladder, safe_norm, stokes_ops
from .polarization import ModeAmplitudes

_DOMAIN = 2
_R = 1.0 / math.sqrt(2.0)


class Scheme(str, Enum):
    DIRECT = "direct"
    ROTATED45 = "rotated45"
    PHASE_SHIFTED_ROTATED = "phase-shifted-rotated"


_MATRICES = {
    Scheme.DIRECT: np.eye(2, dtype=complex),
    Scheme.ROTATED45: _R * np.array([[1, 1], [-1, 1]], dtype=complex),
    Scheme.PHASE_SHIFTED_ROTATED: _R * np.array([[1, 1j], [-1, 1j]], dtype=complex),
}


def scheme_matrix(scheme) -> np.ndarray:
    """2x2 unitary mapping ``(A_x, A_y)`` to the amplitudes seen by the splitter."""
    return _MATRICES[Scheme(scheme)].copy()


def transform_components(ax, ay, scheme):
    u = _MATRICES[Scheme(scheme)]
    ax = np.asarray(ax, dtype=complex)
    ay = np.asarray(ay, dtype=complex)
    return u[0, 0] * ax + u[0, 1] * ay, u[1, 0] * ax + u[1, 1] * ay


def scheme_transform(amps: ModeAmplitudes, scheme) -> ModeAmplitudes:
    if amps.basis_tag != "linear":
        raise ValueError("scheme_transform expects linear-basis amplitudes")
    x, y = transform_components(amps.primary, amps.orthogonal, scheme)
    return ModeAmplitudes(complex(x), complex(y), "linear")


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency={self.efficiency!r} outside (0, 1]")


@dataclass(frozen=True)
class CountRecord:
    shot_index: int
    n1: int
    n2: int


@dataclass(frozen=True, eq=False)
class CountRecords:
    """Counts of every shot, stored column-wise.

    Shots are ordered shot-major: record ``s * n_samples + i`` is shot ``s`` of
    sample ``i``, so every prefix samples the ensemble evenly.
    """

    n1: np.ndarray
    n2: np.ndarray
    sample_index: np.ndarray

    def __len__(self) -> int:
        return self.n1.size

    def __getitem__(self, i: int) -> CountRecord:
        return CountRecord(int(i), int(self.n1[i]), int(self.n2[i]))

    def __iter__(self) -> Iterator[CountRecord]:
        return (self[i] for i in range(len(self)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("shot_index,n1,n2\n")
        table = np.column_stack([np.arange(len(self)), self.n1, self.n2])
        np.savetxt(buf, table, fmt="%d", delimiter=",")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CountRecords":
        lines = text.splitlines()
        if not lines or lines[0].strip() != "shot_index,n1,n2":
            raise ValueError("line 1: expected header 'shot_index,n1,n2'")
        data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", dtype=np.int64, ndmin=2)
        if data.size and np.any(data[:, 0] != np.arange(len(data))):
            raise ValueError("shot indices must run 0, 1, 2, ...")
        return cls(data[:, 1], data[:, 2], np.full(len(data), -1))


def simulate_counts(e: FieldEnsemble, scheme, det: DetectorModel, shots_per_sample: int, seed: int,
                    workers: int = 1) -> CountRecords:
    """Poisson photocounts for every (shot, sample) pair of a linear-basis ensemble."""
    if not isinstance(shots_per_sample, (int, np.integer)) or shots_per_sample < 1:
        raise ValueError(f"shots_per_sample must be a positive integer, got {shots_per_sample!r}")
    if e.basis_tag != "linear":
        raise ValueError("simulate_counts expects a linear-basis ensemble")
    x, y = transform_components(e.ax, e.ay, scheme)
    mean1 = det.efficiency * np.abs(x) ** 2
    mean2 = det.efficiency * np.abs(y) ** 2
    n = len(e)
    total = n * int(shots_per_sample)

    def chunk(index, start, stop):
        rng = chunk_generator(seed, index, _DOMAIN)
        which = np.arange(start, stop) % n
        return rng.poisson(mean1[which]), rng.poisson(mean2[which])

    parts = map_chunks(chunk, total, workers)
    n1 = np.concatenate([p[0] for p in parts]).astype(np.int64)
    n2 = np.concatenate([p[1] for p in parts]).astype(np.int64)
    return CountRecords(n1, n2, np.arange(total) % n)


@dataclass(frozen=True)
class EstimateReport:
    """Spectrum-analyzer output: mean sum and difference of the two counts.

    ``mean_diff`` is ``n2 - n1`` for the direct scheme (the H1 estimator) and
    ``n1 - n2`` for the rotated schemes.
    """

    scheme: str
    mean_sum: float
    mean_diff: float
    stderr_sum: float
    stderr_diff: float
    shots: int

    def to_dict(self):
        return dict(self.__dict__)

    def to_json(self) -> str:
        return dumps(self.to_dict())


def _diff_values(n1, n2, scheme):
    return (n2 - n1) if Scheme(scheme) is Scheme.DIRECT else (n1 - n2)


def _stats(values: np.ndarray):
    if values.size < 2:
        return float(np.mean(values)), 0.0
    return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(values.size))


def estimate(records: CountRecords, scheme) -> EstimateReport:
    if len(records) == 0:
        raise ValueError("no count records to estimate from")
    total = (records.n1 + records.n2).astype(float)
    diff = _diff_values(records.n1, records.n2, scheme).astype(float)
    ms, ss = _stats(total)
    md, sd = _stats(diff)
    return EstimateReport(Scheme(scheme).value, ms, md, ss, sd, len(records))


def convergence_table(records: CountRecords, scheme, points: int = 20) -> List[tuple]:
    """Running estimates at roughly log-spaced prefix lengths: ``(shots, mean_sum, se, mean_diff, se)``."""
    n = len(records)
    if n == 0:
        raise ValueError("no count records to estimate from")
    sizes = np.unique(np.geomspace(min(10, n), n, num=points).astype(int))
    total = (records.n1 + records.n2).astype(float)
    diff = _diff_values(records.n1, records.n2, scheme).astype(float)
    rows = []
    for k in sizes:
        ms, ss = _stats(total[:k])
        md, sd = _stats(diff[:k])
        rows.append((int(k), ms, ss, md, sd))
    return rows


def convergence_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("shots,mean_sum,stderr_sum,mean_diff,stderr_diff\n")
    for k, ms, ss, md, sd in rows:
        buf.write(f"{k},{ms:.17g},{ss:.17g},{md:.17g},{sd:.17g}\n")
    return buf.getvalue()


# -- operator-level audit ---------------------------------------------------


def detected_difference(space: FockSpace, scheme) -> np.ndarray:
    """``n_x' - n_y'`` after the scheme's mode transform, as a matrix."""
    u = _MATRICES[Scheme(scheme)]
    ax, ay = ladder("x", space), ladder("y", space)
    bx = u[0, 0] * ax + u[0, 1] * ay
    by = u[1, 0] * ax + u[1, 1] * ay
    return bx.conj().T @ bx - by.conj().T @ by


@dataclass
class IdentityAudit:
    cutoff: int
    residuals: Dict[str, float] = field(default_factory=dict)
    d3_stokes_sign: str = ""

    def to_dict(self):
        return {
            "cutoff": self.cutoff,
            "safe_block": f"n_x + n_y <= {self.cutoff - 2}",
            "residuals": dict(self.residuals),
            "d3_stokes_sign": self.d3_stokes_sign,
            "claimed": {"D2": "H2", "D3": "H3"},
        }


def identity_audit(space: FockSpace, tol: float = 1e-10) -> IdentityAudit:
    """Residuals between the detected differences D2, D3 and H2, H3, S2, S3.

    ``d3_stokes_sign`` is ``"+"`` when D3 = S3, ``"-"`` when D3 = -S3 and
    ``"unresolved"`` otherwise.
    """
    if space.cutoff < 3:
        raise ValueError("identity_audit needs cutoff >= 3")
    _, _, h2, h3 = hidden_ops(space)
    _, _, s2, s3 = stokes_ops(space)
    d2 = detected_difference(space, Scheme.ROTATED45)
    d3 = detected_difference(space, Scheme.PHASE_SHIFTED_ROTATED)
    audit = IdentityAudit(space.cutoff)
    audit.residuals = {
        "D2-H2": safe_norm(d2 - h2, space),
        "D2-S2": safe_norm(d2 - s2, space),
        "D3-H3": safe_norm(d3 - h3, space),
        "D3-S3": safe_norm(d3 - s3, space),
        "D3+S3": safe_norm(d3 + s3, space),
    }
    plus = audit.residuals["D3-S3"] < tol
    minus = audit.residuals["D3+S3"] < tol
    audit.d3_stokes_sign = "+" if plus and not minus else "-" if minus and not plus else "unresolved"
    return audit
