"""Truncated two-mode Fock space: ladder, Stokes and hidden-polarization operators.

Operators are plain dense ``numpy`` arrays of dimension ``(cutoff + 1)**2``
acting on the basis ``|n_x, n_y>`` with index ``n_x * (cutoff + 1) + n_y``
(n_x-major).  All operators are taken at t = 0; the ``exp(i w t)`` factors of
the time-dependent amplitudes only rotate phase space.

Truncation makes the ladder operators wrong at the edge ``n = cutoff``.
Identities are therefore compared on the "safe" block of total photon number
``n_x + n_y <= cutoff - 2``, with the projector applied on both sides, and
residuals are measured in the spectral norm (largest singular value).
"""

from __future__ import annotations

import cmath
import io
import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np

from ._io import dumps

TAIL_WARN = 1e-8


class TruncationWarning(UserWarning):
    """A state has more probability beyond the cutoff than ``TAIL_WARN``."""


@dataclass(frozen=True)
class FockSpace:
    cutoff: int

    def __post_init__(self):
        if not isinstance(self.cutoff, (int, np.integer)) or self.cutoff < 1:
            raise ValueError(f"cutoff must be an integer >= 1, got {self.cutoff!r}")

    @property
    def levels(self) -> int:
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return self.levels**2

    def index(self, nx: int, ny: int) -> int:
        if not (0 <= nx <= self.cutoff and 0 <= ny <= self.cutoff):
            raise ValueError(f"|{nx},{ny}> outside cutoff {self.cutoff}")
        return nx * self.levels + ny

    def occupations(self) -> Tuple[np.ndarray, np.ndarray]:
        """Photon numbers ``(n_x, n_y)`` of every basis index."""
        n = np.arange(self.levels)
        return np.repeat(n, self.levels), np.tile(n, self.levels)

    def safe_indices(self, margin: int = 2) -> np.ndarray:
        nx, ny = self.occupations()
        return np.flatnonzero(nx + ny <= self.cutoff - margin)

    def basis_ket(self, nx: int, ny: int) -> np.ndarray:
        ket = np.zeros(self.dim, dtype=complex)
        ket[self.index(nx, ny)] = 1.0
        return ket


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


@lru_cache(maxsize=None)
def _ladders(cutoff: int) -> Tuple[np.ndarray, np.ndarray]:
    levels = cutoff + 1
    single = np.diag(np.sqrt(np.arange(1, levels, dtype=float)), k=1).astype(complex)
    eye = np.eye(levels, dtype=complex)
    return _frozen(np.kron(single, eye)), _frozen(np.kron(eye, single))


def ladder(mode: str, space: FockSpace) -> np.ndarray:
    """Annihilation operator of mode ``"x"`` or ``"y"`` (identity on the other mode)."""
    ax, ay = _ladders(space.cutoff)
    if mode == "x":
        return ax
    if mode == "y":
        return ay
    raise ValueError(f"mode must be 'x' or 'y', got {mode!r}")


def number_ops(space: FockSpace) -> Tuple[np.ndarray, np.ndarray]:
    nx, ny = space.occupations()
    return np.diag(nx.astype(complex)), np.diag(ny.astype(complex))


@lru_cache(maxsize=None)
def _stokes(cutoff: int):
    ax, ay = _ladders(cutoff)
    nx, ny = _dag(ax) @ ax, _dag(ay) @ ay
    lowering = _dag(ay) @ ax  # S2 + i S3 = 2 a_y^dag a_x
    s2 = lowering + _dag(lowering)
    s3 = -1j * (lowering - _dag(lowering))
    return tuple(_frozen(m) for m in (ny + nx, ny - nx, s2, s3))


@lru_cache(maxsize=None)
def _hidden(cutoff: int):
    ax, ay = _ladders(cutoff)
    nx, ny = _dag(ax) @ ax, _dag(ay) @ ay
    pair = ay @ ax  # H2 + i H3 = 2 a_y a_x
    h2 = pair + _dag(pair)
    h3 = -1j * (pair - _dag(pair))
    return tuple(_frozen(m) for m in (ny + nx, ny - nx, h2, h3))


def stokes_ops(space: FockSpace) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Quantum Stokes operators ``(S0, S1, S2, S3)``."""
    return _stokes(space.cutoff)


def hidden_ops(space: FockSpace) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Hidden-polarization operators ``(H0, H1, H2, H3)`` with ``H2 + i H3 = 2 a_y a_x``."""
    return _hidden(space.cutoff)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def safe_norm(op: np.ndarray, space: FockSpace, margin: int = 2) -> float:
    """Spectral norm of ``P op P`` with ``P`` the projector on total photons <= cutoff - margin."""
    idx = space.safe_indices(margin)
    if idx.size == 0:
        return 0.0
    return float(np.linalg.norm(op[np.ix_(idx, idx)], 2))


def input_norm(op: np.ndarray, space: FockSpace, margin: int = 2) -> float:
    """Spectral norm of ``op P``: inputs restricted to the safe block, outputs unrestricted."""
    idx = space.safe_indices(margin)
    if idx.size == 0:
        return 0.0
    return float(np.linalg.norm(op[:, idx], 2))


# -- states -----------------------------------------------------------------


class DensityState:
    """Density matrix on a truncated two-mode Fock space.

    ``truncation_tail`` is the probability the untruncated state put beyond
    the cutoff (0 for states defined directly on the truncated space).
    """

    def __init__(self, matrix, space: FockSpace, truncation_tail: float = 0.0, validate: bool = True):
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (space.dim, space.dim):
            raise ValueError(f"matrix shape {matrix.shape} does not match dimension {space.dim}")
        matrix.flags.writeable = False
        self.matrix = matrix
        self.space = space
        self.truncation_tail = float(truncation_tail)
        if validate:
            self.validate()

    @property
    def truncation_warning(self) -> bool:
        return self.truncation_tail > TAIL_WARN

    def validate(self, tol: float = 1e-10) -> None:
        m = self.matrix
        if np.max(np.abs(m - _dag(m))) > tol:
            raise ValueError("density matrix is not hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise ValueError(f"density matrix trace {np.trace(m).real:.3g} != 1")
        if np.min(np.linalg.eigvalsh(0.5 * (m + _dag(m)))) < -tol:
            raise ValueError("density matrix has negative eigenvalues")

    def expect(self, op: np.ndarray) -> complex:
        """``Tr[rho op]``."""
        return complex(np.sum(self.matrix * op.T))

    def variance(self, op: np.ndarray) -> float:
        mean = self.expect(op)
        return float((self.expect(op @ op) - mean * mean).real)

    def __repr__(self):
        return f"DensityState(cutoff={self.space.cutoff}, tail={self.truncation_tail:.2e})"


def _coherent_vector(alpha: complex, levels: int) -> Tuple[np.ndarray, float]:
    """Truncated, renormalized coherent amplitudes and the discarded probability."""
    amps = np.empty(levels, dtype=complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, levels):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    kept = float(np.sum(np.abs(amps) ** 2))
    return amps / math.sqrt(kept), max(0.0, 1.0 - kept)


def coherent_ket(alpha_x: complex, alpha_y: complex, space: FockSpace) -> Tuple[np.ndarray, float]:
    vx, tx = _coherent_vector(complex(alpha_x), space.levels)
    vy, ty = _coherent_vector(complex(alpha_y), space.levels)
    return np.kron(vx, vy), 1.0 - (1.0 - tx) * (1.0 - ty)


def _warn_tail(tail: float) -> None:
    if tail > TAIL_WARN:
        warnings.warn(
            f"coherent state truncation tail {tail:.2e} exceeds {TAIL_WARN:g}; raise the cutoff",
            TruncationWarning,
            stacklevel=3,
        )


def vacuum(space: FockSpace) -> DensityState:
    ket = space.basis_ket(0, 0)
    return DensityState(np.outer(ket, ket.conj()), space)


def coherent_state(alpha_x: complex, alpha_y: complex, space: FockSpace) -> DensityState:
    """Product coherent state ``|alpha_x> |alpha_y>``, renormalized after truncation.

    Keep ``|alpha|**2`` well below ``cutoff / 4``; a :class:`TruncationWarning`
    is emitted when the discarded probability exceeds ``TAIL_WARN``.
    """
    ket, tail = coherent_ket(alpha_x, alpha_y, space)
    _warn_tail(tail)
    return DensityState(np.outer(ket, ket.conj()), space, tail)


def hops_mixture(chi_h: float, delta_h: float, amp: float, phase_grid: int, space: FockSpace) -> DensityState:
    """Equal-weight mixture of coherent states on a uniform grid of carrier phases.

    Component ``k`` has ``alpha_x = amp cos(chi_h/2) exp(i(phi_k + delta_h/2))`` and
    ``alpha_y = amp sin(chi_h/2) exp(i(-phi_k + delta_h/2))`` with
    ``phi_k = 2 pi k / phase_grid``.

    Component ``k`` equals component 0 with ``|n_x, n_y>`` multiplied by
    ``exp(i phi_k (n_x - n_y))``, so the grid average keeps exactly the matrix
    elements whose ``n_x - n_y`` agree modulo ``phase_grid``.  Building the
    mixture that way leaves symmetry-forbidden elements exactly zero instead
    of at rounding level.
    """
    if phase_grid < 1:
        raise ValueError("phase_grid must be >= 1")
    ax0, ay0 = hops_grid_amplitudes(chi_h, delta_h, amp, 1)[0]
    ket, tail = coherent_ket(ax0, ay0, space)
    _warn_tail(tail)
    nx, ny = space.occupations()
    d = nx - ny
    same_sector = (d[:, None] - d[None, :]) % phase_grid == 0
    rho = np.where(same_sector, np.outer(ket, ket.conj()), 0.0)
    return DensityState(rho, space, tail)


def hops_grid_amplitudes(chi_h: float, delta_h: float, amp: float, phase_grid: int) -> List[Tuple[complex, complex]]:
    """Coherent amplitudes ``(alpha_x, alpha_y)`` used by :func:`hops_mixture`."""
    out = []
    for k in range(phase_grid):
        phi = 2.0 * math.pi * k / phase_grid
        out.append(
            (
                amp * math.cos(chi_h / 2.0) * cmath.exp(1j * (phi + delta_h / 2.0)),
                amp * math.sin(chi_h / 2.0) * cmath.exp(1j * (-phi + delta_h / 2.0)),
            )
        )
    return out


def thermal_state(mean_x: float, mean_y: float, space: FockSpace) -> DensityState:
    """Product of two independent thermal (geometric) photon distributions, truncated."""

    def probs(mean):
        if mean == 0:
            p = np.zeros(space.levels)
            p[0] = 1.0
            return p
        q = mean / (1.0 + mean)
        p = (1.0 - q) * q ** np.arange(space.levels)
        return p / p.sum()

    return DensityState(np.diag(np.kron(probs(mean_x), probs(mean_y))).astype(complex), space)


# -- algebra verification ---------------------------------------------------


@dataclass
class Relation:
    label: str
    residual: float
    expected_zero: Optional[bool]
    passed: Optional[bool]

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class AlgebraReport:
    """Residuals of the hidden-polarization (and Stokes) commutation relations.

    ``sign`` records which of ``[H0, H2] = +2i H3`` / ``-2i H3`` actually holds
    on the safe block; the relation is usually quoted with the plus sign.
    """

    cutoff: int
    tolerance: float
    relations: List[Relation] = field(default_factory=list)
    sign: Dict[str, object] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        checked = [r.passed for r in self.relations if r.expected_zero]
        return all(checked) and bool(self.sign.get("resolved"))

    def residual(self, label: str) -> float:
        for r in self.relations:
            if r.label == label:
                return r.residual
        raise KeyError(label)

    def to_dict(self):
        return {
            "cutoff": self.cutoff,
            "safe_block": f"n_x + n_y <= {self.cutoff - 2}",
            "tolerance": self.tolerance,
            "relations": [r.to_dict() for r in self.relations],
            "h0_h2_sign": self.sign,
            "all_passed": self.all_passed,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


def verify_algebra(space: FockSpace, tol: float = 1e-10) -> AlgebraReport:
    """Check the hidden-polarization algebra on the ``n_x + n_y <= cutoff - 2`` block."""
    if space.cutoff < 3:
        raise ValueError("verify_algebra needs cutoff >= 3")
    h0, h1, h2, h3 = hidden_ops(space)
    s0, s1, s2, s3 = stokes_ops(space)
    one = np.eye(space.dim)
    report = AlgebraReport(space.cutoff, tol)

    def add(label, op, expected_zero=True):
        r = safe_norm(op, space)
        passed = (r < tol) if expected_zero else None
        report.relations.append(Relation(label, r, expected_zero, passed))
        return r

    add("[H1,H0]", commutator(h1, h0))
    add("[H1,H2]", commutator(h1, h2))
    add("[H1,H3]", commutator(h1, h3))
    add("[H0,H3] - 2i H2", commutator(h0, h3) - 2j * h2)
    add("[H2,H3] - 2i(1 + H0)", commutator(h2, h3) - 2j * (one + h0))
    add("H1^2 + H2^2 + H3^2 - H0^2 - 2(1 + H0)", h1 @ h1 + h2 @ h2 + h3 @ h3 - h0 @ h0 - 2 * (one + h0))
    add("H0 - S0", h0 - s0)
    add("H1 - S1", h1 - s1)
    add("[S0,S1]", commutator(s0, s1))
    add("[S0,S2]", commutator(s0, s2))
    add("[S0,S3]", commutator(s0, s3))
    add("[S1,S2] - 2i S3", commutator(s1, s2) - 2j * s3)
    add("[S2,S3] - 2i S1", commutator(s2, s3) - 2j * s1)
    add("[S3,S1] - 2i S2", commutator(s3, s1) - 2j * s2)

    c02 = commutator(h0, h2)
    plus = add("[H0,H2] - 2i H3", c02 - 2j * h3, expected_zero=None)
    minus = add("[H0,H2] + 2i H3", c02 + 2j * h3, expected_zero=None)
    method = "two-sided"
    if (plus < tol) == (minus < tol):
        # below cutoff 4 the two-sided block is too small to see H2 or H3 at all;
        # quadratic operators on the block never reach the truncation edge, so
        # the output side can be left unprojected
        method = "input-side"
        plus = input_norm(c02 - 2j * h3, space)
        minus = input_norm(c02 + 2j * h3, space)
    resolved = (plus < tol) != (minus < tol)
    verified = None
    if resolved:
        verified = "+" if plus < tol else "-"
    report.sign = {
        "relation": "[H0,H2] = (sign) 2i H3",
        "claimed": "+",
        "verified": verified,
        "resolved": resolved,
        "agrees_with_claim": verified == "+",
        "method": method,
        "residual_plus": plus,
        "residual_minus": minus,
    }
    return report


@dataclass(frozen=True)
class UncertaintyResult:
    var_j: float
    var_k: float
    bound: float
    satisfied: bool


def uncertainty_check(rho: DensityState, j: int, k: int, tol: float = 1e-10) -> UncertaintyResult:
    """Robertson bound ``Var(H_j) Var(H_k) >= |<[H_j, H_k]> / 2|**2``.

    The commutator is taken from the truncated matrices themselves, so the
    inequality is a matrix theorem and must hold for every valid state.
    """
    ops = hidden_ops(rho.space)
    hj, hk = ops[j], ops[k]
    bound = abs(rho.expect(commutator(hj, hk)) / 2.0) ** 2
    vj, vk = rho.variance(hj), rho.variance(hk)
    return UncertaintyResult(vj, vk, bound, vj * vk >= bound - tol)


# -- coherence functions and criteria ---------------------------------------


def coherence(rho: DensityState, m_x: int, m_y: int, n_x: int, n_y: int) -> complex:
    """Normally ordered correlation ``Tr[rho ax^dag^m_x ay^dag^m_y ax^n_x ay^n_y]``."""
    orders = (m_x, m_y, n_x, n_y)
    if any(o < 0 for o in orders):
        raise ValueError("coherence orders must be non-negative")
    if sum(orders) > rho.space.cutoff:
        raise ValueError(f"total order {sum(orders)} exceeds cutoff {rho.space.cutoff}")
    ax, ay = _ladders(rho.space.cutoff)
    mp = np.linalg.matrix_power
    op = mp(_dag(ax), m_x) @ mp(_dag(ay), m_y) @ mp(ax, n_x) @ mp(ay, n_y)
    return rho.expect(op)


def check_polarization_criterion(rho: DensityState, p: complex) -> float:
    """``|| a_y rho - p a_x rho ||`` on the safe block; 0 for a state polarized with index ``p``."""
    ax, ay = _ladders(rho.space.cutoff)
    return safe_norm(ay @ rho.matrix - p * (ax @ rho.matrix), rho.space)


def check_hops_criterion(rho: DensityState, p_h: complex) -> float:
    """``|| a_y rho - p_h rho a_x^dag ||`` on the safe block; 0 for hidden polarization ``p_h``."""
    ax, ay = _ladders(rho.space.cutoff)
    return safe_norm(ay @ rho.matrix - p_h * (rho.matrix @ _dag(ax)), rho.space)


def _reduced_orders(orders, kind: str, mapping: str):
    m_x, m_y, n_x, n_y = orders
    if kind == "polarized" or mapping == "printed":
        return (m_x + m_y, 0, n_x + n_y, 0)
    # a_y rho = p_h rho a_x^dag trades each a_y for an a_x^dag and each a_y^dag for an a_x
    return (m_x + n_y, 0, n_x + m_y, 0)


def factorization_table(rho: DensityState, index: complex, kind: str, max_order: int, mapping: str = "derived",
                        eps: float = 1e-15):
    """Per-tuple comparison behind :func:`check_factorization`.

    Returns a list of ``(orders, lhs, rhs, relative_residual)``.
    """
    if kind not in ("polarized", "hops"):
        raise ValueError(f"kind must be 'polarized' or 'hops', got {kind!r}")
    if mapping not in ("derived", "printed"):
        raise ValueError(f"mapping must be 'derived' or 'printed', got {mapping!r}")
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    if max_order > rho.space.cutoff:
        raise ValueError(f"max_order {max_order} exceeds cutoff {rho.space.cutoff}")
    cache: Dict[tuple, complex] = {}

    def gamma(orders):
        if orders not in cache:
            cache[orders] = coherence(rho, *orders)
        return cache[orders]

    rows = []
    for orders in itertools.product(range(max_order + 1), repeat=4):
        if sum(orders) > max_order:
            continue
        m_y, n_y = orders[1], orders[3]
        lhs = gamma(orders)
        rhs = np.conj(index) ** m_y * index**n_y * gamma(_reduced_orders(orders, kind, mapping))
        rel = abs(lhs - rhs) / (abs(lhs) + abs(rhs) + eps)
        rows.append((orders, lhs, complex(rhs), float(rel)))
    return rows


def check_factorization(rho: DensityState, index: complex, kind: str, max_order: int, mapping: str = "derived",
                        eps: float = 1e-15) -> float:
    """Worst relative deviation of the coherence functions from single-mode factorization.

    For ``kind="polarized"`` every ``Gamma(m_x, m_y, n_x, n_y)`` is compared with
    ``p*^m_y p^n_y Gamma(m_x + m_y, 0, n_x + n_y, 0)``.  For ``kind="hops"``
    the criterion ``a_y rho = p_h rho a_x^dag`` moves y-annihilators to
    x-creators, giving ``p_h*^m_y p_h^n_y Gamma(m_x + n_y, 0, n_x + m_y, 0)``;
    ``mapping="printed"`` instead uses the polarized index pattern for both
    kinds, for comparison.
    """
    rows = factorization_table(rho, index, kind, max_order, mapping, eps)
    return max(r[3] for r in rows)


# -- matrix exchange format -------------------------------------------------


def operator_to_csv(matrix: np.ndarray, space: FockSpace, name: str = "operator") -> str:
    """One matrix row per line as ``re,im`` pairs, after a ``# {json}`` header."""
    header = {
        "format": "hopsim-operator",
        "name": name,
        "cutoff": space.cutoff,
        "dim": space.dim,
        "ordering": "index = n_x * (cutoff + 1) + n_y",
    }
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    pairs = np.empty((space.dim, 2 * space.dim))
    pairs[:, 0::2] = matrix.real
    pairs[:, 1::2] = matrix.imag
    np.savetxt(buf, pairs, fmt="%.17g", delimiter=",")
    return buf.getvalue()


def operator_from_csv(text: str) -> Tuple[np.ndarray, FockSpace, str]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("line 1: missing operator header")
    header = json.loads(lines[0][1:])
    space = FockSpace(int(header["cutoff"]))
    data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)
    if data.shape != (space.dim, 2 * space.dim):
        raise ValueError(f"operator data has shape {data.shape}, expected {(space.dim, 2 * space.dim)}")
    return data[:, 0::2] + 1j * data[:, 1::2], space, header.get("name", "operator")
