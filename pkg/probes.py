from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from errors import DegenerateSystem, DomainError
from greedy import energy_gain
from kernels import ParameterTuple, check_parameter
from ortho import gram_schmidt, project
from results import ApproxResult
from settings import DEFAULT_DELTA
from space import PowerSeries, SpaceSpec, evaluate, norm

logger = logging.getLogger(__name__)

# ultimo esponente j della successione radiale 1 - 2^-j
DEFAULT_DEPTH = 12


@dataclass(frozen=True)
class BoundarySequence:
    """Punti w_j lungo un raggio di direzione `direction`, con |w_j| crescente verso 1."""

    points: tuple[complex, ...]
    direction: float = 0.0

    def __post_init__(self) -> None:
        pts = tuple(complex(p) for p in self.points)
        if not pts:
            raise ValueError("points: successione vuota.")
        moduli = np.abs(np.asarray(pts))
        if np.any(moduli >= 1.0):
            raise ValueError("points: tutti i punti devono stare nel disco aperto.")
        if np.any(np.diff(moduli) <= 0.0):
            raise ValueError("points: moduli non strettamente crescenti.")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "direction", float(self.direction))

    @property
    def radii(self) -> np.ndarray:
        return np.abs(np.asarray(self.points))

    def __len__(self) -> int:
        return len(self.points)


def radial_sequence(
    theta: float = 0.0, depth: int = DEFAULT_DEPTH, cap: float | None = None, first: int = 1
) -> BoundarySequence:
    """w_j = (1 - 2^-j) e^{i theta} per j = first..depth, raggi limitati a `cap`."""
    if depth < first:
        raise ValueError("depth: deve essere >= first.")
    radii = 1.0 - 2.0 ** -np.arange(first, depth + 1, dtype=float)
    if cap is not None:
        if not 0.0 < cap < 1.0:
            raise ValueError("cap: deve stare in (0, 1).")
        radii = np.unique(np.minimum(radii, cap))
    return BoundarySequence(tuple(radii * np.exp(1j * theta)), theta)


def _closed_exponent(spec: SpaceSpec) -> float:
    return 1.0 if spec.is_hardy else 2.0 + spec.alpha


def normalized_kernel_inner(spec: SpaceSpec, z: complex, w: complex) -> complex:
    """<E_z, E_w> dai nuclei in forma chiusa, senza troncamento."""
    z, w = complex(z), complex(w)
    if abs(z) >= 1.0 or abs(w) >= 1.0:
        raise DomainError("normalized_kernel_inner: punti fuori dal disco aperto.")
    p = _closed_exponent(spec)
    scale = ((1.0 - abs(z) ** 2) * (1.0 - abs(w) ** 2)) ** (p / 2.0)
    return complex(scale * (1.0 - np.conj(w) * z) ** (-p))


def dbvc_probe(spec: SpaceSpec, z: complex, seq: BoundarySequence) -> np.ndarray:
    """|<E_z, E_{w_j}>| lungo la successione."""
    if complex(z) in seq.points:
        raise ValueError("z: non deve appartenere alla successione.")
    return np.array([abs(normalized_kernel_inner(spec, z, w)) for w in seq.points])


def bvc_probe(f: PowerSeries, spec: SpaceSpec, seq: BoundarySequence) -> np.ndarray:
    """|<f, E_{w_j}>| = |f(w_j)| / ||K_{w_j}||; punti oltre r_max rifiutati (serie troncata)."""
    for j, w in enumerate(seq.points):
        check_parameter(spec, w, f"w_{j + 1}")
    p = _closed_exponent(spec)
    return np.array([abs(evaluate(f, w)) * (1.0 - abs(w) ** 2) ** (p / 2.0) for w in seq.points])


def bvc_bound(f: PowerSeries, spec: SpaceSpec, seq: BoundarySequence) -> np.ndarray:
    """Maggiorante ||f|| sqrt(sum_{k<=deg} 1/h_k) |<E_0, E_w>| per f polinomiale.

    Nel caso Hardy il fattore vale sqrt(deg + 1).
    """
    nonzero = np.flatnonzero(np.abs(f.coeffs) > 0.0)
    degree = int(nonzero[-1]) if nonzero.size else 0
    factor = float(np.sqrt(np.sum(spec.kernel_weights[: degree + 1])))
    # |<E_0, E_w>| = (1 - |w|^2)^(p/2)
    decay = (1.0 - seq.radii**2) ** (_closed_exponent(spec) / 2.0)
    return norm(f, spec) * factor * decay


def vanishing_probe(
    h: PowerSeries,
    spec: SpaceSpec,
    fixed_tuple: ParameterTuple,
    seq: BoundarySequence,
    delta: float = DEFAULT_DELTA,
) -> np.ndarray:
    """|<h, B^{w_j}_{n+1}>| estendendo il sistema di `fixed_tuple`; NaN dove il sistema degenera."""
    system = gram_schmidt(spec, fixed_tuple)
    _, residual = project(h, system)
    values = np.full(len(seq), np.nan)
    for j, w in enumerate(seq.points):
        try:
            values[j] = energy_gain(residual, system, w, delta)
        except DegenerateSystem as exc:
            logger.debug("vanishing_probe: w=%s saltato (%s)", w, exc)
    return values


def interior_margin(result: ApproxResult) -> float:
    """r_max - max |a_k|."""
    return float(result.r_max - result.parameters.max_modulus())


def probe_rows(seq: BoundarySequence, values: np.ndarray) -> list[tuple[int, float, float]]:
    """Righe CSV (j, |w_j|, valore)."""
    return [(j + 1, float(r), float(v)) for j, (r, v) in enumerate(zip(seq.radii, values))]
