from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import gammaln

from errors import DomainError
from settings import DEFAULT_R_MAX, DEFAULT_TRUNCATION

HARDY = "hardy"
BERGMAN = "bergman"
SPACE_KINDS = (HARDY, BERGMAN)
MIN_TRUNCATION = 16
BOUNDARY_NODES = 4096
# righe della matrice di Vandermonde valutate per blocco
_EVAL_CHUNK = 2048

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpaceSpec:
    """Spazio RKHS sul disco: Hardy oppure Bergman pesato di parametro alpha."""

    kind: str = HARDY
    alpha: float = 0.0
    truncation: int = DEFAULT_TRUNCATION
    r_max: float = DEFAULT_R_MAX

    def __post_init__(self) -> None:
        kind = str(self.kind).strip().lower()
        if kind not in SPACE_KINDS:
            raise ValueError(f"kind: spazio sconosciuto '{self.kind}'.")
        object.__setattr__(self, "kind", kind)
        if kind == HARDY:
            object.__setattr__(self, "alpha", 0.0)
        elif not float(self.alpha) > -1.0:
            raise ValueError("alpha: deve essere > -1.")
        object.__setattr__(self, "alpha", float(self.alpha))

        if isinstance(self.truncation, bool) or int(self.truncation) != self.truncation:
            raise ValueError("truncation: valore non valido.")
        if int(self.truncation) < MIN_TRUNCATION:
            raise ValueError(f"truncation: deve essere >= {MIN_TRUNCATION}.")
        object.__setattr__(self, "truncation", int(self.truncation))

        if not 0.0 < float(self.r_max) < 1.0:
            raise ValueError("r_max: deve stare in (0, 1).")
        object.__setattr__(self, "r_max", float(self.r_max))

    @property
    def is_hardy(self) -> bool:
        return self.kind == HARDY

    @cached_property
    def _all_weights(self) -> np.ndarray:
        k = np.arange(self.truncation + 1, dtype=float)
        if self.is_hardy:
            h = np.ones_like(k)
        else:
            # h_k = k! Γ(2+α) / Γ(k+2+α) in forma logaritmica, niente overflow per k ~ 500
            a = self.alpha
            h = np.exp(gammaln(k + 1.0) + gammaln(2.0 + a) - gammaln(k + 2.0 + a))
        h.setflags(write=False)
        return h

    @cached_property
    def weights(self) -> np.ndarray:
        """Pesi h_0..h_{N-1} dei monomi (norme al quadrato)."""
        return self._all_weights[: self.truncation]

    @cached_property
    def kernel_weights(self) -> np.ndarray:
        """Coefficienti 1/h_k del nucleo riproducente."""
        inv = 1.0 / self.weights
        inv.setflags(write=False)
        return inv

    def describe(self) -> str:
        if self.is_hardy:
            return f"Hardy (N={self.truncation}, r_max={self.r_max})"
        return f"Bergman alpha={self.alpha:g} (N={self.truncation}, r_max={self.r_max})"


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Serie di Taylor troncata c_0..c_{N-1}."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=complex, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coeffs: attesa una sequenza non vuota.")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coeffs: valori non finiti.")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zeros(cls, truncation: int) -> PowerSeries:
        return cls(np.zeros(truncation, dtype=complex))

    @classmethod
    def monomial(cls, truncation: int, degree: int, value: complex = 1.0) -> PowerSeries:
        if not 0 <= degree < truncation:
            raise ValueError("degree: fuori dal troncamento.")
        c = np.zeros(truncation, dtype=complex)
        c[degree] = value
        return cls(c)

    @classmethod
    def from_coefficients(cls, values: Iterable[complex], truncation: int) -> PowerSeries:
        """Completa con zeri fino alla lunghezza richiesta; zeri finali oltre il troncamento ammessi."""
        raw = np.asarray(list(values), dtype=complex)
        if np.any(raw[truncation:] != 0):
            raise ValueError(
                f"coeffs: {raw.size} coefficienti, oltre il troncamento {truncation} non tutti nulli."
            )
        c = np.zeros(truncation, dtype=complex)
        m = min(truncation, raw.size)
        c[:m] = raw[:m]
        return cls(c)

    @property
    def truncation(self) -> int:
        return int(self.coeffs.size)

    def _check_same(self, other: PowerSeries) -> None:
        if other.truncation != self.truncation:
            raise ValueError(
                f"series: lunghezze diverse ({self.truncation} != {other.truncation})."
            )

    def __add__(self, other: PowerSeries) -> PowerSeries:
        self._check_same(other)
        return PowerSeries(self.coeffs + other.coeffs)

    def __sub__(self, other: PowerSeries) -> PowerSeries:
        self._check_same(other)
        return PowerSeries(self.coeffs - other.coeffs)

    def __neg__(self) -> PowerSeries:
        return PowerSeries(-self.coeffs)

    def __mul__(self, other: complex | PowerSeries) -> PowerSeries:
        if isinstance(other, PowerSeries):
            return self.multiply(other)
        return PowerSeries(self.coeffs * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> PowerSeries:
        return PowerSeries(self.coeffs / complex(scalar))

    def multiply(self, other: PowerSeries) -> PowerSeries:
        """Prodotto di Cauchy troncato alla stessa lunghezza."""
        self._check_same(other)
        return PowerSeries(np.convolve(self.coeffs, other.coeffs)[: self.truncation])

    def derivative(self, order: int = 1) -> PowerSeries:
        """Derivata termine a termine di ordine `order` (esatta sulla serie)."""
        if order < 0:
            raise ValueError("order: deve essere >= 0.")
        n = self.truncation
        c = np.zeros(n, dtype=complex)
        if order < n:
            k = np.arange(order, n, dtype=float)
            falling = np.exp(gammaln(k + 1.0) - gammaln(k - order + 1.0))
            c[: n - order] = falling * self.coeffs[order:]
        return PowerSeries(c)


def _check_series(f: PowerSeries, spec: SpaceSpec, name: str = "f") -> None:
    if f.truncation != spec.truncation:
        raise ValueError(
            f"{name}: lunghezza {f.truncation} diversa dal troncamento {spec.truncation}."
        )


def weight(spec: SpaceSpec, k: int) -> float:
    """Norma al quadrato h_k del monomio z^k."""
    if isinstance(k, bool) or int(k) != k or not 0 <= int(k) <= spec.truncation:
        raise ValueError(f"k: indice {k} fuori da [0, {spec.truncation}].")
    return float(spec._all_weights[int(k)])


def inner_product(f: PowerSeries, g: PowerSeries, spec: SpaceSpec) -> complex:
    """<f, g> = sum_k h_k c_k conj(d_k)."""
    _check_series(f, spec, "f")
    _check_series(g, spec, "g")
    return complex(np.vdot(g.coeffs, spec.weights * f.coeffs))


def norm(f: PowerSeries, spec: SpaceSpec) -> float:
    _check_series(f, spec, "f")
    return float(np.sqrt(np.sum(spec.weights * np.abs(f.coeffs) ** 2)))


def evaluate(f: PowerSeries, z: complex) -> complex:
    """Valutazione di Horner della serie troncata in un punto del disco aperto."""
    z = complex(z)
    if abs(z) >= 1.0:
        raise DomainError(f"z: |z| = {abs(z):.6g} non sta nel disco aperto.")
    return complex(npoly.polyval(z, f.coeffs))


def evaluate_many(rows: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Valuta m serie (righe di `rows`) su molti punti; ritorna una matrice (P, m)."""
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size and np.max(np.abs(pts)) >= 1.0:
        raise DomainError("points: punti fuori dal disco aperto.")
    out = np.empty((pts.size, rows.shape[0]), dtype=complex)
    n = rows.shape[1]
    for start in range(0, pts.size, _EVAL_CHUNK):
        chunk = pts[start : start + _EVAL_CHUNK]
        vander = np.vander(chunk, n, increasing=True)
        out[start : start + chunk.size] = vander @ rows.T
    return out


def boundary_values(f: PowerSeries, nodes: int = BOUNDARY_NODES) -> np.ndarray:
    """Valori sul cerchio unitario ai nodi t_j = 2 pi j / nodes."""
    t = 2.0 * np.pi * np.arange(nodes) / nodes
    return npoly.polyval(np.exp(1j * t), f.coeffs)


def boundary_inner_product(f: PowerSeries, g: PowerSeries, nodes: int = BOUNDARY_NODES) -> complex:
    """Prodotto di Hardy come media trapezoidale di f conj(g) sul cerchio."""
    fv = boundary_values(f, nodes)
    gv = boundary_values(g, nodes)
    return complex(np.mean(fv * np.conj(gv)))


def kernel_tail_bound(r: float, truncation: int) -> float:
    """Coda r^{2N} / (1 - r^2) scartata da <k_w, k_w> nel caso Hardy."""
    r = float(r)
    if not 0.0 <= r < 1.0:
        raise DomainError("r: deve stare in [0, 1).")
    return r ** (2 * truncation) / (1.0 - r * r)
