from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.special import gammaln

from errors import DomainError
from settings import DEFAULT_DELTA
from space import PowerSeries, SpaceSpec, norm

logger = logging.getLogger(__name__)

# tolleranza relativa sul bordo |w| = r_max (arrotondamenti dopo proiezioni radiali)
_RMAX_SLACK = 1e-12


@dataclass(frozen=True)
class ParameterTuple:
    """Tupla ordinata (a_1, ..., a_n) di parametri nel disco."""

    points: tuple[complex, ...] = ()

    def __post_init__(self) -> None:
        pts = tuple(complex(p) for p in self.points)
        for p in pts:
            if not (np.isfinite(p.real) and np.isfinite(p.imag)):
                raise ValueError("points: parametro non finito.")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, values: Iterable[complex]) -> ParameterTuple:
        return cls(tuple(values))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[complex]:
        return iter(self.points)

    def __getitem__(self, index: int) -> complex:
        return self.points[index]

    @property
    def multiplicities(self) -> tuple[int, ...]:
        """l(a_k): occorrenze di a_k in (a_1, ..., a_k)."""
        return tuple(self.points[: k + 1].count(a) for k, a in enumerate(self.points))

    @property
    def is_distinct(self) -> bool:
        return all(m == 1 for m in self.multiplicities)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex)

    def max_modulus(self) -> float:
        return float(max((abs(p) for p in self.points), default=0.0))

    def check_domain(self, spec: SpaceSpec) -> None:
        for k, p in enumerate(self.points):
            check_parameter(spec, p, f"a_{k + 1}")

    def appended(self, b: complex) -> ParameterTuple:
        return ParameterTuple(self.points + (complex(b),))

    def replaced(self, index: int, value: complex) -> ParameterTuple:
        pts = list(self.points)
        pts[index] = complex(value)
        return ParameterTuple(tuple(pts))

    def without(self, index: int) -> ParameterTuple:
        return ParameterTuple(self.points[:index] + self.points[index + 1 :])


@dataclass(frozen=True, eq=False)
class MultipleKernel:
    """Derivata (d/d conj w)^order del nucleo K_w come serie troncata."""

    parameter: complex
    order: int
    series: PowerSeries


def check_parameter(spec: SpaceSpec, w: complex, name: str = "w") -> None:
    if abs(complex(w)) > spec.r_max * (1.0 + _RMAX_SLACK):
        raise DomainError(f"{name}: |w| = {abs(complex(w)):.6g} supera r_max = {spec.r_max}.")


def kernel(spec: SpaceSpec, w: complex, m: int = 0) -> MultipleKernel:
    """Nucleo multiplo: coefficiente k = k(k-1)...(k-m+1) conj(w)^(k-m) / h_k per k >= m."""
    w = complex(w)
    check_parameter(spec, w)
    n = spec.truncation
    if isinstance(m, bool) or int(m) != m or not 0 <= int(m) < n // 2:
        raise ValueError(f"m: ordine {m} fuori da [0, {n // 2}).")
    m = int(m)

    c = np.zeros(n, dtype=complex)
    k = np.arange(m, n, dtype=float)
    log_falling = gammaln(k + 1.0) - gammaln(k - m + 1.0)
    log_h = np.log(spec.weights[m:])
    if w == 0:
        c[m] = np.exp(log_falling[0] - log_h[0])
    else:
        p = k - m
        magnitude = np.exp(log_falling + p * np.log(abs(w)) - log_h)
        c[m:] = magnitude * np.exp(-1j * np.angle(w) * p)
    if not np.all(np.isfinite(c)):
        raise ValueError("kernel: coefficienti non finiti, troncamento troppo corto per l'ordine.")
    return MultipleKernel(w, m, PowerSeries(c))


def normalized_kernel(spec: SpaceSpec, w: complex, m: int = 0) -> MultipleKernel:
    base = kernel(spec, w, m)
    size = norm(base.series, spec)
    if size == 0.0:
        raise ValueError("kernel: norma nulla (uso scorretto del troncamento).")
    return MultipleKernel(base.parameter, base.order, base.series / size)


def multiple_kernels(spec: SpaceSpec, params: ParameterTuple, normalized: bool = False) -> list[MultipleKernel]:
    """Nuclei multipli della tupla, con ordine l(a_k) - 1."""
    build = normalized_kernel if normalized else kernel
    return [build(spec, a, l - 1) for a, l in zip(params.points, params.multiplicities)]


def kernel_inner(spec: SpaceSpec, v: complex, w: complex) -> complex:
    """<K_v, K_w> = K_v(w) in forma chiusa."""
    v, w = complex(v), complex(w)
    check_parameter(spec, v, "v")
    check_parameter(spec, w, "w")
    base = 1.0 - np.conj(v) * w
    if spec.is_hardy:
        return complex(1.0 / base)
    return complex(base ** (-(2.0 + spec.alpha)))


def kernel_norm_squared(spec: SpaceSpec, points: np.ndarray) -> np.ndarray:
    """||K_w||^2 della serie troncata, vettoriale sui punti."""
    r2 = np.abs(np.asarray(points, dtype=complex)) ** 2
    return npoly.polyval(r2, spec.kernel_weights)


def closed_kernel_norm_squared(spec: SpaceSpec, r: np.ndarray | float) -> np.ndarray:
    """||K_w||^2 esatto (senza troncamento) in funzione di r = |w| < 1."""
    r = np.asarray(r, dtype=float)
    if np.any(r >= 1.0):
        raise DomainError("r: deve stare in [0, 1).")
    exponent = 1.0 if spec.is_hardy else 2.0 + spec.alpha
    return (1.0 - r * r) ** (-exponent)


def merge_close(params: ParameterTuple, delta: float = DEFAULT_DELTA) -> ParameterTuple:
    """Punti entro `delta` collassano sul baricentro del gruppo (molteplicita' crescente)."""
    if not delta > 0:
        raise ValueError("delta: deve essere > 0.")
    if len(params) < 2:
        return params

    pts = params.as_array()
    coords = np.column_stack([pts.real, pts.imag])
    labels = fcluster(linkage(coords, method="single"), t=delta, criterion="distance")

    merged = pts.copy()
    for label in np.unique(labels):
        members = np.flatnonzero(labels == label)
        if members.size < 2:
            continue
        centroid = complex(np.mean(pts[members]))
        merged[members] = centroid
        logger.debug("merge: %d parametri fusi in %s", members.size, centroid)
    return ParameterTuple(tuple(complex(p) for p in merged))


def szego_series(truncation: int, w: complex) -> PowerSeries:
    """Serie geometrica di 1 / (1 - conj(w) z)."""
    w = complex(w)
    if abs(w) >= 1.0:
        raise DomainError(f"w: |w| = {abs(w):.6g} non sta nel disco aperto.")
    k = np.arange(truncation)
    c = np.zeros(truncation, dtype=complex)
    if w == 0:
        c[0] = 1.0
    else:
        c[:] = np.exp(k * (np.log(abs(w)) - 1j * np.angle(w)))
    return PowerSeries(c)


def blaschke_factor(truncation: int, w: complex) -> PowerSeries:
    """Serie di (z - w) / (1 - conj(w) z)."""
    g = szego_series(truncation, w).coeffs
    c = -complex(w) * g
    c[1:] += g[:-1]
    return PowerSeries(c)
