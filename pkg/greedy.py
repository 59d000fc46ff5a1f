from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from errors import DegenerateSystem, DomainError, EmptyGrid
from kernels import check_parameter, kernel_norm_squared
from ortho import OrthoSystem, empty_system, extend, project
from results import ApproxResult, build_result
from settings import (
    DEFAULT_DELTA,
    DEFAULT_GRID_ANGULAR,
    DEFAULT_GRID_RADIAL,
    DEFAULT_LIC_FLOOR,
)
from space import PowerSeries, SpaceSpec, evaluate_many, inner_product, norm

logger = logging.getLogger(__name__)

MIN_GRID_COUNT = 4
STOP_RESIDUAL = 1e-12
# sotto questo denominatore il guadagno in forma chiusa perde cifre significative
GAIN_DENOM_FLOOR = 1e-6
# tolleranza relativa per considerare due guadagni in parita'
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class PolarGrid:
    """Griglia polare: raggi (Chebyshev in [0, r_max] o espliciti) per angoli equispaziati."""

    radial: int = DEFAULT_GRID_RADIAL
    angular: int = DEFAULT_GRID_ANGULAR
    radii: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.radii is not None:
            radii = tuple(float(r) for r in self.radii)
            if not radii or any(r < 0.0 for r in radii):
                raise ValueError("grid.radii: valori non validi.")
            object.__setattr__(self, "radii", radii)
            object.__setattr__(self, "radial", len(radii))
        elif int(self.radial) < MIN_GRID_COUNT:
            raise ValueError(f"grid.radial: deve essere >= {MIN_GRID_COUNT}.")
        if int(self.angular) < MIN_GRID_COUNT:
            raise ValueError(f"grid.angular: deve essere >= {MIN_GRID_COUNT}.")
        object.__setattr__(self, "radial", int(self.radial))
        object.__setattr__(self, "angular", int(self.angular))

    @classmethod
    def parse(cls, text: str) -> PolarGrid:
        """Formato 'RxA', es. '64x128'."""
        try:
            radial, angular = (int(part) for part in text.lower().split("x"))
        except ValueError as exc:
            raise ValueError(f"grid: formato '{text}' non valido (usa RxA).") from exc
        return cls(radial=radial, angular=angular)

    def radii_for(self, r_max: float) -> np.ndarray:
        if self.radii is not None:
            radii = np.asarray(self.radii, dtype=float)
            if radii.max() > r_max * (1.0 + 1e-12):
                raise DomainError(f"grid.radii: raggio oltre r_max = {r_max}.")
            return radii
        i = np.arange(self.radial)
        return r_max * (1.0 - np.cos(np.pi * i / (self.radial - 1))) / 2.0

    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.angular) / self.angular

    def points(self, r_max: float) -> np.ndarray:
        """Matrice (raggi, angoli) dei punti, in ordine radiale poi angolare."""
        return self.radii_for(r_max)[:, None] * np.exp(1j * self.angles())[None, :]

    def spacing(self, r_max: float) -> float:
        radii = np.unique(self.radii_for(r_max))
        radial_gap = float(np.max(np.diff(radii))) if radii.size > 1 else r_max / 4.0
        return max(radial_gap, r_max * np.pi / self.angular)


@dataclass(frozen=True)
class GreedyConfig:
    rho: float = 1.0
    grid: PolarGrid = field(default_factory=PolarGrid)
    n_terms: int = 8
    delta: float = DEFAULT_DELTA
    refine: bool = True
    lic_floor: float = DEFAULT_LIC_FLOOR

    def __post_init__(self) -> None:
        if not 0.0 < float(self.rho) <= 1.0:
            raise ValueError("rho: deve stare in (0, 1].")
        if int(self.n_terms) < 1:
            raise ValueError("n_terms: deve essere >= 1.")
        if not self.delta > 0:
            raise ValueError("delta: deve essere > 0.")

    @property
    def grid_radial(self) -> int:
        return self.grid.radial

    @property
    def grid_angular(self) -> int:
        return self.grid.angular


def clamp_to_disc(b: complex, r_max: float) -> complex:
    b = complex(b)
    r = abs(b)
    return b * (r_max / r) if r > r_max else b


def gain_scan(
    residual: PowerSeries,
    system: OrthoSystem,
    points: np.ndarray,
    delta: float = DEFAULT_DELTA,
) -> np.ndarray:
    """Guadagni |<g, E_b>| / rho_b su molti punti tramite la proprieta' riproducente.

    <g, E_b> = g(b) / ||K_b|| e rho_b^2 = 1 - sum_t |B_t(b)|^2 / ||K_b||^2.
    I punti non ammissibili (entro delta dai parametri o con rho_b troppo piccolo) valgono NaN.
    """
    spec = system.spec
    pts = np.asarray(points, dtype=complex).ravel()
    kn2 = kernel_norm_squared(spec, pts)
    rows = np.vstack([residual.coeffs[None, :], system.basis_matrix])
    values = evaluate_many(rows, pts)

    numerator = np.abs(values[:, 0]) / np.sqrt(kn2)
    rho2 = 1.0 - np.sum(np.abs(values[:, 1:]) ** 2, axis=1) / kn2
    ok = rho2 > GAIN_DENOM_FLOOR**2
    if len(system.source):
        dist = np.abs(pts[:, None] - system.source.as_array()[None, :])
        ok &= np.all(dist >= delta, axis=1)

    gains = np.full(pts.size, np.nan)
    gains[ok] = numerator[ok] / np.sqrt(rho2[ok])
    return gains


def energy_gain(
    f_residual: PowerSeries, system: OrthoSystem, b: complex, delta: float = DEFAULT_DELTA
) -> float:
    """|<f, B^b_{n+1}>| calcolato con extend."""
    element, _ = extend(system, b, delta)
    return abs(inner_product(f_residual, element, system.spec))


def pick_candidate(gains: np.ndarray, rho: float) -> tuple[int, float]:
    if not np.any(np.isfinite(gains)):
        raise EmptyGrid("select_next: nessun punto di griglia ammissibile.")
    top = float(np.nanmax(gains))
    threshold = top * (1.0 - _TIE_RTOL) if rho >= 1.0 else rho * top
    candidates = np.flatnonzero(np.nan_to_num(gains, nan=-1.0) >= threshold)
    return int(candidates[0]), top


def _select(residual: PowerSeries, system: OrthoSystem, cfg: GreedyConfig) -> tuple[complex, float, float]:
    points = cfg.grid.points(system.spec.r_max).ravel()
    gains = gain_scan(residual, system, points, cfg.delta)
    idx, top = pick_candidate(gains, cfg.rho)
    return complex(points[idx]), float(gains[idx]), top


def select_next(f: PowerSeries, system: OrthoSystem, cfg: GreedyConfig) -> complex:
    """Punto di griglia con guadagno >= rho * massimo (rho = 1: argmax, parita' al primo indice)."""
    _, residual = project(f, system)
    b, gain, top = _select(residual, system, cfg)
    logger.debug("select_next: b=%s gain=%.6g max=%.6g", b, gain, top)
    return b


def refine_parameter(
    residual: PowerSeries,
    system: OrthoSystem,
    b0: complex,
    step: float,
    delta: float = DEFAULT_DELTA,
) -> tuple[complex, float]:
    """Nelder-Mead su (Re, Im) attorno a b0; ritorna il punto migliore e il suo guadagno."""
    r_max = system.spec.r_max

    def gain_at(b: complex) -> float:
        g = gain_scan(residual, system, np.array([clamp_to_disc(b, r_max)]), delta)[0]
        return float(g) if np.isfinite(g) else 0.0

    def loss(x: np.ndarray) -> float:
        return -gain_at(complex(x[0], x[1]))

    start_gain = gain_at(b0)
    x0 = np.array([b0.real, b0.imag])
    simplex = np.array([x0, x0 + [step, 0.0], x0 + [0.0, step]])
    res = minimize(
        loss,
        x0,
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-16, "maxiter": 600},
    )
    best = clamp_to_disc(complex(res.x[0], res.x[1]), r_max)
    best_gain = gain_at(best)
    if best_gain > start_gain:
        return best, best_gain
    return complex(b0), start_gain


def poafd(f: PowerSeries, spec: SpaceSpec, cfg: GreedyConfig) -> ApproxResult:
    """rho-Weak-POAFD: n_terms selezioni successive con massimo guadagno (pesato da rho)."""
    if f.truncation != spec.truncation:
        raise ValueError("f: lunghezza diversa dal troncamento dello spazio.")
    system = empty_system(spec, cfg.lic_floor)
    residual = f
    trace = [norm(f, spec)]
    gains: list[float] = []
    grid_max: list[float] = []
    step = 0.5 * cfg.grid.spacing(spec.r_max)

    for k in range(cfg.n_terms):
        if trace[-1] < STOP_RESIDUAL:
            logger.debug("poafd: residuo %.3e, arresto anticipato al passo %d", trace[-1], k)
            break
        b, gain, top = _select(residual, system, cfg)
        if cfg.rho >= 1.0 and cfg.refine:
            b, gain = refine_parameter(residual, system, b, step, cfg.delta)
        check_parameter(spec, b, "b")
        try:
            system = system.extended(b, cfg.delta)
        except DegenerateSystem:
            # il raffinamento puo' avvicinarsi troppo a un parametro esistente
            b, gain, top = _select(residual, system, cfg)
            system = system.extended(b, cfg.delta)
        _, residual = project(f, system)
        trace.append(norm(residual, spec))
        gains.append(gain)
        grid_max.append(top)
        logger.debug("poafd: passo %d b=%s gain=%.6g residuo=%.6g", k + 1, b, gain, trace[-1])

    logger.info("poafd: %d termini, residuo %.6g", system.n, trace[-1])
    diagnostics = {"method": "poafd", "rho": cfg.rho, "gains": gains, "grid_max_gains": grid_max}
    return build_result(f, system, trace, diagnostics)
