from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy.optimize import least_squares

from errors import BudgetExceeded, DegenerateSystem, DomainError
from greedy import GreedyConfig, PolarGrid, clamp_to_disc, gain_scan, pick_candidate, poafd, refine_parameter
from kernels import ParameterTuple, merge_close
from ortho import empty_system, gram_schmidt, project
from results import ApproxResult, build_result
from settings import (
    DEFAULT_DELTA,
    DEFAULT_FD_STEP,
    DEFAULT_LIC_FLOOR,
    DEFAULT_MAX_CYCLES,
    DEFAULT_SEED,
    DEFAULT_STARTS,
    DEFAULT_TOL_OBJ,
    DEFAULT_WORKERS,
)
from space import PowerSeries, SpaceSpec, norm

__all__ = [
    "ApproxResult",
    "BRUTE_FORCE_BUDGET",
    "NBestConfig",
    "brute_force",
    "cyclic_descent",
    "objective",
    "objective_gradient",
    "polish_least_squares",
    "solve",
]

logger = logging.getLogger(__name__)

BRUTE_FORCE_BUDGET = 10**7
BRUTE_FORCE_MAX_N = 3
# candidati della ricerca esaustiva rivalutati con la proiezione esatta
_EXACT_RECHECK = 16
_ARMIJO = 1e-4
_MAX_BACKTRACK = 30


@dataclass(frozen=True)
class NBestConfig:
    """Parametri del solutore n-best multi-start."""

    n: int = 2
    starts: int = DEFAULT_STARTS
    grid: PolarGrid = field(default_factory=lambda: PolarGrid(radial=16, angular=32))
    greedy_grid: PolarGrid | None = None
    tol_obj: float = DEFAULT_TOL_OBJ
    max_cycles: int = DEFAULT_MAX_CYCLES
    fd_step: float = DEFAULT_FD_STEP
    delta: float = DEFAULT_DELTA
    seed: int = DEFAULT_SEED
    workers: int = DEFAULT_WORKERS
    lic_floor: float = DEFAULT_LIC_FLOOR
    max_gradient_steps: int = 200
    polish: bool = True
    oracle_budget: int = 2_000_000

    def __post_init__(self) -> None:
        for name in ("n", "starts", "max_cycles", "workers"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or int(value) < 1:
                raise ValueError(f"{name}: deve essere un intero >= 1.")
            object.__setattr__(self, name, int(value))
        if not self.tol_obj > 0:
            raise ValueError("tol_obj: deve essere > 0.")
        if not 1e-9 < self.fd_step < 1e-3:
            raise ValueError("fd_step: deve stare in (1e-9, 1e-3).")
        if not self.delta > 0:
            raise ValueError("delta: deve essere > 0.")
        if int(self.max_gradient_steps) < 0:
            raise ValueError("max_gradient_steps: deve essere >= 0.")

    def greedy_config(self) -> GreedyConfig:
        return GreedyConfig(
            rho=1.0,
            grid=self.greedy_grid or PolarGrid(),
            n_terms=self.n,
            delta=self.delta,
            lic_floor=self.lic_floor,
        )


# ------------------------------------------------------------------ #
#  Funzione obiettivo                                                 #
# ------------------------------------------------------------------ #

def objective(
    f: PowerSeries, spec: SpaceSpec, params: ParameterTuple, lic_floor: float = DEFAULT_LIC_FLOOR
) -> float:
    """A(f; a) = ||f - sum <f, B_t> B_t||."""
    system = gram_schmidt(spec, params, lic_floor)
    _, residual = project(f, system)
    return norm(residual, spec)


def _safe_objective(f: PowerSeries, spec: SpaceSpec, params: ParameterTuple, lic_floor: float) -> float:
    try:
        return objective(f, spec, params, lic_floor)
    except (DegenerateSystem, DomainError):
        return float("inf")


def _to_vector(params: ParameterTuple) -> np.ndarray:
    pts = params.as_array()
    return np.concatenate([pts.real, pts.imag])


def _from_vector(x: np.ndarray) -> ParameterTuple:
    n = x.size // 2
    return ParameterTuple(tuple(complex(x[k], x[n + k]) for k in range(n)))


def _clamp_vector(x: np.ndarray, r_max: float) -> np.ndarray:
    return _to_vector(ParameterTuple(tuple(clamp_to_disc(p, r_max) for p in _from_vector(x))))


def objective_gradient(
    f: PowerSeries,
    spec: SpaceSpec,
    params: ParameterTuple,
    fd_step: float = DEFAULT_FD_STEP,
    lic_floor: float = DEFAULT_LIC_FLOOR,
) -> np.ndarray:
    """Gradiente di A^2 per differenze centrali: d/dRe a_k + i d/dIm a_k.

    Se uno dei due punti esce dal dominio si usa la differenza unilaterale.
    """
    x = _to_vector(params)
    center = _safe_objective(f, spec, params, lic_floor) ** 2
    grad = np.zeros_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = fd_step
        up = _safe_objective(f, spec, _from_vector(x + e), lic_floor) ** 2
        down = _safe_objective(f, spec, _from_vector(x - e), lic_floor) ** 2
        if np.isfinite(up) and np.isfinite(down):
            grad[j] = (up - down) / (2.0 * fd_step)
        elif np.isfinite(up):
            grad[j] = (up - center) / fd_step
        elif np.isfinite(down):
            grad[j] = (center - down) / fd_step
        else:
            grad[j] = np.nan
    n = len(params)
    return grad[:n] + 1j * grad[n:]


# ------------------------------------------------------------------ #
#  Oracolo esaustivo                                                  #
# ------------------------------------------------------------------ #

def brute_force(
    f: PowerSeries,
    spec: SpaceSpec,
    n: int,
    grid: PolarGrid,
    lic_floor: float = DEFAULT_LIC_FLOOR,
    delta: float = DEFAULT_DELTA,
) -> ApproxResult:
    """Minimo globale di A(f; a) sui multiinsiemi di n punti della griglia."""
    if not 1 <= n <= BRUTE_FORCE_MAX_N:
        raise ValueError(f"n: la ricerca esaustiva supporta 1 <= n <= {BRUTE_FORCE_MAX_N}.")
    points = np.unique(grid.points(spec.r_max).ravel())
    size = points.size
    if size**n > BRUTE_FORCE_BUDGET:
        raise BudgetExceeded(f"brute_force: {size}^{n} valutazioni oltre il budget {BRUTE_FORCE_BUDGET:.0e}.")

    f_norm2 = norm(f, spec) ** 2
    candidates: list[tuple[float, int, tuple[int, ...]]] = []
    evaluated = 0
    for prefix in itertools.combinations_with_replacement(range(size), n - 1):
        start = prefix[-1] if prefix else 0
        prefix_params = ParameterTuple(tuple(points[i] for i in prefix))
        try:
            system = gram_schmidt(spec, prefix_params, lic_floor) if prefix else empty_system(spec, lic_floor)
        except DegenerateSystem:
            continue
        _, residual = project(f, system)
        g2 = norm(residual, spec) ** 2

        tail = points[start:]
        gains = gain_scan(residual, system, tail, delta)
        evaluated += tail.size
        if np.any(np.isfinite(gains)):
            j = int(np.nanargmax(gains))
            approx = max(g2 - float(gains[j]) ** 2, 0.0)
            candidates.append((approx, len(candidates), prefix + (start + j,)))
        # b ripetuto: molteplicita' valutata con la proiezione esatta
        if prefix:
            value = _safe_objective(f, spec, prefix_params.appended(points[start]), lic_floor)
            if np.isfinite(value):
                candidates.append((value**2, len(candidates), prefix + (start,)))

    if not candidates:
        raise DegenerateSystem("brute_force: nessuna tupla ammissibile sulla griglia.", 0.0)

    candidates.sort()
    best_value, best_params = float("inf"), None
    for _, _, indices in candidates[:_EXACT_RECHECK]:
        params = ParameterTuple(tuple(points[i] for i in indices))
        value = _safe_objective(f, spec, params, lic_floor)
        if value < best_value:
            best_value, best_params = value, params
    if best_params is None:
        raise DegenerateSystem("brute_force: nessuna tupla ammissibile sulla griglia.", 0.0)

    logger.info("brute_force: n=%d, %d punti, obiettivo %.6g", n, size, best_value)
    system = gram_schmidt(spec, best_params, lic_floor)
    diagnostics = {
        "method": "brute_force",
        "grid_size": size,
        "evaluations": evaluated,
        "f_norm": float(np.sqrt(f_norm2)),
    }
    return build_result(f, system, [float(np.sqrt(f_norm2)), best_value], diagnostics)


# ------------------------------------------------------------------ #
#  Discesa ciclica e raffinamento congiunto                           #
# ------------------------------------------------------------------ #

def _separate(params: ParameterTuple, spec: SpaceSpec, delta: float) -> ParameterTuple:
    """Parametri coincidenti spostati di 10*delta lungo direzioni diverse."""
    seen: dict[complex, int] = {}
    out = []
    for p in params:
        count = seen.get(p, 0)
        seen[p] = count + 1
        if count:
            shift = 10.0 * delta * count * np.exp(1j * np.pi * (0.25 + 0.5 * count))
            p = clamp_to_disc(p + shift, spec.r_max)
        out.append(p)
    return ParameterTuple(tuple(out))


def _admissible(f: PowerSeries, spec: SpaceSpec, params: ParameterTuple, lic_floor: float) -> ParameterTuple:
    """Sottotupla piu' lunga (in ordine) con sistema non degenere."""
    kept = ParameterTuple()
    for p in params:
        trial = kept.appended(p)
        try:
            gram_schmidt(spec, trial, lic_floor)
        except DegenerateSystem:
            logger.debug("descent: parametro %s scartato (sistema degenere)", p)
            continue
        kept = trial
    return kept


def _coordinate_step(
    f: PowerSeries, spec: SpaceSpec, params: ParameterTuple, k: int, current: float, cfg: NBestConfig
) -> tuple[ParameterTuple, float]:
    others = params.without(k)
    try:
        system = gram_schmidt(spec, others, cfg.lic_floor) if len(others) else empty_system(spec, cfg.lic_floor)
    except DegenerateSystem:
        return params, current
    _, residual = project(f, system)

    points = cfg.grid.points(spec.r_max).ravel()
    gains = gain_scan(residual, system, points, cfg.delta)
    if not np.any(np.isfinite(gains)):
        return params, current
    idx, _ = pick_candidate(gains, 1.0)
    start = complex(points[idx])
    own = gain_scan(residual, system, np.array([params[k]]), cfg.delta)[0]
    if np.isfinite(own) and own > gains[idx]:
        start = params[k]

    b, _ = refine_parameter(residual, system, start, 0.5 * cfg.grid.spacing(spec.r_max), cfg.delta)
    trial = params.replaced(k, b)
    value = _safe_objective(f, spec, trial, cfg.lic_floor)
    if value < current:
        return trial, value
    return params, current


def _gradient_pass(
    f: PowerSeries, spec: SpaceSpec, params: ParameterTuple, current: float, cfg: NBestConfig
) -> tuple[ParameterTuple, float, int]:
    """Discesa del gradiente proiettata su A^2 (passo Barzilai-Borwein con Armijo)."""
    x = _to_vector(params)
    fx = current**2
    step = 1.0
    prev: tuple[np.ndarray, np.ndarray] | None = None
    steps = 0
    for steps in range(1, cfg.max_gradient_steps + 1):
        cgrad = objective_gradient(f, spec, _from_vector(x), cfg.fd_step, cfg.lic_floor)
        grad = np.concatenate([cgrad.real, cgrad.imag])
        if not np.all(np.isfinite(grad)) or np.linalg.norm(grad) < 1e-14:
            break
        if prev is not None:
            s, y = x - prev[0], grad - prev[1]
            sy = float(s @ y)
            step = float(s @ s) / sy if sy > 0 else 2.0 * step

        accepted = False
        for _ in range(_MAX_BACKTRACK):
            trial = _clamp_vector(x - step * grad, spec.r_max)
            trial = _to_vector(merge_close(_from_vector(trial), cfg.delta))
            value = _safe_objective(f, spec, _from_vector(trial), cfg.lic_floor) ** 2
            if value <= fx - _ARMIJO * float(grad @ (x - trial)) and value < fx:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        prev = (x, grad)
        gain = fx - value
        x, fx = trial, value
        if gain < cfg.tol_obj:
            break
    return _from_vector(x), float(np.sqrt(fx)), steps


def polish_least_squares(
    f: PowerSeries, spec: SpaceSpec, params: ParameterTuple, cfg: NBestConfig
) -> tuple[ParameterTuple, float, bool]:
    """Rifinitura ai minimi quadrati del vettore residuo sqrt(h) (f - P f), con vincoli a scatola."""
    current = _safe_objective(f, spec, params, cfg.lic_floor)
    if len(params) == 0 or not np.isfinite(current):
        return params, current, False
    root_h = np.sqrt(spec.weights)
    fallback = np.concatenate([(root_h * f.coeffs).real, (root_h * f.coeffs).imag])

    def residual_vector(x: np.ndarray) -> np.ndarray:
        try:
            system = gram_schmidt(spec, _from_vector(x), cfg.lic_floor)
        except (DegenerateSystem, DomainError):
            return fallback
        _, res = project(f, system)
        scaled = root_h * res.coeffs
        return np.concatenate([scaled.real, scaled.imag])

    x0 = _to_vector(params)
    try:
        res = least_squares(
            residual_vector,
            x0,
            bounds=(-spec.r_max, spec.r_max),
            method="trf",
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
            max_nfev=100 * x0.size,
        )
    except ValueError as exc:
        logger.debug("polish: least_squares non applicabile (%s)", exc)
        return params, current, False

    candidate = _from_vector(res.x)
    # il box [-r_max, r_max]^2 contiene il disco: il vincolo |a| <= r_max va ricontrollato
    if candidate.max_modulus() > spec.r_max:
        return params, current, False
    value = _safe_objective(f, spec, candidate, cfg.lic_floor)
    if value < current:
        return candidate, value, True
    return params, current, False


def cyclic_descent(
    f: PowerSeries, spec: SpaceSpec, tuple0: ParameterTuple, cfg: NBestConfig
) -> ApproxResult:
    """Discesa ciclica per coordinate, poi gradiente proiettato congiunto e rifinitura finale."""
    tuple0.check_domain(spec)
    params = merge_close(tuple0, cfg.delta)
    start, start_value = params, _safe_objective(f, spec, params, cfg.lic_floor)
    if not params.is_distinct:
        params = _separate(params, spec, cfg.delta)
    current = _safe_objective(f, spec, params, cfg.lic_floor)
    if not np.isfinite(current):
        params = _admissible(f, spec, params, cfg.lic_floor)
        current = _safe_objective(f, spec, params, cfg.lic_floor)
    if not np.isfinite(current):
        raise DegenerateSystem("cyclic_descent: nessun sottosistema ammissibile.", 0.0)

    trace = [current]
    cycles = 0
    for cycles in range(1, cfg.max_cycles + 1):
        before = current
        for k in range(len(params)):
            params, current = _coordinate_step(f, spec, params, k, current, cfg)
        trace.append(current)
        logger.debug("descent: ciclo %d obiettivo %.6g", cycles, current)
        if before**2 - current**2 < cfg.tol_obj:
            break

    gradient_steps = 0
    if cfg.max_gradient_steps and len(params):
        params, value, gradient_steps = _gradient_pass(f, spec, params, current, cfg)
        if value < current:
            current = value
            trace.append(current)

    polished = False
    if cfg.polish:
        params, value, polished = polish_least_squares(f, spec, params, cfg)
        if polished:
            current = value
            trace.append(current)

    # l'uscita non peggiora mai la tupla iniziale (con le sue molteplicita')
    kept_start = bool(np.isfinite(start_value)) and not current < start_value
    if kept_start:
        params, trace = start, [start_value]

    system = gram_schmidt(spec, params, cfg.lic_floor)
    diagnostics: dict[str, Any] = {
        "method": "cyclic_descent",
        "cycles": cycles,
        "gradient_steps": gradient_steps,
        "polished": polished,
        "kept_start": kept_start,
    }
    return build_result(f, system, trace, diagnostics)


# ------------------------------------------------------------------ #
#  Driver multi-start                                                 #
# ------------------------------------------------------------------ #

def _random_points(rng: np.random.Generator, count: int, radius: float) -> list[complex]:
    r = rng.uniform(size=count) * radius
    theta = rng.uniform(size=count) * 2.0 * np.pi
    return [complex(v) for v in r * np.exp(1j * theta)]


def _start_tuples(f: PowerSeries, spec: SpaceSpec, cfg: NBestConfig) -> list[tuple[str, ParameterTuple]]:
    rng = np.random.default_rng(cfg.seed)
    padding = _random_points(rng, cfg.n, 0.5 * spec.r_max)
    randoms = [_random_points(rng, cfg.n, spec.r_max) for _ in range(cfg.starts - 1)]

    greedy = poafd(f, spec, cfg.greedy_config()).parameters
    points = list(greedy) + padding[: cfg.n - len(greedy)]
    starts = [("greedy", ParameterTuple(tuple(points)))]
    starts += [("random", ParameterTuple(tuple(pts))) for pts in randoms]

    size = np.unique(cfg.grid.points(spec.r_max).ravel()).size
    if cfg.n <= 2 and size**cfg.n <= cfg.oracle_budget:
        oracle = brute_force(f, spec, cfg.n, cfg.grid, cfg.lic_floor, cfg.delta)
        starts.append(("grid", oracle.parameters))
    return starts


def _run_start(
    f: PowerSeries, spec: SpaceSpec, cfg: NBestConfig, index: int, kind: str, params: ParameterTuple
) -> tuple[int, str, float, ApproxResult | None, str]:
    initial = _safe_objective(f, spec, merge_close(params, cfg.delta), cfg.lic_floor)
    try:
        result = cyclic_descent(f, spec, params, cfg)
    except DegenerateSystem as exc:
        logger.debug("solve: start %d degenere (%s)", index, exc)
        return index, kind, initial, None, str(exc)
    return index, kind, initial, result, ""


def solve(f: PowerSeries, spec: SpaceSpec, cfg: NBestConfig) -> ApproxResult:
    """Migliore discesa ciclica su start greedy, casuali (seed fisso) ed eventualmente di griglia."""
    if f.truncation != spec.truncation:
        raise ValueError("f: lunghezza diversa dal troncamento dello spazio.")
    if norm(f, spec) == 0.0:
        raise ValueError("f: la funzione obiettivo e' nulla.")

    starts = _start_tuples(f, spec, cfg)
    jobs = [(i, kind, params) for i, (kind, params) in enumerate(starts)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(lambda job: _run_start(f, spec, cfg, *job), jobs))
    else:
        outcomes = [_run_start(f, spec, cfg, *job) for job in jobs]

    finished = [o for o in outcomes if o[3] is not None]
    if not finished:
        raise DegenerateSystem("solve: tutti gli start sono degeneri.", 0.0)
    best = min(finished, key=lambda o: (o[3].objective, o[0]))
    result = best[3]

    table = [
        {
            "index": index,
            "kind": kind,
            "initial_objective": initial,
            "objective": res.objective if res is not None else None,
            "cycles": res.diagnostics.get("cycles") if res is not None else None,
            "error": error or None,
        }
        for index, kind, initial, res, error in outcomes
    ]
    logger.info("solve: n=%d, %d start, migliore #%d obiettivo %.6g", cfg.n, len(starts), best[0], result.objective)
    diagnostics = dict(result.diagnostics)
    diagnostics.update({"method": "nbest", "best_start": best[0], "starts": table, "seed": cfg.seed})
    return replace(result, diagnostics=diagnostics)
