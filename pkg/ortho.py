from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from errors import DegenerateSystem, DegenerateTuple, DomainError
from kernels import (
    ParameterTuple,
    blaschke_factor,
    kernel,
    multiple_kernels,
    szego_series,
    check_parameter,
)
from settings import DEFAULT_DELTA, DEFAULT_LIC_FLOOR
from space import PowerSeries, SpaceSpec, norm

logger = logging.getLogger(__name__)

# soglia relativa per il "primo coefficiente non nullo" della convenzione di fase
_PHASE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Matrice di Gram <E_i, E_j> dei nuclei multipli normalizzati."""

    entries: np.ndarray

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    @property
    def min_eigenvalue(self) -> float:
        if self.entries.size == 0:
            return 1.0
        return float(self.eigenvalues[0])


@dataclass(frozen=True, eq=False)
class OrthoSystem:
    """Sistema ortonormale B_1..B_n ottenuto per Gram-Schmidt dai nuclei multipli.

    `coeff_matrix[t, s]` esprime B_t sui nuclei multipli non normalizzati:
    B_t = sum_s coeff_matrix[t, s] K~_s (matrice triangolare inferiore).
    """

    spec: SpaceSpec
    source: ParameterTuple
    basis: tuple[PowerSeries, ...]
    coeff_matrix: np.ndarray
    denominators: tuple[float, ...]
    lic_floor: float = DEFAULT_LIC_FLOOR

    @property
    def n(self) -> int:
        return len(self.basis)

    @cached_property
    def basis_matrix(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((0, self.spec.truncation), dtype=complex)
        return np.vstack([b.coeffs for b in self.basis])

    @cached_property
    def gram_min_eig(self) -> float:
        return lic_check(self.spec, self.source)

    def extended(self, b: complex, delta: float = DEFAULT_DELTA) -> OrthoSystem:
        """Nuovo sistema con B^b_{n+1} in coda; B_1..B_n restano invariati."""
        params = self.source.appended(b)
        order = params.multiplicities[-1] - 1
        _, norm_row, col = _normalized_row(self.spec, params, len(params) - 1, order)
        _check_separation(self, b, delta)
        padded = _pad_coefficients(self.coeff_matrix, len(params))
        row, coeff_row, denom = _gs_step(self.spec, self.basis_matrix, padded, norm_row, col, self.lic_floor)
        return OrthoSystem(
            spec=self.spec,
            source=params,
            basis=self.basis + (PowerSeries(row),),
            coeff_matrix=np.vstack([padded, coeff_row[None, :]]),
            denominators=self.denominators + (denom,),
            lic_floor=self.lic_floor,
        )


def empty_system(spec: SpaceSpec, lic_floor: float = DEFAULT_LIC_FLOOR) -> OrthoSystem:
    return OrthoSystem(
        spec=spec,
        source=ParameterTuple(),
        basis=(),
        coeff_matrix=np.zeros((0, 0), dtype=complex),
        denominators=(),
        lic_floor=lic_floor,
    )


def _pad_coefficients(matrix: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros((matrix.shape[0], width), dtype=complex)
    out[:, : matrix.shape[1]] = matrix
    return out


def _normalized_row(
    spec: SpaceSpec, params: ParameterTuple, index: int, order: int
) -> tuple[float, np.ndarray, np.ndarray]:
    """Nucleo multiplo normalizzato della posizione `index` e sua espressione sui nuclei."""
    raw = kernel(spec, params[index], order).series
    size = norm(raw, spec)
    if size == 0.0:
        raise DegenerateSystem("kernel: norma nulla.", 0.0)
    col = np.zeros(len(params), dtype=complex)
    col[index] = 1.0 / size
    return size, raw.coeffs / size, col


def _fix_phase(row: np.ndarray, coeff_row: np.ndarray) -> None:
    """Primo coefficiente non nullo della serie reale positivo."""
    mags = np.abs(row)
    peak = mags.max()
    if peak == 0.0:
        return
    lead = int(np.flatnonzero(mags > _PHASE_RTOL * peak)[0])
    phase = row[lead] / mags[lead]
    row *= np.conj(phase)
    coeff_row *= np.conj(phase)


def _gs_step(
    spec: SpaceSpec,
    basis_rows: np.ndarray,
    coeff_rows: np.ndarray,
    new_row: np.ndarray,
    new_col: np.ndarray,
    lic_floor: float,
) -> tuple[np.ndarray, np.ndarray, float]:
    h = spec.weights
    v = new_row.astype(complex, copy=True)
    c = new_col.astype(complex, copy=True)
    # Gram-Schmidt modificato con una passata di riortogonalizzazione
    for _ in range(2):
        for b, bc in zip(basis_rows, coeff_rows):
            proj = np.vdot(b, h * v)
            v -= proj * b
            c -= proj * bc
    denom = float(np.sqrt(np.sum(h * np.abs(v) ** 2)))
    if not denom > lic_floor:
        raise DegenerateSystem(
            f"gram_schmidt: denominatore {denom:.3e} sotto la soglia LIC {lic_floor:.1e}.", denom
        )
    v /= denom
    c /= denom
    _fix_phase(v, c)
    return v, c, denom


def _check_separation(system: OrthoSystem, b: complex, delta: float) -> None:
    for a in system.source:
        if abs(complex(b) - a) < delta:
            raise DegenerateSystem(f"extend: {complex(b)} entro delta da un parametro esistente.", 0.0)


def gram_schmidt(
    spec: SpaceSpec, params: ParameterTuple, lic_floor: float = DEFAULT_LIC_FLOOR
) -> OrthoSystem:
    """Ortonormalizzazione dei nuclei multipli normalizzati della tupla."""
    params.check_domain(spec)
    n = len(params)
    basis = np.zeros((0, spec.truncation), dtype=complex)
    coeffs = np.zeros((0, n), dtype=complex)
    denoms: list[float] = []
    for t, l in enumerate(params.multiplicities):
        _, row, col = _normalized_row(spec, params, t, l - 1)
        v, c, denom = _gs_step(spec, basis, coeffs, row, col, lic_floor)
        basis = np.vstack([basis, v[None, :]])
        coeffs = np.vstack([coeffs, c[None, :]])
        denoms.append(denom)
    return OrthoSystem(
        spec=spec,
        source=params,
        basis=tuple(PowerSeries(r) for r in basis),
        coeff_matrix=coeffs,
        denominators=tuple(denoms),
        lic_floor=lic_floor,
    )


def extend(system: OrthoSystem, b: complex, delta: float = DEFAULT_DELTA) -> tuple[PowerSeries, float]:
    """Elemento incrementale B^b_{n+1} e il suo denominatore rho in (0, 1]."""
    check_parameter(system.spec, b, "b")
    grown = system.extended(b, delta)
    return grown.basis[-1], grown.denominators[-1]


def project(f: PowerSeries, system: OrthoSystem) -> tuple[np.ndarray, PowerSeries]:
    """Coefficienti <f, B_t> e residuo f - sum <f, B_t> B_t."""
    if f.truncation != system.spec.truncation:
        raise ValueError("f: lunghezza diversa dal troncamento del sistema.")
    if system.n == 0:
        return np.zeros(0, dtype=complex), f
    h = system.spec.weights
    mat = system.basis_matrix
    coeffs = mat.conj() @ (h * f.coeffs)
    residual = f.coeffs - coeffs @ mat
    # seconda passata: ortogonalita' del residuo a precisione di macchina
    correction = mat.conj() @ (h * residual)
    residual = residual - correction @ mat
    return coeffs + correction, PowerSeries(residual)


def gram_matrix(spec: SpaceSpec, params: ParameterTuple) -> GramMatrix:
    params.check_domain(spec)
    if len(params) == 0:
        return GramMatrix(np.zeros((0, 0), dtype=complex))
    rows = np.vstack([k.series.coeffs for k in multiple_kernels(spec, params, normalized=True)])
    entries = (rows * spec.weights) @ rows.conj().T
    # simmetria hermitiana esatta, diagonale unitaria
    entries = 0.5 * (entries + entries.conj().T)
    np.fill_diagonal(entries, 1.0)
    return GramMatrix(entries)


def lic_check(spec: SpaceSpec, params: ParameterTuple) -> float:
    """Minimo autovalore della Gram dei nuclei normalizzati (> 0: indipendenza numerica)."""
    return gram_matrix(spec, params).min_eigenvalue


def tm_closed_form(spec: SpaceSpec, params: ParameterTuple) -> list[PowerSeries]:
    """Sistema di Takenaka-Malmquist esplicito (solo Hardy, parametri distinti)."""
    if not spec.is_hardy:
        raise DomainError("tm_closed_form: disponibile solo nello spazio di Hardy.")
    if not params.is_distinct:
        raise DegenerateTuple("tm_closed_form: parametri ripetuti non supportati.")
    params.check_domain(spec)
    n = spec.truncation
    phi = PowerSeries.monomial(n, 0)
    out: list[PowerSeries] = []
    for w in params:
        e_w = szego_series(n, w) * np.sqrt(1.0 - abs(w) ** 2)
        out.append(phi.multiply(e_w))
        phi = phi.multiply(blaschke_factor(n, w))
    return out
