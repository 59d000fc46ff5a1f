from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from kernels import ParameterTuple
from ortho import OrthoSystem, project
from space import PowerSeries, SpaceSpec, norm


@dataclass(frozen=True, eq=False)
class ApproxResult:
    """Esito di un'approssimazione (greedy o n-best)."""

    parameters: ParameterTuple
    coefficients: np.ndarray
    projection: np.ndarray
    residual_norm: float
    objective_trace: tuple[float, ...]
    interior_margin: float
    gram_min_eig: float
    r_max: float
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.parameters)

    @property
    def objective(self) -> float:
        return self.residual_norm


def build_result(
    f: PowerSeries,
    system: OrthoSystem,
    objective_trace: Sequence[float],
    diagnostics: dict[str, Any] | None = None,
) -> ApproxResult:
    """Proietta f sul sistema e ricava i coefficienti sui nuclei multipli."""
    spec = system.spec
    projection, residual = project(f, system)
    # c = C^T p, con B_t = sum_s C[t, s] K~_s
    coefficients = system.coeff_matrix.T @ projection if system.n else np.zeros(0, dtype=complex)
    return ApproxResult(
        parameters=system.source,
        coefficients=coefficients,
        projection=projection,
        residual_norm=norm(residual, spec),
        objective_trace=tuple(float(v) for v in objective_trace),
        interior_margin=spec.r_max - system.source.max_modulus(),
        gram_min_eig=system.gram_min_eig if system.n else 1.0,
        r_max=spec.r_max,
        diagnostics=dict(diagnostics or {}),
    )


# ------------------------------------------------------------------ #
#  Codifica JSON / CSV                                                #
# ------------------------------------------------------------------ #

def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def complex_from_json(value: Any, field_name: str) -> complex:
    """Accetta [re, im] oppure un numero reale."""
    if isinstance(value, bool):
        raise ValueError(f"{field_name}: valore non valido.")
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"{field_name}: atteso [re, im].")


def float_from_json(value: Any, field_name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{field_name}: atteso un numero reale.")
    return float(value)


def complex_list_from_json(values: Any, field_name: str) -> list[complex]:
    if not isinstance(values, list):
        raise ValueError(f"{field_name}: attesa una lista.")
    return [complex_from_json(v, f"{field_name}[{i}]") for i, v in enumerate(values)]


def space_to_dict(spec: SpaceSpec) -> dict[str, Any]:
    return {
        "kind": spec.kind,
        "alpha": spec.alpha,
        "truncation": spec.truncation,
        "rmax": spec.r_max,
    }


def space_from_dict(data: Any) -> SpaceSpec:
    if not isinstance(data, dict):
        raise ValueError("space: atteso un oggetto.")
    try:
        return SpaceSpec(
            kind=data.get("kind", "hardy"),
            alpha=float(data.get("alpha", 0.0)),
            truncation=data.get("truncation", 512),
            r_max=float(data.get("rmax", 0.995)),
        )
    except (TypeError, ValueError) as exc:
        raise ValueError(f"space: {exc}") from exc


def _json_safe(value: Any) -> Any:
    if isinstance(value, complex):
        return complex_to_json(value)
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def result_to_dict(result: ApproxResult) -> dict[str, Any]:
    return {
        "parameters": [complex_to_json(a) for a in result.parameters],
        "multiplicities": list(result.parameters.multiplicities),
        "coefficients": [complex_to_json(c) for c in result.coefficients],
        "residual_norm": result.residual_norm,
        "objective_trace": list(result.objective_trace),
        "interior_margin": result.interior_margin,
        "gram_min_eig": result.gram_min_eig,
        "diagnostics": _json_safe(result.diagnostics),
    }


def parameters_from_result_dict(data: Any) -> ParameterTuple:
    if not isinstance(data, dict):
        raise ValueError("result: atteso un oggetto.")
    return ParameterTuple(tuple(complex_list_from_json(data.get("parameters"), "result.parameters")))


def write_json(path: str | Path, document: dict[str, Any]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(_json_safe(document), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target


def load_json(path: str | Path) -> dict[str, Any]:
    source = Path(path)
    if not source.exists():
        raise ValueError(f"input: file {source} non trovato.")
    try:
        data = json.loads(source.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"input: JSON non valido ({exc.msg}, riga {exc.lineno}).") from exc
    if not isinstance(data, dict):
        raise ValueError("input: atteso un oggetto JSON.")
    return data


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return target
