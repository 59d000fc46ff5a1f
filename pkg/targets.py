from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from kernels import ParameterTuple, multiple_kernels
from results import complex_list_from_json, complex_to_json
from space import PowerSeries, SpaceSpec

TAYLOR = "taylor"
RATIONAL = "rational"
BUILTIN = "builtin"
TARGET_KINDS = (TAYLOR, RATIONAL, BUILTIN)

# f3: combinazione di nuclei normalizzati a parametri fissi
F3_PARAMETERS = (0.5 + 0.0j, -0.4 + 0.3j, -0.2 - 0.6j)
F3_COEFFICIENTS = (1.0 + 0.0j, -0.6 + 0.2j, 0.4j)

BUILTIN_TARGETS: dict[str, str] = {
    "f1": "1/(z - 2)",
    "f2": "1/(z^2 - 2z + 2), poli 1 +- i",
    "f3": "combinazione di 3 nuclei normalizzati (0.5, -0.4+0.3i, -0.2-0.6i)",
    "f4": "z",
}


@dataclass(frozen=True)
class TargetSpec:
    """Funzione da approssimare: coefficienti di Taylor, poli/residui oppure funzione del corpus."""

    kind: str
    taylor: tuple[complex, ...] = ()
    poles: tuple[complex, ...] = ()
    residues: tuple[complex, ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        if self.kind not in TARGET_KINDS:
            raise ValueError(f"target: tipo sconosciuto '{self.kind}'.")
        object.__setattr__(self, "taylor", tuple(complex(c) for c in self.taylor))
        object.__setattr__(self, "poles", tuple(complex(p) for p in self.poles))
        object.__setattr__(self, "residues", tuple(complex(r) for r in self.residues))
        if self.kind == TAYLOR and not self.taylor:
            raise ValueError("target.taylor: lista di coefficienti vuota.")
        if self.kind == RATIONAL:
            if not self.poles or len(self.poles) != len(self.residues):
                raise ValueError("target.rational: poli e residui in numero diverso.")
            for p in self.poles:
                if not abs(p) > 1.0:
                    raise ValueError(f"target.rational.poles: polo {p} non esterno al disco chiuso.")
        if self.kind == BUILTIN and self.name not in BUILTIN_TARGETS:
            raise ValueError(f"target.builtin: funzione '{self.name}' sconosciuta.")

    @classmethod
    def builtin(cls, name: str) -> TargetSpec:
        return cls(kind=BUILTIN, name=name)

    @classmethod
    def rational(cls, poles: list[complex], residues: list[complex]) -> TargetSpec:
        return cls(kind=RATIONAL, poles=tuple(poles), residues=tuple(residues))

    @classmethod
    def from_coefficients(cls, values: list[complex]) -> TargetSpec:
        return cls(kind=TAYLOR, taylor=tuple(values))

    @classmethod
    def from_dict(cls, data: Any) -> TargetSpec:
        if isinstance(data, str):
            return cls.builtin(data)
        if not isinstance(data, dict):
            raise ValueError("target: atteso un oggetto.")
        if BUILTIN in data:
            if not isinstance(data[BUILTIN], str):
                raise ValueError("target.builtin: atteso un nome.")
            return cls.builtin(data[BUILTIN])
        if TAYLOR in data:
            return cls.from_coefficients(complex_list_from_json(data[TAYLOR], "target.taylor"))
        if RATIONAL in data:
            block = data[RATIONAL]
            if not isinstance(block, dict):
                raise ValueError("target.rational: atteso un oggetto.")
            return cls.rational(
                complex_list_from_json(block.get("poles"), "target.rational.poles"),
                complex_list_from_json(block.get("residues"), "target.rational.residues"),
            )
        raise ValueError("target: specificare taylor, rational oppure builtin.")

    def to_dict(self) -> dict[str, Any]:
        if self.kind == BUILTIN:
            return {BUILTIN: self.name}
        if self.kind == TAYLOR:
            return {TAYLOR: [complex_to_json(c) for c in self.taylor]}
        return {
            RATIONAL: {
                "poles": [complex_to_json(p) for p in self.poles],
                "residues": [complex_to_json(r) for r in self.residues],
            }
        }

    def expand(self, spec: SpaceSpec) -> PowerSeries:
        n = spec.truncation
        if self.kind == TAYLOR:
            return PowerSeries.from_coefficients(self.taylor, n)
        if self.kind == RATIONAL:
            return rational_series(self.poles, self.residues, n)
        return builtin_series(self.name, spec)

    def describe(self) -> str:
        if self.kind == BUILTIN:
            return f"{self.name}: {BUILTIN_TARGETS[self.name]}"
        if self.kind == TAYLOR:
            return f"serie di Taylor ({len(self.taylor)} coefficienti)"
        return f"razionale con {len(self.poles)} poli"


def rational_series(poles: tuple[complex, ...], residues: tuple[complex, ...], truncation: int) -> PowerSeries:
    """sum r/(z - p) = -sum_k (sum r / p^{k+1}) z^k per |p| > 1."""
    k = np.arange(truncation)
    c = np.zeros(truncation, dtype=complex)
    for p, r in zip(poles, residues):
        c -= r * np.exp(-(k + 1) * (np.log(abs(p)) + 1j * np.angle(p)))
    return PowerSeries(c)


def builtin_series(name: str, spec: SpaceSpec) -> PowerSeries:
    n = spec.truncation
    if name == "f1":
        return rational_series((2.0,), (1.0,), n)
    if name == "f2":
        return rational_series((1 + 1j, 1 - 1j), (1 / 2j, -1 / 2j), n)
    if name == "f3":
        params = ParameterTuple(F3_PARAMETERS)
        params.check_domain(spec)
        kernels = multiple_kernels(spec, params, normalized=True)
        total = PowerSeries.zeros(n)
        for c, k in zip(F3_COEFFICIENTS, kernels):
            total = total + k.series * c
        return total
    if name == "f4":
        return PowerSeries.monomial(n, 1)
    raise ValueError(f"target.builtin: funzione '{name}' sconosciuta.")
