from __future__ import annotations

import numpy as np
import pytest

from kernels import ParameterTuple, multiple_kernels
from space import PowerSeries, SpaceSpec


@pytest.fixture
def hardy() -> SpaceSpec:
    return SpaceSpec(kind="hardy", truncation=256, r_max=0.9)


@pytest.fixture
def bergman() -> SpaceSpec:
    return SpaceSpec(kind="bergman", alpha=0.0, truncation=256, r_max=0.9)


@pytest.fixture
def bergman1() -> SpaceSpec:
    return SpaceSpec(kind="bergman", alpha=1.0, truncation=256, r_max=0.9)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def kernel_combination(spec: SpaceSpec, points, coefficients) -> PowerSeries:
    """sum c_k E_{a_k} con nuclei normalizzati."""
    params = ParameterTuple(tuple(points))
    total = PowerSeries.zeros(spec.truncation)
    for c, k in zip(coefficients, multiple_kernels(spec, params, normalized=True)):
        total = total + k.series * c
    return total


def random_polynomial(rng: np.random.Generator, degree: int, truncation: int) -> PowerSeries:
    coeffs = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    return PowerSeries.from_coefficients(coeffs, truncation)


def random_disc_points(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.uniform(size=count))
    return r * np.exp(2j * np.pi * rng.uniform(size=count))


def separated_points(rng: np.random.Generator, count: int, radius: float, gap: float) -> list[complex]:
    """Punti casuali nel disco di raggio `radius` a distanza reciproca >= gap."""
    points: list[complex] = []
    while len(points) < count:
        z = complex(random_disc_points(rng, 1, radius)[0])
        if all(abs(z - p) >= gap for p in points):
            points.append(z)
    return points
