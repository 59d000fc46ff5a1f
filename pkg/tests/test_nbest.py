from __future__ import annotations

import numpy as np
import pytest

from conftest import kernel_combination, random_disc_points, random_polynomial, separated_points
from errors import BudgetExceeded
from greedy import PolarGrid
from kernels import ParameterTuple, kernel, normalized_kernel
from nbest import (
    NBestConfig,
    brute_force,
    cyclic_descent,
    objective,
    objective_gradient,
    solve,
)
from space import PowerSeries, SpaceSpec
from targets import TargetSpec

SMALL_GRID = PolarGrid(radial=8, angular=16)


def _config(n: int, **overrides) -> NBestConfig:
    options = dict(
        n=n,
        starts=3,
        grid=SMALL_GRID,
        greedy_grid=SMALL_GRID,
        max_cycles=20,
        max_gradient_steps=30,
        seed=7,
    )
    options.update(overrides)
    return NBestConfig(**options)


def test_config_validation():
    with pytest.raises(ValueError, match="fd_step"):
        NBestConfig(fd_step=1e-2)
    with pytest.raises(ValueError, match="starts"):
        NBestConfig(starts=0)
    with pytest.raises(ValueError, match="n"):
        NBestConfig(n=1.5)


def test_objective_examples(hardy):
    f = kernel_combination(hardy, [0.3], [1.0])
    assert objective(f, hardy, ParameterTuple((0.3,))) == pytest.approx(0.0, abs=1e-12)

    z = PowerSeries.monomial(hardy.truncation, 1)
    w = np.exp(0.7j) / np.sqrt(2.0)
    assert objective(z, hardy, ParameterTuple((w,))) == pytest.approx(np.sqrt(3.0) / 2.0, abs=1e-12)


def test_objective_is_permutation_invariant(bergman, rng):
    f = random_polynomial(rng, 8, bergman.truncation)
    params = (0.1 + 0.2j, -0.6, 0.45j)
    base = objective(f, bergman, ParameterTuple(params))
    assert objective(f, bergman, ParameterTuple(params[::-1])) == pytest.approx(base, abs=1e-12)
    assert objective(f, bergman, ParameterTuple((params[1], params[0], params[2]))) == pytest.approx(base, abs=1e-12)


def test_brute_force_finds_grid_kernel(hardy):
    b = complex(SMALL_GRID.points(hardy.r_max)[4, 5])
    f = kernel_combination(hardy, [b], [1.5])
    result = brute_force(f, hardy, 1, SMALL_GRID)
    assert result.objective == pytest.approx(0.0, abs=1e-10)
    assert result.parameters[0] == pytest.approx(b)
    assert result.diagnostics["grid_size"] == 7 * 16 + 1


def test_brute_force_two_points_beats_every_pair(bergman, rng):
    f = random_polynomial(rng, 4, bergman.truncation)
    grid = PolarGrid(radial=4, angular=4)
    result = brute_force(f, bergman, 2, grid)
    points = np.unique(grid.points(bergman.r_max).ravel())
    for i, a in enumerate(points):
        for c in points[i + 1 :]:
            assert result.objective <= objective(f, bergman, ParameterTuple((a, c))) + 1e-10


def test_brute_force_limits(hardy):
    f = PowerSeries.monomial(hardy.truncation, 1)
    with pytest.raises(BudgetExceeded):
        brute_force(f, hardy, 3, PolarGrid())
    with pytest.raises(ValueError):
        brute_force(f, hardy, 4, SMALL_GRID)


def test_cyclic_descent_single_point_for_z(hardy):
    z = PowerSeries.monomial(hardy.truncation, 1)
    result = cyclic_descent(z, hardy, ParameterTuple((0.3,)), _config(1))
    assert abs(result.parameters[0]) == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-3)
    assert result.objective == pytest.approx(np.sqrt(3.0) / 2.0, abs=1e-6)
    trace = np.array(result.objective_trace)
    assert np.all(np.diff(trace) <= 0.0)


def test_cyclic_descent_separates_repeated_start(bergman, rng):
    f = random_polynomial(rng, 5, bergman.truncation)
    result = cyclic_descent(f, bergman, ParameterTuple((0.2, 0.2)), _config(2))
    assert result.n == 2
    assert result.objective <= objective(f, bergman, ParameterTuple((0.2,))) + 1e-12


def test_cyclic_descent_keeps_exact_multiple_kernel_start(hardy):
    f = normalized_kernel(hardy, 0.3).series + 0.5 * kernel(hardy, 0.3, 1).series
    start = ParameterTuple((0.3, 0.3))
    initial = objective(f, hardy, start)
    assert initial < 1e-12
    result = cyclic_descent(f, hardy, start, _config(2))
    assert result.objective <= initial
    if result.diagnostics["kept_start"]:
        assert result.parameters == start


@pytest.mark.parametrize(
    "spec",
    [
        SpaceSpec(kind="hardy", truncation=256, r_max=0.9),
        SpaceSpec(kind="bergman", alpha=0.0, truncation=256, r_max=0.9),
        SpaceSpec(kind="bergman", alpha=1.0, truncation=256, r_max=0.9),
    ],
    ids=["hardy", "bergman0", "bergman1"],
)
def test_solve_recovers_two_kernel_combination(spec):
    points = (0.5, -0.3 + 0.4j)
    f = kernel_combination(spec, points, [1.0, 0.7 - 0.2j])
    result = solve(f, spec, _config(2))
    assert result.objective <= 1e-8
    found = sorted(result.parameters, key=lambda p: p.real)
    assert found[0] == pytest.approx(points[1], abs=1e-4)
    assert found[1] == pytest.approx(points[0], abs=1e-4)


def test_solve_recovers_random_kernel_combinations(rng):
    spaces = [
        SpaceSpec(kind="hardy", truncation=256, r_max=0.9),
        SpaceSpec(kind="bergman", alpha=0.0, truncation=256, r_max=0.9),
        SpaceSpec(kind="bergman", alpha=1.0, truncation=256, r_max=0.9),
    ]
    for trial in range(20):
        spec = spaces[trial % 3]
        n = 1 + trial % 3
        points = separated_points(rng, n, 0.8, 0.2)
        coefficients = rng.normal(size=n) + 1j * rng.normal(size=n)
        f = kernel_combination(spec, points, coefficients)
        result = solve(f, spec, _config(n))
        assert result.objective <= 1e-8, (trial, points)


@pytest.mark.parametrize("space", ["hardy", "bergman1"])
def test_solve_with_more_parameters_than_kernels(space, request):
    spec = request.getfixturevalue(space)
    f = kernel_combination(spec, [0.4j], [1.0 - 0.5j])
    assert solve(f, spec, _config(2)).objective <= 1e-8
    g = kernel_combination(spec, [0.5, -0.3 + 0.4j], [1.0, 0.7])
    assert solve(g, spec, _config(3)).objective <= 1e-8


def test_solve_single_point_for_z(hardy):
    z = PowerSeries.monomial(hardy.truncation, 1)
    result = solve(z, hardy, _config(1))
    assert result.objective == pytest.approx(np.sqrt(3.0) / 2.0, abs=1e-6)
    assert abs(result.parameters[0]) == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-3)


def test_solve_is_monotone_in_n():
    spec = SpaceSpec(kind="bergman", alpha=0.0, truncation=256, r_max=0.9)
    f = TargetSpec.builtin("f1").expand(spec)
    results = [solve(f, spec, _config(n)) for n in (1, 2, 3)]
    values = [r.objective for r in results]
    # f1 non e' combinazione di <= 3 nuclei: decrescita stretta
    assert values[1] < values[0] - 1e-10
    assert values[2] < values[1] - 1e-10
    assert all(r.interior_margin > 0.01 for r in results)


def test_solve_dominates_grid_oracle(hardy):
    f = TargetSpec.builtin("f2").expand(hardy)
    cfg = _config(2)
    oracle = brute_force(f, hardy, 2, cfg.grid)
    result = solve(f, hardy, cfg)
    assert result.objective <= oracle.objective + 1e-12
    assert result.interior_margin > 0.01
    kinds = [row["kind"] for row in result.diagnostics["starts"]]
    assert kinds == ["greedy", "random", "random", "grid"]


def test_gradient_matches_directional_differences(bergman1, rng):
    f = random_polynomial(rng, 6, bergman1.truncation)
    agree = 0
    trials = 20
    t = 1e-5
    for _ in range(trials):
        params = ParameterTuple(tuple(random_disc_points(rng, 2, 0.7)))
        grad = objective_gradient(f, bergman1, params)
        d = random_disc_points(rng, 2, 1.0)
        up = objective(f, bergman1, ParameterTuple(tuple(params.as_array() + t * d))) ** 2
        down = objective(f, bergman1, ParameterTuple(tuple(params.as_array() - t * d))) ** 2
        numeric = (up - down) / (2.0 * t)
        predicted = float(np.real(np.vdot(grad, d)))
        if abs(numeric - predicted) <= 1e-4 * max(1.0, abs(numeric)):
            agree += 1
    assert agree >= 0.95 * trials


def test_solve_is_deterministic_and_worker_independent(bergman):
    f = TargetSpec.builtin("f3").expand(bergman)
    first = solve(f, bergman, _config(2))
    again = solve(f, bergman, _config(2))
    threaded = solve(f, bergman, _config(2, workers=3))
    assert first.parameters == again.parameters == threaded.parameters
    assert first.objective == again.objective == threaded.objective
    assert first.diagnostics["starts"] == threaded.diagnostics["starts"]


def test_solve_rejects_zero_target(hardy):
    with pytest.raises(ValueError):
        solve(PowerSeries.zeros(hardy.truncation), hardy, _config(1))
