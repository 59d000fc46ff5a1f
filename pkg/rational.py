from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from errors import ApproximationError, DegenerateTuple
from kernels import ParameterTuple, blaschke_factor
from ortho import tm_closed_form
from space import PowerSeries, SpaceSpec, inner_product

logger = logging.getLogger(__name__)

COPRIME_FLOOR = 1e-10
BOUNDARY_BAND = 1e-9
CHECK_POINTS = 64
CHECK_RTOL = 1e-9
CHECK_SEED = 0
# raggio massimo dei punti di verifica casuali
_CHECK_RADIUS = 0.95

ZERO_FREE = "yes"
HAS_ZEROS = "no"
INDETERMINATE = "indeterminate"


def _trim(coeffs: np.ndarray) -> np.ndarray:
    """Coefficienti crescenti senza zeri in testa (almeno un elemento)."""
    c = np.asarray(coeffs, dtype=complex)
    nonzero = np.flatnonzero(c != 0)
    return c[: nonzero[-1] + 1] if nonzero.size else c[:1]


def degree(coeffs: np.ndarray) -> int:
    c = _trim(coeffs)
    return c.size - 1 if np.any(c != 0) else -1


@dataclass(frozen=True, eq=False)
class RationalForm:
    """p/q con coefficienti in ordine crescente di grado."""

    p: np.ndarray
    q: np.ndarray
    degree_bound: int

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=complex)
        q = np.asarray(self.q, dtype=complex)
        if p.ndim != 1 or q.ndim != 1 or p.size == 0 or q.size == 0:
            raise ValueError("p, q: attesi vettori di coefficienti non vuoti.")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise ValueError("p, q: coefficienti non finiti.")
        if not np.any(q != 0):
            raise ValueError("q: polinomio nullo.")
        if int(self.degree_bound) < 0:
            raise ValueError("degree_bound: deve essere >= 0.")
        object.__setattr__(self, "p", _trim(p))
        object.__setattr__(self, "q", _trim(q))
        object.__setattr__(self, "degree_bound", int(self.degree_bound))

    @property
    def p_degree(self) -> int:
        return degree(self.p)

    @property
    def q_degree(self) -> int:
        return degree(self.q)

    def __call__(self, z: complex | np.ndarray) -> complex | np.ndarray:
        return evaluate_rational(self, z)


@dataclass(frozen=True, eq=False)
class BlaschkeForm:
    """Combinazione sum c_k B_k del sistema TM sui punti w_1..w_n."""

    coefficients: np.ndarray
    points: ParameterTuple

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=complex).ravel()
        if c.size == 0 or c.size != len(self.points):
            raise ValueError("coefficients: numero diverso dai parametri.")
        object.__setattr__(self, "coefficients", c)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def n_degenerate(self) -> bool:
        return bool(self.coefficients[-1] != 0)

    def evaluate(self, z: complex | np.ndarray) -> complex | np.ndarray:
        """Valutazione diretta dei fattori di Blaschke (nessuna serie)."""
        z = np.asarray(z, dtype=complex)
        total = np.zeros_like(z)
        phi = np.ones_like(z)
        for c, w in zip(self.coefficients, self.points):
            e_w = np.sqrt(1.0 - abs(w) ** 2) / (1.0 - np.conj(w) * z)
            total = total + c * phi * e_w
            phi = phi * (z - w) / (1.0 - np.conj(w) * z)
        return total if total.ndim else complex(total)


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    coprime: bool
    resultant: float
    zero_free: str
    degree_ok: bool
    roots: tuple[complex, ...] = ()
    failures: tuple[str, ...] = field(default_factory=tuple)


def evaluate_rational(form: RationalForm, z: complex | np.ndarray) -> complex | np.ndarray:
    z = np.asarray(z, dtype=complex)
    value = npoly.polyval(z, form.p) / npoly.polyval(z, form.q)
    return value if np.ndim(value) else complex(value)


def _linear(w: complex, *, numerator: bool) -> np.ndarray:
    """z - w oppure 1 - conj(w) z, coefficienti crescenti."""
    return np.array([-w, 1.0], dtype=complex) if numerator else np.array([1.0, -np.conj(w)], dtype=complex)


def tm_to_rational(form: BlaschkeForm, check: bool = True) -> RationalForm:
    """Blaschke form -> p/q con q = prod (1 - conj(w_k) z)."""
    if not form.points.is_distinct:
        raise DegenerateTuple("tm_to_rational: parametri ripetuti non supportati.")
    pts = list(form.points)
    q = np.ones(1, dtype=complex)
    for w in pts:
        q = npoly.polymul(q, _linear(w, numerator=False))

    p = np.zeros(len(pts) + 1, dtype=complex)
    for k, (c, w) in enumerate(zip(form.coefficients, pts)):
        term = np.array([c * np.sqrt(1.0 - abs(w) ** 2)], dtype=complex)
        for l, v in enumerate(pts):
            if l != k:
                term = npoly.polymul(term, _linear(v, numerator=l < k))
        p[: term.size] += term
    result = RationalForm(p, q, form.n)

    if check:
        rng = np.random.default_rng(CHECK_SEED)
        z = _CHECK_RADIUS * np.sqrt(rng.uniform(size=CHECK_POINTS)) * np.exp(2j * np.pi * rng.uniform(size=CHECK_POINTS))
        expected = form.evaluate(z)
        got = evaluate_rational(result, z)
        scale = max(1.0, float(np.max(np.abs(expected))))
        error = float(np.max(np.abs(got - expected)))
        if error > CHECK_RTOL * scale:
            raise ApproximationError(f"tm_to_rational: verifica puntuale fallita (errore {error:.3e}).")
    return result


def _sylvester(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Matrice di Sylvester di p, q (coefficienti crescenti)."""
    a, b = p[::-1], q[::-1]
    m, n = a.size - 1, b.size - 1
    size = m + n
    mat = np.zeros((size, size), dtype=complex)
    for i in range(n):
        mat[i, i : i + m + 1] = a
    for i in range(m):
        mat[n + i, i : i + n + 1] = b
    return mat


def resultant(p: np.ndarray, q: np.ndarray) -> float:
    """|Res(p, q)| dopo normalizzazione al coefficiente massimo."""
    p, q = _trim(p), _trim(q)
    if not np.any(p != 0) or not np.any(q != 0):
        return 0.0
    p = p / np.max(np.abs(p))
    q = q / np.max(np.abs(q))
    mat = _sylvester(p, q)
    return float(abs(np.linalg.det(mat))) if mat.size else 1.0


def admissible(form: RationalForm, n: int, coprime_floor: float = COPRIME_FLOOR) -> AdmissibilityReport:
    """Coprimalita', assenza di zeri di q nel disco chiuso e vincoli di grado."""
    failures: list[str] = []
    res = resultant(form.p, form.q)
    coprime = res > coprime_floor
    if not coprime:
        failures.append(f"p e q non coprimi (risultante {res:.3e})")

    roots = npoly.polyroots(form.q) if form.q_degree > 0 else np.zeros(0, dtype=complex)
    moduli = np.abs(roots)
    if np.any(moduli < 1.0 - BOUNDARY_BAND):
        zero_free = HAS_ZEROS
        failures.append("q ha zeri nel disco unitario chiuso")
    elif np.any(moduli <= 1.0 + BOUNDARY_BAND):
        zero_free = INDETERMINATE
        failures.append("zeri di q indistinguibili dal bordo")
    else:
        zero_free = ZERO_FREE

    degree_ok = form.p_degree <= n and form.q_degree <= n
    if not degree_ok:
        failures.append(f"gradi ({form.p_degree}, {form.q_degree}) oltre n = {n}")

    report = AdmissibilityReport(
        admissible=not failures,
        coprime=coprime,
        resultant=res,
        zero_free=zero_free,
        degree_ok=degree_ok,
        roots=tuple(complex(r) for r in roots),
        failures=tuple(failures),
    )
    logger.debug("admissible: %s", report)
    return report


def blaschke_product(params: ParameterTuple, truncation: int) -> PowerSeries:
    """Serie di prod (z - w_l) / (1 - conj(w_l) z), ripetizioni incluse."""
    phi = PowerSeries.monomial(truncation, 0)
    for w in params:
        phi = phi.multiply(blaschke_factor(truncation, w))
    return phi


def blaschke_form_of(f: PowerSeries, spec: SpaceSpec, params: ParameterTuple) -> BlaschkeForm:
    """Coefficienti <f, B_k> sul sistema TM esplicito (solo Hardy)."""
    system = tm_closed_form(spec, params)
    coefficients = np.array([inner_product(f, b, spec) for b in system])
    return BlaschkeForm(coefficients, params)


def rational_of_projection(f: PowerSeries, spec: SpaceSpec, params: ParameterTuple) -> RationalForm:
    """Proiezione di f sui nuclei di `params` in forma p/q."""
    return tm_to_rational(blaschke_form_of(f, spec, params))
