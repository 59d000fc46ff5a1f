from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from results import ApproxResult

# sotto questo margine dal bordo il parametro e' considerato schiacciato su r_max
MARGIN_WARNING = 0.01
GRAM_WARNING = 1e-6


def format_complex(z: complex, digits: int = 6) -> str:
    z = complex(z)
    sign = "-" if z.imag < 0 else "+"
    return f"{z.real:.{digits}f} {sign} {abs(z.imag):.{digits}f}i"


def format_margin(margin: float) -> str:
    """Margine interno con indicatori."""
    if margin <= 0.0:
        return f"❌ {margin:.4f}"
    if margin < MARGIN_WARNING:
        return f"⚠️ {margin:.4f}"
    return f"{margin:.4f}"


def format_gram(value: float) -> str:
    if value <= 0.0:
        return f"❌ {value:.3e}"
    if value < GRAM_WARNING:
        return f"⚠️ {value:.3e}"
    return f"{value:.3e}"


def format_trace(trace: Sequence[float]) -> str:
    """Traccia dell'obiettivo; segnala eventuali risalite."""
    if not trace:
        return ""
    rising = any(b > a * (1.0 + 1e-12) + 1e-15 for a, b in zip(trace, trace[1:]))
    text = " -> ".join(f"{v:.3e}" for v in trace)
    return f"❌ {text}" if rising else text


def format_result(result: ApproxResult, title: str = "") -> str:
    lines = [title] if title else []
    lines.append(f"n = {result.n}, residuo = {result.residual_norm:.6e}")
    lines.append(f"margine interno: {format_margin(result.interior_margin)}")
    lines.append(f"autovalore minimo Gram: {format_gram(result.gram_min_eig)}")
    for k, (a, m, c) in enumerate(
        zip(result.parameters, result.parameters.multiplicities, result.coefficients), start=1
    ):
        lines.append(f"  a_{k} = {format_complex(a)}  |a| = {abs(a):.6f}  l = {m}  c = {format_complex(c)}")
    lines.append(f"traccia: {format_trace(result.objective_trace)}")
    return "\n".join(lines)


def format_values(rows: Sequence[tuple[Any, ...]], header: Sequence[str]) -> str:
    widths = [max(len(str(h)), 12) for h in header]
    out = ["  ".join(str(h).rjust(w) for h, w in zip(header, widths))]
    for row in rows:
        cells = []
        for value, w in zip(row, widths):
            if isinstance(value, float):
                cell = "nan" if np.isnan(value) else f"{value:.6e}"
            else:
                cell = str(value)
            cells.append(cell.rjust(w))
        out.append("  ".join(cells))
    return "\n".join(out)
