from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

BASE_DIR = Path(__file__).resolve().parent
DEFAULTS_FILENAME = "defaults.json"

# Valori di default del solutore (sovrascrivibili da CFG/defaults.json e da riga di comando)
DEFAULT_TRUNCATION = 512
DEFAULT_R_MAX = 0.995
DEFAULT_GRID_RADIAL = 64
DEFAULT_GRID_ANGULAR = 128
DEFAULT_STARTS = 8
DEFAULT_TOL_OBJ = 1e-12
DEFAULT_MAX_CYCLES = 50
DEFAULT_FD_STEP = 1e-6
DEFAULT_DELTA = 1e-6
DEFAULT_LIC_FLOOR = 1e-8
DEFAULT_SEED = 0
DEFAULT_WORKERS = 1

DEFAULTS: dict[str, Any] = {
    "truncation": DEFAULT_TRUNCATION,
    "rmax": DEFAULT_R_MAX,
    "grid_radial": DEFAULT_GRID_RADIAL,
    "grid_angular": DEFAULT_GRID_ANGULAR,
    "starts": DEFAULT_STARTS,
    "tol": DEFAULT_TOL_OBJ,
    "max_cycles": DEFAULT_MAX_CYCLES,
    "fd_step": DEFAULT_FD_STEP,
    "delta": DEFAULT_DELTA,
    "lic_floor": DEFAULT_LIC_FLOOR,
    "seed": DEFAULT_SEED,
    "workers": DEFAULT_WORKERS,
}


def _runtime_root() -> Path:
    if getattr(sys, "frozen", False):
        return Path(sys.executable).resolve().parent
    return BASE_DIR


APP_DIR = _runtime_root()
CFG_DIR = APP_DIR / "CFG"


def load_defaults(path: str | Path | None = None) -> dict[str, Any]:
    """Unisce i default del modulo con CFG/defaults.json (se presente)."""
    merged = dict(DEFAULTS)
    target = Path(path) if path else CFG_DIR / DEFAULTS_FILENAME
    if not target.exists():
        return merged

    try:
        overrides = json.loads(target.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{target.name}: JSON non valido ({exc.msg}).") from exc
    if not isinstance(overrides, dict):
        raise ValueError(f"{target.name}: atteso un oggetto JSON.")

    for key, value in overrides.items():
        if key not in DEFAULTS:
            raise ValueError(f"{key}: chiave di configurazione sconosciuta.")
        expected = type(DEFAULTS[key])
        if expected is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, expected) or isinstance(value, bool):
            raise ValueError(f"{key}: valore non valido.")
        merged[key] = value
    return merged
