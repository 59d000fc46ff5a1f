from __future__ import annotations


class ApproximationError(ValueError):
    """Errore base della libreria di approssimazione."""


class DomainError(ApproximationError):
    """Parametro o punto di valutazione fuori dal disco ammesso."""


class DegenerateSystem(ApproximationError):
    """Denominatore di normalizzazione sotto la soglia LIC."""

    def __init__(self, message: str, denom: float = 0.0) -> None:
        super().__init__(message)
        self.denom = denom


class DegenerateTuple(ApproximationError):
    """Parametri ripetuti dove sono richiesti parametri distinti."""


class EmptyGrid(ApproximationError):
    """Nessun punto di griglia ammissibile."""


class BudgetExceeded(ApproximationError):
    """Ricerca esaustiva oltre il budget di valutazioni."""
