"""Exception hierarchy shared by the abelfe modules."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .solve import Trajectory


class AbelError(Exception):
    """Base class for every error raised by abelfe."""


class DomainError(AbelError, ValueError):
    """Evaluation left the real-analytic domain (ln/sqrt of a negative, 0^-k, x/0)."""


@dataclass(frozen=True)
class ParseDiagnostic:
    offset: int
    expected: str
    found: str

    def __str__(self) -> str:
        return f"at offset {self.offset}: expected {self.expected}, found {self.found}"


class ParseError(AbelError, ValueError):
    def __init__(self, diagnostic: ParseDiagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


class InvalidEquation(AbelError, ValueError):
    pass


class TransformError(AbelError, ValueError):
    """Inadmissible alpha (alpha == -n) or a composition landing on it."""


class SolverError(AbelError):
    """Integration stopped early; ``trajectory`` holds the samples accepted so far."""

    status = "error"

    def __init__(self, message: str, trajectory: Optional["Trajectory"] = None):
        super().__init__(message)
        self.trajectory = trajectory


class BlowUp(SolverError):
    status = "blow_up"


class DomainExit(SolverError):
    status = "domain_exit"


class MaxDepth(AbelError):
    """Adaptive quadrature hit its recursion limit without converging."""
