"""Diagnostics shared by every compiler stage."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: Optional[int] = None
    offset: Optional[int] = None
    severity: str = "error"

    def __str__(self) -> str:
        return self.message


def syntax_error(line: int) -> Diagnostic:
    return Diagnostic(f"syntax error at/near line {line}", line)


class CcxError(Exception):
    """Raised when a stage cannot continue; carries one or more diagnostics."""

    def __init__(self, diagnostics: Diagnostic | Iterable[Diagnostic]):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(d.message for d in self.diagnostics))

    @property
    def diagnostic(self) -> Diagnostic:
        return self.diagnostics[0]


class CrnStructureError(CcxError):
    """A reaction network was built or used inconsistently."""

    def __init__(self, message: str):
        super().__init__(Diagnostic(message))
