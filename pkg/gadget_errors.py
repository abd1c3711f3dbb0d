"""
Fehler-Kategorisierung für das Gadget-Labor
===========================================

Alle Fehler des Labors erben von GadgetLabError. Jede Klasse trägt eine
Kategorie, aus der die CLI den stabilen Exit-Code und einen Hinweis ableitet:

- USAGE:        falsche Parameter, q nicht prim, Modul-Mismatch  (Exit 2)
- CAPACITY:     Budget überschritten (DP-Zustände, Enumeration)  (Exit 3)
- VERIFICATION: ein exakt prüfbarer Satz ist verletzt            (Exit 4)
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional


class ExitCode(Enum):
    """Stabiler Exit-Code-Vertrag der CLI"""
    SUCCESS = 0
    USAGE = 2
    CAPACITY = 3
    VERIFICATION = 4


class ErrorCategory(Enum):
    """Fehler-Kategorien"""
    USAGE = "usage"
    DOMAIN = "domain"
    CAPACITY = "capacity"
    VERIFICATION = "verification"
    FILE = "file"


class GadgetLabError(Exception):
    """Basisklasse aller Labor-Fehler"""
    category = ErrorCategory.USAGE


class UsageError(GadgetLabError, ValueError):
    """Parameter verletzen eine Vorbedingung"""
    category = ErrorCategory.USAGE


class FieldDomainError(UsageError, ArithmeticError):
    """Arithmetik außerhalb des Definitionsbereichs (z.B. Inverse von 0)"""
    category = ErrorCategory.DOMAIN


class CapacityError(GadgetLabError):
    """Ein Budget wurde überschritten - niemals stilles Abschneiden"""
    category = ErrorCategory.CAPACITY

    def __init__(self, resource: str, required: int, cap: int, resume_hint: str = ""):
        self.resource = resource
        self.required = required
        self.cap = cap
        self.resume_hint = resume_hint or f"Budget für '{resource}' erhöhen (benötigt {required})"
        super().__init__(f"Kapazität überschritten: {resource} benötigt {required} > Budget {cap}")


class VerificationError(GadgetLabError):
    """Ein exakt prüfbarer Satz ist fehlgeschlagen"""
    category = ErrorCategory.VERIFICATION

    def __init__(self, message: str, witness: Optional[object] = None):
        self.witness = witness
        super().__init__(message)


class GadgetFileError(GadgetLabError, OSError):
    """Datei-Fehler, immer mit Pfad-Kontext"""
    category = ErrorCategory.FILE

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


@dataclass
class CategorizedError:
    """Kategorisierter Fehler mit Exit-Code und Hinweis"""
    original_message: str
    category: ErrorCategory
    exit_code: ExitCode
    hint: str


class ErrorCategorizer:
    """Ordnet Ausnahmen Exit-Codes und Hinweise zu"""

    EXIT_CODES = {
        ErrorCategory.USAGE: ExitCode.USAGE,
        ErrorCategory.DOMAIN: ExitCode.USAGE,
        ErrorCategory.FILE: ExitCode.USAGE,
        ErrorCategory.CAPACITY: ExitCode.CAPACITY,
        ErrorCategory.VERIFICATION: ExitCode.VERIFICATION,
    }

    HINTS = {
        ErrorCategory.USAGE: "Parameter prüfen (--help)",
        ErrorCategory.DOMAIN: "Eingaben liegen außerhalb des Körper-Definitionsbereichs",
        ErrorCategory.FILE: "Pfad und Dateiformat prüfen",
        ErrorCategory.VERIFICATION: "Zertifikat enthält den verletzenden Zeugen",
    }

    @classmethod
    def categorize(cls, error: Exception) -> CategorizedError:
        """Kategorisiert eine einzelne Ausnahme"""
        if isinstance(error, GadgetLabError):
            category = error.category
        else:
            category = ErrorCategory.USAGE

        if isinstance(error, CapacityError):
            hint = error.resume_hint
        else:
            hint = cls.HINTS.get(category, "")

        return CategorizedError(
            original_message=str(error),
            category=category,
            exit_code=cls.EXIT_CODES[category],
            hint=hint,
        )
