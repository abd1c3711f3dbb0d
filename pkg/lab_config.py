"""
Labor-Konfiguration
===================

Lädt config.json, überlagert Budgets aus Umgebungsvariablen und
parst Kommandozeilen-Werte exakt:

- Rationale Zahlen als "num/den" oder endliche Dezimalzahl, nie über float
- Bereiche als "7..31" (inklusive), für q nur Primzahlen
- Budgets müssen positiv sein
"""

import json
import os
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Union

import sympy

from gadget_errors import UsageError

DEFAULT_CONFIG_FILE = Path(__file__).with_name("config.json")

# Umgebungsvariable -> Budget-Feld
ENV_BUDGETS = {
    "RSGADGET_STATE_CAP": "state_cap",
    "RSGADGET_DENSE_CAP": "dense_cap",
    "RSGADGET_ENUM_CAP": "enumeration_cap",
    "RSGADGET_SCAN_CAP": "scan_cap",
    "RSGADGET_WORK_CAP": "work_cap",
}

Number = Union[int, Fraction]


@dataclass(frozen=True)
class Budgets:
    """Rechenbudgets; jede Überschreitung wird als CapacityError gemeldet"""
    state_cap: int = 10**8
    dense_cap: int = 10**6
    enumeration_cap: int = 10**7
    scan_cap: int = 10**8
    reachability_cap: int = 10**9
    work_cap: int = 10**10
    fiber_pattern_cap_r: int = 20

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not isinstance(value, int) or value <= 0:
                raise UsageError(f"Budget {name} muss eine positive ganze Zahl sein, nicht {value!r}")

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> 'Budgets':
        known = {k: int(v) for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


DEFAULT_BUDGETS = Budgets()


def parse_rational(text: Union[str, int, Fraction], name: str = "value") -> Fraction:
    """Parst "3/4", "0.5" oder "2" exakt zu Fraction"""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool) or isinstance(text, float):
        raise UsageError(f"{name}: float-Werte sind nicht erlaubt ({text!r}), bitte 'num/den' verwenden")
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"{name}: '{text}' ist keine exakte rationale Zahl ({e})") from e


def parse_int_range(text: Union[str, int], name: str = "range") -> List[int]:
    """Parst "7", "7..31" oder "5,7,11" zu einer sortierten Liste"""
    if isinstance(text, int):
        return [text]
    values: List[int] = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                low, high = part.split("..", 1)
                lo, hi = int(low), int(high)
                if lo > hi:
                    raise UsageError(f"{name}: leerer Bereich '{part}'")
                values.extend(range(lo, hi + 1))
            elif part:
                values.append(int(part))
    except ValueError as e:
        raise UsageError(f"{name}: '{text}' ist kein gültiger Bereich") from e
    if not values:
        raise UsageError(f"{name}: keine Werte in '{text}'")
    return sorted(set(values))


def parse_prime_range(text: Union[str, int], name: str = "q") -> List[int]:
    """Wie parse_int_range, behält aber nur Primzahlen >= 3"""
    values = parse_int_range(text, name)
    if len(values) == 1:
        return values
    primes = [v for v in values if v >= 3 and sympy.isprime(v)]
    if not primes:
        raise UsageError(f"{name}: keine Primzahl >= 3 in '{text}'")
    return primes


def load_lab_config(config_file: Optional[Union[str, Path]] = None) -> Dict:
    """Lädt config.json (fehlende Datei -> eingebaute Defaults)"""
    path = Path(config_file) if config_file else DEFAULT_CONFIG_FILE
    if not path.exists():
        return {"budgets": DEFAULT_BUDGETS.to_dict(), "settings": {}, "defaults": {}}
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def budgets_from_environment(base: Budgets, environ: Optional[Dict[str, str]] = None) -> Budgets:
    """Überlagert Budgets mit RSGADGET_* Umgebungsvariablen"""
    environ = os.environ if environ is None else environ
    overrides = {}
    for env_name, field_name in ENV_BUDGETS.items():
        raw = environ.get(env_name)
        if raw is None:
            continue
        try:
            overrides[field_name] = int(raw)
        except ValueError as e:
            raise UsageError(f"{env_name}='{raw}' ist keine ganze Zahl") from e
    return replace(base, **overrides) if overrides else base


@dataclass
class RunConfig:
    """Vollständige Beschreibung eines Laborlaufs (identisch -> identische Ausgabe)"""
    command: str
    parameters: Dict[str, str] = field(default_factory=dict)
    budgets: Budgets = field(default_factory=Budgets)
    output: Optional[str] = None
    fmt: str = "json"
    jobs: int = 1

    def __post_init__(self):
        if self.fmt not in ("json", "csv"):
            raise UsageError(f"Format muss json oder csv sein, nicht '{self.fmt}'")
        if self.jobs < 1:
            raise UsageError("--jobs muss >= 1 sein")

    def rational(self, name: str, default: Optional[str] = None) -> Optional[Fraction]:
        raw = self.parameters.get(name, default)
        return None if raw is None else parse_rational(raw, name)

    def integer(self, name: str, default: Optional[int] = None) -> Optional[int]:
        raw = self.parameters.get(name, default)
        if raw is None:
            return None
        try:
            return int(raw)
        except (TypeError, ValueError) as e:
            raise UsageError(f"--{name}: '{raw}' ist keine ganze Zahl") from e

    def to_dict(self) -> Dict:
        return {
            "command": self.command,
            "parameters": {k: str(v) for k, v in sorted(self.parameters.items())},
            "budgets": self.budgets.to_dict(),
            "output": self.output,
            "format": self.fmt,
            "jobs": self.jobs,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'RunConfig':
        return cls(
            command=data["command"],
            parameters=dict(data.get("parameters", {})),
            budgets=Budgets.from_dict(data.get("budgets", {})),
            output=data.get("output"),
            fmt=data.get("format", "json"),
            jobs=int(data.get("jobs", 1)),
        )
