"""
Potenzsummen-Varietäten
=======================

Exaktes Punktezählen für X_{k,h,u}: sum_i x_i^j = h_j (j = 1..k-1) über F_q und F_{q^e}.

- Faltungspotenzen auf (Z/q)^{e(k-1)} per NTT modulo Primzahlen p = 1 mod q,
  zerlegt nach der höchsten Potenz und reduziert auf Skalierungsbahnen
- Punkte mit paarweise verschiedenen Koordinaten über e_h der Charakterwerte (Newton)
- Hyperebenenschnitt x_1 = x_2 über eine doppelt gewichtete Variable
- Sieb-Ungleichung, Deligne-artige Schranken (quadriert, exakt), Betti-Schranken
- Jacobi-Rang-Scan über rationale projektive Punkte (nur rationaler Ort)
- Dimensionsschätzung; projektiver Abschluss per Scan gegen affine Zählung plus Kegel

Die exakten Zählungen werden aus den Residuen per CRT rekonstruiert.
"""

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy.ntheory.modular import crt
from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

from field_algebra import ExtensionField, PrimeModulus, power_sums
from gadget_errors import CapacityError, UsageError, VerificationError
from lab_config import DEFAULT_BUDGETS, Budgets

logger = logging.getLogger(__name__)

CHUNK = 1 << 18


@dataclass(frozen=True)
class PowerSumSystem:
    """Ziele (h_1..h_{k-1}), Variablenzahl, verbotene Werte, Verschiedenheit"""
    q: int
    k: int
    targets: Tuple[int, ...]
    num_vars: int
    forbidden: FrozenSet[int] = frozenset()
    distinct: bool = False

    def __post_init__(self):
        PrimeModulus(self.q)
        if self.k < 2:
            raise UsageError(f"mindestens eine Gleichung verlangt (k >= 2), nicht k={self.k}")
        if len(self.targets) != self.k - 1:
            raise UsageError(f"{len(self.targets)} Zielwerte für k-1 = {self.k - 1} Gleichungen")
        if self.num_vars < 1:
            raise UsageError(f"Variablenzahl muss >= 1 sein, nicht {self.num_vars}")
        if any(not 0 <= a < self.q for a in self.forbidden):
            raise UsageError(f"verbotene Werte {sorted(self.forbidden)} liegen nicht in F_{self.q}")
        object.__setattr__(self, "targets", tuple(int(t) % self.q for t in self.targets))
        object.__setattr__(self, "forbidden", frozenset(int(a) for a in self.forbidden))

    @classmethod
    def from_center(cls, q: int, k: int, h: int, **kwargs) -> 'PowerSumSystem':
        """Ziele aus y = (1,..,1,0,..,0) mit Gewicht h, also Potenzsummen von {0, .., h-1}"""
        if not 1 <= h <= q:
            raise UsageError(f"1 <= h <= q verletzt: h={h}, q={q}")
        return cls(q, k, power_sums(range(h), k - 1, q), h, **kwargs)

    @property
    def expected_dimension(self) -> int:
        return self.num_vars - (self.k - 1)

    def to_dict(self) -> Dict:
        return {
            "q": self.q,
            "k": self.k,
            "targets": list(self.targets),
            "num_vars": self.num_vars,
            "forbidden": sorted(self.forbidden),
            "distinct": self.distinct,
        }


# ---------------------------------------------------------------------------
# Zähl-Kern: Faltungspotenzen über (Z/q)^{e(k-1)}
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldTables:
    """Index-Tabellen für F_{q^e}; Index = sum c_i q^i wie in ExtensionField"""
    q: int
    e: int
    exp: np.ndarray
    log: np.ndarray
    trace: np.ndarray
    digits: np.ndarray

    @property
    def order(self) -> int:
        return self.q ** self.e

    def power(self, index: np.ndarray, j: int) -> np.ndarray:
        """x^j für j >= 1"""
        index = np.asarray(index, dtype=np.int64)
        out = self.exp[(self.log[index] * j) % (self.order - 1)]
        return np.where(index == 0, 0, out)

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[(self.log[a] + self.log[b]) % (self.order - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def scale(self, index: np.ndarray, w: int) -> np.ndarray:
        """w * x für einen Skalar w aus F_q"""
        places = self.q ** np.arange(self.e, dtype=np.int64)
        return ((self.digits[index] * w) % self.q) @ places


@lru_cache(maxsize=None)
def field_tables(q: int, e: int) -> FieldTables:
    """exp/log über ein primitives Element, Spur Tr(x) = sum_i x^{q^i}"""
    K = ExtensionField.build(q, e)
    order = K.order
    factors = sympy.primefactors(order - 1)
    generator = next(K.element(i) for i in range(1, order)
                     if all(K.pow(K.element(i), (order - 1) // r) != K.one for r in factors))
    exp = np.zeros(order - 1, dtype=np.int64)
    current = K.one
    for i in range(order - 1):
        exp[i] = K.index(current)
        current = K.mul(current, generator)
    log = np.full(order, -1, dtype=np.int64)
    log[exp] = np.arange(order - 1, dtype=np.int64)
    digits = (np.arange(order, dtype=np.int64)[:, None] // q ** np.arange(e, dtype=np.int64)) % q
    trace = np.zeros((order, e), dtype=np.int64)
    for i in range(e):
        conjugate = exp[(log * q ** i) % (order - 1)]
        conjugate[0] = 0
        trace += digits[conjugate]
    if np.any(trace[:, 1:] % q):
        raise VerificationError(f"Spur über F_{q}^{e} liegt nicht in F_{q}")
    logger.debug(f"Körpertabellen F_{q}^{e}: Erzeuger {generator}")
    return FieldTables(q, e, exp, log, trace[:, 0] % q, digits)


@lru_cache(maxsize=None)
def _ntt_prime(q: int, position: int) -> int:
    """position-te Primzahl p = 1 mod q von oben, mit q (p-1)^2 < 2^63"""
    if position > 0:
        m = (_ntt_prime(q, position - 1) - 1) // q - 1
    else:
        m = (math.isqrt((2 ** 63 - 1) // q) - 1) // q
    while not sympy.isprime(m * q + 1):
        m -= 1
    return m * q + 1


def _ntt_moduli(q: int, bound: int) -> List[int]:
    moduli: List[int] = []
    product = 1
    while not moduli or product <= bound:
        moduli.append(_ntt_prime(q, len(moduli)))
        product *= moduli[-1]
    return moduli


class NttModulus:
    """Z/p mit einer primitiven q-ten Einheitswurzel omega; DFT über (Z/q)^d achsenweise"""

    def __init__(self, q: int, p: int):
        self.q = q
        self.p = p
        self.omega = next(w for w in (pow(c, (p - 1) // q, p) for c in itertools.count(2)) if w != 1)
        self.powers = np.array([pow(self.omega, i, p) for i in range(q)], dtype=np.int64)
        grid = np.outer(np.arange(q), np.arange(q)) % q
        self.forward = self.powers[grid]
        self.backward = self.powers[(-grid) % q]

    def inv(self, value: int) -> int:
        return pow(int(value) % self.p, -1, self.p)

    def character(self, phase) -> np.ndarray:
        return self.powers[np.asarray(phase, dtype=np.int64) % self.q]

    def transform(self, data: np.ndarray, axes: Iterable[int], inverse: bool = False) -> np.ndarray:
        # Einträge < p, daher q (p-1)^2 < 2^63 je Zeile
        matrix = self.backward if inverse else self.forward
        for axis in axes:
            moved = np.moveaxis(data, axis, -1)
            data = np.moveaxis((moved @ matrix) % self.p, -1, axis)
        return data

    def power(self, values: np.ndarray, exponent: int) -> np.ndarray:
        result = np.ones_like(values)
        base = values % self.p
        while exponent:
            if exponent & 1:
                result = result * base % self.p
            base = base * base % self.p
            exponent >>= 1
        return result


@lru_cache(maxsize=64)
def ntt_modulus(q: int, p: int) -> NttModulus:
    return NttModulus(q, p)


def _reconstruct(moduli: List[int], residues: List[int], label: str) -> int:
    if len(moduli) == 1:
        return int(residues[0])
    logger.info(f"{label}: CRT über {len(moduli)} NTT-Primzahlen")
    value, _ = crt(moduli, residues)
    return int(value)


class PowerSumCounter:
    """
    Zählt sum_i w_i s(x_i) = t mit s(x) = (x, x^2, .., x^{k-1}) über F_{q^e} als Koeffizient
    einer Faltungspotenz auf (Z/q)^{e(k-1)}.

    Die Charaktersumme wird nach der höchsten Potenz zerlegt: für jedes b in F_{q^e} eine
    Faltung auf (Z/q)^{e(k-2)} mit Gewicht omega^{Tr(b x^{k-1})}. Ist die Wertemenge unter
    x -> lambda x abgeschlossen, gilt C_{lambda^{k-1} b}(t') = C_b(lambda . t') und es reichen
    Vertreter der Nebenklassen von (F^*)^{k-1}. Gerechnet wird modulo NTT-Primzahlen p = 1 mod q,
    der exakte Wert kommt per CRT.
    """

    def __init__(self, q: int, k: int, e: int = 1, budgets: Budgets = DEFAULT_BUDGETS):
        PrimeModulus(q)
        if k < 2:
            raise UsageError(f"mindestens eine Gleichung verlangt (k >= 2), nicht k={k}")
        self.q = q
        self.k = k
        self.e = e
        self.budgets = budgets
        self.order = q ** e
        self.slice_dims = e * (k - 2)
        self.slice_size = self.order ** (k - 2)
        self.states = max(self.order, self.slice_size)
        self._check_states(self.states, f"Charaktertabelle q^{max(e, self.slice_dims)}")
        self.tables = field_tables(q, e)

    def _check_states(self, states: int, label: str):
        if states > self.budgets.state_cap:
            raise CapacityError(label, states, self.budgets.state_cap,
                                resume_hint=f"RSGADGET_STATE_CAP >= {states} setzen oder k/e verkleinern")

    def _check_work(self, work: int, label: str):
        if work > self.budgets.work_cap:
            raise CapacityError(label, work, self.budgets.work_cap,
                                resume_hint=f"RSGADGET_WORK_CAP >= {work} setzen")

    def available(self, forbidden: Iterable[int]) -> np.ndarray:
        # F_q-Werte sind die skalaren Elemente mit Index = Wert
        blocked = set(int(a) for a in forbidden)
        return np.array([x for x in range(self.order) if x not in blocked], dtype=np.int64)

    # -- alle Tupel ----------------------------------------------------------

    def count_tuples(self, targets: Sequence[int], num_vars: int, forbidden: Iterable[int] = (),
                     weights: Optional[Sequence[int]] = None) -> int:
        weights = list(weights) if weights is not None else [1] * num_vars
        forbidden = set(int(a) for a in forbidden)
        avail = self.available(forbidden)
        targets = [int(t) % self.q for t in targets]
        if not weights:
            return int(not any(targets))
        multiplicity = Counter(int(w) % self.q for w in weights)
        scalable = forbidden <= {0}
        slices = math.gcd(self.k - 1, self.order - 1) + 1 if scalable else self.order
        moduli = _ntt_moduli(self.q, len(avail) ** len(weights))
        per_slice = self.slice_size * (2 * self.slice_dims * self.q + len(multiplicity)) + avail.size
        evaluation = self.order * slices if scalable else 0
        self._check_work(len(moduli) * (slices * per_slice + evaluation), "Faltungsarbeit (Tupel)")
        if scalable:
            run = lambda mod: self._tuples_by_orbits(mod, targets, avail, multiplicity)
        else:
            run = lambda mod: self._tuples_by_slices(mod, targets, avail, multiplicity)
        residues = [run(ntt_modulus(self.q, p)) for p in moduli]
        return _reconstruct(moduli, residues, "Tupelzählung")

    def _slice_shape(self, batch: int) -> Tuple[int, ...]:
        return (batch,) + (self.q,) * self.slice_dims

    def _target_index(self, lower: Sequence[int]) -> int:
        # Skalare t_j haben in F_{q^e} den Index t_j
        flat = 0
        for t in lower:
            flat = flat * self.order + int(t)
        return flat

    def _slice_positions(self, values: np.ndarray, w: int) -> np.ndarray:
        """Index von w * (x, .., x^{k-2}) in F^{k-2}, zeilenweise wie reshape((q,) * e(k-2))"""
        flat = np.zeros(values.shape, dtype=np.int64)
        for j in range(1, self.k - 1):
            flat = flat * self.order + self.tables.scale(self.tables.power(values, j), w)
        return flat

    def _slice_convolutions(self, mod: NttModulus, tops: np.ndarray, avail: np.ndarray,
                            multiplicity: Dict[int, int]) -> np.ndarray:
        """C_b auf F^{k-2} für jedes b in tops, Form (len(tops), slice_size)"""
        p, tables = mod.p, self.tables
        batch = len(tops)
        axes = range(1, self.slice_dims + 1)
        top_powers = tables.power(avail, self.k - 1)
        base_phase = tables.trace[tables.mul(tops[:, None], top_powers[None, :])]
        rows = np.broadcast_to(np.arange(batch)[:, None], base_phase.shape)
        spectrum = np.ones((batch, self.slice_size), dtype=np.int64)
        for w, count in sorted(multiplicity.items()):
            positions = np.broadcast_to(self._slice_positions(avail, w)[None, :], base_phase.shape)
            hist = np.zeros((batch, self.slice_size), dtype=np.int64)
            np.add.at(hist, (rows, positions), mod.character(w * base_phase))
            factor = mod.transform((hist % p).reshape(self._slice_shape(batch)), axes)
            spectrum = spectrum * mod.power(factor.reshape(batch, -1), count) % p
        conv = mod.transform(spectrum.reshape(self._slice_shape(batch)), axes, inverse=True)
        return conv.reshape(batch, -1) * mod.inv(self.slice_size) % p

    def _tuples_by_orbits(self, mod: NttModulus, targets: List[int], avail: np.ndarray,
                          multiplicity: Dict[int, int]) -> int:
        p, tables, order = mod.p, self.tables, self.order
        g = math.gcd(self.k - 1, order - 1)
        tops = np.concatenate(([0], tables.exp[:g])).astype(np.int64)
        conv = self._slice_convolutions(mod, tops, avail, multiplicity)
        lower, last = targets[:-1], targets[-1]

        # lambda = g^l, Punkt lambda . t' = (lambda t_1, .., lambda^{k-2} t_{k-2})
        exponents = np.arange(order - 1, dtype=np.int64)
        flat = np.zeros(order - 1, dtype=np.int64)
        for j, t in enumerate(lower, start=1):
            shifted = tables.exp[(exponents * j + tables.log[t]) % (order - 1)] if t else 0
            flat = flat * order + shifted
        total = 0
        for r in range(g):
            b = tables.exp[(exponents * (self.k - 1) + r) % (order - 1)]
            chi = mod.character(-last * tables.trace[b])
            total += int((conv[1 + r, flat] * chi % p).sum() % p)
        total = total * mod.inv(g) + int(conv[0, self._target_index(lower)])
        return total % p * mod.inv(order) % p

    def _tuples_by_slices(self, mod: NttModulus, targets: List[int], avail: np.ndarray,
                          multiplicity: Dict[int, int]) -> int:
        p, order = mod.p, self.order
        lower, last = targets[:-1], targets[-1]
        target = self._target_index(lower)
        batch = max(1, self.budgets.dense_cap // max(self.slice_size, avail.size))
        total = 0
        for start in range(0, order, batch):
            tops = np.arange(start, min(start + batch, order), dtype=np.int64)
            conv = self._slice_convolutions(mod, tops, avail, multiplicity)
            chi = mod.character(-last * self.tables.trace[tops])
            total += int((conv[:, target] * chi % p).sum() % p)
            logger.debug(f"Faltung b = {start}..{tops[-1]} von {order}")
        return total % p * mod.inv(order) % p

    # -- Teilmengen (verschiedene Koordinaten) -------------------------------

    def count_subsets(self, targets: Sequence[int], size: int, forbidden: Iterable[int] = ()) -> int:
        """Anzahl size-Teilmengen erlaubter Elemente mit den vorgegebenen Potenzsummen"""
        if self.e != 1:
            raise UsageError("Verschiedenheits-Zählung nur über F_q")
        avail = self.available(forbidden)
        targets = tuple(int(t) % self.q for t in targets)
        if size > len(avail):
            return 0
        if size == 0:
            return int(not any(targets))
        dims = self.k - 1
        table = self.q ** dims
        self._check_states(table, f"Charaktertabelle q^{dims}")
        moduli = _ntt_moduli(self.q, math.comb(len(avail), size))
        self._check_work(len(moduli) * table * (dims * self.q + size * size), "Faltungsarbeit (Teilmengen)")
        residues = [self._subsets_mod(ntt_modulus(self.q, p), targets, avail, size) for p in moduli]
        return _reconstruct(moduli, residues, "Teilmengenzählung")

    def _subsets_mod(self, mod: NttModulus, targets: Tuple[int, ...], avail: np.ndarray, size: int) -> int:
        """
        e_size der Charakterwerte omega^{<a, s(x)>} über Newton aus den Potenzsummen
        P_m(a) = f^(m a), dann Rücktransformation am Ziel.
        """
        q, p, dims = self.q, mod.p, self.k - 1
        shape = (q,) * dims
        points = tuple(self.tables.power(avail, j) for j in range(1, self.k))
        hist = np.zeros(q ** dims, dtype=np.int64)
        np.add.at(hist, np.ravel_multi_index(points, shape), 1)
        spectrum = mod.transform(hist.reshape((1,) + shape), range(1, dims + 1)).reshape(-1)
        grid = np.indices(shape, dtype=np.int64).reshape(dims, -1)
        sums = {m: spectrum[np.ravel_multi_index(tuple((m * grid) % q), shape)] for m in range(1, size + 1)}
        elementary = [np.ones_like(spectrum)]
        for i in range(1, size + 1):
            acc = np.zeros_like(spectrum)
            for j in range(1, i + 1):
                term = elementary[i - j] * sums[j] % p
                acc = acc + term if j % 2 else acc - term
            elementary.append(acc % p * mod.inv(i) % p)
        chi = mod.character(-(np.asarray(targets, dtype=np.int64) @ grid))
        total = int((elementary[size] * chi % p).sum() % p)
        return total * mod.inv(q ** dims) % p


# ---------------------------------------------------------------------------
# Operationen
# ---------------------------------------------------------------------------

def count_points(system: PowerSumSystem, budgets: Budgets = DEFAULT_BUDGETS) -> int:
    """N: alle Tupel in (F_q minus verbotene Werte)^n"""
    counter = PowerSumCounter(system.q, system.k, 1, budgets)
    return counter.count_tuples(system.targets, system.num_vars, system.forbidden)


def count_subsets(system: PowerSumSystem, budgets: Budgets = DEFAULT_BUDGETS) -> int:
    counter = PowerSumCounter(system.q, system.k, 1, budgets)
    return counter.count_subsets(system.targets, system.num_vars, system.forbidden)


def count_points_distinct(system: PowerSumSystem, budgets: Budgets = DEFAULT_BUDGETS) -> int:
    """N* = n! * (Anzahl passender n-Teilmengen)"""
    return math.factorial(system.num_vars) * count_subsets(system, budgets)


def count_system(system: PowerSumSystem, budgets: Budgets = DEFAULT_BUDGETS) -> int:
    return count_points_distinct(system, budgets) if system.distinct else count_points(system, budgets)


def count_hyperplane_section(system: PowerSumSystem, budgets: Budgets = DEFAULT_BUDGETS,
                             e: int = 1) -> int:
    """|Y| für Y = X cap {x_1 = x_2}: erste Variable zählt doppelt, n-1 Variablen"""
    if system.num_vars < 2:
        raise UsageError("Hyperebenenschnitt x_1 = x_2 braucht mindestens 2 Variablen")
    counter = PowerSumCounter(system.q, system.k, e, budgets)
    weights = [2] + [1] * (system.num_vars - 2)
    return counter.count_tuples(system.targets, system.num_vars - 1, system.forbidden, weights)


def count_extension(system: PowerSumSystem, e: int, budgets: Budgets = DEFAULT_BUDGETS) -> int:
    """Zählung über F_{q^e}; Ziele und verbotene Werte als Skalare eingebettet"""
    if e not in (1, 2, 3):
        raise UsageError(f"Erweiterungsgrad e={e} nicht in 1..3")
    counter = PowerSumCounter(system.q, system.k, e, budgets)
    return counter.count_tuples(system.targets, system.num_vars, system.forbidden)


def sieve_lower_bound(n_count: int, y_count: int, h: int) -> int:
    """N - C(h,2) * |Y|, untere Schranke für N*"""
    return n_count - math.comb(h, 2) * y_count


# ---------------------------------------------------------------------------
# Schranken
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BettiBound:
    general: int
    simplified: int
    katz: int
    half_deligne_constant: Fraction

    @property
    def simplified_below_half_constant(self) -> bool:
        return self.simplified < self.half_deligne_constant

    def to_dict(self) -> Dict:
        return {
            "general": str(self.general),
            "simplified": str(self.simplified),
            "katz": str(self.katz),
            "half_deligne_constant": str(self.half_deligne_constant),
            "simplified_below_half_constant": self.simplified_below_half_constant,
        }


def betti_bound(h: int, k: int, ambient_vars: Optional[int] = None,
                codim: Optional[int] = None) -> BettiBound:
    """C(n-1, r-1)(d+1)^n mit d = k-1, dazu C(h-1,k-2) k^h und 3(k+1)^{h+k-1}"""
    n = h if ambient_vars is None else ambient_vars
    r = k - 1 if codim is None else codim
    if not 1 <= r <= n:
        raise UsageError(f"1 <= codim <= ambient verletzt: codim={r}, ambient={n}")
    if not 2 <= k <= h:
        raise UsageError(f"2 <= k <= h verletzt: k={k}, h={h}")
    general = math.comb(n - 1, r - 1) * k ** n
    simplified = math.comb(h - 1, k - 2) * k ** h
    katz = 3 * (k + 1) ** (h + k - 1)
    return BettiBound(general, simplified, katz, Fraction((2 * k) ** h, 2))


@dataclass
class BoundCheck:
    """(2|count - main|)^2 <= rhs_squared, rhs = (2k)^h q^{e(h-k+2)/2} ohne den Faktor 1/2"""
    label: str
    e: int
    count: int
    main_term: int
    lhs_squared: int
    rhs_squared: int
    applicable: bool

    @property
    def passed(self) -> bool:
        return self.lhs_squared <= self.rhs_squared

    def to_dict(self) -> Dict:
        return {
            "label": self.label,
            "e": self.e,
            "count": str(self.count),
            "main_term": str(self.main_term),
            "lhs_squared": str(self.lhs_squared),
            "rhs_squared": str(self.rhs_squared),
            "passed": self.passed,
            "applicable": self.applicable,
        }


def deligne_check(count: int, q: int, k: int, h: int, e: int = 1) -> BoundCheck:
    """|N - q^{e(h-k+1)}| <= 1/2 (2k)^h q^{e(h-k+2)/2}, quadriert"""
    main = q ** (e * (h - k + 1))
    lhs = (2 * abs(count - main)) ** 2
    rhs = (2 * k) ** (2 * h) * q ** (e * (h - k + 2))
    return BoundCheck("point_count", e, count, main, lhs, rhs, 2 <= k < h < q)


def hyperplane_check(y_count: int, q: int, k: int, h: int) -> BoundCheck:
    """||Y| - q^{h-k}| <= 1/2 (2k)^{h-1} q^{(h-k+2)/2}, quadriert"""
    main = q ** (h - k)
    lhs = (2 * abs(y_count - main)) ** 2
    rhs = (2 * k) ** (2 * (h - 1)) * q ** (h - k + 2)
    return BoundCheck("hyperplane_section", 1, y_count, main, lhs, rhs, 2 <= k <= h - 2 and h < q)


@dataclass
class PointCountReport:
    q: int
    k: int
    h: int
    targets: Tuple[int, ...]
    n_count: int
    n_star: Optional[int]
    subsets: Optional[int]
    y_count: Optional[int]
    sieve_bound: Optional[int]
    main_term: int
    betti: Optional[BettiBound]
    extension_counts: Dict[int, int] = field(default_factory=dict)
    checks: List[BoundCheck] = field(default_factory=list)

    @property
    def deligne_rhs(self) -> str:
        return f"1/2*({2 * self.k})^{self.h}*{self.q}^(({self.h - self.k + 2})/2)"

    @property
    def deligne_rhs_squared(self) -> Fraction:
        return Fraction((2 * self.k) ** (2 * self.h) * self.q ** (self.h - self.k + 2), 4)

    @property
    def sieve_holds(self) -> Optional[bool]:
        if self.sieve_bound is None or self.n_star is None:
            return None
        return self.n_star >= self.sieve_bound

    @property
    def pass_flags(self) -> Dict[str, bool]:
        flags = {f"{c.label}_e{c.e}": c.passed for c in self.checks}
        flags["nstar_le_n"] = self.n_star is None or self.n_star <= self.n_count
        if self.sieve_holds is not None:
            flags["sieve"] = self.sieve_holds
        return flags

    @property
    def passed(self) -> bool:
        # nur innerhalb der Voraussetzungen verbindlich
        bound_ok = all(c.passed for c in self.checks if c.applicable)
        return bound_ok and self.pass_flags["nstar_le_n"] and self.sieve_holds is not False

    def to_dict(self) -> Dict:
        return {
            "q": self.q,
            "k": self.k,
            "h": self.h,
            "targets": list(self.targets),
            "N": str(self.n_count),
            "Nstar": None if self.n_star is None else str(self.n_star),
            "subsets": None if self.subsets is None else str(self.subsets),
            "Y": None if self.y_count is None else str(self.y_count),
            "sieve_bound": None if self.sieve_bound is None else str(self.sieve_bound),
            "main_term": str(self.main_term),
            "deligne_rhs": self.deligne_rhs,
            "deligne_rhs_squared": str(self.deligne_rhs_squared),
            "betti": None if self.betti is None else self.betti.to_dict(),
            "extension_counts": {str(e): str(c) for e, c in sorted(self.extension_counts.items())},
            "checks": [c.to_dict() for c in self.checks],
            "pass_flags": self.pass_flags,
            "passed": self.passed,
        }

    def csv_rows(self) -> List[Dict[str, str]]:
        """Eine Zeile pro (q, k, h, e)"""
        rows = []
        for e, count in sorted(self.extension_counts.items()):
            check = next((c for c in self.checks if c.label == "point_count" and c.e == e), None)
            rows.append({
                "q": str(self.q), "k": str(self.k), "h": str(self.h), "e": str(e),
                "count": str(count),
                "main_term": str(self.q ** (e * (self.h - self.k + 1))),
                "N": str(self.n_count),
                "Nstar": "" if self.n_star is None else str(self.n_star),
                "Y": "" if self.y_count is None else str(self.y_count),
                "sieve_bound": "" if self.sieve_bound is None else str(self.sieve_bound),
                "bound_passed": "" if check is None else str(check.passed),
                "bound_applicable": "" if check is None else str(check.applicable),
            })
        return rows


def verify_deligne_bound(report: PointCountReport) -> List[BoundCheck]:
    """Schrankenprüfung für jede Erweiterung und den Hyperebenenschnitt"""
    checks = [deligne_check(count, report.q, report.k, report.h, e)
              for e, count in sorted(report.extension_counts.items())]
    if report.y_count is not None:
        checks.append(hyperplane_check(report.y_count, report.q, report.k, report.h))
    report.checks = checks
    return checks


def point_count_report(q: int, k: int, h: int, extensions: Sequence[int] = (1,),
                       targets: Optional[Sequence[int]] = None,
                       budgets: Budgets = DEFAULT_BUDGETS) -> PointCountReport:
    """Alle Zählungen und Schranken für eine Instanz"""
    if targets is None:
        system = PowerSumSystem.from_center(q, k, h)
    else:
        system = PowerSumSystem(q, k, tuple(targets), h)
    n_count = count_points(system, budgets)
    subsets = count_subsets(system, budgets)
    n_star = math.factorial(h) * subsets
    y_count = count_hyperplane_section(system, budgets) if h >= 2 else None
    sieve = sieve_lower_bound(n_count, y_count, h) if y_count is not None else n_count
    betti = betti_bound(h, k) if k <= h else None

    ext = {1: n_count}
    for e in extensions:
        if e != 1:
            ext[e] = count_extension(system, e, budgets)

    report = PointCountReport(
        q=q, k=k, h=h, targets=system.targets, n_count=n_count, n_star=n_star,
        subsets=subsets, y_count=y_count, sieve_bound=sieve,
        main_term=q ** (h - k + 1), betti=betti, extension_counts=ext,
    )
    verify_deligne_bound(report)
    logger.info(f"Zählung q={q}, k={k}, h={h}: N={n_count}, N*={n_star}, Y={y_count}")
    return report


# ---------------------------------------------------------------------------
# Projektive Zählung, Dimension, Newton-Fasern
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectiveCounts:
    """Scan des Abschlusses gegen affine Zählung und Kegel am Rand"""
    affine: int
    cone_at_infinity: int
    projective_u: int
    projective_infinity: int
    infinity_from_cone: int

    @property
    def decomposition_holds(self) -> bool:
        return (self.affine == self.projective_u - self.projective_infinity
                and self.projective_infinity == self.infinity_from_cone)

    def to_dict(self) -> Dict:
        return {
            "affine": str(self.affine),
            "cone_at_infinity": str(self.cone_at_infinity),
            "projective_u": str(self.projective_u),
            "projective_infinity": str(self.projective_infinity),
            "infinity_from_cone": str(self.infinity_from_cone),
            "decomposition_holds": self.decomposition_holds,
        }


def count_projective(system: PowerSumSystem, budgets: Budgets = DEFAULT_BUDGETS) -> ProjectiveCounts:
    """
    Abschluss sum x_i^j = h_j x_{n+1}^j in P^n, gezählt per Scan über normierte Vertreter.
    Verglichen wird mit der affinen Karte x_{n+1} = 1 (N aus der Faltungszählung) und dem
    Rand x_{n+1} = 0, dem projektiven Kegel sum x_i^j = 0 mit (C0 - 1)/(q - 1) Punkten.
    """
    if system.forbidden:
        raise UsageError("projektive Zählung nur ohne verbotene Werte")
    q, n = system.q, system.num_vars
    if q ** (n + 1) > budgets.scan_cap:
        raise CapacityError("projektive Vertreter q^{n+1}", q ** (n + 1), budgets.scan_cap,
                            resume_hint=f"RSGADGET_SCAN_CAP >= {q ** (n + 1)} setzen")
    affine = count_points(system, budgets)
    cone = PowerSumSystem(q, system.k, (0,) * (system.k - 1), n)
    c0 = count_points(cone, budgets)

    scanner = JacobianScanner(q, system.k, n, system.targets)
    closure = at_infinity = 0
    for block in scanner.representatives():
        points = block[scanner.on_variety(block)]
        closure += points.shape[0]
        at_infinity += int(np.count_nonzero(points[:, -1] == 0))
    counts = ProjectiveCounts(affine, c0, closure, at_infinity, (c0 - 1) // (q - 1))
    if not counts.decomposition_holds:
        logger.warning(f"Projektive Zerlegung verletzt: {counts.to_dict()}")
    return counts


@dataclass
class DimensionEstimate:
    expected: int
    counts: Dict[int, Optional[int]]
    estimates: Dict[int, Optional[float]]
    agreement: Dict[int, Optional[bool]]
    status: str

    def to_dict(self) -> Dict:
        return {
            "expected": self.expected,
            "counts": {str(e): None if c is None else str(c) for e, c in self.counts.items()},
            "estimates": {str(e): v for e, v in self.estimates.items()},
            "agreement": {str(e): v for e, v in self.agreement.items()},
            "status": self.status,
        }


def estimate_dimension(system: PowerSumSystem, budgets: Budgets = DEFAULT_BUDGETS) -> DimensionEstimate:
    """log_{q^e}(count) für e = 1, 2; Übereinstimmung mit n-k+1 innerhalb 1/2 exakt entschieden"""
    q, d = system.q, system.expected_dimension
    counts: Dict[int, Optional[int]] = {}
    estimates: Dict[int, Optional[float]] = {}
    agreement: Dict[int, Optional[bool]] = {}
    for e in (1, 2):
        try:
            counts[e] = count_extension(system, e, budgets)
        except CapacityError as err:
            logger.warning(f"Dimensionsschätzung e={e} übersprungen: {err}")
            counts[e] = None

    if counts[1] == 0:
        return DimensionEstimate(d, counts, {1: None, 2: None}, {1: None, 2: None}, "empty over F_q")

    for e, c in counts.items():
        if c is None or c == 0:
            estimates[e], agreement[e] = None, None
            continue
        estimates[e] = math.log(c) / (e * math.log(q))
        # |log_{q^e} c - d| <= 1/2  <=>  q^{e(2d-1)} <= c^2 <= q^{e(2d+1)}
        low = Fraction(q) ** (e * (2 * d - 1))
        high = Fraction(q) ** (e * (2 * d + 1))
        agreement[e] = low <= c * c <= high
    return DimensionEstimate(d, counts, estimates, agreement, "ok")


@dataclass
class NewtonFiberReport:
    q: int
    h: int
    multisets: int
    distinct_keys: int
    collisions: List[List[List[int]]]

    @property
    def passed(self) -> bool:
        return not self.collisions

    def to_dict(self) -> Dict:
        return {
            "q": self.q,
            "h": self.h,
            "multisets": self.multisets,
            "distinct_keys": self.distinct_keys,
            "collisions": self.collisions,
            "passed": self.passed,
        }


def newton_fiber_check(q: int, h: int, budgets: Budgets = DEFAULT_BUDGETS) -> NewtonFiberReport:
    """Für k = h+1: die Potenzsummen p_1..p_h bestimmen die Multimenge eindeutig (h < q)"""
    PrimeModulus(q)
    if not 1 <= h < q:
        raise UsageError(f"1 <= h < q verletzt: h={h}, q={q}")
    total = math.comb(q + h - 1, h)
    if total > budgets.enumeration_cap:
        raise CapacityError("Multimengen", total, budgets.enumeration_cap)
    seen: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
    collisions = []
    for multiset in itertools.combinations_with_replacement(range(q), h):
        key = power_sums(multiset, h, q)
        if key in seen:
            collisions.append([list(seen[key]), list(multiset)])
        else:
            seen[key] = multiset
    return NewtonFiberReport(q, h, total, len(seen), collisions)


# ---------------------------------------------------------------------------
# Jacobi-Rang-Scan
# ---------------------------------------------------------------------------

@dataclass
class SmoothnessReport:
    variety: str
    q: int
    k: int
    h: int
    ambient_dimension: int
    expected_dimension: int
    rational_points: int
    points_scanned: int
    singular_points: List[List[int]] = field(default_factory=list)
    note: str = "rational locus only"

    @property
    def verdict(self) -> str:
        if self.singular_points:
            return f"{len(self.singular_points)} singular rational point(s)"
        return "no singular rational points"

    def to_dict(self) -> Dict:
        return {
            "variety": self.variety,
            "q": self.q,
            "k": self.k,
            "h": self.h,
            "ambient_dimension": self.ambient_dimension,
            "expected_dimension": self.expected_dimension,
            "rational_points": str(self.rational_points),
            "points_scanned": str(self.points_scanned),
            "singular_points": self.singular_points,
            "verdict": self.verdict,
            "note": self.note,
        }


class JacobianScanner:
    """
    Projektive Abschlüsse:
      X_{k,h}:   sum_{i<=h} x_i^j = 0                    in P^{h-1}
      X_{k,h,u}: sum_{i<=h} x_i^j - h_j x_{h+1}^j = 0     in P^h
    Jacobi-Zeile j: j x_i^{j-1}, letzte Spalte bei X_{k,h,u}: -j h_j x_{h+1}^{j-1}.
    """

    def __init__(self, q: int, k: int, h: int, targets: Optional[Sequence[int]] = None):
        self.q = q
        self.k = k
        self.h = h
        self.targets = None if targets is None else tuple(int(t) % q for t in targets)
        self.n = h if targets is None else h + 1
        self.gf = GF(q)

    def _coefficients(self) -> List[int]:
        # Koeffizient der letzten Variable in Gleichung j
        if self.targets is None:
            return [1] * (self.k - 1)
        return [(-t) % self.q for t in self.targets]

    def on_variety(self, points: np.ndarray) -> np.ndarray:
        q = self.q
        mask = np.ones(points.shape[0], dtype=bool)
        coeffs = self._coefficients()
        power = np.ones_like(points)
        for j in range(1, self.k):
            power = (power * points) % q
            if self.targets is None:
                value = power.sum(axis=1) % q
            else:
                value = (power[:, :-1].sum(axis=1) + coeffs[j - 1] * power[:, -1]) % q
            mask &= value == 0
        return mask

    def jacobian(self, point: Sequence[int]) -> List[List[int]]:
        q = self.q
        coeffs = self._coefficients()
        rows = []
        for j in range(1, self.k):
            row = [j * pow(x, j - 1, q) % q for x in point[:self.h]]
            if self.targets is not None:
                row.append(j * coeffs[j - 1] * pow(point[-1], j - 1, q) % q)
            rows.append(row)
        return rows

    def rank(self, point: Sequence[int]) -> int:
        rows = self.jacobian(point)
        K = self.gf
        matrix = DomainMatrix([[K(v) for v in row] for row in rows], (len(rows), self.n), K)
        return matrix.rank()

    def is_singular(self, point: Sequence[int]) -> bool:
        on = bool(self.on_variety(np.array([point], dtype=np.int64))[0])
        return on and self.rank(point) < self.k - 1

    def representatives(self) -> Iterable[np.ndarray]:
        """Normierte Vertreter: erste von Null verschiedene Koordinate = 1, blockweise"""
        q, n = self.q, self.n
        for pivot in range(n):
            tail = n - pivot - 1
            total = q ** tail
            for start in range(0, total, CHUNK):
                idx = np.arange(start, min(start + CHUNK, total), dtype=np.int64)
                block = np.zeros((idx.size, n), dtype=np.int64)
                block[:, pivot] = 1
                if tail:
                    digits = np.array(np.unravel_index(idx, (q,) * tail)).T
                    block[:, pivot + 1:] = digits
                yield block

    def scan(self, budgets: Budgets = DEFAULT_BUDGETS) -> SmoothnessReport:
        q, n = self.q, self.n
        if q ** n > budgets.scan_cap:
            raise CapacityError("affine Vertreter q^n", q ** n, budgets.scan_cap,
                                resume_hint=f"RSGADGET_SCAN_CAP >= {q ** n} setzen")
        name = "X_bar_{k,h}" if self.targets is None else "X_bar_{k,h,u}"
        expected = self.h - self.k if self.targets is None else self.h - self.k + 1
        report = SmoothnessReport(name, q, self.k, self.h, n - 1, expected, 0, 0)
        for block in self.representatives():
            report.points_scanned += block.shape[0]
            survivors = block[self.on_variety(block)]
            report.rational_points += survivors.shape[0]
            for row in survivors:
                point = [int(v) for v in row]
                if self.rank(point) < self.k - 1:
                    if not self.is_singular(point):
                        raise VerificationError(f"Singulärer Punkt {point} hält der Nachprüfung nicht stand",
                                                witness=point)
                    report.singular_points.append(point)
        logger.info(f"Jacobi-Scan {name} q={q}, k={self.k}, h={self.h}: "
                    f"{report.rational_points} Punkte, {len(report.singular_points)} singulär")
        return report


def jacobian_rank_scan(q: int, k: int, h: int, projective: str = "X",
                       targets: Optional[Sequence[int]] = None,
                       budgets: Budgets = DEFAULT_BUDGETS) -> SmoothnessReport:
    """projective = "X" für X_bar_{k,h}, "Xu" für X_bar_{k,h,u} (Ziele Standard: Zentrum y)"""
    PrimeModulus(q)
    if not 1 <= k <= h:
        raise UsageError(f"1 <= k <= h verletzt: k={k}, h={h}")
    if projective not in ("X", "Xu"):
        raise UsageError(f"unbekannte Varietät '{projective}' (X oder Xu)")
    if k == 1:
        # keine Gleichungen: ganzer projektiver Raum
        n = h if projective == "X" else h + 1
        return SmoothnessReport("P^{n-1}", q, k, h, n - 1, n - 1, (q ** n - 1) // (q - 1), 0,
                                note="ambient projective space, trivially smooth")
    if projective == "Xu":
        targets = tuple(targets) if targets is not None else power_sums(range(h), k - 1, q)
        return JacobianScanner(q, k, h, targets).scan(budgets)
    return JacobianScanner(q, k, h).scan(budgets)
