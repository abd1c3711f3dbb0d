"""
Körper-Arithmetik
=================

Exakte Arithmetik über F_q und kleinen Erweiterungen F_{q^e}:

- PrimeModulus / FieldElement für F_q (0^0 = 1)
- ExtensionField F_{q^e}, e <= 3, mit lexikographisch kleinstem irreduziblem Modul
- Polynomial: dichte univariate Polynome (niedrigster Grad zuerst)
- Newton-Identitäten in beide Richtungen und Vandermonde-Determinanten

Polynom-Arithmetik läuft über sympy.polys.galoistools (Koeffizienten dort
höchster Grad zuerst, hier wird an der Grenze umgedreht).
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
import sympy.polys.galoistools as gf
from sympy.polys.domains import ZZ

from gadget_errors import FieldDomainError, UsageError

logger = logging.getLogger(__name__)

MAX_EXTENSION_DEGREE = 3


def is_prime_modulus(q: int) -> Tuple[bool, Optional[int]]:
    """Deterministischer Primtest; liefert bei Nicht-Primzahlen den kleinsten Faktor als Zeugen"""
    if q < 2:
        return False, None
    if sympy.isprime(q):
        return True, None
    return False, min(sympy.primefactors(q))


@dataclass(frozen=True)
class PrimeModulus:
    """Primzahl q >= 3"""
    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or isinstance(self.q, bool):
            raise UsageError(f"q muss eine ganze Zahl sein, nicht {self.q!r}")
        prime, witness = is_prime_modulus(self.q)
        if not prime:
            detail = f" (Teiler {witness})" if witness else ""
            raise UsageError(f"q={self.q} ist keine Primzahl{detail}")
        if self.q < 3:
            raise UsageError(f"q={self.q}: es wird q >= 3 verlangt")

    def __call__(self, value: int) -> 'FieldElement':
        return FieldElement(value % self.q, self)

    def __int__(self) -> int:
        return self.q


def as_modulus(q: Union[int, PrimeModulus]) -> PrimeModulus:
    return q if isinstance(q, PrimeModulus) else PrimeModulus(q)


@dataclass(frozen=True)
class FieldElement:
    """Element von F_q, Wert immer in [0, q)"""
    value: int
    modulus: PrimeModulus

    def __post_init__(self):
        if not 0 <= self.value < self.modulus.q:
            raise UsageError(f"Wert {self.value} liegt nicht in [0, {self.modulus.q})")

    def _coerce(self, other: Union['FieldElement', int]) -> 'FieldElement':
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise UsageError(
                    f"Modul-Mismatch: F_{self.modulus.q} gegen F_{other.modulus.q}")
            return other
        if isinstance(other, int):
            return self.modulus(other)
        raise UsageError(f"{other!r} ist kein Element von F_{self.modulus.q}")

    def __add__(self, other):
        other = self._coerce(other)
        return self.modulus(self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return self.modulus(self.value - other.value)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return self.modulus(self.value * other.value)

    __rmul__ = __mul__

    def __neg__(self):
        return self.modulus(-self.value)

    def inv(self) -> 'FieldElement':
        if self.value == 0:
            raise FieldDomainError(f"0 ist in F_{self.modulus.q} nicht invertierbar")
        return self.modulus(pow(self.value, -1, self.modulus.q))

    def __truediv__(self, other):
        return self * self._coerce(other).inv()

    def __pow__(self, exponent: int) -> 'FieldElement':
        if exponent < 0:
            return self.inv() ** (-exponent)
        # pow(0, 0, q) == 1
        return self.modulus(pow(self.value, exponent, self.modulus.q))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.modulus.q})"


def field_ops(a: FieldElement, b: FieldElement) -> dict:
    """Alle Grundoperationen auf einmal; inv/div nur wenn b != 0"""
    result = {"add": a + b, "sub": a - b, "mul": a * b, "pow": a ** int(b)}
    if b.value != 0:
        result["inv"] = b.inv()
        result["div"] = a / b
    return result


def canonical_ordering(q: Union[int, PrimeModulus]) -> Tuple[FieldElement, ...]:
    """Feste Anordnung (a_1, ..., a_q) = (0, 1, ..., q-1)"""
    modulus = as_modulus(q)
    return tuple(FieldElement(i, modulus) for i in range(modulus.q))


# ---------------------------------------------------------------------------
# Newton-Identitäten
# ---------------------------------------------------------------------------

def _values(seq: Sequence[Union[FieldElement, int]]) -> List[int]:
    return [int(v) for v in seq]


def power_sums_to_elementary(p: Sequence[Union[FieldElement, int]], m: int,
                             q: Union[int, PrimeModulus, None] = None) -> Tuple[FieldElement, ...]:
    """
    Newton: j*e_j = sum_{i=1..j} (-1)^{i-1} e_{j-i} p_i.

    Benötigt m < q, weil durch 1..m geteilt wird.
    """
    modulus = _resolve_modulus(p, q)
    if len(p) < m:
        raise UsageError(f"{len(p)} Potenzsummen reichen nicht für m={m}")
    if m >= modulus.q:
        raise FieldDomainError(
            f"m={m} >= q={modulus.q}: j*e_j lässt sich für j=q in Charakteristik q nicht auflösen")
    qq = modulus.q
    sums = _values(p)
    e = [1]
    for j in range(1, m + 1):
        acc = 0
        for i in range(1, j + 1):
            sign = 1 if i % 2 == 1 else -1
            acc += sign * e[j - i] * sums[i - 1]
        e.append(acc * pow(j, -1, qq) % qq)
    return tuple(modulus(v) for v in e[1:])


def elementary_to_power_sums(e: Sequence[Union[FieldElement, int]], m: int,
                             q: Union[int, PrimeModulus, None] = None) -> Tuple[FieldElement, ...]:
    """Umkehrung: p_j = sum_{i=1..j-1} (-1)^{i-1} e_i p_{j-i} + (-1)^{j-1} j e_j"""
    modulus = _resolve_modulus(e, q)
    qq = modulus.q
    es = _values(e)
    if len(es) < m:
        raise UsageError(f"{len(es)} elementarsymmetrische Werte reichen nicht für m={m}")
    p: List[int] = []
    for j in range(1, m + 1):
        acc = (-1) ** (j - 1) * j * es[j - 1]
        for i in range(1, j):
            acc += (-1) ** (i - 1) * es[i - 1] * p[j - i - 1]
        p.append(acc % qq)
    return tuple(modulus(v) for v in p)


def power_sums(values: Sequence[Union[FieldElement, int]], m: int,
               q: Union[int, PrimeModulus]) -> Tuple[int, ...]:
    """Direkte Potenzsummen sum_i v_i^j für j = 1..m"""
    qq = int(as_modulus(q).q)
    vals = _values(values)
    return tuple(sum(pow(v, j, qq) for v in vals) % qq for j in range(1, m + 1))


def elementary_symmetric(values: Sequence[Union[FieldElement, int]], m: int,
                         q: Union[int, PrimeModulus]) -> Tuple[int, ...]:
    """e_1..e_m durch Ausmultiplizieren von prod (1 + v*t)"""
    qq = as_modulus(q).q
    coeffs = [1] + [0] * m
    for v in _values(values):
        for j in range(m, 0, -1):
            coeffs[j] = (coeffs[j] + v * coeffs[j - 1]) % qq
    return tuple(coeffs[1:])


def _resolve_modulus(seq, q) -> PrimeModulus:
    if q is not None:
        return as_modulus(q)
    for v in seq:
        if isinstance(v, FieldElement):
            return v.modulus
    raise UsageError("Modul fehlt: q angeben oder FieldElement-Werte übergeben")


# ---------------------------------------------------------------------------
# Polynome
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Dichtes Polynom über F_q, Koeffizienten niedrigster Grad zuerst, ohne führende Nullen"""
    coeffs: Tuple[int, ...]
    modulus: PrimeModulus

    def __post_init__(self):
        q = self.modulus.q
        reduced = [c % q for c in self.coeffs]
        while reduced and reduced[-1] == 0:
            reduced.pop()
        object.__setattr__(self, "coeffs", tuple(reduced))

    @classmethod
    def _from_gf(cls, high_first: List[int], modulus: PrimeModulus) -> 'Polynomial':
        return cls(tuple(int(c) for c in reversed(high_first)), modulus)

    def _to_gf(self) -> List[int]:
        return [ZZ(c) for c in reversed(self.coeffs)]

    @property
    def degree(self) -> int:
        """Grad; das Nullpolynom hat Grad -1"""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def _check(self, other: 'Polynomial'):
        if other.modulus != self.modulus:
            raise UsageError("Polynome über verschiedenen Körpern")

    def __add__(self, other: 'Polynomial') -> 'Polynomial':
        self._check(other)
        return self._from_gf(gf.gf_add(self._to_gf(), other._to_gf(), self.modulus.q, ZZ), self.modulus)

    def __sub__(self, other: 'Polynomial') -> 'Polynomial':
        self._check(other)
        return self._from_gf(gf.gf_sub(self._to_gf(), other._to_gf(), self.modulus.q, ZZ), self.modulus)

    def __mul__(self, other: 'Polynomial') -> 'Polynomial':
        self._check(other)
        return self._from_gf(gf.gf_mul(self._to_gf(), other._to_gf(), self.modulus.q, ZZ), self.modulus)

    def evaluate(self, x: Union[int, FieldElement]) -> FieldElement:
        return self.modulus(int(gf.gf_eval(self._to_gf(), int(x), self.modulus.q, ZZ)))

    def evaluate_all(self) -> np.ndarray:
        """Auswertung an allen q Körperelementen (Horner, vektorisiert)"""
        q = self.modulus.q
        points = np.arange(q, dtype=np.int64)
        acc = np.zeros(q, dtype=np.int64)
        for c in reversed(self.coeffs):
            acc = (acc * points + c) % q
        return acc

    @classmethod
    def from_roots(cls, roots: Sequence[Union[int, FieldElement]], modulus: Union[int, PrimeModulus]) -> 'Polynomial':
        """prod (t - a) über alle Wurzeln (mit Vielfachheit)"""
        modulus = as_modulus(modulus)
        q = modulus.q
        acc = [ZZ(1)]
        for a in roots:
            acc = gf.gf_mul(acc, [ZZ(1), ZZ(-int(a) % q)], q, ZZ)
        return cls._from_gf(acc, modulus)

    @classmethod
    def interpolate(cls, points: Sequence[int], values: Sequence[int],
                    modulus: Union[int, PrimeModulus]) -> 'Polynomial':
        """Lagrange-Interpolation durch paarweise verschiedene Stützstellen"""
        modulus = as_modulus(modulus)
        q = modulus.q
        xs = [int(x) % q for x in points]
        if len(set(xs)) != len(xs):
            raise FieldDomainError("Stützstellen müssen paarweise verschieden sein")
        if len(xs) != len(values):
            raise UsageError("Anzahl Stützstellen und Werte verschieden")
        total: List[int] = []
        for i, (xi, yi) in enumerate(zip(xs, values)):
            basis = [ZZ(1)]
            denom = 1
            for j, xj in enumerate(xs):
                if j == i:
                    continue
                basis = gf.gf_mul(basis, [ZZ(1), ZZ(-xj % q)], q, ZZ)
                denom = denom * (xi - xj) % q
            scale = int(yi) * pow(denom, -1, q) % q
            total = gf.gf_add(total, gf.gf_mul_ground(basis, ZZ(scale), q, ZZ), q, ZZ)
        return cls._from_gf(total, modulus)

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i, c in reversed(list(enumerate(self.coeffs))):
            if c == 0:
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            coef = str(c) if (c != 1 or i == 0) else ""
            terms.append(f"{coef}{mono}")
        return " + ".join(terms)


def is_irreducible(poly: Polynomial) -> bool:
    """Faktor-Grad-Test über galoistools"""
    if poly.degree < 1:
        return False
    return bool(gf.gf_irreducible_p(poly._to_gf(), poly.modulus.q, ZZ))


@lru_cache(maxsize=None)
def _find_irreducible_coeffs(q: int, e: int) -> Tuple[int, ...]:
    # Reihenfolge: Index sum c_i q^i aufsteigend, höhere Koeffizienten zählen stärker
    for index in range(q ** e):
        low = [(index // q ** i) % q for i in range(e)]
        candidate = Polynomial(tuple(low) + (1,), PrimeModulus(q))
        if is_irreducible(candidate):
            return candidate.coeffs
    raise FieldDomainError(f"kein irreduzibles Polynom vom Grad {e} über F_{q}")  # pragma: no cover


def find_irreducible(q: Union[int, PrimeModulus], e: int) -> Polynomial:
    """Kleinstes monisches irreduzibles Polynom vom Grad e (e in 1..3)"""
    modulus = as_modulus(q)
    if not 1 <= e <= MAX_EXTENSION_DEGREE:
        raise UsageError(f"Erweiterungsgrad e={e} nicht in 1..{MAX_EXTENSION_DEGREE}")
    return Polynomial(_find_irreducible_coeffs(modulus.q, e), modulus)


# ---------------------------------------------------------------------------
# Erweiterungskörper
# ---------------------------------------------------------------------------

ExtElement = Tuple[int, ...]


@dataclass(frozen=True)
class ExtensionField:
    """F_{q^e} = F_q[t]/(modulus_poly), Elemente als Koeffizienten-Tupel der Länge e"""
    base: PrimeModulus
    degree: int
    modulus_poly: Polynomial = field(default=None)

    def __post_init__(self):
        if not 1 <= self.degree <= MAX_EXTENSION_DEGREE:
            raise UsageError(f"Erweiterungsgrad e={self.degree} nicht in 1..{MAX_EXTENSION_DEGREE}")
        if self.modulus_poly is None:
            object.__setattr__(self, "modulus_poly", find_irreducible(self.base, self.degree))
        poly = self.modulus_poly
        if poly.modulus != self.base or poly.degree != self.degree or poly.coeffs[-1] != 1:
            raise UsageError(f"{poly} ist kein monisches Polynom vom Grad {self.degree} über F_{self.base.q}")
        if not is_irreducible(poly):
            raise UsageError(f"{poly} ist über F_{self.base.q} nicht irreduzibel")

    @classmethod
    def build(cls, q: Union[int, PrimeModulus], e: int) -> 'ExtensionField':
        return cls(as_modulus(q), e)

    @property
    def order(self) -> int:
        return self.base.q ** self.degree

    def index(self, element: ExtElement) -> int:
        q = self.base.q
        return sum(c * q ** i for i, c in enumerate(element))

    def element(self, index: int) -> ExtElement:
        q = self.base.q
        return tuple((index // q ** i) % q for i in range(self.degree))

    def elements(self) -> Iterator[ExtElement]:
        for index in range(self.order):
            yield self.element(index)

    def _pad(self, high_first: List[int]) -> ExtElement:
        low = [int(c) for c in reversed(high_first)]
        return tuple(low + [0] * (self.degree - len(low)))

    def _gf(self, element: ExtElement) -> List[int]:
        return gf.gf_strip([ZZ(c) for c in reversed(element)])

    def add(self, a: ExtElement, b: ExtElement) -> ExtElement:
        q = self.base.q
        return tuple((x + y) % q for x, y in zip(a, b))

    def sub(self, a: ExtElement, b: ExtElement) -> ExtElement:
        q = self.base.q
        return tuple((x - y) % q for x, y in zip(a, b))

    def mul(self, a: ExtElement, b: ExtElement) -> ExtElement:
        q = self.base.q
        product = gf.gf_mul(self._gf(a), self._gf(b), q, ZZ)
        return self._pad(gf.gf_rem(product, self.modulus_poly._to_gf(), q, ZZ))

    def pow(self, a: ExtElement, exponent: int) -> ExtElement:
        q = self.base.q
        if exponent == 0:
            return self.one
        result = gf.gf_pow_mod(self._gf(a), exponent, self.modulus_poly._to_gf(), q, ZZ)
        return self._pad(result)

    def inv(self, a: ExtElement) -> ExtElement:
        if not any(a):
            raise FieldDomainError(f"0 ist in F_{self.base.q}^{self.degree} nicht invertierbar")
        return self.pow(a, self.order - 2)

    def scalar(self, c: int) -> ExtElement:
        return tuple([c % self.base.q] + [0] * (self.degree - 1))

    @property
    def zero(self) -> ExtElement:
        return (0,) * self.degree

    @property
    def one(self) -> ExtElement:
        return self.scalar(1)

    def frobenius_holds(self) -> bool:
        """x^{q^e} == x für alle Elemente (nur für kleine Körper sinnvoll)"""
        return all(self.pow(x, self.order) == x for x in self.elements())


# ---------------------------------------------------------------------------
# Vandermonde
# ---------------------------------------------------------------------------

def vandermonde_matrix(points: Sequence[int], q: Union[int, PrimeModulus]) -> sympy.Matrix:
    """k x k Matrix der Potenzen a^j (Zeile j, Spalte i), 0^0 = 1"""
    qq = as_modulus(q).q
    k = len(points)
    return sympy.Matrix(k, k, lambda j, i: pow(int(points[int(i)]), int(j), qq))


def vandermonde_det(points: Sequence[int], q: Union[int, PrimeModulus]) -> int:
    """prod_{i<j} (a_j - a_i) mod q"""
    qq = as_modulus(q).q
    acc = 1
    for i, j in itertools.combinations(range(len(points)), 2):
        acc = acc * (int(points[j]) - int(points[i])) % qq
    return acc
