"""
Reed-Solomon-Gitter
===================

Baut die Potenzmatrix H_q(k) und das Gitter L_{q,k} = {v in Z^q : H v = 0 mod q}:

- Kern-Erzeuger (systematisch über die Vandermonde-Spalten a_1..a_k) plus q*Identität
- Kanonische Basis als spaltenweise Hermite-Normalform (sympy), det = q^k
- Kurzvektor-Suche über Paare von Multimengen (T+, T-) mit Schlüssel-Join
- Nachspielen des Newton-Arguments für jeden Kandidaten unterhalb von 2k
- Textexport "q k n det" plus eine Zeile pro Matrixzeile
"""

import itertools
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from sympy.matrices.normalforms import hermite_normal_form

from field_algebra import PrimeModulus, as_modulus, power_sums_to_elementary
from gadget_errors import CapacityError, GadgetFileError, UsageError, VerificationError
from lab_config import DEFAULT_BUDGETS, Budgets, parse_rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParityCheckMatrix:
    """k x q Matrix mit entry(j, i) = a_i^j, a_i = i-1, 0^0 = 1"""
    q: PrimeModulus
    k: int
    entries: Tuple[Tuple[int, ...], ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def column(self, i: int) -> Tuple[int, ...]:
        return tuple(row[i] for row in self.entries)


@dataclass(frozen=True)
class LatticeBasis:
    """Quadratische Basis, Spalten als Tupel"""
    n: int
    columns: Tuple[Tuple[int, ...], ...]

    def matrix(self) -> sympy.Matrix:
        return sympy.Matrix(self.n, self.n, lambda r, c: self.columns[c][r])

    def rows(self) -> List[List[int]]:
        return [[self.columns[c][r] for c in range(self.n)] for r in range(self.n)]


@dataclass(frozen=True)
class Syndrome:
    u: Tuple[int, ...]

    def is_zero(self) -> bool:
        return not any(self.u)


@dataclass(frozen=True)
class RSLattice:
    q: int
    k: int
    parity_check: ParityCheckMatrix
    basis: LatticeBasis
    determinant: int

    @property
    def dimension(self) -> int:
        return self.basis.n


def _check_qk(q: Union[int, PrimeModulus], k: int) -> PrimeModulus:
    modulus = as_modulus(q)
    if not 1 < k < modulus.q:
        raise UsageError(f"1 < k < q verletzt: k={k}, q={modulus.q}")
    return modulus


def build_parity_check(q: Union[int, PrimeModulus], k: int) -> ParityCheckMatrix:
    modulus = _check_qk(q, k)
    qq = modulus.q
    entries = tuple(tuple(pow(i, j, qq) for i in range(qq)) for j in range(k))
    return ParityCheckMatrix(modulus, k, entries)


def kernel_generators(H: ParityCheckMatrix) -> List[List[int]]:
    """
    Systematische Erzeuger des Kerns mod q: für jede Spalte i >= k der Vektor
    e_i - V^{-1} H[:, i], mit V = Vandermonde der ersten k Spalten.
    """
    qq, k = H.q.q, H.k
    V = sympy.Matrix(k, k, lambda j, i: H.entries[j][i])
    V_inv = V.inv_mod(qq)
    generators = []
    for i in range(k, qq):
        head = V_inv * sympy.Matrix(H.column(i))
        vector = [0] * qq
        for j in range(k):
            vector[j] = int(-head[j]) % qq
        vector[i] = 1
        generators.append(vector)
    return generators


def build_lattice(q: Union[int, PrimeModulus], k: int) -> RSLattice:
    """Gitter L_{q,k} mit Hermite-Normalform-Basis und exakter Determinante"""
    H = build_parity_check(q, k)
    qq = H.q.q
    generators = kernel_generators(H)
    stacked = [list(col) for col in generators] + [[qq if r == c else 0 for r in range(qq)] for c in range(qq)]
    gen_matrix = sympy.Matrix(qq, len(stacked), lambda r, c: stacked[c][r])
    hnf = hermite_normal_form(gen_matrix)
    if hnf.shape != (qq, qq):
        raise VerificationError(f"Hermite-Normalform hat Form {hnf.shape}, erwartet ({qq}, {qq})")

    columns = tuple(tuple(int(hnf[r, c]) for r in range(qq)) for c in range(qq))
    basis = LatticeBasis(qq, columns)
    determinant = abs(int(hnf.det()))

    for col in columns:
        if not syndrome(H, col).is_zero():
            raise VerificationError(f"Basisspalte {col} liegt nicht im Kern von H", witness=list(col))
    if determinant != qq ** k:
        raise VerificationError(f"det = {determinant} != q^k = {qq ** k}")

    logger.info(f"Gitter L_{{{qq},{k}}} konstruiert: det = {determinant}")
    return RSLattice(qq, k, H, basis, determinant)


def syndrome(H: ParityCheckMatrix, x: Sequence[int]) -> Syndrome:
    qq = H.q.q
    if len(x) != qq:
        raise UsageError(f"Vektorlänge {len(x)} != q = {qq}")
    u = tuple(sum(H.entries[j][i] * int(x[i]) for i in range(qq)) % qq for j in range(H.k))
    return Syndrome(u)


def contains(lattice: RSLattice, v: Sequence[int]) -> bool:
    """Gittermitgliedschaft über das Syndrom"""
    return syndrome(lattice.parity_check, v).is_zero()


def same_span(lattice: RSLattice) -> bool:
    """Basis und Basis+q*I erzeugen dasselbe Gitter (gleiche Normalform)"""
    qq = lattice.q
    cols = [list(c) for c in lattice.basis.columns] + [[qq if r == c else 0 for r in range(qq)] for c in range(qq)]
    extended = sympy.Matrix(qq, len(cols), lambda r, c: cols[c][r])
    return hermite_normal_form(extended) == lattice.basis.matrix()


def hamming_min_distance_bound(q: int, k: int) -> int:
    """MDS-Schranke des Codes RS_q(q-k): Mindestgewicht k+1"""
    _check_qk(q, k)
    return k + 1


def norm_power(x: Sequence[int], p: Union[int, Fraction]) -> int:
    """Exaktes sum |x_i|^p für ganzzahliges p"""
    p = Fraction(p)
    if p.denominator != 1 or p < 1:
        raise UsageError(f"exakte Norm nur für ganzzahliges p >= 1, nicht p={p}")
    return sum(abs(int(v)) ** int(p) for v in x)


# ---------------------------------------------------------------------------
# Export / Import
# ---------------------------------------------------------------------------

def export_lattice(lattice: RSLattice) -> str:
    lines = [f"{lattice.q} {lattice.k} {lattice.dimension} {lattice.determinant}"]
    lines.extend(" ".join(str(v) for v in row) for row in lattice.basis.rows())
    return "\n".join(lines) + "\n"


def load_lattice(source: Union[str, Path]) -> RSLattice:
    """Liest das Textformat (Pfad oder Inhalt) und prüft es gegen eine Neukonstruktion"""
    path = Path(source) if isinstance(source, Path) or "\n" not in str(source) else None
    label = str(path) if path else "<text>"
    try:
        text = path.read_text(encoding="utf-8") if path else str(source)
    except OSError as e:
        raise GadgetFileError(label, f"nicht lesbar ({e})") from e
    lines = [line for line in text.splitlines() if line.strip()]
    try:
        q, k, n, det = (int(v) for v in lines[0].split())
        rows = [[int(v) for v in line.split()] for line in lines[1:]]
    except (IndexError, ValueError) as e:
        raise GadgetFileError(label, f"ungültiges Gitterformat ({e})") from e
    if len(rows) != n or any(len(r) != n for r in rows):
        raise GadgetFileError(label, f"erwartet {n} Zeilen mit je {n} Einträgen")
    H = build_parity_check(q, k)
    columns = tuple(tuple(rows[r][c] for r in range(n)) for c in range(n))
    return RSLattice(q, k, H, LatticeBasis(n, columns), det)


# ---------------------------------------------------------------------------
# Kurzvektor-Suche über Multimengen
# ---------------------------------------------------------------------------

Multiset = Tuple[int, ...]


@dataclass
class MinDistanceReport:
    """Ergebnis der Suche; value_p_power ist lambda^(p) hoch p, falls exakt"""
    q: int
    k: int
    p: str
    radius_cap: int
    exact: bool
    l1_min: Optional[int]
    value_p_power: Optional[int]
    lower_bound_p_power: int
    witness: Optional[List[int]]
    multisets_enumerated: int

    def to_dict(self) -> Dict:
        return {
            "q": self.q,
            "k": self.k,
            "p": self.p,
            "radius_cap": self.radius_cap,
            "exact": self.exact,
            "l1_min": self.l1_min,
            "value_p_power": self.value_p_power,
            "lower_bound_p_power": self.lower_bound_p_power,
            "witness": self.witness,
            "multisets_enumerated": self.multisets_enumerated,
        }

    def certificate(self) -> str:
        if self.exact:
            return f"lambda^({self.p})^{self.p} = {self.value_p_power}"
        return f"lambda^({self.p})^{self.p} >= {self.lower_bound_p_power}"


class SignedMultisetSearch:
    """
    Nicht-Null-Gittervektoren mit l1-Norm <= cap als Paare (T+, T-) disjunkter
    Multimengen über F_q mit |T+| = |T-| mod q und gleichen Potenzsummen p_1..p_{k-1}.
    """

    def __init__(self, lattice: RSLattice, radius_cap: int, budgets: Budgets = DEFAULT_BUDGETS):
        if radius_cap < 0:
            raise UsageError(f"radius_cap muss >= 0 sein, nicht {radius_cap}")
        self.lattice = lattice
        self.q = lattice.q
        self.k = lattice.k
        self.radius_cap = radius_cap
        self.budgets = budgets
        self.enumerated = 0
        self._tables: Dict[int, Dict[Tuple[int, ...], List[Multiset]]] = {}

    def size_pairs(self, total: int) -> Iterator[Tuple[int, int]]:
        """(a, b) mit a + b = total, a >= b, a = b mod q"""
        for b in range(total // 2 + 1):
            a = total - b
            if (a - b) % self.q == 0:
                yield a, b

    def _key(self, multiset: Multiset) -> Tuple[int, ...]:
        q = self.q
        return tuple(sum(pow(x, j, q) for x in multiset) % q for j in range(1, self.k))

    def _table(self, size: int) -> Dict[Tuple[int, ...], List[Multiset]]:
        if size not in self._tables:
            count = math.comb(self.q + size - 1, size)
            if self.enumerated + count > self.budgets.enumeration_cap:
                raise CapacityError(
                    "Multimengen-Enumeration", self.enumerated + count, self.budgets.enumeration_cap,
                    resume_hint=f"--radius-cap verkleinern oder RSGADGET_ENUM_CAP >= {self.enumerated + count} setzen")
            table: Dict[Tuple[int, ...], List[Multiset]] = defaultdict(list)
            for multiset in itertools.combinations_with_replacement(range(self.q), size):
                table[self._key(multiset)].append(multiset)
            self.enumerated += count
            self._tables[size] = table
            logger.debug(f"Multimengen der Größe {size}: {count} (Schlüssel: {len(table)})")
        return self._tables[size]

    def _vector(self, plus: Multiset, minus: Multiset) -> List[int]:
        v = [0] * self.q
        for x in plus:
            v[x] += 1
        for x in minus:
            v[x] -= 1
        return v

    def candidates(self, total: int) -> Iterator[Tuple[Multiset, Multiset]]:
        """Alle (T+, T-) mit |T+| + |T-| = total, disjunkt, gleicher Schlüssel"""
        for a, b in self.size_pairs(total):
            plus_table = self._table(a)
            minus_table = self._table(b)
            for key, plus_list in plus_table.items():
                minus_list = minus_table.get(key)
                if not minus_list:
                    continue
                for i, plus in enumerate(plus_list):
                    # bei a == b nur ungeordnete Paare
                    start = i + 1 if a == b else 0
                    for minus in minus_list[start:]:
                        if not set(plus) & set(minus):
                            yield plus, minus

    def run(self, p: Fraction) -> MinDistanceReport:
        integer_p = p.denominator == 1
        best_l1: Optional[int] = None
        best_power: Optional[int] = None
        witness: Optional[List[int]] = None

        for total in range(1, self.radius_cap + 1):
            if witness is not None and (not integer_p or total >= best_power):
                break
            for plus, minus in self.candidates(total):
                vector = self._vector(plus, minus)
                if best_l1 is None:
                    best_l1 = total
                if not integer_p:
                    witness = vector
                    break
                power = norm_power(vector, p)
                if best_power is None or power < best_power:
                    best_power, witness = power, vector

        cap_bound = self.radius_cap + 1
        if integer_p:
            exact = best_power is not None and best_power <= cap_bound
            lower = best_power if exact else min(cap_bound, best_power or cap_bound)
            value = best_power if exact else None
        else:
            # ||x||_p^p >= ||x||_1 ; für nicht-ganzes p nur diese Schranke
            exact = False
            value = None
            lower = best_l1 if best_l1 is not None else cap_bound

        return MinDistanceReport(
            q=self.q, k=self.k, p=str(p), radius_cap=self.radius_cap, exact=exact,
            l1_min=best_l1, value_p_power=value, lower_bound_p_power=lower,
            witness=witness, multisets_enumerated=self.enumerated,
        )


def min_distance_bruteforce(lattice: RSLattice, p: Union[int, str, Fraction] = 1,
                            radius_cap: Optional[int] = None,
                            budgets: Budgets = DEFAULT_BUDGETS) -> MinDistanceReport:
    """
    Exaktes lambda^(p) bis radius_cap (Standard 2k) oder eine zertifizierte untere Schranke.

    Für ganzzahliges p ist das Ergebnis exakt, sobald das kleinste gefundene sum |v_i|^p
    höchstens radius_cap + 1 ist; jeder Vektor jenseits des Radius hat mindestens so viel.
    """
    p = parse_rational(p, "p")
    if p < 1:
        raise UsageError(f"p muss >= 1 sein, nicht {p}")
    cap = 2 * lattice.k if radius_cap is None else radius_cap
    report = SignedMultisetSearch(lattice, cap, budgets).run(p)
    logger.info(f"Minimaldistanz L_{{{lattice.q},{lattice.k}}}, p={p}, Radius {cap}: {report.certificate()}")
    return report


@dataclass
class BPLemmaReport:
    """Nachgespieltes Newton-Argument: keine Nicht-Null-Vektoren mit l1 < 2k"""
    q: int
    k: int
    status: str
    searched_radius: int
    witnesses: List[Dict] = field(default_factory=list)
    multisets_enumerated: int = 0

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def to_dict(self) -> Dict:
        return {
            "q": self.q,
            "k": self.k,
            "status": self.status,
            "searched_radius": self.searched_radius,
            "witnesses": self.witnesses,
            "multisets_enumerated": self.multisets_enumerated,
        }


def _replay_newton(q: int, k: int, plus: Multiset, minus: Multiset) -> Dict:
    a, b = len(plus), len(minus)
    entry = {"plus": list(plus), "minus": list(minus), "sizes": [a, b]}
    if a != b:
        # a = b mod q und a != b erzwingt a + b >= q >= 2k
        entry["newton"] = "sizes differ by a multiple of q"
        entry["contradiction"] = a + b >= 2 * k
        return entry
    m = a
    ps_plus = [sum(pow(x, j, q) for x in plus) % q for j in range(1, m + 1)]
    ps_minus = [sum(pow(x, j, q) for x in minus) % q for j in range(1, m + 1)]
    e_plus = [int(v) for v in power_sums_to_elementary(ps_plus, m, q)]
    e_minus = [int(v) for v in power_sums_to_elementary(ps_minus, m, q)]
    entry["elementary_plus"] = e_plus
    entry["elementary_minus"] = e_minus
    # gleiche e_j -> gleiches Polynom -> gleiche Multimengen, unverträglich mit Disjunktheit
    entry["contradiction"] = e_plus == e_minus and Counter(plus) != Counter(minus)
    return entry


def verify_bp_lemma(lattice: RSLattice, budgets: Budgets = DEFAULT_BUDGETS) -> BPLemmaReport:
    """Durchsucht alle l1-Normen < 2k und prüft jeden Kandidaten mit den Newton-Identitäten"""
    q, k = lattice.q, lattice.k
    if 2 * k > q:
        raise UsageError(f"k <= q/2 verlangt: k={k}, q={q}")
    search = SignedMultisetSearch(lattice, 2 * k - 1, budgets)
    witnesses = []
    for total in range(1, 2 * k):
        for plus, minus in search.candidates(total):
            entry = _replay_newton(q, k, plus, minus)
            entry["vector"] = search._vector(plus, minus)
            witnesses.append(entry)

    status = "PASS" if not witnesses else "FAIL"
    if witnesses:
        logger.warning(f"L_{{{q},{k}}}: {len(witnesses)} Vektor(en) mit l1 < {2 * k} gefunden")
    else:
        logger.info(f"L_{{{q},{k}}}: kein Nicht-Null-Vektor mit l1 < {2 * k}")
    return BPLemmaReport(q, k, status, 2 * k - 1, witnesses, search.enumerated)
