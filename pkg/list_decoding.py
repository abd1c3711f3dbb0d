"""
Listendekodierungs-Konfigurationen
==================================

Explizite Reed-Solomon-Konfigurationen aus der Nebenklassenmenge S_2(y, h):

- Zentrum v = Auswertungen von f_y(t) = prod_{i in y} (t - a_i)
- Für jedes Element x: Codewort f_y - f_x, Grad <= h-k, Übereinstimmung mit v genau auf x
- M = Anzahl Codewörter in RS_q(h-k+1) im Hamming-Abstand <= q-h zu v
  (erschöpfend mit numpy oder über Übereinstimmungsmengen)
- Verhältnis h/(h-k+1) als exakter Bruch
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from field_algebra import Polynomial, PrimeModulus
from gadget_errors import CapacityError, UsageError, VerificationError
from lab_config import DEFAULT_BUDGETS, Budgets, parse_rational
from locally_dense_gadget import S2Set

logger = logging.getLogger(__name__)


def agreement_ratio(k: int, h: int) -> Fraction:
    return Fraction(h, h - k + 1)


def minimum_distance(q: int, k: int, h: int) -> int:
    """Mindestabstand von RS_q(h-k+1): q - (h-k+1) + 1"""
    return q + k - h


def ratio_convergence(k: int, epsilon) -> Dict:
    """|h/(h-k+1) - (1+eps)/eps| <= (1+eps)/(eps * floor(eps k)) mit h = floor((1+eps)k)"""
    eps = parse_rational(epsilon, "epsilon")
    if not 0 < eps < 1:
        raise UsageError(f"epsilon={eps} liegt nicht in (0, 1)")
    m = math.floor(eps * k)
    if m < 1:
        raise UsageError(f"floor(eps*k) = 0 für k={k}, eps={eps}")
    h = math.floor((1 + eps) * k)
    ratio = agreement_ratio(k, h)
    limit = (1 + eps) / eps
    tolerance = (1 + eps) / (eps * m)
    return {"k": k, "h": h, "ratio": ratio, "limit": limit, "deviation": abs(ratio - limit),
            "tolerance": tolerance, "holds": abs(ratio - limit) <= tolerance}


def degree_at_most(word: Sequence[int], degree: int, q: int) -> bool:
    """Interpolation durch degree+1 Punkte, dann Konsistenz auf allen q Punkten"""
    if degree < 0:
        return not any(word)
    points = list(range(min(degree + 1, q)))
    poly = Polynomial.interpolate(points, [int(word[i]) for i in points], q)
    return bool(np.array_equal(poly.evaluate_all(), np.asarray(word, dtype=np.int64) % q))


@dataclass
class ListDecodingConfig:
    q: int
    k: int
    h: int
    center: List[int]
    members: List[Tuple[int, ...]]
    codewords: List[List[int]]
    agreements: List[List[int]]
    m_count: Optional[int] = None
    m_method: Optional[str] = None
    m_exact: bool = True

    @property
    def code_dimension(self) -> int:
        return self.h - self.k + 1

    @property
    def ratio(self) -> Fraction:
        return agreement_ratio(self.k, self.h)

    @property
    def radius(self) -> int:
        return self.q - self.h

    @property
    def min_distance(self) -> int:
        return minimum_distance(self.q, self.k, self.h)

    @property
    def radius_below_min_distance(self) -> bool:
        return self.radius < self.min_distance

    def to_dict(self) -> Dict:
        return {
            "q": self.q,
            "k": self.k,
            "h": self.h,
            "center": self.center,
            "code_dimension": self.code_dimension,
            "members": [
                {"support": list(m), "codeword": c, "agreement_positions": a}
                for m, c, a in zip(self.members, self.codewords, self.agreements)
            ],
            "list_size": len(self.codewords),
            "M": self.m_count,
            "M_method": self.m_method,
            "M_exact": self.m_exact,
            "ratio": f"{self.ratio.numerator}/{self.ratio.denominator}",
            "radius": self.radius,
            "min_distance": self.min_distance,
            "radius_below_min_distance": self.radius_below_min_distance,
        }


def build_config(s2: S2Set, q: int, k: int, h: int,
                 center_support: Optional[Sequence[int]] = None) -> ListDecodingConfig:
    """Ein Codewort f_y - f_x pro Element von S_2"""
    modulus = PrimeModulus(q)
    if not s2.complete:
        raise UsageError("build_config verlangt eine vollständige S_2-Menge")
    if (s2.q, s2.k, s2.h) != (q, k, h):
        raise UsageError(f"S_2 gehört zu (q,k,h)={(s2.q, s2.k, s2.h)}, nicht {(q, k, h)}")
    support = tuple(range(h)) if center_support is None else tuple(sorted(center_support))
    f_y = Polynomial.from_roots(support, modulus)
    center = [int(v) for v in f_y.evaluate_all()]

    seen: Set[Tuple[int, ...]] = set()
    codewords, agreements = [], []
    for member in s2.members:
        f_x = Polynomial.from_roots(member, modulus)
        diff = f_y - f_x
        word = [int(v) for v in diff.evaluate_all()]
        if diff.degree > h - k or not degree_at_most(word, h - k, q):
            raise VerificationError(f"Element {member}: Grad {diff.degree} > h-k = {h - k}",
                                    witness=list(member))
        agree = [i for i in range(q) if word[i] == center[i]]
        if agree != sorted(member) or len(agree) < h:
            raise VerificationError(f"Element {member}: Übereinstimmung {agree} statt Träger",
                                    witness=list(member))
        key = tuple(word)
        if key in seen:
            raise VerificationError(f"Element {member} liefert ein doppeltes Codewort", witness=list(member))
        seen.add(key)
        codewords.append(word)
        agreements.append(agree)

    logger.info(f"Konfiguration q={q}, k={k}, h={h}: {len(codewords)} Codewörter")
    return ListDecodingConfig(q, k, h, center, list(s2.members), codewords, agreements)


def _exhaustive(center: np.ndarray, q: int, dim: int, h: int, budgets: Budgets) -> int:
    vander = np.array([[pow(i, j, q) for i in range(q)] for j in range(dim)], dtype=np.int64)
    total = q ** dim
    chunk = max(1, min(total, budgets.dense_cap // max(q, 1)))
    count = 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        coeffs = np.array(np.unravel_index(idx, (q,) * dim), dtype=np.int64).T
        words = (coeffs @ vander) % q
        count += int(((words == center).sum(axis=1) >= h).sum())
    return count


def _by_agreement_sets(center: np.ndarray, q: int, dim: int, h: int, budgets: Budgets) -> int:
    subsets = math.comb(q, h)
    if subsets > budgets.enumeration_cap:
        raise CapacityError("Übereinstimmungsmengen C(q,h)", subsets, budgets.enumeration_cap)
    found: Set[Tuple[int, ...]] = set()
    for subset in itertools.combinations(range(q), h):
        base = list(subset[:dim])
        poly = Polynomial.interpolate(base, [int(center[i]) for i in base], q)
        word = poly.evaluate_all()
        if all(word[i] == center[i] for i in subset[dim:]):
            found.add(tuple(int(v) for v in word))
    return len(found)


def count_all_close_codewords(center: Sequence[int], q: int, k: int, h: int,
                              budgets: Budgets = DEFAULT_BUDGETS,
                              at_least: int = 0) -> Tuple[int, str]:
    """Exaktes M_q(v, k, h); at_least ist die erwartete untere Schranke (|S_2|, Listenlänge)"""
    PrimeModulus(q)
    if not 1 < k <= h <= q:
        raise UsageError(f"1 < k <= h <= q verletzt: k={k}, h={h}, q={q}")
    if len(center) != q:
        raise UsageError(f"Zentrum hat Länge {len(center)} statt q={q}")
    dim = h - k + 1
    center_arr = np.asarray(center, dtype=np.int64) % q
    if q ** dim <= budgets.enumeration_cap:
        method = "exhaustive"
        m_count = _exhaustive(center_arr, q, dim, h, budgets)
    else:
        method = "agreement_sets"
        m_count = _by_agreement_sets(center_arr, q, dim, h, budgets)
    if m_count < at_least:
        raise VerificationError(f"M = {m_count} < {at_least}")
    logger.info(f"M_{q}(v, {k}, {h}) = {m_count} ({method})")
    return m_count, method


def list_decoding_report(s2: S2Set, budgets: Budgets = DEFAULT_BUDGETS,
                         center_support: Optional[Sequence[int]] = None) -> ListDecodingConfig:
    """Konfiguration bauen und M dazu zählen; jenseits der Budgets ist M = Listenlänge eine untere Schranke"""
    config = build_config(s2, s2.q, s2.k, s2.h, center_support)
    at_least = max(len(s2), len(config.codewords))
    try:
        config.m_count, config.m_method = count_all_close_codewords(
            config.center, s2.q, s2.k, s2.h, budgets, at_least=at_least)
    except CapacityError as e:
        logger.warning(f"M nicht exakt zählbar ({e}), melde Listenlänge als untere Schranke")
        config.m_count, config.m_method = at_least, "lower_bound"
        config.m_exact = False
    return config
