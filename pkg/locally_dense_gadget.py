"""
Lokal dichtes Gitter-Gadget
===========================

Parameterwahl, schlechtes Zentrum y, Nebenklassenmenge S_2(y, h) und die beiden
Klauseln der Lokal-Dicht-Definition:

- Klausel (1): lambda^(p) >= (2k)^{1/p} über das Newton-Argument (rs_lattice)
- Norm-Klausel: jedes Element von S_2 hat ||x||_p^p = h <= alpha^p * 2k, exakt rational
- Klausel (2): {0,1}^r liegt im Bild von A = (I_r, 0) mit einem Zeugen pro Muster
- Fasern: exakte Zählung, Sieb-Schranke, Partitionsidentität sum |A^{-1}(x)| = |S_2|

Asymptotische Aussagen werden nur als Verhältnis mit Regime-Flag berichtet.
Gadget-Dateien: JSON-Schema "gadget-v1", alle ganzen Zahlen als Dezimal-Strings.
"""

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import integer_nthroot

from field_algebra import PrimeModulus
from gadget_errors import CapacityError, GadgetFileError, UsageError
from job_pool import run_jobs
from lab_config import DEFAULT_BUDGETS, Budgets, parse_rational
from power_sum_varieties import PowerSumCounter
from rs_lattice import (LatticeBasis, ParityCheckMatrix, RSLattice, Syndrome, build_lattice,
                        build_parity_check, min_distance_bruteforce, syndrome, verify_bp_lemma)

logger = logging.getLogger(__name__)

SCHEMA = "gadget-v1"
COMBINATION_BLOCK = 1 << 16


# ---------------------------------------------------------------------------
# Parameter
# ---------------------------------------------------------------------------

def floor_power(q: int, exponent: Fraction) -> int:
    """floor(q^{a/b}) exakt über ganzzahlige Wurzeln"""
    exponent = Fraction(exponent)
    if exponent < 0:
        raise UsageError(f"negativer Exponent {exponent}")
    root, _ = integer_nthroot(q ** exponent.numerator, exponent.denominator)
    return int(root)


def power_at_least(value: int, q: int, exponent: Fraction) -> bool:
    """value >= q^{a/b}  <=>  value^b >= q^a"""
    exponent = Fraction(exponent)
    return value ** exponent.denominator >= q ** exponent.numerator


@dataclass(frozen=True)
class GadgetParams:
    """
    alpha = ((1+eps)/2)^{1/p} wird nur als alpha^p = (1+eps)/2 verglichen.
    mode "asymptotic": k, h, r aus den Floor-Formeln; "explicit": vom Benutzer.
    """
    p: Fraction
    epsilon: Fraction
    epsilon1: Fraction
    delta: Fraction
    q: int
    k: int
    h: int
    r: int
    mode: str
    two_k: int

    @property
    def alpha_p(self) -> Fraction:
        return (1 + self.epsilon) / 2

    @property
    def alpha(self) -> str:
        return f"(({1 + self.epsilon})/2)^(1/{self.p})"

    @property
    def ell(self) -> int:
        return 2 * self.k

    @property
    def epsilon2(self) -> Fraction:
        return self.epsilon - 2 * self.epsilon1 * (1 + self.epsilon)

    @property
    def gamma_p_supremum(self) -> Fraction:
        """Härtebereich gamma^p < 2/(1+eps), also gamma < 1/alpha"""
        return 2 / (1 + self.epsilon)

    @property
    def s2_target_exponent(self) -> Fraction:
        return self.epsilon1 * (1 + self.epsilon) * self.k

    @property
    def fiber_target_exponent(self) -> Fraction:
        return Fraction(3, 4) * self.s2_target_exponent

    @property
    def r_bound(self) -> Fraction:
        first = 2 * (self.epsilon / 2 - self.epsilon1 * (1 + self.epsilon)) * self.k - 5
        second = self.epsilon1 * (1 + self.epsilon) * self.k / 4 - 1
        return min(first, second)

    @property
    def feasibility(self) -> Dict[str, bool]:
        eps, eps1, k, h, q, r = self.epsilon, self.epsilon1, self.k, self.h, self.q, self.r
        return {
            "eps1_range": 0 < eps1 < eps / (2 * (1 + eps)) < Fraction(1, 4),
            "k_positive": k >= 1,
            "two_k_exact": self.two_k == 2 * k,
            "h_below_sqrt_q": h * h < q,
            "h_below_half_sqrt_q": 4 * h * h < q,
            "h_within_alpha": h <= self.alpha_p * 2 * k,
            "r_bound": r < self.r_bound,
            "r_below_h_minus_k": r < h - k,
            "delta_below_eps1": self.delta < eps1,
            "proof_margin": (eps / 2 - eps1 * (1 + eps)) * k - 2 >= 2,
            "epsilon2_positive": self.epsilon2 > 0,
        }

    @property
    def asymptotic_regime_reached(self) -> bool:
        return all(self.feasibility.values())

    @classmethod
    def explicit(cls, q: int, k: int, h: int, r: int, p: Union[str, Fraction, int] = 1,
                 epsilon: Union[str, Fraction, None] = None) -> 'GadgetParams':
        """Desk-Scale-Modus; eps Standard h/k - 1"""
        PrimeModulus(q)
        if not 1 < k < q:
            raise UsageError(f"1 < k < q verletzt: k={k}, q={q}")
        if not k <= h <= q:
            raise UsageError(f"k <= h <= q verletzt: k={k}, h={h}, q={q}")
        p = _check_p(p)
        eps = Fraction(h, k) - 1 if epsilon is None else parse_rational(epsilon, "epsilon")
        if not 0 < eps < 1:
            raise UsageError(f"epsilon={eps} liegt nicht in (0, 1)")
        if h > math.floor((1 + eps) * k):
            raise UsageError(
                f"h={h} > floor(alpha^p * 2k) = {math.floor((1 + eps) * k)}: verletzt die Definition von h")
        if r < 0:
            raise UsageError(f"r={r} muss >= 0 sein")
        eps1 = eps / (4 * (1 + eps))
        return cls(p, eps, eps1, eps1 / 2, q, k, h, r, "explicit", 2 * k)

    def to_dict(self) -> Dict:
        return {
            "p": str(self.p),
            "epsilon": str(self.epsilon),
            "epsilon1": str(self.epsilon1),
            "epsilon2": str(self.epsilon2),
            "delta": str(self.delta),
            "q": str(self.q),
            "k": str(self.k),
            "h": str(self.h),
            "r": str(self.r),
            "mode": self.mode,
            "two_k": str(self.two_k),
            "alpha": self.alpha,
            "alpha_p": str(self.alpha_p),
            "ell": str(self.ell),
            "gamma_p_supremum": str(self.gamma_p_supremum),
            "r_bound": str(self.r_bound),
            "feasibility": self.feasibility,
            "asymptotic_regime_reached": self.asymptotic_regime_reached,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'GadgetParams':
        if data.get("mode") == "explicit":
            return cls.explicit(int(data["q"]), int(data["k"]), int(data["h"]), int(data["r"]),
                                data["p"], data["epsilon"])
        return select_params(data["p"], data["epsilon"], int(data["q"]))


def _check_p(p) -> Fraction:
    p = parse_rational(p, "p")
    if p < 1:
        raise UsageError(f"p={p} muss >= 1 sein")
    return p


def select_params(p: Union[str, Fraction, int], epsilon: Union[str, Fraction], q: int) -> GadgetParams:
    """
    eps1 = Mitte von (0, eps/(2(1+eps))), delta = eps1/2, 2k = floor(q^eps1),
    h = floor((1+eps)k), r = floor(q^delta). Unzulässiges wird nur markiert.
    """
    PrimeModulus(q)
    p = _check_p(p)
    eps = parse_rational(epsilon, "epsilon")
    if not 0 < eps < 1:
        raise UsageError(f"epsilon={eps} liegt nicht in (0, 1)")
    eps1 = eps / (4 * (1 + eps))
    delta = eps1 / 2
    two_k = floor_power(q, eps1)
    k = two_k // 2
    h = math.floor((1 + eps) * k)
    r = floor_power(q, delta)
    params = GadgetParams(p, eps, eps1, delta, q, k, h, r, "asymptotic", two_k)
    if not params.asymptotic_regime_reached:
        failed = [name for name, ok in params.feasibility.items() if not ok]
        logger.info(f"q={q}, eps={eps}: asymptotisches Regime nicht erreicht ({', '.join(failed)})")
    return params


def feasibility_frontier(p: Union[str, Fraction, int], epsilon: Union[str, Fraction],
                         primes: Sequence[int]) -> List[Dict]:
    """Eine Zeile pro Primzahl mit k, h, r und allen Flags"""
    rows = []
    for q in primes:
        params = select_params(p, epsilon, q)
        row = {"q": q, "k": params.k, "h": params.h, "r": params.r,
               "asymptotic_regime_reached": params.asymptotic_regime_reached}
        row.update(params.feasibility)
        rows.append(row)
    return rows


def monotonicity_violations(rows: List[Dict], flags: Sequence[str]) -> List[Tuple[str, int, int]]:
    """(Flag, q_vorher, q) wo ein erfülltes Flag bei k >= 1 wieder verletzt wird"""
    violations = []
    for flag in flags:
        previous = None
        for row in rows:
            if row["k"] < 1:
                continue
            if previous is not None and previous[flag] and not row[flag]:
                violations.append((flag, previous["q"], row["q"]))
            previous = row
    return violations


# ---------------------------------------------------------------------------
# Zentrum und S_2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BadCenter:
    y: Tuple[int, ...]
    u: Syndrome

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.y) if v)

    @property
    def weight(self) -> int:
        return sum(self.y)

    @property
    def canonical(self) -> bool:
        return self.support == tuple(range(self.weight))


def bad_center(H: ParityCheckMatrix, h: int, support: Optional[Sequence[int]] = None) -> BadCenter:
    """y = (1,..,1,0,..,0) mit Gewicht h oder ein anderer binärer Vektor vom Gewicht h"""
    q = H.q.q
    chosen = tuple(range(h)) if support is None else tuple(sorted(set(int(a) for a in support)))
    if len(chosen) != h or any(not 0 <= a < q for a in chosen):
        raise UsageError(f"Zentrum braucht {h} verschiedene Positionen in [0, {q})")
    y = tuple(1 if i in chosen else 0 for i in range(q))
    return BadCenter(y, syndrome(H, y))


class SubsetReachability:
    """
    Rückwärts-Tabelle R[i][c][s]: aus avail[i:] lassen sich c Elemente mit
    Potenzsummen-Vektor s wählen. Erlaubt Aufzählung ohne Sackgassen.
    """

    def __init__(self, q: int, k: int, size: int, forbidden: Sequence[int] = (),
                 budgets: Budgets = DEFAULT_BUDGETS):
        self.q = q
        self.k = k
        self.size = size
        self.dims = k - 1
        blocked = set(forbidden)
        self.avail = [x for x in range(q) if x not in blocked]
        cells = (len(self.avail) + 1) * (size + 1) * q ** self.dims
        if cells > budgets.reachability_cap:
            raise CapacityError("Erreichbarkeitstabelle", cells, budgets.reachability_cap)
        self.shifts = [tuple(pow(x, j, q) for j in range(1, k)) for x in self.avail]
        axes = tuple(range(1, self.dims + 1))
        n = len(self.avail)
        table = np.zeros((n + 1, size + 1) + (q,) * self.dims, dtype=bool)
        table[(n, 0) + (0,) * self.dims] = True
        for i in range(n - 1, -1, -1):
            table[i] = table[i + 1]
            if size:
                table[i, 1:] |= np.roll(table[i + 1, :-1], self.shifts[i], axis=axes)
        self.table = table

    def _minus(self, s: Tuple[int, ...], shift: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple((a - b) % self.q for a, b in zip(s, shift))

    def exists(self, targets: Sequence[int]) -> bool:
        return bool(self.table[(0, self.size) + tuple(t % self.q for t in targets)])

    def iter_subsets(self, targets: Sequence[int]) -> Iterator[Tuple[int, ...]]:
        """Lexikographisch aufsteigend"""
        start = tuple(t % self.q for t in targets)
        if not self.exists(start):
            return
        n = len(self.avail)
        stack = [(0, self.size, start, ())]
        while stack:
            i, c, s, chosen = stack.pop()
            if c == 0:
                yield chosen
                continue
            if i >= n:
                continue
            skip_ok = bool(self.table[(i + 1, c) + s])
            rest = self._minus(s, self.shifts[i])
            take_ok = bool(self.table[(i + 1, c - 1) + rest])
            if skip_ok:
                stack.append((i + 1, c, s, chosen))
            if take_ok:
                stack.append((i + 1, c - 1, rest, chosen + (self.avail[i],)))

    def first(self, targets: Sequence[int]) -> Optional[Tuple[int, ...]]:
        return next(self.iter_subsets(targets), None)


@dataclass
class S2Set:
    q: int
    k: int
    h: int
    u: Tuple[int, ...]
    members: List[Tuple[int, ...]]
    complete: bool
    method: str

    def __len__(self) -> int:
        return len(self.members)

    def indicator(self, member: Sequence[int]) -> List[int]:
        chosen = set(member)
        return [1 if i in chosen else 0 for i in range(self.q)]

    def to_dict(self) -> Dict:
        return {
            "q": self.q,
            "k": self.k,
            "h": self.h,
            "u": list(self.u),
            "size": len(self.members),
            "members": [list(m) for m in self.members],
            "complete": self.complete,
            "method": self.method,
        }


def _matching_combinations(q: int, k: int, h: int, targets: Sequence[int]) -> List[Tuple[int, ...]]:
    """Alle h-Teilmengen in lexikographischer Reihenfolge, blockweise per numpy gefiltert"""
    powers = np.array([[pow(x, j, q) for j in range(1, k)] for x in range(q)], dtype=np.int64)
    goal = np.asarray(targets, dtype=np.int64) % q
    combos = itertools.combinations(range(q), h)
    members: List[Tuple[int, ...]] = []
    while True:
        block = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, COMBINATION_BLOCK)),
                            dtype=np.int64)
        if block.size == 0:
            return members
        block = block.reshape(-1, h)
        hits = ((powers[block].sum(axis=1) % q) == goal).all(axis=1)
        members.extend(tuple(int(v) for v in row) for row in block[hits])


def enumerate_s2(q: int, k: int, h: int, budgets: Budgets = DEFAULT_BUDGETS,
                 center_support: Optional[Sequence[int]] = None) -> S2Set:
    """Alle h-Teilmengen von F_q mit den Potenzsummen des Zentrums"""
    H = build_parity_check(q, k)
    center = bad_center(H, h, center_support)
    targets = center.u.u[1:]
    subsets_total = math.comb(q, h)

    if subsets_total <= budgets.enumeration_cap:
        method = "combinations"
        members = _matching_combinations(q, k, h, targets)
    else:
        method = "reachability"
        expected = PowerSumCounter(q, k, 1, budgets).count_subsets(targets, h)
        if expected > budgets.enumeration_cap:
            raise CapacityError("S_2-Elemente", expected, budgets.enumeration_cap,
                                resume_hint="nur Zählung (count) möglich, oder RSGADGET_ENUM_CAP erhöhen")
        members = list(SubsetReachability(q, k, h, (), budgets).iter_subsets(targets))

    s2 = S2Set(q, k, h, center.u.u, members, True, method)
    for member in members:
        x = s2.indicator(member)
        if syndrome(H, x).u != center.u.u or sum(x) != h:
            raise UsageError(f"Element {member} verletzt H x = u")
    if center.support not in set(members):
        raise UsageError(f"Träger des Zentrums {center.support} fehlt in S_2")
    logger.info(f"S_2(y, {h}) für q={q}, k={k}: {len(members)} Elemente ({method})")
    return s2


# ---------------------------------------------------------------------------
# Gadget und Zertifikate
# ---------------------------------------------------------------------------

@dataclass
class LocallyDenseGadget:
    lattice: RSLattice
    ell: int
    shift: BadCenter
    r: int
    params: GadgetParams
    s2: S2Set
    certificate: Dict = field(default_factory=dict)

    @property
    def projection(self) -> Dict[str, int]:
        # A = (I_r, 0_{r, q-r}) ist durch r und q festgelegt
        return {"r": self.r, "q": self.lattice.q}


def certify_clause_one(lattice: RSLattice, budgets: Budgets = DEFAULT_BUDGETS) -> Dict:
    """lambda^(1) >= 2k, daraus lambda^(p)^p >= ||x||_1 >= 2k für jedes p >= 1"""
    if 2 * lattice.k <= lattice.q:
        report = verify_bp_lemma(lattice, budgets)
        return {"method": "newton_replay", "status": report.status, "ell": 2 * lattice.k,
                "report": report.to_dict()}
    search = min_distance_bruteforce(lattice, 1, 2 * lattice.k - 1, budgets)
    status = "PASS" if search.l1_min is None else "FAIL"
    return {"method": "signed_multiset_search", "status": status, "ell": 2 * lattice.k,
            "report": search.to_dict()}


def verify_local_density(gadget: LocallyDenseGadget, params: GadgetParams,
                         budgets: Budgets = DEFAULT_BUDGETS) -> Dict:
    """Klausel (1) und Norm-Klausel; |S_2| gegen q^{eps1(1+eps)k} nur im Regime behauptet"""
    clause_one = certify_clause_one(gadget.lattice, budgets)
    bound = params.alpha_p * 2 * params.k

    witness = None
    if not gadget.s2.members:
        witness = {"empty_s2": []}
    else:
        for member in gadget.s2.members:
            norm_p = len(member)  # binärer Vektor: ||x||_p^p = Gewicht
            if norm_p > bound:
                witness = {"member": list(member), "norm_p_power": norm_p}
                break
    norm_status = "PASS" if witness is None else "FAIL"

    meets = power_at_least(len(gadget.s2), params.q, params.s2_target_exponent)
    asserted = params.asymptotic_regime_reached
    target_status = "FAIL" if asserted and not meets else "PASS"

    certificate = {
        "clause_one": clause_one,
        "norm_clause": {
            "status": norm_status,
            "h": params.h,
            "alpha_p_times_ell": str(bound),
            "witness": witness,
        },
        "s2_size": len(gadget.s2),
        "s2_target": {
            "exponent": str(params.s2_target_exponent),
            "meets_target": meets,
            "asserted": asserted,
            "status": target_status,
        },
    }
    passed = clause_one["status"] == "PASS" and norm_status == "PASS" and target_status == "PASS"
    certificate["status"] = "PASS" if passed else "FAILED"
    return certificate


@dataclass(frozen=True)
class FiberTask:
    q: int
    k: int
    h: int
    r: int
    pattern: Tuple[int, ...]
    targets: Tuple[int, ...]
    u: Tuple[int, ...]
    budgets: Budgets


def check_fiber(task: FiberTask) -> Dict:
    """Zählt A^{-1}(x), sucht einen Zeugen, prüft ihn per Syndrom und wertet das Sieb aus"""
    q, k, h, r = task.q, task.k, task.h, task.r
    prefix = [i for i, bit in enumerate(task.pattern) if bit]
    t = len(prefix)
    size = h - t
    forbidden = tuple(range(r))
    entry = {"pattern": list(task.pattern), "weight": t}
    if size < 0:
        entry.update({"fiber_size": 0, "z_double_star": 0, "witness": None,
                      "witness_valid": False, "sieve_bound": 0, "sieve_holds": True})
        return entry

    shifted = tuple((task.targets[j - 1] - sum(pow(a, j, q) for a in prefix)) % q for j in range(1, k))
    counter = PowerSumCounter(q, k, 1, task.budgets)
    fiber = counter.count_subsets(shifted, size, forbidden)
    z_double_star = math.factorial(size) * fiber

    witness = None
    valid = False
    if fiber > 0:
        completion = SubsetReachability(q, k, size, forbidden, task.budgets).first(shifted)
        witness = sorted(prefix + list(completion))
        H = build_parity_check(q, k)
        x = [1 if i in set(witness) else 0 for i in range(q)]
        valid = syndrome(H, x).u == task.u and sum(x) == h

    # |Z**| >= |Z*| - (h-t) * sum_e |Z*_{x,1,e}|
    z_star = math.factorial(size) * counter.count_subsets(shifted, size)
    removed = 0
    if size >= 1:
        for a_e in range(r):
            rest = tuple((shifted[j - 1] - pow(a_e, j, q)) % q for j in range(1, k))
            removed += math.factorial(size - 1) * counter.count_subsets(rest, size - 1, (a_e,))
    sieve = z_star - size * removed

    entry.update({
        "fiber_size": fiber,
        "z_star": z_star,
        "z_double_star": z_double_star,
        "witness": witness,
        "witness_valid": valid,
        "sieve_bound": sieve,
        "sieve_holds": z_double_star >= sieve,
    })
    return entry


def _check_r(r: int, h: int, k: int, budgets: Budgets):
    if r < 0 or r > h - k:
        raise UsageError(f"r={r} verletzt 0 <= r <= h-k = {h - k} (Projektionsbereich r < h-k)")
    if r > budgets.fiber_pattern_cap_r:
        raise UsageError(f"r={r} > {budgets.fiber_pattern_cap_r}: 2^r Fasern nicht prüfbar")


def verify_projection(gadget: LocallyDenseGadget, r: int, budgets: Budgets = DEFAULT_BUDGETS,
                      jobs: int = 1) -> Dict:
    """Klausel (2): jedes Muster in {0,1}^r (lexikographisch) hat einen Faserzeugen"""
    q, k, h = gadget.lattice.q, gadget.lattice.k, gadget.s2.h
    _check_r(r, h, k, budgets)
    targets = tuple(gadget.shift.u.u[1:])
    tasks = [FiberTask(q, k, h, r, pattern, targets, gadget.shift.u.u, budgets)
             for pattern in itertools.product((0, 1), repeat=r)]
    fibers = run_jobs(check_fiber, tasks, jobs)

    total = sum(f["fiber_size"] for f in fibers)
    empty = [f["pattern"] for f in fibers if f["fiber_size"] == 0]
    invalid = [f["pattern"] for f in fibers if f["fiber_size"] > 0 and not f["witness_valid"]]
    partition_ok = total == len(gadget.s2) if gadget.s2.complete else None

    fiber_target = gadget.params.fiber_target_exponent
    for f in fibers:
        f["meets_fiber_target"] = power_at_least(f["fiber_size"], q, fiber_target)

    passed = not empty and not invalid and partition_ok is not False
    if empty:
        logger.warning(f"Leere Faser(n) für Muster {empty}")
    return {
        "status": "PASS" if passed else "FAILED",
        "r": r,
        "r_below_h_minus_k": r < h - k,
        "patterns": len(fibers),
        "fibers": fibers,
        "fiber_total": total,
        "partition_holds": partition_ok,
        "empty_patterns": empty,
        "invalid_witnesses": invalid,
        "fiber_target_exponent": str(fiber_target),
        "fiber_target_asserted": gadget.params.asymptotic_regime_reached,
    }


def build_gadget(params: GadgetParams, budgets: Budgets = DEFAULT_BUDGETS, jobs: int = 1,
                 center_support: Optional[Sequence[int]] = None) -> LocallyDenseGadget:
    """Konstruiert und zertifiziert das Gadget (Klauselfehler landen im Zertifikat)"""
    q, k, h, r = params.q, params.k, params.h, params.r
    if k < 2:
        raise UsageError(f"k={k}: kein Gadget konstruierbar (asymptotisches Regime nicht erreicht)")
    _check_r(r, h, k, budgets)
    lattice = build_lattice(q, k)
    center = bad_center(lattice.parity_check, h, center_support)
    s2 = enumerate_s2(q, k, h, budgets, center.support)
    gadget = LocallyDenseGadget(lattice, 2 * k, center, r, params, s2)

    density = verify_local_density(gadget, params, budgets)
    projection = verify_projection(gadget, r, budgets, jobs)
    passed = density["status"] == "PASS" and projection["status"] == "PASS"
    gadget.certificate = {
        "local_density": density,
        "projection": projection,
        "canonical_center": center.canonical,
        "status": "PASS" if passed else "FAILED",
    }
    logger.info(f"Gadget q={q}, k={k}, h={h}, r={r}: {gadget.certificate['status']}")
    return gadget


# ---------------------------------------------------------------------------
# Serialisierung
# ---------------------------------------------------------------------------

def stringify(value):
    """Ganze Zahlen und Brüche als Dezimal-Strings, bools bleiben bools"""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer, Fraction)):
        return str(value)
    if isinstance(value, dict):
        return {str(k): stringify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [stringify(v) for v in value]
    return value


def gadget_document(gadget: LocallyDenseGadget) -> Dict:
    lattice = gadget.lattice
    return stringify({
        "schema": SCHEMA,
        "q": lattice.q,
        "k": lattice.k,
        "ell": gadget.ell,
        "determinant": lattice.determinant,
        "basis": lattice.basis.rows(),
        "center": {"support": list(gadget.shift.support), "u": list(gadget.shift.u.u)},
        "projection": gadget.projection,
        "params": gadget.params.to_dict(),
        "s2": gadget.s2.to_dict(),
        "certificate": gadget.certificate,
    })


def serialize_gadget(gadget: LocallyDenseGadget, path: Union[str, Path]) -> Path:
    if not gadget.certificate:
        raise UsageError("Gadget ohne Zertifikat kann nicht geschrieben werden")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(gadget_document(gadget), f, indent=2, ensure_ascii=False, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise GadgetFileError(str(path), f"nicht schreibbar ({e})") from e
    return path


@dataclass
class LoadedGadget:
    q: int
    k: int
    ell: int
    determinant: int
    basis: LatticeBasis
    center_support: Tuple[int, ...]
    r: int
    params: Dict
    certificate: Dict
    document: Dict


def load_gadget(path: Union[str, Path]) -> LoadedGadget:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            doc = json.load(f)
    except OSError as e:
        raise GadgetFileError(str(path), f"nicht lesbar ({e})") from e
    except json.JSONDecodeError as e:
        raise GadgetFileError(str(path), f"kein gültiges JSON ({e})") from e
    if doc.get("schema") != SCHEMA:
        raise GadgetFileError(str(path), f"Schema '{doc.get('schema')}' statt '{SCHEMA}'")
    try:
        rows = [[int(v) for v in row] for row in doc["basis"]]
        n = len(rows)
        columns = tuple(tuple(rows[r][c] for r in range(n)) for c in range(n))
        return LoadedGadget(
            q=int(doc["q"]), k=int(doc["k"]), ell=int(doc["ell"]),
            determinant=int(doc["determinant"]), basis=LatticeBasis(n, columns),
            center_support=tuple(int(a) for a in doc["center"]["support"]),
            r=int(doc["projection"]["r"]), params=doc["params"],
            certificate=doc["certificate"], document=doc,
        )
    except (KeyError, ValueError, TypeError, IndexError) as e:
        raise GadgetFileError(str(path), f"unvollständiges Gadget ({e})") from e


def reverify_gadget(loaded: LoadedGadget, budgets: Budgets = DEFAULT_BUDGETS, jobs: int = 1) -> Dict:
    """Basis-Integrität prüfen und alle exakten Klauseln neu rechnen"""
    q, k = loaded.q, loaded.k
    H = build_parity_check(q, k)
    in_kernel = all(syndrome(H, col).is_zero() for col in loaded.basis.columns)
    det = abs(int(loaded.basis.matrix().det()))
    canonical = build_lattice(q, k)
    integrity = {
        "columns_in_kernel": in_kernel,
        "determinant_matches": det == q ** k == loaded.determinant,
        "canonical_basis": loaded.basis.columns == canonical.basis.columns,
        "ell_matches": loaded.ell == 2 * k,
    }

    params = GadgetParams.from_dict(loaded.params)
    rebuilt = build_gadget(params, budgets, jobs, loaded.center_support)
    fresh = stringify(rebuilt.certificate)
    matches = fresh == loaded.certificate
    mismatches = sorted(key for key in set(fresh) | set(loaded.certificate)
                        if fresh.get(key) != loaded.certificate.get(key))
    passed = all(integrity.values()) and matches and fresh["status"] == "PASS"
    return {
        "status": "PASS" if passed else "FAILED",
        "integrity": integrity,
        "certificate_matches": matches,
        "mismatched_sections": mismatches,
        "certificate": fresh,
    }
