"""
Tests Potenzsummen-Varietäten
=============================

Jede Zählung wird auf kleinen Instanzen gegen ein naives Orakel
(itertools über alle Tupel bzw. Teilmengen) geprüft.
"""

import functools
import itertools
import math

import pytest

from field_algebra import ExtensionField, power_sums
from gadget_errors import CapacityError, UsageError
from lab_config import Budgets
import power_sum_varieties
from power_sum_varieties import (PowerSumCounter, PowerSumSystem, betti_bound, count_extension,
                                 count_hyperplane_section, count_points, count_points_distinct,
                                 count_projective, count_subsets, count_system, deligne_check,
                                 estimate_dimension, field_tables, hyperplane_check, jacobian_rank_scan,
                                 newton_fiber_check, point_count_report, sieve_lower_bound)


def naive_points(q, k, targets, n, forbidden=()):
    allowed = [x for x in range(q) if x not in forbidden]
    return [t for t in itertools.product(allowed, repeat=n) if power_sums(t, k - 1, q) == tuple(targets)]


def naive_subsets(q, k, targets, n):
    return [s for s in itertools.combinations(range(q), n) if power_sums(s, k - 1, q) == tuple(targets)]


def naive_extension_points(q, k, targets, n, e, forbidden=()):
    K = ExtensionField.build(q, e)
    goal = [K.scalar(t) for t in targets]
    blocked = {K.scalar(a) for a in forbidden}
    allowed = [x for x in K.elements() if x not in blocked]
    found = 0
    for point in itertools.product(allowed, repeat=n):
        sums = [K.zero] * (k - 1)
        for x in point:
            for j in range(1, k):
                sums[j - 1] = K.add(sums[j - 1], K.pow(x, j))
        found += sums == goal
    return found


def naive_projective(q, k, targets, n):
    """Normierte Vertreter in P^n, letzte Koordinate homogenisiert"""
    closure = infinity = 0
    for point in itertools.product(range(q), repeat=n + 1):
        nonzero = [v for v in point if v]
        if not nonzero or nonzero[0] != 1:
            continue
        xs, x0 = point[:-1], point[-1]
        if all((sum(pow(x, j, q) for x in xs) - t * pow(x0, j, q)) % q == 0
               for j, t in enumerate(targets, start=1)):
            closure += 1
            infinity += x0 == 0
    return closure, infinity


INSTANCES = [(5, 2, 3), (5, 3, 3), (5, 3, 4), (7, 2, 4), (7, 3, 4), (7, 4, 4)]


@pytest.mark.parametrize("q, k, h", INSTANCES)
def test_counts_match_naive_oracle(q, k, h):
    system = PowerSumSystem.from_center(q, k, h)
    points = naive_points(q, k, system.targets, h)
    assert count_points(system) == len(points)
    assert count_subsets(system) == len(naive_subsets(q, k, system.targets, h))
    distinct = [t for t in points if len(set(t)) == h]
    assert count_points_distinct(system) == len(distinct)
    assert count_hyperplane_section(system) == sum(1 for t in points if t[0] == t[1])


def test_forbidden_values_match_oracle():
    system = PowerSumSystem(7, 3, (1, 3), 3, forbidden=frozenset({0, 2}))
    assert count_points(system) == len(naive_points(7, 3, (1, 3), 3, forbidden={0, 2}))


def test_counts_invariant_under_permuted_center():
    q, k, support = 11, 3, (0, 3, 5, 9)
    counts = {(count_points(system), count_points_distinct(system), count_hyperplane_section(system))
              for system in (PowerSumSystem(q, k, power_sums(perm, k - 1, q), len(support))
                             for perm in itertools.permutations(support))}
    assert len(counts) == 1


def test_solution_set_closed_under_coordinate_permutations():
    q, k, h = 7, 3, 4
    system = PowerSumSystem.from_center(q, k, h)
    points = set(naive_points(q, k, system.targets, h))
    for point in points:
        assert all(perm in points for perm in itertools.permutations(point))
    multisets = {tuple(sorted(point)) for point in points}
    assert count_points(system) == sum(len(set(itertools.permutations(m))) for m in multisets)
    weighted = PowerSumCounter(q, k)
    assert len({weighted.count_tuples(system.targets, 3, weights=w)
                for w in itertools.permutations([2, 1, 3])}) == 1


@pytest.mark.parametrize("q, k, h", [(7, 2, 3), (7, 3, 4), (11, 3, 4)])
def test_forbidden_values_never_increase_counts(q, k, h):
    targets = PowerSumSystem.from_center(q, k, h).targets
    previous = None
    forbidden = set()
    for a in [3, 0, q - 1, 1, 5, 2, 4, 6]:
        system = PowerSumSystem(q, k, targets, h, forbidden=frozenset(forbidden))
        current = (count_points(system), count_points_distinct(system))
        if previous is not None:
            assert current[0] <= previous[0] and current[1] <= previous[1], sorted(forbidden)
        previous = current
        forbidden.add(a)


@pytest.mark.parametrize("q, k, h", [(5, 2, 3), (5, 3, 4), (7, 2, 4)])
def test_hyperplane_sections_agree_for_all_pairs(q, k, h):
    system = PowerSumSystem.from_center(q, k, h)
    points = naive_points(q, k, system.targets, h)
    y_count = count_hyperplane_section(system)
    for i, j in itertools.combinations(range(h), 2):
        assert sum(1 for t in points if t[i] == t[j]) == y_count, (i, j)


def test_count_system_dispatches_on_distinct():
    plain = PowerSumSystem.from_center(7, 2, 3)
    distinct = PowerSumSystem.from_center(7, 2, 3, distinct=True)
    assert count_system(plain) == 49
    assert count_system(distinct) == 30


@pytest.mark.parametrize("q", [5, 7, 11])
@pytest.mark.parametrize("h", [2, 3, 4])
def test_k2_closed_form(q, h):
    assert count_points(PowerSumSystem.from_center(q, 2, h)) == q ** (h - 1)


def test_golden_instance_q7_k2_h3():
    system = PowerSumSystem.from_center(7, 2, 3)
    assert system.targets == (3,)
    n_count = count_points(system)
    n_star = count_points_distinct(system)
    y_count = count_hyperplane_section(system)
    assert (n_count, n_star, y_count) == (49, 30, 7)
    assert sieve_lower_bound(n_count, y_count, 3) == 28
    assert naive_subsets(7, 2, (3,), 3) == [(0, 1, 2), (0, 4, 6), (1, 3, 6), (1, 4, 5), (2, 3, 5)]


def test_single_slice_batches_match():
    system = PowerSumSystem(7, 3, (2, 5), 4, forbidden=frozenset({1, 4}))
    narrow = Budgets(dense_cap=1)
    assert count_points(system, narrow) == count_points(system)
    assert count_hyperplane_section(system, narrow) == count_hyperplane_section(system)


@pytest.mark.parametrize("forbidden", [{0}, {1}, {0, 3}, {2, 5, 6}])
def test_orbit_and_slice_paths_match_oracle(forbidden):
    # {0}: Skalierungsbahnen, sonst jedes b einzeln
    system = PowerSumSystem(7, 3, (2, 5), 3, forbidden=frozenset(forbidden))
    points = naive_points(7, 3, (2, 5), 3, forbidden)
    assert count_points(system) == len(points)
    assert count_hyperplane_section(system) == sum(1 for t in points if t[0] == t[1])
    assert count_subsets(system) == sum(1 for t in points if t[0] < t[1] < t[2])


@pytest.mark.parametrize("q, e", [(7, 1), (3, 2), (5, 2), (3, 3)])
def test_field_tables_match_extension_field(q, e):
    K = ExtensionField.build(q, e)
    tables = field_tables(q, e)
    elements = list(K.elements())
    for x in elements:
        ix = K.index(x)
        assert int(tables.power(ix, 3)) == K.index(K.pow(x, 3))
        trace = functools.reduce(K.add, [K.pow(x, q ** i) for i in range(e)], K.zero)
        assert trace == K.scalar(int(tables.trace[ix]))
        for y in elements[:8]:
            assert int(tables.mul(ix, K.index(y))) == K.index(K.mul(x, y))


def test_multimodular_count_is_exact():
    # 5^28 Tupel > 2^62: Rekonstruktion über CRT
    system = PowerSumSystem(5, 2, (1,), 28)
    assert count_points(system) == 5 ** 27


def test_extension_count_matches_naive_oracle():
    system = PowerSumSystem.from_center(3, 3, 3)
    assert count_extension(system, 2) == naive_extension_points(3, 3, system.targets, 3, 2)


def test_extension_count_with_forbidden_value():
    system = PowerSumSystem(3, 3, (1, 2), 3, forbidden=frozenset({1}))
    assert count_extension(system, 2) == naive_extension_points(3, 3, (1, 2), 3, 2, forbidden={1})


def test_extension_k2_closed_form():
    assert count_extension(PowerSumSystem.from_center(5, 2, 3), 2) == 25 ** 2


def test_extension_degree_checked():
    with pytest.raises(UsageError):
        count_extension(PowerSumSystem.from_center(5, 2, 3), 4)


def test_state_budget_raises_capacity():
    system = PowerSumSystem.from_center(7, 3, 3)
    tight = Budgets(state_cap=10)
    with pytest.raises(CapacityError) as info:
        count_extension(system, 2, tight)
    assert info.value.required == 49
    assert "RSGADGET_STATE_CAP" in info.value.resume_hint
    with pytest.raises(CapacityError) as info:
        count_subsets(system, tight)
    assert info.value.required == 49
    assert count_points(system, tight) == len(naive_points(7, 3, system.targets, 3))


def test_work_budget_raises_capacity():
    with pytest.raises(CapacityError):
        count_points(PowerSumSystem.from_center(7, 3, 3), Budgets(work_cap=5))


def test_system_validation():
    with pytest.raises(UsageError):
        PowerSumSystem(7, 1, (), 3)
    with pytest.raises(UsageError):
        PowerSumSystem(7, 3, (1,), 3)
    with pytest.raises(UsageError):
        PowerSumSystem(9, 2, (1,), 3)
    with pytest.raises(UsageError):
        PowerSumSystem.from_center(7, 2, 8)


def test_subset_counting_only_over_base_field():
    with pytest.raises(UsageError):
        PowerSumCounter(3, 2, 2).count_subsets((0,), 2)


def test_point_count_report_golden():
    report = point_count_report(7, 2, 3, extensions=(1, 2))
    assert report.n_count == 49
    assert report.n_star == 30
    assert report.subsets == 5
    assert report.y_count == 7
    assert report.sieve_bound == 28
    assert report.sieve_holds
    assert report.extension_counts == {1: 49, 2: 2401}
    assert report.passed
    assert all(report.pass_flags.values())

    data = report.to_dict()
    assert data["N"] == "49"
    assert data["Nstar"] == "30"
    assert data["extension_counts"] == {"1": "49", "2": "2401"}

    rows = report.csv_rows()
    assert [row["e"] for row in rows] == ["1", "2"]
    assert rows[1]["count"] == "2401"
    assert rows[1]["main_term"] == "2401"


def test_bound_checks_applicability():
    inside = deligne_check(49, 7, 2, 3)
    assert inside.applicable and inside.passed
    outside = deligne_check(7, 7, 2, 2)
    assert not outside.applicable
    assert not hyperplane_check(7, 7, 2, 3).applicable
    assert hyperplane_check(49, 7, 2, 4).applicable


def test_bound_check_detects_violation():
    check = deligne_check(10 ** 6, 7, 2, 3)
    assert check.applicable
    assert not check.passed


@pytest.mark.parametrize("q", [7, 11, 13])
@pytest.mark.parametrize("k, h", [(2, 3), (2, 5), (3, 4), (3, 6)])
def test_bounds_hold_on_small_sweep(q, k, h):
    report = point_count_report(q, k, h, extensions=(1, 2))
    assert report.passed


def test_betti_bounds():
    bound = betti_bound(3, 2)
    assert bound.general == 8
    assert bound.simplified == 8
    assert bound.katz == 243
    assert bound.half_deligne_constant == 32
    assert bound.simplified_below_half_constant
    with pytest.raises(UsageError):
        betti_bound(3, 4)


def test_projective_decomposition():
    counts = count_projective(PowerSumSystem.from_center(7, 2, 3))
    assert counts.affine == 49
    assert counts.cone_at_infinity == 49
    assert counts.projective_infinity == 8
    assert counts.projective_u == 57
    assert counts.infinity_from_cone == 8
    assert counts.decomposition_holds


@pytest.mark.parametrize("q, k, h", [(5, 3, 3), (5, 2, 3), (7, 3, 4), (5, 4, 4)])
def test_projective_scan_matches_naive_closure(q, k, h):
    system = PowerSumSystem.from_center(q, k, h)
    counts = count_projective(system)
    assert (counts.projective_u, counts.projective_infinity) == naive_projective(q, k, system.targets, h)
    assert counts.decomposition_holds


def test_projective_decomposition_detects_wrong_affine_count(monkeypatch):
    real = power_sum_varieties.count_points
    monkeypatch.setattr(power_sum_varieties, "count_points", lambda system, budgets: real(system, budgets) + 1)
    counts = count_projective(PowerSumSystem.from_center(7, 2, 3))
    assert counts.projective_u == 57
    assert not counts.decomposition_holds


def test_projective_scan_budget():
    with pytest.raises(CapacityError):
        count_projective(PowerSumSystem.from_center(7, 3, 4), Budgets(scan_cap=1000))


def test_dimension_estimate():
    estimate = estimate_dimension(PowerSumSystem.from_center(7, 2, 3))
    assert estimate.expected == 2
    assert estimate.counts == {1: 49, 2: 2401}
    assert estimate.agreement == {1: True, 2: True}
    assert estimate.status == "ok"


def test_dimension_estimate_empty_variety():
    estimate = estimate_dimension(PowerSumSystem(5, 3, (1, 2), 1))
    assert estimate.status == "empty over F_q"


def test_newton_fibers_are_unique_below_q():
    report = newton_fiber_check(7, 3)
    assert report.multisets == math.comb(9, 3)
    assert report.distinct_keys == report.multisets
    assert report.passed


def test_jacobian_scan_smooth_instances():
    for q in (7, 11):
        report = jacobian_rank_scan(q, 3, 5, "X")
        assert report.singular_points == []
        assert report.rational_points > 0
        assert report.points_scanned == sum(q ** t for t in range(5))


def test_jacobian_scan_with_center():
    report = jacobian_rank_scan(7, 3, 4, "Xu")
    assert report.variety == "X_bar_{k,h,u}"
    assert report.singular_points == []


def test_jacobian_scan_finds_singular_point():
    # in Charakteristik 3 liegt (1:1:1) auf sum x = sum x^2 = 0 und hat Rang 1
    report = jacobian_rank_scan(3, 3, 3, "X")
    assert report.singular_points == [[1, 1, 1]]
    assert report.verdict == "1 singular rational point(s)"


def test_jacobian_scan_k1_is_ambient_space():
    report = jacobian_rank_scan(5, 1, 3, "X")
    assert report.rational_points == (5 ** 3 - 1) // 4


def test_jacobian_scan_budget():
    with pytest.raises(CapacityError):
        jacobian_rank_scan(7, 3, 5, "X", budgets=Budgets(scan_cap=100))
